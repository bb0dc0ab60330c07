#include "lfgen/cli.hpp"

int main(int argc, char** argv)
{
    return lfgen::cli::dispatch(argc, argv);
}
