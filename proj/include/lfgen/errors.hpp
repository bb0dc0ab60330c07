#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lfgen {

enum class ErrorKind {
    OutOfRange,
    DegenerateEqual,
    NotSupercritical,
    InvalidDepth,
    InvalidTree,
    SyntaxError,
    NotUltrametric,
    NonIntegerDepth,
    EmptyMask,
    KTooLarge,
    MTooLarge,
    StateSpaceTooLarge,
    QuadratureNonConvergence,
    DegenerateBins,
    NoFeasiblePoint,
    SimulationOverflow,
    FormatError,
};

const char* to_string(ErrorKind kind);

/// Base exception of the library. Every failure carries a machine-checkable kind.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Newick syntax error with the byte offset where parsing stopped.
class SyntaxError : public Error {
public:
    SyntaxError(std::size_t position, const std::string& what)
        : Error(ErrorKind::SyntaxError, what + " at position " + std::to_string(position)),
          position_(position) {}

    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

} // namespace lfgen
