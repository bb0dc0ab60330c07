#include "lfgen/errors.hpp"

namespace lfgen {

const char* to_string(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::DegenerateEqual: return "DegenerateEqual";
    case ErrorKind::NotSupercritical: return "NotSupercritical";
    case ErrorKind::InvalidDepth: return "InvalidDepth";
    case ErrorKind::InvalidTree: return "InvalidTree";
    case ErrorKind::SyntaxError: return "SyntaxError";
    case ErrorKind::NotUltrametric: return "NotUltrametric";
    case ErrorKind::NonIntegerDepth: return "NonIntegerDepth";
    case ErrorKind::EmptyMask: return "EmptyMask";
    case ErrorKind::KTooLarge: return "KTooLarge";
    case ErrorKind::MTooLarge: return "MTooLarge";
    case ErrorKind::StateSpaceTooLarge: return "StateSpaceTooLarge";
    case ErrorKind::QuadratureNonConvergence: return "QuadratureNonConvergence";
    case ErrorKind::DegenerateBins: return "DegenerateBins";
    case ErrorKind::NoFeasiblePoint: return "NoFeasiblePoint";
    case ErrorKind::SimulationOverflow: return "SimulationOverflow";
    case ErrorKind::FormatError: return "FormatError";
    }
    return "Unknown";
}

} // namespace lfgen
