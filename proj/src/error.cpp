#include "specprior/error.hpp"

namespace specprior {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::NonHermitianInput: return "NonHermitianInput";
        case ErrorKind::NoConvergence: return "NoConvergence";
        case ErrorKind::SingularSystem: return "SingularSystem";
        case ErrorKind::DomainError: return "DomainError";
        case ErrorKind::LengthMismatch: return "LengthMismatch";
        case ErrorKind::InvalidSize: return "InvalidSize";
        case ErrorKind::TooLarge: return "TooLarge";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::NonHermitian: return "NonHermitian";
        case ErrorKind::ShapeMismatch: return "ShapeMismatch";
        case ErrorKind::UnsupportedFamily: return "UnsupportedFamily";
        case ErrorKind::InvalidProbability: return "InvalidProbability";
        case ErrorKind::ZeroNorm: return "ZeroNorm";
        case ErrorKind::EmptySpectrum: return "EmptySpectrum";
        case ErrorKind::MixedAnsatz: return "MixedAnsatz";
        case ErrorKind::TooFewPoints: return "TooFewPoints";
        case ErrorKind::KTooLarge: return "KTooLarge";
        case ErrorKind::SingleCluster: return "SingleCluster";
        case ErrorKind::TooFewValues: return "TooFewValues";
        case ErrorKind::EmptyCluster: return "EmptyCluster";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::SingularShift: return "SingularShift";
        case ErrorKind::InvalidWindow: return "InvalidWindow";
        case ErrorKind::WindowViolation: return "WindowViolation";
        case ErrorKind::TooShort: return "TooShort";
        case ErrorKind::DegenerateLabels: return "DegenerateLabels";
        case ErrorKind::ConfigError: return "ConfigError";
        case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

}  // namespace specprior
