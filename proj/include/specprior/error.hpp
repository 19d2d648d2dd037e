#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace specprior {

enum class ErrorKind {
    InvalidArgument,
    NonHermitianInput,
    NoConvergence,
    SingularSystem,
    DomainError,
    LengthMismatch,
    InvalidSize,
    TooLarge,
    ParseError,
    NonHermitian,
    ShapeMismatch,
    UnsupportedFamily,
    InvalidProbability,
    ZeroNorm,
    EmptySpectrum,
    MixedAnsatz,
    TooFewPoints,
    KTooLarge,
    SingleCluster,
    TooFewValues,
    EmptyCluster,
    DimensionMismatch,
    SingularShift,
    InvalidWindow,
    WindowViolation,
    TooShort,
    DegenerateLabels,
    ConfigError,
    IoError,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Single exception type for the library; `kind()` distinguishes failure modes.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace specprior
