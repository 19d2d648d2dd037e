#pragma once

// Inverse power iteration on H - sI, exact or through a Chebyshev
// surrogate of 1/x applied on the spectrum.

#include <vector>

#include "specprior/simulator.hpp"

namespace specprior {

struct RefinementResult {
    double eigenvalue_estimate = 0;
    Statevector final_state;
    int iterations = 0;
    double residual = 0;          // |(H - estimate) psi|
    std::vector<double> history;  // <H> after each iteration
    double initial_energy = 0;
    bool converged = false;

    /// Iterations until |<H> - target| < eps; 0 if v0 already qualifies, -1 if never.
    int iterations_to_accuracy(double target, double eps) const;
};

struct RefineOptions {
    double tol = 1e-10;
    int max_iters = 500;
};

/// Dense operator and its eigendecomposition (used for the singular-shift
/// check and spectral bounds).
struct DenseHamiltonian {
    ComplexMatrix matrix;
    HermitianEigen eig;

    static DenseHamiltonian from(const PauliSum& h);
    static DenseHamiltonian from(const ComplexMatrix& m);
};

inline constexpr double kSingularShiftTol = 1e-12;

RefinementResult inverse_power_iterate(const DenseHamiltonian& h, double s, const Statevector& v0,
                                       const RefineOptions& opts = {});

struct ChebyshevInverse {
    int degree = 0;
    double a = 0, b = 0;
    std::vector<double> coeffs;  // Chebyshev basis on [a, b]
    double epsilon = 0;          // max |p(x) - 1/x| over a <= |x| <= b

    double eval_positive(double x) const;
    /// Odd extension sign(x) q(|x|).
    double operator()(double x) const;
};

inline constexpr double kMinWindowRatio = 1e-4;

ChebyshevInverse chebyshev_inverse_coeffs(int degree, double a, double b);

struct PolyWindow {
    double a;
    double b;
};

/// [0.95 min|lambda - s|, 1.05 max|lambda - s|].
PolyWindow default_window(const HermitianEigen& eig, double s);

RefinementResult polynomial_inverse_power(const DenseHamiltonian& h, double s, const Statevector& v0, int degree,
                                          const RefineOptions& opts = {},
                                          const std::optional<PolyWindow>& window = std::nullopt);

Statevector reconstruct_state_from_params(const AnsatzCircuit& ansatz, const Eigen::VectorXd& theta);

/// Per slot: medians of cos and sin across rows, re-projected by atan2 into [0, 2pi).
Eigen::VectorXd circular_median(const RealMatrix& thetas);

}  // namespace specprior
