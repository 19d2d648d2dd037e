#include "specprior/refine.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "specprior/clustering.hpp"
#include "specprior/ite.hpp"

namespace specprior {

namespace {

double rayleigh(const ComplexMatrix& h, const Statevector& v) { return v.dot(h * v).real(); }

RefinementResult power_loop(const ComplexMatrix& h, const Statevector& v0, const RefineOptions& opts,
                            const std::function<Statevector(const Statevector&)>& step) {
    if (opts.max_iters < 1 || !(opts.tol > 0)) throw Error(ErrorKind::InvalidArgument, "bad refinement options");
    const double n0 = v0.norm();
    if (!(n0 > 0)) throw Error(ErrorKind::ZeroNorm, "initial vector is zero");
    RefinementResult res;
    Statevector v = v0 / n0;
    double prev = rayleigh(h, v);
    res.initial_energy = prev;
    for (int it = 1; it <= opts.max_iters; ++it) {
        Statevector w = step(v);
        const double nw = w.norm();
        if (!(nw > 0) || !std::isfinite(nw)) throw Error(ErrorKind::ZeroNorm, "iterate vanished");
        v = w / nw;
        const double e = rayleigh(h, v);
        res.history.push_back(e);
        res.iterations = it;
        const bool done = std::abs(e - prev) < opts.tol;
        prev = e;
        if (done) {
            res.converged = true;
            break;
        }
    }
    res.eigenvalue_estimate = prev;
    res.final_state = v;
    res.residual = (h * v - prev * v).norm();
    return res;
}

}  // namespace

int RefinementResult::iterations_to_accuracy(double target, double eps) const {
    if (std::abs(initial_energy - target) < eps) return 0;
    for (std::size_t i = 0; i < history.size(); ++i) {
        if (std::abs(history[i] - target) < eps) return static_cast<int>(i + 1);
    }
    return -1;
}

DenseHamiltonian DenseHamiltonian::from(const PauliSum& h) { return from(to_dense(h)); }

DenseHamiltonian DenseHamiltonian::from(const ComplexMatrix& m) {
    return {m, hermitian_eigendecomposition(m)};
}

RefinementResult inverse_power_iterate(const DenseHamiltonian& h, double s, const Statevector& v0,
                                       const RefineOptions& opts) {
    if (v0.size() != h.matrix.rows()) throw Error(ErrorKind::ShapeMismatch, "v0 dimension mismatch");
    if ((h.eig.values.array() - s).abs().minCoeff() < kSingularShiftTol) {
        throw Error(ErrorKind::SingularShift, "shift coincides with an eigenvalue");
    }
    ComplexMatrix shifted = h.matrix;
    shifted.diagonal().array() -= s;
    const Eigen::PartialPivLU<ComplexMatrix> lu(shifted);
    return power_loop(h.matrix, v0, opts, [&](const Statevector& v) { return Statevector(lu.solve(v)); });
}

double ChebyshevInverse::eval_positive(double x) const {
    const double t = (2 * x - a - b) / (b - a);
    double b1 = 0, b2 = 0;
    for (int k = static_cast<int>(coeffs.size()) - 1; k >= 1; --k) {
        const double b0 = coeffs[static_cast<std::size_t>(k)] + 2 * t * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    return coeffs[0] + t * b1 - b2;
}

double ChebyshevInverse::operator()(double x) const {
    if (x == 0) return 0;
    return x > 0 ? eval_positive(x) : -eval_positive(-x);
}

ChebyshevInverse chebyshev_inverse_coeffs(int degree, double a, double b) {
    if (degree < 1 || degree % 2 == 0) throw Error(ErrorKind::InvalidArgument, "degree must be odd and positive");
    if (!(a > 0) || !(a < b) || a / b < kMinWindowRatio) {
        throw Error(ErrorKind::InvalidWindow, "window needs 0 < a < b and a/b >= 1e-4");
    }
    ChebyshevInverse p;
    p.degree = degree;
    p.a = a;
    p.b = b;
    const int nodes = degree + 1;
    p.coeffs.assign(static_cast<std::size_t>(nodes), 0.0);
    for (int j = 0; j < nodes; ++j) {
        const double phi = std::numbers::pi * (j + 0.5) / nodes;
        const double x = 0.5 * (a + b) + 0.5 * (b - a) * std::cos(phi);
        const double fx = 1.0 / x;
        for (int k = 0; k < nodes; ++k) p.coeffs[static_cast<std::size_t>(k)] += fx * std::cos(k * phi);
    }
    for (auto& c : p.coeffs) c *= 2.0 / nodes;
    p.coeffs[0] *= 0.5;

    constexpr int scan = 10000;
    for (int i = 0; i <= scan; ++i) {
        const double x = a + (b - a) * i / scan;
        p.epsilon = std::max(p.epsilon, std::abs(p.eval_positive(x) - 1.0 / x));
    }
    return p;
}

PolyWindow default_window(const HermitianEigen& eig, double s) {
    const RealVector d = (eig.values.array() - s).abs();
    return {0.95 * d.minCoeff(), 1.05 * d.maxCoeff()};
}

RefinementResult polynomial_inverse_power(const DenseHamiltonian& h, double s, const Statevector& v0, int degree,
                                          const RefineOptions& opts, const std::optional<PolyWindow>& window) {
    if (v0.size() != h.matrix.rows()) throw Error(ErrorKind::ShapeMismatch, "v0 dimension mismatch");
    const PolyWindow w = window ? *window : default_window(h.eig, s);
    const double gap = (h.eig.values.array() - s).abs().minCoeff();
    if (gap < w.a) throw Error(ErrorKind::WindowViolation, "nearest eigenvalue lies inside the excluded window");
    const ChebyshevInverse p = chebyshev_inverse_coeffs(degree, w.a, w.b);
    const auto f = [&](double lambda) { return p(lambda - s); };
    return power_loop(h.matrix, v0, opts,
                      [&](const Statevector& v) { return apply_matrix_function(h.eig, f, Statevector(v)); });
}

Statevector reconstruct_state_from_params(const AnsatzCircuit& ansatz, const Eigen::VectorXd& theta) {
    return apply_circuit(ansatz, theta, zero_state(ansatz.n_qubits));
}

Eigen::VectorXd circular_median(const RealMatrix& thetas) {
    if (thetas.rows() == 0) throw Error(ErrorKind::TooFewValues, "no parameter vectors");
    Eigen::VectorXd out(thetas.cols());
    for (Eigen::Index k = 0; k < thetas.cols(); ++k) {
        std::vector<double> c, s;
        for (Eigen::Index r = 0; r < thetas.rows(); ++r) {
            c.push_back(std::cos(thetas(r, k)));
            s.push_back(std::sin(thetas(r, k)));
        }
        out(k) = std::atan2(median(s), median(c));
    }
    return wrap_angles(out);
}

}  // namespace specprior
