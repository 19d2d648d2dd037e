#pragma once

// Dense Hermitian linear algebra on Eigen storage: cyclic Jacobi eigensolver,
// ridge-regularized solves and spectral matrix functions.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <type_traits>
#include <vector>

#include "specprior/error.hpp"

namespace specprior {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

struct NumericsTolerances {
    double hermitian_check = 1e-10;   // |M - M^H| entrywise
    double offdiag_relative = 1e-12;  // Jacobi stop: ||offdiag||_F < tol * ||M||_F
    int max_sweeps = 100;
    double max_condition = 1e14;      // solve_regularized
    double singular_eigenvalue = 1e-12;
    double default_lambda_reg = 1e-6;
};

inline const NumericsTolerances kDefaultTolerances{};

inline constexpr int kMaxDenseDim = 1 << 13;

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Eigenvalues ascending; column i of `vectors` belongs to `values[i]`.
template <typename Scalar>
struct EigenDecomposition {
    RealVector values;
    DenseMatrix<Scalar> vectors;

    Eigen::Index dim() const { return values.size(); }
    DenseMatrix<Scalar> reconstruct() const {
        return vectors * values.template cast<Scalar>().asDiagonal() * vectors.adjoint();
    }
};

using HermitianEigen = EigenDecomposition<Complex>;

namespace detail {

template <typename Scalar>
double real_part(const Scalar& x) {
    if constexpr (std::is_floating_point_v<Scalar>) {
        return x;
    } else {
        return x.real();
    }
}

template <typename Scalar>
Scalar conj_of(const Scalar& x) {
    if constexpr (std::is_floating_point_v<Scalar>) {
        return x;
    } else {
        return std::conj(x);
    }
}

template <typename Scalar>
Scalar phase_of(const Scalar& x, double magnitude) {
    if constexpr (std::is_floating_point_v<Scalar>) {
        return x >= 0 ? Scalar(1) : Scalar(-1);
    } else {
        return x / magnitude;
    }
}

}  // namespace detail

template <typename Derived>
double hermitian_defect(const Eigen::MatrixBase<Derived>& m) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

/// Cyclic Jacobi: each pivot (p,q) is annihilated by a unitary built from the
/// phase of m(p,q) followed by a real Givens rotation.
template <typename Derived>
EigenDecomposition<typename Derived::Scalar> hermitian_eigendecomposition(
    const Eigen::MatrixBase<Derived>& m, const NumericsTolerances& tol = kDefaultTolerances) {
    using Scalar = typename Derived::Scalar;
    const Eigen::Index n = m.rows();
    if (n != m.cols() || n == 0) {
        throw Error(ErrorKind::ShapeMismatch, "eigendecomposition needs a nonempty square matrix");
    }
    if (n > kMaxDenseDim) {
        throw Error(ErrorKind::TooLarge, "matrix dimension exceeds dense cap");
    }
    if (hermitian_defect(m) > tol.hermitian_check) {
        throw Error(ErrorKind::NonHermitianInput, "matrix is not Hermitian");
    }

    DenseMatrix<Scalar> a = (m + m.adjoint()) / Scalar(2);
    DenseMatrix<Scalar> v = DenseMatrix<Scalar>::Identity(n, n);
    const double scale = a.norm();
    const double target = tol.offdiag_relative * (scale > 0 ? scale : 1.0);

    auto offdiag_norm = [&] {
        double sum = 0;
        for (Eigen::Index j = 0; j < n; ++j) {
            for (Eigen::Index i = 0; i < n; ++i) {
                if (i != j) sum += std::norm(a(i, j));
            }
        }
        return std::sqrt(sum);
    };

    bool converged = offdiag_norm() < target;
    for (int sweep = 0; sweep < tol.max_sweeps && !converged; ++sweep) {
        for (Eigen::Index p = 0; p < n - 1; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double r = std::abs(a(p, q));
                if (r == 0.0) continue;
                const Scalar phase = detail::phase_of(a(p, q), r);
                const double app = detail::real_part(a(p, p));
                const double aqq = detail::real_part(a(q, q));
                const double theta = (aqq - app) / (2.0 * r);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(1.0 + theta * theta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                const Scalar conj_phase = detail::conj_of(phase);

                // Columns: A <- A J with J = [[c, s], [-s e^{-i phi}, c e^{-i phi}]].
                for (Eigen::Index k = 0; k < n; ++k) {
                    const Scalar akp = a(k, p);
                    const Scalar akq = a(k, q) * conj_phase;
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                    const Scalar vkp = v(k, p);
                    const Scalar vkq = v(k, q) * conj_phase;
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
                // Rows: A <- J^H A.
                for (Eigen::Index k = 0; k < n; ++k) {
                    const Scalar apk = a(p, k);
                    const Scalar aqk = a(q, k) * phase;
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                a(p, q) = Scalar(0);
                a(q, p) = Scalar(0);
                a(p, p) = Scalar(detail::real_part(a(p, p)));
                a(q, q) = Scalar(detail::real_part(a(q, q)));
            }
        }
        converged = offdiag_norm() < target;
    }
    if (!converged) {
        throw Error(ErrorKind::NoConvergence, "Jacobi sweeps exhausted before off-diagonal norm fell below tolerance");
    }

    std::vector<Eigen::Index> order(static_cast<size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) {
        return detail::real_part(a(x, x)) < detail::real_part(a(y, y));
    });

    EigenDecomposition<Scalar> out;
    out.values.resize(n);
    out.vectors.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index src = order[static_cast<size_t>(i)];
        out.values(i) = detail::real_part(a(src, src));
        out.vectors.col(i) = v.col(src);
    }
    return out;
}

/// Solves (A + lambda_reg I) x = b for symmetric positive semidefinite A.
RealVector solve_regularized(const RealMatrix& a, const RealVector& b, double lambda_reg,
                             const NumericsTolerances& tol = kDefaultTolerances);

/// U f(Λ) U^H on a precomputed decomposition. Throws DomainError when f is
/// not finite at some eigenvalue.
template <typename Scalar, typename F>
DenseMatrix<Scalar> hermitian_matrix_function(const EigenDecomposition<Scalar>& eig, F&& f) {
    RealVector fx(eig.dim());
    for (Eigen::Index i = 0; i < eig.dim(); ++i) {
        fx(i) = f(eig.values(i));
        if (!std::isfinite(fx(i))) {
            throw Error(ErrorKind::DomainError, "function undefined at eigenvalue " + std::to_string(eig.values(i)));
        }
    }
    return eig.vectors * fx.template cast<Scalar>().asDiagonal() * eig.vectors.adjoint();
}

template <typename Derived, typename F>
DenseMatrix<typename Derived::Scalar> hermitian_matrix_function(const Eigen::MatrixBase<Derived>& m, F&& f,
                                                                const NumericsTolerances& tol = kDefaultTolerances) {
    return hermitian_matrix_function(hermitian_eigendecomposition(m, tol), std::forward<F>(f));
}

/// Inverse through the spectrum; DomainError if some |λ| is below the singular threshold.
template <typename Scalar>
DenseMatrix<Scalar> hermitian_inverse(const EigenDecomposition<Scalar>& eig,
                                      const NumericsTolerances& tol = kDefaultTolerances) {
    return hermitian_matrix_function(eig, [&](double x) {
        return std::abs(x) < tol.singular_eigenvalue ? std::numeric_limits<double>::infinity() : 1.0 / x;
    });
}

/// f(M) v without forming f(M).
template <typename Scalar, typename F>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> apply_matrix_function(const EigenDecomposition<Scalar>& eig, F&& f,
                                                               const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& v) {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> coeff = eig.vectors.adjoint() * v;
    for (Eigen::Index i = 0; i < eig.dim(); ++i) {
        const double fx = f(eig.values(i));
        if (!std::isfinite(fx)) {
            throw Error(ErrorKind::DomainError, "function undefined at eigenvalue " + std::to_string(eig.values(i)));
        }
        coeff(i) *= fx;
    }
    return eig.vectors * coeff;
}

}  // namespace specprior
