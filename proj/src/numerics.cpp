#include "specprior/numerics.hpp"

namespace specprior {

RealVector solve_regularized(const RealMatrix& a, const RealVector& b, double lambda_reg,
                             const NumericsTolerances& tol) {
    if (a.rows() != a.cols() || a.rows() != b.size()) {
        throw Error(ErrorKind::ShapeMismatch, "solve_regularized: A must be square and match b");
    }
    if (lambda_reg < 0) {
        throw Error(ErrorKind::InvalidArgument, "solve_regularized: lambda_reg must be nonnegative");
    }
    RealMatrix m = a;
    m.diagonal().array() += lambda_reg;
    Eigen::LDLT<RealMatrix> ldlt(m);
    const double rcond = ldlt.info() == Eigen::Success ? ldlt.rcond() : 0.0;
    if (!(rcond * tol.max_condition > 1.0)) {
        throw Error(ErrorKind::SingularSystem,
                    "condition estimate exceeds " + std::to_string(tol.max_condition));
    }
    return ldlt.solve(b);
}

}  // namespace specprior
