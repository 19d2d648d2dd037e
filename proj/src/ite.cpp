#include "specprior/ite.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

namespace specprior {

namespace {

void check_dim(const HermitianEigen& eig, const Statevector& v0) {
    if (v0.size() != eig.dim()) throw Error(ErrorKind::ShapeMismatch, "initial state dimension mismatch");
}

HermitianEigen dense_eigen(const PauliSum& h) {
    if (h.n_qubits() > kMaxExactIteQubits) throw Error(ErrorKind::TooLarge, "exact ITE capped at 10 qubits");
    return hermitian_eigendecomposition(to_dense(h));
}

std::string fmt(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) out.push_back(cell);
    return out;
}

double to_double(const std::string& s, int lineno) {
    double v = 0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) {
        throw Error(ErrorKind::ParseError, "records line " + std::to_string(lineno) + ": bad number '" + s + "'");
    }
    return v;
}

}  // namespace

Statevector exact_ite_state(const HermitianEigen& eig, double s, double t, const Statevector& v0) {
    check_dim(eig, v0);
    if (t < 0) throw Error(ErrorKind::InvalidArgument, "imaginary time must be nonnegative");
    const RealVector d2 = (eig.values.array() - s).square();
    ComplexVector coeff = eig.vectors.adjoint() * v0;
    // Only components with nonzero overlap set the reference exponent.
    double ref = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < coeff.size(); ++i) {
        if (std::abs(coeff(i)) > 0) ref = std::min(ref, d2(i));
    }
    if (!std::isfinite(ref)) throw Error(ErrorKind::ZeroNorm, "initial state is zero");
    for (Eigen::Index i = 0; i < coeff.size(); ++i) coeff(i) *= std::exp(-(d2(i) - ref) * t);
    Statevector out = eig.vectors * coeff;
    const double norm = out.norm();
    if (!(norm > 1e-300) || !std::isfinite(norm)) throw Error(ErrorKind::ZeroNorm, "A(s,t) v0 underflowed");
    return out / norm;
}

Statevector exact_ite_state(const PauliSum& h, double s, double t, const Statevector& v0) {
    return exact_ite_state(dense_eigen(h), s, t, v0);
}

double exact_ite_energy(const HermitianEigen& eig, double s, double t, const Statevector& v0) {
    const Statevector psi = exact_ite_state(eig, s, t, v0);
    const ComplexVector c = eig.vectors.adjoint() * psi;
    return (c.cwiseAbs2().array() * eig.values.array()).sum();
}

double exact_ite_energy(const PauliSum& h, double s, double t, const Statevector& v0) {
    return exact_ite_energy(dense_eigen(h), s, t, v0);
}

ITETrajectory exact_ite_trajectory(const HermitianEigen& eig, double s, const std::vector<double>& times,
                                   const Statevector& v0) {
    if (!std::is_sorted(times.begin(), times.end())) {
        throw Error(ErrorKind::InvalidArgument, "trajectory times must be increasing");
    }
    ITETrajectory tr;
    tr.s = s;
    tr.times = times;
    const RealVector d2 = (eig.values.array() - s).square();
    for (double t : times) {
        tr.final_state = exact_ite_state(eig, s, t, v0);
        const RealVector w = (eig.vectors.adjoint() * tr.final_state).cwiseAbs2();
        tr.energies.push_back(w.dot(eig.values));
        tr.shifted_energies.push_back(w.dot(d2));
    }
    if (times.empty()) tr.final_state = v0.normalized();
    return tr;
}

NearestEigenvalue nearest_eigenvalue(const std::vector<double>& ascending, double s, double tie_tol) {
    if (ascending.empty()) throw Error(ErrorKind::EmptySpectrum, "no eigenvalues");
    int best = 0;
    for (int i = 1; i < static_cast<int>(ascending.size()); ++i) {
        if (std::abs(ascending[i] - s) < std::abs(ascending[best] - s)) best = i;
    }
    bool midpoint = false;
    for (int i = 0; i < static_cast<int>(ascending.size()); ++i) {
        if (i == best || ascending[i] == ascending[best]) continue;
        if (std::abs(std::abs(ascending[i] - s) - std::abs(ascending[best] - s)) <= tie_tol) {
            midpoint = true;
            best = std::min(best, i);
        }
    }
    return {ascending[static_cast<std::size_t>(best)], best, midpoint};
}

std::vector<double> distinct_eigenvalues(const RealVector& values, double tol) {
    std::vector<double> v(values.data(), values.data() + values.size());
    std::sort(v.begin(), v.end());
    std::vector<double> out;
    for (double x : v) {
        if (out.empty() || x - out.back() > tol) out.push_back(x);
    }
    return out;
}

void VITEConfig::validate() const {
    if (!(dt > 0)) throw Error(ErrorKind::ConfigError, "dt must be positive");
    if (steps < 1) throw Error(ErrorKind::ConfigError, "steps must be >= 1");
    if (lambda_reg < 0) throw Error(ErrorKind::ConfigError, "lambda_reg must be nonnegative");
    for (int r : record_at) {
        if (r < 1 || r > steps) throw Error(ErrorKind::ConfigError, "record_at entries must lie in [1, steps]");
    }
}

Eigen::VectorXd wrap_angles(const Eigen::VectorXd& theta) {
    constexpr double two_pi = 2 * std::numbers::pi;
    Eigen::VectorXd out(theta.size());
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        double x = std::fmod(theta(i), two_pi);
        if (x < 0) x += two_pi;
        if (x >= two_pi) x = 0;
        out(i) = x;
    }
    return out;
}

VITESystem vite_system(const PauliSum& hs, const AnsatzCircuit& ansatz, const Eigen::VectorXd& theta,
                       const Statevector& initial, bool phase_correction) {
    const Statevector psi = apply_circuit(ansatz, theta, initial);
    const ComplexMatrix d = state_gradient(ansatz, theta, initial);
    VITESystem sys;
    sys.a = (d.adjoint() * d).real();
    if (phase_correction) {
        const ComplexVector overlap = d.adjoint() * psi;  // <d_k psi|psi>
        sys.a -= (overlap * overlap.adjoint()).real();
    }
    sys.c = (d.adjoint() * apply(hs, psi)).real();
    return sys;
}

Eigen::VectorXd vite_step(const PauliSum& hs, const AnsatzCircuit& ansatz, const Eigen::VectorXd& theta, double dt,
                          double lambda_reg, const std::optional<NoiseModel>& noise,
                          const std::optional<Statevector>& initial, bool phase_correction) {
    if (hs.n_qubits() != ansatz.n_qubits) throw Error(ErrorKind::ShapeMismatch, "Hamiltonian and ansatz sizes differ");
    const Statevector init = initial ? *initial : zero_state(ansatz.n_qubits);
    VITESystem sys = vite_system(hs, ansatz, theta, init, phase_correction);
    if (noise && !noise->noiseless()) {
        sys.c = 0.5 * noisy_expectation_gradient(ansatz, theta, *noise, hs, pure_density(init));
    }
    const RealVector rate = solve_regularized(sys.a, -sys.c, lambda_reg);
    return wrap_angles(theta + dt * rate);
}

VITERun vite_run(const PauliSum& h, double s, const AnsatzCircuit& ansatz, const Eigen::VectorXd& theta0,
                 const VITEConfig& config, const std::optional<NoiseModel>& noise, std::uint64_t seed,
                 const std::optional<Statevector>& initial) {
    config.validate();
    if (theta0.size() != ansatz.n_params) throw Error(ErrorKind::ShapeMismatch, "theta0 length mismatch");
    const PauliSum hs = shift_and_square(h, s);
    const Statevector init = initial ? *initial : zero_state(ansatz.n_qubits);
    const bool noisy = noise && !noise->noiseless();
    auto energy_of = [&](const Eigen::VectorXd& th) {
        if (noisy) return density_expectation(evolve_density_with_noise(ansatz, th, *noise, pure_density(init)), h);
        return expectation(apply_circuit(ansatz, th, init), h);
    };

    VITERun run;
    Eigen::VectorXd theta = wrap_angles(theta0);
    for (int step = 1; step <= config.steps; ++step) {
        theta = vite_step(hs, ansatz, theta, config.dt, config.lambda_reg, noise, init, config.phase_correction);
        const double e = energy_of(theta);
        run.energy_history.push_back(e);
        if (std::find(config.record_at.begin(), config.record_at.end(), step) != config.record_at.end()) {
            run.records.push_back({s, theta, e, to_string(ansatz.family), step, seed});
        }
    }
    run.final_theta = theta;
    return run;
}

void write_records_csv(std::ostream& os, const std::vector<ParameterRecord>& records,
                       const std::string& manifest_hash) {
    if (!manifest_hash.empty()) os << "# manifest_hash=" << manifest_hash << '\n';
    const Eigen::Index p = records.empty() ? 0 : records.front().theta.size();
    os << "s,ansatz_tag,seed,step,energy";
    for (Eigen::Index k = 0; k < p; ++k) os << ",theta_" << k;
    os << '\n';
    for (const auto& r : records) {
        if (r.theta.size() != p) throw Error(ErrorKind::MixedAnsatz, "records have different parameter counts");
        os << fmt(r.s) << ',' << r.ansatz_tag << ',' << r.seed << ',' << r.step << ',' << fmt(r.energy);
        for (Eigen::Index k = 0; k < p; ++k) os << ',' << fmt(r.theta(k));
        os << '\n';
    }
}

std::vector<ParameterRecord> read_records_csv(std::istream& is) {
    std::string line;
    int lineno = 0;
    bool header = false;
    std::size_t ncols = 0;
    std::vector<ParameterRecord> out;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto cells = split_csv(line);
        if (!header) {
            if (cells.size() < 5 || cells[0] != "s") throw Error(ErrorKind::ParseError, "records header missing");
            ncols = cells.size();
            header = true;
            continue;
        }
        if (cells.size() != ncols) {
            throw Error(ErrorKind::ParseError, "records line " + std::to_string(lineno) + ": wrong column count");
        }
        ParameterRecord r;
        r.s = to_double(cells[0], lineno);
        r.ansatz_tag = cells[1];
        try {
            r.seed = std::stoull(cells[2]);
            r.step = std::stoi(cells[3]);
        } catch (const std::exception&) {
            throw Error(ErrorKind::ParseError, "records line " + std::to_string(lineno) + ": bad seed/step");
        }
        r.energy = to_double(cells[4], lineno);
        r.theta.resize(static_cast<Eigen::Index>(ncols - 5));
        for (std::size_t k = 5; k < ncols; ++k) r.theta(static_cast<Eigen::Index>(k - 5)) = to_double(cells[k], lineno);
        out.push_back(std::move(r));
    }
    if (!header) throw Error(ErrorKind::ParseError, "records file has no header");
    return out;
}

}  // namespace specprior
