#include "specprior/simulator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <sstream>

namespace specprior {

namespace {

using Mat2 = Eigen::Matrix2cd;

Mat2 gate_matrix(GateKind k, double angle) {
    const double c = std::cos(angle / 2), s = std::sin(angle / 2);
    const Complex i1(0, 1);
    Mat2 m;
    switch (k) {
        case GateKind::RX: m << c, -i1 * s, -i1 * s, c; break;
        case GateKind::RY:
        case GateKind::CRY: m << c, -s, s, c; break;
        case GateKind::RZ: m << std::exp(-i1 * (angle / 2)), 0, 0, std::exp(i1 * (angle / 2)); break;
        case GateKind::H: m << 1, 1, 1, -1; m /= std::numbers::sqrt2; break;
        case GateKind::CX: m << 0, 1, 1, 0; break;
    }
    return m;
}

// -(i/2) G for the generator of the rotation.
Mat2 derivative_generator(GateKind k) {
    const Complex i1(0, 1);
    Mat2 g;
    switch (k) {
        case GateKind::RX: g << 0, 1, 1, 0; break;
        case GateKind::RY:
        case GateKind::CRY: g << 0, -i1, i1, 0; break;
        case GateKind::RZ: g << 1, 0, 0, -1; break;
        default: throw Error(ErrorKind::InvalidArgument, "gate has no parameter");
    }
    return Complex(0, -0.5) * g;
}

template <typename Vec>
void apply_2x2(Vec&& psi, const Mat2& m, int target, int control) {
    const Eigen::Index dim = psi.size();
    const Eigen::Index tbit = Eigen::Index{1} << target;
    const Eigen::Index cbit = control >= 0 ? (Eigen::Index{1} << control) : 0;
    for (Eigen::Index i = 0; i < dim; ++i) {
        if ((i & tbit) || (i & cbit) != cbit) continue;
        const Eigen::Index j = i | tbit;
        const Complex a = psi(i), b = psi(j);
        psi(i) = m(0, 0) * a + m(0, 1) * b;
        psi(j) = m(1, 0) * a + m(1, 1) * b;
    }
}

// Zeroes the control-0 subspace, leaving |1><1|_c (x) I.
void project_control(Statevector& psi, int control) {
    const Eigen::Index cbit = Eigen::Index{1} << control;
    for (Eigen::Index i = 0; i < psi.size(); ++i) {
        if (!(i & cbit)) psi(i) = 0;
    }
}

double gate_angle(const GateOp& g, const Eigen::VectorXd& theta) {
    return g.parameterized() ? theta(g.slot) : 0.0;
}

void check_theta(const AnsatzCircuit& a, const Eigen::VectorXd& theta) {
    if (theta.size() != a.n_params) {
        throw Error(ErrorKind::ShapeMismatch, "theta has " + std::to_string(theta.size()) + " entries, ansatz needs " +
                                                  std::to_string(a.n_params));
    }
}

void check_state(const AnsatzCircuit& a, Eigen::Index size) {
    if (size != (Eigen::Index{1} << a.n_qubits)) {
        throw Error(ErrorKind::ShapeMismatch, "state dimension does not match ansatz qubit count");
    }
}

// U rho U^H for one gate.
void conjugate_gate(DensityMatrix& rho, const GateOp& g, double angle) {
    const Mat2 m = gate_matrix(g.kind, angle);
    for (Eigen::Index c = 0; c < rho.cols(); ++c) apply_2x2(rho.col(c), m, g.target, g.control);
    const Mat2 mc = m.conjugate();
    for (Eigen::Index r = 0; r < rho.rows(); ++r) apply_2x2(rho.row(r).transpose(), mc, g.target, g.control);
}

}  // namespace

std::string to_string(GateKind k) {
    switch (k) {
        case GateKind::RX: return "RX";
        case GateKind::RY: return "RY";
        case GateKind::RZ: return "RZ";
        case GateKind::H: return "H";
        case GateKind::CX: return "CX";
        case GateKind::CRY: return "CRY";
    }
    return "?";
}

std::string to_string(AnsatzFamily f) {
    switch (f) {
        case AnsatzFamily::c0: return "c0";
        case AnsatzFamily::c0_hat: return "c0_hat";
        case AnsatzFamily::c1: return "c1";
        case AnsatzFamily::custom: return "custom";
    }
    return "?";
}

AnsatzFamily parse_family(const std::string& s) {
    if (s == "c0") return AnsatzFamily::c0;
    if (s == "c0_hat") return AnsatzFamily::c0_hat;
    if (s == "c1") return AnsatzFamily::c1;
    if (s == "custom") return AnsatzFamily::custom;
    throw Error(ErrorKind::UnsupportedFamily, "unknown ansatz family '" + s + "'");
}

static GateKind parse_gate_kind(const std::string& s) {
    for (GateKind k : {GateKind::RX, GateKind::RY, GateKind::RZ, GateKind::H, GateKind::CX, GateKind::CRY}) {
        if (to_string(k) == s) return k;
    }
    throw Error(ErrorKind::ParseError, "unknown gate '" + s + "'");
}

int AnsatzCircuit::depth() const {
    std::vector<int> level(static_cast<std::size_t>(n_qubits), 0);
    int d = 0;
    for (const auto& g : gates) {
        int l = level[static_cast<std::size_t>(g.target)];
        if (g.two_qubit()) l = std::max(l, level[static_cast<std::size_t>(g.control)]);
        ++l;
        level[static_cast<std::size_t>(g.target)] = l;
        if (g.two_qubit()) level[static_cast<std::size_t>(g.control)] = l;
        d = std::max(d, l);
    }
    return d;
}

int AnsatzCircuit::two_qubit_count() const {
    return static_cast<int>(std::count_if(gates.begin(), gates.end(), [](const GateOp& g) { return g.two_qubit(); }));
}

void AnsatzCircuit::validate() const {
    if (n_qubits < 1) throw Error(ErrorKind::InvalidSize, "ansatz needs at least one qubit");
    std::vector<int> uses(static_cast<std::size_t>(n_params), 0);
    for (const auto& g : gates) {
        const bool needs_control = g.kind == GateKind::CX || g.kind == GateKind::CRY;
        const bool needs_slot = g.kind == GateKind::RX || g.kind == GateKind::RY || g.kind == GateKind::RZ ||
                                g.kind == GateKind::CRY;
        if (g.target < 0 || g.target >= n_qubits) throw Error(ErrorKind::ShapeMismatch, "gate target out of range");
        if (needs_control != g.two_qubit()) throw Error(ErrorKind::InvalidArgument, "control presence mismatch");
        if (needs_control && (g.control >= n_qubits || g.control == g.target)) {
            throw Error(ErrorKind::ShapeMismatch, "gate control out of range");
        }
        if (needs_slot != g.parameterized()) throw Error(ErrorKind::InvalidArgument, "parameter slot mismatch");
        if (needs_slot) {
            if (g.slot >= n_params) throw Error(ErrorKind::ShapeMismatch, "parameter slot out of range");
            ++uses[static_cast<std::size_t>(g.slot)];
        }
    }
    for (int u : uses) {
        if (u == 0) throw Error(ErrorKind::InvalidArgument, "unused parameter slot");
    }
}

AnsatzCircuit build_ansatz(AnsatzFamily family, int n, int layers) {
    if (n < 2) throw Error(ErrorKind::InvalidSize, "ansatz needs n >= 2");
    if (layers < 1) throw Error(ErrorKind::InvalidSize, "ansatz needs at least one layer");
    AnsatzCircuit a;
    a.n_qubits = n;
    a.family = family;
    a.layers = layers;
    int slot = 0;
    auto rot = [&](GateKind k, int q) { a.gates.push_back({k, q, -1, slot++}); };

    switch (family) {
        case AnsatzFamily::c1:
            if (n != 4) throw Error(ErrorKind::UnsupportedFamily, "c1 is defined for n = 4 only");
            for (int l = 0; l < layers; ++l) {
                for (int q = 0; q < 4; ++q) rot(GateKind::RY, q);
                a.gates.push_back({GateKind::CRY, 1, 0, slot++});
                a.gates.push_back({GateKind::CRY, 3, 2, slot++});
            }
            break;
        case AnsatzFamily::c0:
        case AnsatzFamily::c0_hat: {
            const bool with_rz = family == AnsatzFamily::c0;
            for (int l = 0; l < layers; ++l) {
                for (int q = 0; q < n; ++q) rot(GateKind::RY, q);
                if (with_rz) for (int q = 0; q < n; ++q) rot(GateKind::RZ, q);
                for (int q = 0; q + 1 < n; q += 2) a.gates.push_back({GateKind::CX, q, q + 1, -1});
                for (int q = 1; q + 1 < n; ++q) rot(GateKind::RY, q);
                if (with_rz) for (int q = 1; q + 1 < n; ++q) rot(GateKind::RZ, q);
                for (int q = 1; q + 1 < n; q += 2) a.gates.push_back({GateKind::CX, q, q + 1, -1});
            }
            break;
        }
        case AnsatzFamily::custom:
            throw Error(ErrorKind::UnsupportedFamily, "custom circuits are parsed, not built");
    }
    a.n_params = slot;
    a.validate();
    return a;
}

std::string serialize_ansatz(const AnsatzCircuit& a) {
    std::ostringstream os;
    os << "ansatz " << to_string(a.family) << " n_qubits " << a.n_qubits << " layers " << a.layers << " n_params "
       << a.n_params << '\n';
    for (const auto& g : a.gates) {
        os << to_string(g.kind) << ' ' << g.target << ' ';
        if (g.two_qubit()) os << g.control; else os << '-';
        os << ' ';
        if (g.parameterized()) os << g.slot; else os << '-';
        os << '\n';
    }
    return os.str();
}

AnsatzCircuit parse_ansatz(const std::string& text) {
    std::istringstream in(text);
    std::string line, tag, fam, k1, k2, k3;
    AnsatzCircuit a;
    if (!std::getline(in, line)) throw Error(ErrorKind::ParseError, "empty ansatz text");
    std::istringstream head(line);
    if (!(head >> tag >> fam >> k1 >> a.n_qubits >> k2 >> a.layers >> k3 >> a.n_params) || tag != "ansatz") {
        throw Error(ErrorKind::ParseError, "bad ansatz header");
    }
    a.family = parse_family(fam);
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream ls(line);
        std::string kind, ctl, slot;
        GateOp g{};
        if (!(ls >> kind >> g.target >> ctl >> slot)) {
            throw Error(ErrorKind::ParseError, "line " + std::to_string(lineno) + ": bad gate");
        }
        g.kind = parse_gate_kind(kind);
        try {
            g.control = ctl == "-" ? -1 : std::stoi(ctl);
            g.slot = slot == "-" ? -1 : std::stoi(slot);
        } catch (const std::exception&) {
            throw Error(ErrorKind::ParseError, "line " + std::to_string(lineno) + ": bad gate field");
        }
        a.gates.push_back(g);
    }
    a.validate();
    return a;
}

Statevector zero_state(int n) {
    Statevector v = Statevector::Zero(Eigen::Index{1} << n);
    v(0) = 1;
    return v;
}

Statevector uniform_state(int n) {
    const Eigen::Index dim = Eigen::Index{1} << n;
    return Statevector::Constant(dim, Complex(1.0 / std::sqrt(static_cast<double>(dim)), 0));
}

DensityMatrix pure_density(const Statevector& psi) { return psi * psi.adjoint(); }

void NoiseModel::validate() const {
    if (!(p1 >= 0 && p1 <= 1 && p2 >= 0 && p2 <= 1)) {
        throw Error(ErrorKind::InvalidProbability, "depolarizing probabilities must lie in [0,1]");
    }
}

void apply_gate(Statevector& psi, const GateOp& g, double angle) {
    apply_2x2(psi, gate_matrix(g.kind, angle), g.target, g.control);
}

Statevector apply_circuit(const AnsatzCircuit& a, const Eigen::VectorXd& theta, const Statevector& initial) {
    check_theta(a, theta);
    check_state(a, initial.size());
    Statevector psi = initial;
    for (const auto& g : a.gates) apply_gate(psi, g, gate_angle(g, theta));
    return psi;
}

Statevector apply_inverse_circuit(const AnsatzCircuit& a, const Eigen::VectorXd& theta, const Statevector& state) {
    check_theta(a, theta);
    check_state(a, state.size());
    Statevector psi = state;
    for (auto it = a.gates.rbegin(); it != a.gates.rend(); ++it) apply_gate(psi, *it, -gate_angle(*it, theta));
    return psi;
}

double expectation(const Statevector& psi, const PauliSum& h) {
    if (psi.size() != (Eigen::Index{1} << h.n_qubits())) {
        throw Error(ErrorKind::ShapeMismatch, "state and Hamiltonian qubit counts differ");
    }
    return psi.dot(apply(h, psi)).real();
}

double density_expectation(const DensityMatrix& rho, const PauliSum& h) {
    const Eigen::Index dim = Eigen::Index{1} << h.n_qubits();
    if (rho.rows() != dim || rho.cols() != dim) throw Error(ErrorKind::ShapeMismatch, "density matrix size mismatch");
    Complex tr = 0;
    for (Eigen::Index j = 0; j < dim; ++j) tr += specprior::apply(h, ComplexVector(rho.col(j)))(j);
    return tr.real();
}

ComplexMatrix state_gradient(const AnsatzCircuit& a, const Eigen::VectorXd& theta, const Statevector& initial) {
    check_theta(a, theta);
    check_state(a, initial.size());
    const std::size_t ng = a.gates.size();
    std::vector<Statevector> after(ng);
    Statevector psi = initial;
    for (std::size_t g = 0; g < ng; ++g) {
        apply_gate(psi, a.gates[g], gate_angle(a.gates[g], theta));
        after[g] = psi;
    }
    ComplexMatrix grad = ComplexMatrix::Zero(initial.size(), a.n_params);
    for (std::size_t g = 0; g < ng; ++g) {
        const GateOp& op = a.gates[g];
        if (!op.parameterized()) continue;
        Statevector d = after[g];
        if (op.kind == GateKind::CRY) {
            project_control(d, op.control);
            apply_2x2(d, derivative_generator(op.kind), op.target, -1);
        } else {
            apply_2x2(d, derivative_generator(op.kind), op.target, -1);
        }
        for (std::size_t r = g + 1; r < ng; ++r) apply_gate(d, a.gates[r], gate_angle(a.gates[r], theta));
        grad.col(op.slot) += d;
    }
    return grad;
}

void depolarize(DensityMatrix& rho, std::uint64_t support_mask, double p) {
    if (p == 0.0) return;
    const auto dim = static_cast<std::uint64_t>(rho.rows());
    const double d = static_cast<double>(std::uint64_t{1} << std::popcount(support_mask));
    DensityMatrix out = (1.0 - p) * rho;
    for (std::uint64_t i = 0; i < dim; ++i) {
        if (i & support_mask) continue;
        for (std::uint64_t j = 0; j < dim; ++j) {
            if (j & support_mask) continue;
            Complex acc = 0;
            std::uint64_t k = 0;
            do {
                acc += rho(static_cast<Eigen::Index>(i | k), static_cast<Eigen::Index>(j | k));
                k = (k - support_mask) & support_mask;
            } while (k != 0);
            acc *= p / d;
            do {
                out(static_cast<Eigen::Index>(i | k), static_cast<Eigen::Index>(j | k)) += acc;
                k = (k - support_mask) & support_mask;
            } while (k != 0);
        }
    }
    rho = std::move(out);
}

DensityMatrix evolve_density_with_noise(const AnsatzCircuit& a, const Eigen::VectorXd& theta, const NoiseModel& noise,
                                        const DensityMatrix& initial, std::optional<GateShift> shift) {
    if (a.n_qubits > kMaxDensityQubits) throw Error(ErrorKind::TooLarge, "density simulation capped at 8 qubits");
    noise.validate();
    check_theta(a, theta);
    check_state(a, initial.rows());
    DensityMatrix rho = initial;
    for (std::size_t gi = 0; gi < a.gates.size(); ++gi) {
        const GateOp& g = a.gates[gi];
        double angle = gate_angle(g, theta);
        if (shift && shift->gate_index == gi) angle += shift->delta;
        conjugate_gate(rho, g, angle);
        std::uint64_t mask = std::uint64_t{1} << g.target;
        if (g.two_qubit()) mask |= std::uint64_t{1} << g.control;
        depolarize(rho, mask, g.two_qubit() ? noise.p2 : noise.p1);
    }
    return rho;
}

Eigen::VectorXd noisy_expectation_gradient(const AnsatzCircuit& a, const Eigen::VectorXd& theta,
                                           const NoiseModel& noise, const PauliSum& h, const DensityMatrix& initial) {
    using std::numbers::pi;
    auto energy = [&](std::size_t gi, double delta) {
        return density_expectation(evolve_density_with_noise(a, theta, noise, initial, GateShift{gi, delta}), h);
    };
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(a.n_params);
    for (std::size_t gi = 0; gi < a.gates.size(); ++gi) {
        const GateOp& g = a.gates[gi];
        if (!g.parameterized()) continue;
        double d = 0;
        if (g.kind == GateKind::CRY) {
            // Generator spectrum {0, +-1/2} needs the four-term rule.
            const double cp = (std::sqrt(2.0) + 1) / (4 * std::sqrt(2.0));
            const double cm = (std::sqrt(2.0) - 1) / (4 * std::sqrt(2.0));
            d = cp * (energy(gi, pi / 2) - energy(gi, -pi / 2)) - cm * (energy(gi, 3 * pi / 2) - energy(gi, -3 * pi / 2));
        } else {
            d = 0.5 * (energy(gi, pi / 2) - energy(gi, -pi / 2));
        }
        grad(g.slot) += d;
    }
    return grad;
}

}  // namespace specprior
