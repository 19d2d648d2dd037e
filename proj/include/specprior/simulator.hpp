#pragma once

// Statevector and density-matrix simulation of parameterized circuits.
// Rotations are R(theta) = exp(-i theta G / 2).

#include <optional>
#include <string>
#include <vector>

#include "specprior/hamiltonian.hpp"

namespace specprior {

enum class GateKind { RX, RY, RZ, H, CX, CRY };
enum class AnsatzFamily { c0, c0_hat, c1, custom };

std::string to_string(GateKind k);
std::string to_string(AnsatzFamily f);
AnsatzFamily parse_family(const std::string& s);

struct GateOp {
    GateKind kind;
    int target = 0;
    int control = -1;  // CX, CRY only
    int slot = -1;     // rotations only

    bool two_qubit() const { return control >= 0; }
    bool parameterized() const { return slot >= 0; }
};

struct AnsatzCircuit {
    int n_qubits = 0;
    std::vector<GateOp> gates;
    int n_params = 0;
    AnsatzFamily family = AnsatzFamily::custom;
    int layers = 1;

    int depth() const;
    int two_qubit_count() const;
    /// Throws ShapeMismatch/InvalidArgument on broken invariants.
    void validate() const;
};

AnsatzCircuit build_ansatz(AnsatzFamily family, int n, int layers);

std::string serialize_ansatz(const AnsatzCircuit& a);
AnsatzCircuit parse_ansatz(const std::string& text);

using Statevector = ComplexVector;
using DensityMatrix = ComplexMatrix;

Statevector zero_state(int n);
Statevector uniform_state(int n);
DensityMatrix pure_density(const Statevector& psi);

inline constexpr int kMaxDensityQubits = 8;

struct NoiseModel {
    double p1 = 0.0;
    double p2 = 0.0;

    void validate() const;
    bool noiseless() const { return p1 == 0.0 && p2 == 0.0; }
};

/// Applies one gate in place (`angle` ignored for fixed gates).
void apply_gate(Statevector& psi, const GateOp& g, double angle);

Statevector apply_circuit(const AnsatzCircuit& a, const Eigen::VectorXd& theta, const Statevector& initial);
/// Undoes apply_circuit: gates reversed, angles negated.
Statevector apply_inverse_circuit(const AnsatzCircuit& a, const Eigen::VectorXd& theta, const Statevector& state);

double expectation(const Statevector& psi, const PauliSum& h);
double density_expectation(const DensityMatrix& rho, const PauliSum& h);

/// Column k is d|psi>/d theta_k.
ComplexMatrix state_gradient(const AnsatzCircuit& a, const Eigen::VectorXd& theta, const Statevector& initial);

/// A single gate occurrence whose angle is offset, used by parameter-shift rules.
struct GateShift {
    std::size_t gate_index;
    double delta;
};

DensityMatrix evolve_density_with_noise(const AnsatzCircuit& a, const Eigen::VectorXd& theta, const NoiseModel& noise,
                                        const DensityMatrix& initial, std::optional<GateShift> shift = std::nullopt);

/// rho <- (1-p) rho + p Tr_S(rho) (x) I_S / 2^|S| for qubit set `support_mask`.
void depolarize(DensityMatrix& rho, std::uint64_t support_mask, double p);

/// d/d theta_k Tr(rho(theta) H) by parameter shift per gate occurrence.
Eigen::VectorXd noisy_expectation_gradient(const AnsatzCircuit& a, const Eigen::VectorXd& theta,
                                           const NoiseModel& noise, const PauliSum& h, const DensityMatrix& initial);

}  // namespace specprior
