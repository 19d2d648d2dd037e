#pragma once

// Exact imaginary-time evolution under (H - sI)^2 and its variational
// (McLachlan) counterpart on a parameterized circuit.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "specprior/simulator.hpp"

namespace specprior {

inline constexpr int kMaxExactIteQubits = 10;

/// exp(-(H - sI)^2 t) v0, normalized. Exponents are shifted by their minimum
/// so large t does not underflow the surviving component.
Statevector exact_ite_state(const HermitianEigen& eig, double s, double t, const Statevector& v0);
Statevector exact_ite_state(const PauliSum& h, double s, double t, const Statevector& v0);

double exact_ite_energy(const HermitianEigen& eig, double s, double t, const Statevector& v0);
double exact_ite_energy(const PauliSum& h, double s, double t, const Statevector& v0);

struct ITETrajectory {
    double s = 0;
    std::vector<double> times;
    std::vector<double> energies;          // <H>
    std::vector<double> shifted_energies;  // <(H - sI)^2>
    Statevector final_state;
};

ITETrajectory exact_ite_trajectory(const HermitianEigen& eig, double s, const std::vector<double>& times,
                                   const Statevector& v0);

struct NearestEigenvalue {
    double lambda;
    int index;
    bool midpoint;  // s sits on a midpoint; the lower index was chosen
};

NearestEigenvalue nearest_eigenvalue(const std::vector<double>& ascending, double s, double tie_tol = 1e-12);

/// Distinct eigenvalues (merged within tol), ascending.
std::vector<double> distinct_eigenvalues(const RealVector& values, double tol = 1e-9);

struct VITEConfig {
    double dt = 0.1;
    int steps = 25;
    double lambda_reg = 1e-6;
    std::vector<int> record_at{5, 10, 15, 20, 25};
    // Subtract the <d_k psi|psi><psi|d_l psi> term from A (global-phase gauge).
    bool phase_correction = true;

    void validate() const;
};

struct ParameterRecord {
    double s = 0;
    Eigen::VectorXd theta;
    double energy = 0;
    std::string ansatz_tag;
    int step = 0;
    std::uint64_t seed = 0;
};

Eigen::VectorXd wrap_angles(const Eigen::VectorXd& theta);

struct VITESystem {
    RealMatrix a;
    RealVector c;
};

/// A and C of the McLachlan system at theta (noiseless).
VITESystem vite_system(const PauliSum& hs, const AnsatzCircuit& ansatz, const Eigen::VectorXd& theta,
                       const Statevector& initial, bool phase_correction = true);

Eigen::VectorXd vite_step(const PauliSum& hs, const AnsatzCircuit& ansatz, const Eigen::VectorXd& theta, double dt,
                          double lambda_reg, const std::optional<NoiseModel>& noise = std::nullopt,
                          const std::optional<Statevector>& initial = std::nullopt, bool phase_correction = true);

struct VITERun {
    std::vector<ParameterRecord> records;
    std::vector<double> energy_history;  // <H> after each step, length = steps
    Eigen::VectorXd final_theta;
};

VITERun vite_run(const PauliSum& h, double s, const AnsatzCircuit& ansatz, const Eigen::VectorXd& theta0,
                 const VITEConfig& config, const std::optional<NoiseModel>& noise = std::nullopt,
                 std::uint64_t seed = 0, const std::optional<Statevector>& initial = std::nullopt);

void write_records_csv(std::ostream& os, const std::vector<ParameterRecord>& records,
                       const std::string& manifest_hash = {});
std::vector<ParameterRecord> read_records_csv(std::istream& is);

}  // namespace specprior
