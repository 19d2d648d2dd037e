#pragma once

// Pauli-string Hamiltonians. Position q of a string acts on qubit q, which is
// bit q of the amplitude index.

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "specprior/numerics.hpp"

namespace specprior {

inline constexpr double kPruneThreshold = 1e-12;
inline constexpr int kMaxDenseQubits = 13;

struct PauliTerm {
    Complex coefficient;
    std::string string;
};

class PauliSum {
public:
    PauliSum() = default;
    explicit PauliSum(int n_qubits);

    int n_qubits() const { return n_; }
    /// Adds coef*string, merging with an existing term.
    void add(Complex coef, const std::string& string);
    /// Drops terms below the threshold.
    void prune(double threshold = kPruneThreshold);
    /// Ordered by string, deterministic.
    std::vector<PauliTerm> terms() const;
    std::size_t size() const { return terms_.size(); }
    bool empty() const { return terms_.empty(); }
    Complex coefficient(const std::string& string) const;
    double max_imag() const;

    bool operator==(const PauliSum& other) const = default;

private:
    int n_ = 0;
    std::map<std::string, Complex> terms_;
};

std::pair<Complex, std::string> multiply_pauli_strings(std::string_view p, std::string_view q);

struct HeisenbergParams {
    int n = 4;
    double jx = 0.5;
    double jy = 0.5;
    double jz = 0.6;
    double h = 1.0;
    bool field_all_sites = false;  // default leaves the last site without a field term
};

PauliSum build_heisenberg_1d(const HeisenbergParams& p);
PauliSum build_heisenberg_1d(int n, double jx, double jy, double jz, double h, bool field_all_sites = false);

/// Symbolic (H - sI)^2 with merging and pruning.
PauliSum shift_and_square(const PauliSum& h, double s);

ComplexMatrix to_dense(const PauliSum& h);

/// H|v> without forming the dense matrix.
ComplexVector apply(const PauliSum& h, const ComplexVector& v);

/// Line format: `<coefficient> <pauli string>`, `#` comments.
PauliSum parse_hamiltonian(std::string_view text);
std::string serialize_hamiltonian(const PauliSum& h);

PauliSum load_hamiltonian_file(const std::string& path);

}  // namespace specprior
