#include "specprior/hamiltonian.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

namespace specprior {

namespace {

bool valid_letter(char c) { return c == 'I' || c == 'X' || c == 'Y' || c == 'Z'; }

// Single-qubit product table: a*b = phase * r.
std::pair<Complex, char> multiply_letters(char a, char b) {
    const Complex i1(0, 1);
    if (a == 'I') return {1.0, b};
    if (b == 'I') return {1.0, a};
    if (a == b) return {1.0, 'I'};
    if (a == 'X' && b == 'Y') return {i1, 'Z'};
    if (a == 'Y' && b == 'X') return {-i1, 'Z'};
    if (a == 'Y' && b == 'Z') return {i1, 'X'};
    if (a == 'Z' && b == 'Y') return {-i1, 'X'};
    if (a == 'Z' && b == 'X') return {i1, 'Y'};
    return {-i1, 'Y'};  // X*Z
}

struct Masks {
    std::uint64_t flip = 0;   // X or Y
    std::uint64_t sign = 0;   // Y or Z
    int n_y = 0;
};

Masks masks_of(const std::string& s) {
    Masks m;
    for (std::size_t q = 0; q < s.size(); ++q) {
        const std::uint64_t bit = std::uint64_t{1} << q;
        switch (s[q]) {
            case 'X': m.flip |= bit; break;
            case 'Y': m.flip |= bit; m.sign |= bit; ++m.n_y; break;
            case 'Z': m.sign |= bit; break;
            default: break;
        }
    }
    return m;
}

Complex i_power(int k) {
    switch (k & 3) {
        case 0: return {1, 0};
        case 1: return {0, 1};
        case 2: return {-1, 0};
        default: return {0, -1};
    }
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

// Accepts the Unicode minus sign as well as ASCII '-'.
std::string normalize_minus(std::string s) {
    const std::string uminus = "\xE2\x88\x92";
    for (auto pos = s.find(uminus); pos != std::string::npos; pos = s.find(uminus, pos)) {
        s.replace(pos, uminus.size(), "-");
    }
    return s;
}

bool parse_double(const std::string& tok, double& out) {
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    if (first != last && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

// "(re,im)" or a plain real.
bool parse_coefficient(const std::string& tok, Complex& out) {
    if (tok.size() >= 2 && tok.front() == '(' && tok.back() == ')') {
        const auto comma = tok.find(',');
        if (comma == std::string::npos) return false;
        double re = 0, im = 0;
        if (!parse_double(trim(tok.substr(1, comma - 1)), re)) return false;
        if (!parse_double(trim(tok.substr(comma + 1, tok.size() - comma - 2)), im)) return false;
        out = {re, im};
        return true;
    }
    double re = 0;
    if (!parse_double(tok, re)) return false;
    out = {re, 0};
    return true;
}

}  // namespace

PauliSum::PauliSum(int n_qubits) : n_(n_qubits) {
    if (n_qubits < 1) throw Error(ErrorKind::InvalidSize, "qubit count must be positive");
}

void PauliSum::add(Complex coef, const std::string& string) {
    if (static_cast<int>(string.size()) != n_) {
        throw Error(ErrorKind::LengthMismatch, "Pauli string '" + string + "' has wrong length");
    }
    for (char c : string) {
        if (!valid_letter(c)) throw Error(ErrorKind::InvalidArgument, "invalid Pauli letter in '" + string + "'");
    }
    terms_[string] += coef;
}

void PauliSum::prune(double threshold) {
    std::erase_if(terms_, [&](const auto& kv) { return std::abs(kv.second) < threshold; });
}

std::vector<PauliTerm> PauliSum::terms() const {
    std::vector<PauliTerm> out;
    out.reserve(terms_.size());
    for (const auto& [s, c] : terms_) out.push_back({c, s});
    return out;
}

Complex PauliSum::coefficient(const std::string& string) const {
    const auto it = terms_.find(string);
    return it == terms_.end() ? Complex{} : it->second;
}

double PauliSum::max_imag() const {
    double m = 0;
    for (const auto& [s, c] : terms_) m = std::max(m, std::abs(c.imag()));
    return m;
}

std::pair<Complex, std::string> multiply_pauli_strings(std::string_view p, std::string_view q) {
    if (p.size() != q.size()) throw Error(ErrorKind::LengthMismatch, "Pauli strings differ in length");
    Complex phase(1, 0);
    std::string r(p.size(), 'I');
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (!valid_letter(p[i]) || !valid_letter(q[i])) {
            throw Error(ErrorKind::InvalidArgument, "invalid Pauli letter");
        }
        auto [ph, c] = multiply_letters(p[i], q[i]);
        phase *= ph;
        r[i] = c;
    }
    return {phase, r};
}

PauliSum build_heisenberg_1d(int n, double jx, double jy, double jz, double h, bool field_all_sites) {
    if (n < 2) throw Error(ErrorKind::InvalidSize, "Heisenberg chain needs n >= 2");
    PauliSum out(n);
    auto pair_string = [n](int j, char c) {
        std::string s(static_cast<std::size_t>(n), 'I');
        s[static_cast<std::size_t>(j)] = c;
        s[static_cast<std::size_t>(j + 1)] = c;
        return s;
    };
    auto site_string = [n](int j) {
        std::string s(static_cast<std::size_t>(n), 'I');
        s[static_cast<std::size_t>(j)] = 'Z';
        return s;
    };
    for (int j = 0; j + 1 < n; ++j) {
        out.add(-0.5 * jx, pair_string(j, 'X'));
        out.add(-0.5 * jy, pair_string(j, 'Y'));
        out.add(-0.5 * jz, pair_string(j, 'Z'));
        out.add(-0.5 * h, site_string(j));
    }
    if (field_all_sites) out.add(-0.5 * h, site_string(n - 1));
    out.prune();
    return out;
}

PauliSum build_heisenberg_1d(const HeisenbergParams& p) {
    return build_heisenberg_1d(p.n, p.jx, p.jy, p.jz, p.h, p.field_all_sites);
}

PauliSum shift_and_square(const PauliSum& h, double s) {
    const int n = h.n_qubits();
    PauliSum shifted = h;
    shifted.add(-s, std::string(static_cast<std::size_t>(n), 'I'));
    const auto terms = shifted.terms();
    PauliSum out(n);
    for (const auto& a : terms) {
        for (const auto& b : terms) {
            auto [phase, r] = multiply_pauli_strings(a.string, b.string);
            out.add(phase * a.coefficient * b.coefficient, r);
        }
    }
    out.prune();
    return out;
}

ComplexMatrix to_dense(const PauliSum& h) {
    const int n = h.n_qubits();
    if (n > kMaxDenseQubits) throw Error(ErrorKind::TooLarge, "dense realization capped at 13 qubits");
    const Eigen::Index dim = Eigen::Index{1} << n;
    ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
    for (const auto& t : h.terms()) {
        const Masks k = masks_of(t.string);
        const Complex base = t.coefficient * i_power(k.n_y);
        for (Eigen::Index col = 0; col < dim; ++col) {
            const auto c = static_cast<std::uint64_t>(col);
            const double sign = (std::popcount(c & k.sign) & 1) ? -1.0 : 1.0;
            m(static_cast<Eigen::Index>(c ^ k.flip), col) += sign * base;
        }
    }
    return m;
}

ComplexVector apply(const PauliSum& h, const ComplexVector& v) {
    const Eigen::Index dim = Eigen::Index{1} << h.n_qubits();
    if (v.size() != dim) throw Error(ErrorKind::ShapeMismatch, "state dimension does not match Hamiltonian");
    ComplexVector out = ComplexVector::Zero(dim);
    for (const auto& t : h.terms()) {
        const Masks k = masks_of(t.string);
        const Complex base = t.coefficient * i_power(k.n_y);
        for (Eigen::Index col = 0; col < dim; ++col) {
            const auto c = static_cast<std::uint64_t>(col);
            const double sign = (std::popcount(c & k.sign) & 1) ? -1.0 : 1.0;
            out(static_cast<Eigen::Index>(c ^ k.flip)) += sign * base * v(col);
        }
    }
    return out;
}

PauliSum parse_hamiltonian(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    int n = -1;
    std::vector<std::pair<Complex, std::string>> parsed;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            std::istringstream directive(line.substr(hash + 1));
            std::string key;
            int declared = 0;
            if (directive >> key >> declared && key == "n_qubits") {
                if (n >= 0 && n != declared) throw Error(ErrorKind::ParseError, "line " + std::to_string(lineno) + ": n_qubits conflicts with terms");
                n = declared;
            }
            line.erase(hash);
        }
        line = trim(normalize_minus(line));
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string coef_tok, string_tok, extra;
        ls >> coef_tok >> string_tok;
        const std::string where = "line " + std::to_string(lineno);
        if (string_tok.empty() || (ls >> extra)) {
            throw Error(ErrorKind::ParseError, where + ": expected '<coefficient> <pauli string>'");
        }
        Complex coef;
        if (!parse_coefficient(coef_tok, coef)) {
            throw Error(ErrorKind::ParseError, where + ": bad coefficient '" + coef_tok + "'");
        }
        for (char c : string_tok) {
            if (!valid_letter(c)) throw Error(ErrorKind::ParseError, where + ": invalid Pauli letter '" + std::string(1, c) + "'");
        }
        if (n < 0) n = static_cast<int>(string_tok.size());
        if (static_cast<int>(string_tok.size()) != n) {
            throw Error(ErrorKind::ParseError, where + ": string length differs from earlier terms");
        }
        parsed.emplace_back(coef, string_tok);
    }
    if (n < 0) throw Error(ErrorKind::ParseError, "no terms found");
    PauliSum out(n);
    for (const auto& [c, s] : parsed) out.add(c, s);
    out.prune();
    if (out.max_imag() > kPruneThreshold) throw Error(ErrorKind::NonHermitian, "merged coefficient has imaginary part");
    return out;
}

std::string serialize_hamiltonian(const PauliSum& h) {
    std::ostringstream os;
    os << "# n_qubits " << h.n_qubits() << '\n';
    char buf[64];
    for (const auto& t : h.terms()) {
        const auto res = std::to_chars(buf, buf + sizeof buf, t.coefficient.real());
        os << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf)) << ' ' << t.string << '\n';
    }
    return os.str();
}

PauliSum load_hamiltonian_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error(ErrorKind::IoError, "cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_hamiltonian(ss.str());
}

}  // namespace specprior
