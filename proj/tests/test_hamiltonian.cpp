#include "doctest.h"

#include "specprior/hamiltonian.hpp"
#include "specprior/numerics.hpp"
#include "test_util.hpp"

using namespace specprior;

namespace {

ErrorKind kind_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("no error thrown");
    return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("Pauli products") {
    const Complex i1(0, 1);
    auto [p1, r1] = multiply_pauli_strings("X", "Y");
    CHECK(p1 == i1);
    CHECK(r1 == "Z");
    auto [p2, r2] = multiply_pauli_strings("Z", "Z");
    CHECK(p2 == Complex(1));
    CHECK(r2 == "I");
    auto [p3, r3] = multiply_pauli_strings("XZ", "YI");
    CHECK(p3 == i1);
    CHECK(r3 == "ZZ");
    CHECK(kind_of([] { multiply_pauli_strings("X", "XY"); }) == ErrorKind::LengthMismatch);
}

TEST_CASE("Pauli products are associative up to phase and square to identity") {
    SplitMix64 rng(4);
    const char letters[] = {'I', 'X', 'Y', 'Z'};
    auto draw = [&](int n) {
        std::string s(static_cast<std::size_t>(n), 'I');
        for (auto& c : s) c = letters[rng.below(4)];
        return s;
    };
    for (int t = 0; t < 100; ++t) {
        const std::string a = draw(3), b = draw(3), c = draw(3);
        auto [pab, ab] = multiply_pauli_strings(a, b);
        auto [pab_c, ab_c] = multiply_pauli_strings(ab, c);
        auto [pbc, bc] = multiply_pauli_strings(b, c);
        auto [pa_bc, a_bc] = multiply_pauli_strings(a, bc);
        CHECK(ab_c == a_bc);
        CHECK(std::abs(pab * pab_c - pbc * pa_bc) < 1e-15);
        auto [paa, aa] = multiply_pauli_strings(a, a);
        CHECK(paa == Complex(1));
        CHECK(aa == "III");
    }
}

TEST_CASE("two-site Heisenberg terms") {
    const PauliSum h = build_heisenberg_1d(2, 0.5, 0.5, 0.6, 1.0);
    CHECK(h.size() == 4);
    CHECK(h.coefficient("XX") == Complex(-0.25));
    CHECK(h.coefficient("YY") == Complex(-0.25));
    CHECK(h.coefficient("ZZ") == Complex(-0.3));
    CHECK(h.coefficient("ZI") == Complex(-0.5));
    CHECK(build_heisenberg_1d(2, 0, 0, 0, 0).empty());
    CHECK(kind_of([] { build_heisenberg_1d(1, 1, 1, 1, 1); }) == ErrorKind::InvalidSize);

    const PauliSum all = build_heisenberg_1d(2, 0.5, 0.5, 0.6, 1.0, true);
    CHECK(all.coefficient("IZ") == Complex(-0.5));
}

TEST_CASE("four-site Heisenberg spectrum") {
    const PauliSum h = build_heisenberg_1d(HeisenbergParams{});
    const ComplexMatrix m = to_dense(h);
    CHECK(m.rows() == 16);
    const HermitianEigen e = hermitian_eigendecomposition(m);
    CHECK(e.values.size() == 16);
    CHECK(e.values(0) == doctest::Approx(-2.4).epsilon(1e-12));
    // No field on the last site: qubit 3 carries no Z term.
    CHECK(h.coefficient("IIIZ") == Complex(0));
    CHECK(h.coefficient("IIZI") == Complex(-0.5));
}

TEST_CASE("dense realization convention") {
    PauliSum z(1);
    z.add(1.0, "Z");
    const ComplexMatrix dz = to_dense(z);
    CHECK(dz(0, 0) == Complex(1));
    CHECK(dz(1, 1) == Complex(-1));

    PauliSum xi(2);
    xi.add(1.0, "XI");
    const ComplexMatrix dx = to_dense(xi);
    // Flips bit 0: |00> <-> |01> in index terms 0 <-> 1.
    CHECK(dx(1, 0) == Complex(1));
    CHECK(dx(3, 2) == Complex(1));
    CHECK(dx(2, 0) == Complex(0));

    PauliSum big(14);
    big.add(1.0, std::string(14, 'Z'));
    CHECK(kind_of([&] { to_dense(big); }) == ErrorKind::TooLarge);
}

TEST_CASE("apply agrees with dense") {
    SplitMix64 rng(9);
    for (int t = 0; t < 20; ++t) {
        const PauliSum h = testing::random_pauli_sum(rng, 3, 6);
        const ComplexVector v = testing::random_state(rng, 3);
        CHECK((apply(h, v) - to_dense(h) * v).norm() < 1e-12);
    }
}

TEST_CASE("shift and square") {
    PauliSum z(1);
    z.add(1.0, "Z");
    const PauliSum zs = shift_and_square(z, 0.5);
    CHECK(zs.size() == 2);
    CHECK(std::abs(zs.coefficient("I") - 1.25) < 1e-15);
    CHECK(std::abs(zs.coefficient("Z") + 1.0) < 1e-15);

    PauliSum x(1);
    x.add(1.0, "X");
    const PauliSum xs = shift_and_square(x, 0.0);
    CHECK(xs.size() == 1);
    CHECK(xs.coefficient("I") == Complex(1));

    const PauliSum h2 = build_heisenberg_1d(2, 0.5, 0.5, 0.6, 1.0);
    const ComplexMatrix d = to_dense(h2) - 0.2 * ComplexMatrix::Identity(4, 4);
    CHECK((to_dense(shift_and_square(h2, 0.2)) - d * d).norm() < 1e-12);
}

TEST_CASE("shift and square on random sums") {
    SplitMix64 rng(17);
    for (int t = 0; t < 100; ++t) {
        const int n = 1 + static_cast<int>(rng.below(3));
        const PauliSum h = testing::random_pauli_sum(rng, n, 1 + static_cast<int>(rng.below(6)));
        const double s = rng.uniform(-2, 2);
        const PauliSum hs = shift_and_square(h, s);
        const ComplexMatrix d = to_dense(h) - s * ComplexMatrix::Identity(1 << n, 1 << n);
        const ComplexMatrix dhs = to_dense(hs);
        CHECK((dhs - d * d).norm() <= 1e-10);
        CHECK(hs.max_imag() <= 1e-12);
        CHECK(hermitian_eigendecomposition(dhs).values(0) >= -1e-10);
        for (const auto& term : hs.terms()) CHECK(std::abs(term.coefficient) >= 1e-12);
    }
}

TEST_CASE("parsing") {
    const PauliSum h = parse_hamiltonian("\xE2\x88\x92" "0.25 XX\n-0.25 YY\n-0.3 ZZ\n-0.5 ZI\n");
    CHECK(h == build_heisenberg_1d(2, 0.5, 0.5, 0.6, 1.0));

    const PauliSum merged = parse_hamiltonian("1.0 XX\n1.0 XX");
    CHECK(merged.size() == 1);
    CHECK(merged.coefficient("XX") == Complex(2));

    try {
        parse_hamiltonian("1.0 XQ");
        FAIL("expected ParseError");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ParseError);
        CHECK(std::string(e.what()).find("line 1") != std::string::npos);
    }
    try {
        parse_hamiltonian("# comment\n\n1.0 XX\n0.5 X");
        FAIL("expected ParseError");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ParseError);
        CHECK(std::string(e.what()).find("line 4") != std::string::npos);
    }
    CHECK(kind_of([] { parse_hamiltonian("(1,0.5) XY"); }) == ErrorKind::NonHermitian);
    // Imaginary parts that cancel after merging are fine.
    CHECK(parse_hamiltonian("(1,0.5) XY\n(1,-0.5) XY").coefficient("XY") == Complex(2));
}

TEST_CASE("parse serialize parse round trip") {
    SplitMix64 rng(23);
    for (int t = 0; t < 50; ++t) {
        const PauliSum h = testing::random_pauli_sum(rng, 1 + static_cast<int>(rng.below(4)), 6);
        const PauliSum back = parse_hamiltonian(serialize_hamiltonian(h));
        CHECK(back == h);
        CHECK(parse_hamiltonian(serialize_hamiltonian(back)) == back);
    }
}
