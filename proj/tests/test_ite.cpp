#include "doctest.h"

#include <algorithm>
#include <numbers>
#include <sstream>

#include "specprior/ite.hpp"
#include "test_util.hpp"

using namespace specprior;
using std::numbers::pi;

namespace {

AnsatzCircuit single_ry() {
    AnsatzCircuit a;
    a.n_qubits = 1;
    a.gates = {{GateKind::RY, 0, -1, 0}};
    a.n_params = 1;
    return a;
}

PauliSum pauli_z() {
    PauliSum z(1);
    z.add(1.0, "Z");
    return z;
}

}  // namespace

TEST_CASE("exact ITE on a single qubit") {
    const PauliSum z = pauli_z();
    const Statevector plus = uniform_state(1);
    CHECK((exact_ite_state(z, 0.2, 0.0, plus) - plus).norm() < 1e-15);
    CHECK(std::abs(exact_ite_energy(z, 0.2, 0.0, plus)) < 1e-15);
    CHECK(exact_ite_energy(z, 0.2, 100.0, plus) == doctest::Approx(1.0).epsilon(1e-12));
    const Statevector late = exact_ite_state(z, 0.2, 100.0, plus);
    CHECK(std::norm(late(0)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("exact ITE converges to the nearest eigenvector") {
    const PauliSum h = build_heisenberg_1d(HeisenbergParams{});
    const HermitianEigen eig = hermitian_eigendecomposition(to_dense(h));
    const std::vector<double> distinct = distinct_eigenvalues(eig.values);
    CHECK(distinct.size() == 16);

    // The uniform state is reflection symmetric, so start from a generic one.
    SplitMix64 rng(12);
    const Statevector v0 = testing::random_state(rng, 4);
    const auto gap_time = [&](double s) {
        std::vector<double> d2;
        for (double l : distinct) d2.push_back((l - s) * (l - s));
        std::sort(d2.begin(), d2.end());
        return 20.0 / (d2[1] - d2[0]);
    };

    const double s = 0.5 * (distinct[0] + distinct[1]) - 0.05;  // just below the first midpoint
    const Statevector out = exact_ite_state(eig, s, gap_time(s), v0);
    CHECK(std::norm(eig.vectors.col(0).dot(out)) > 1 - 1e-8);

    int tested = 0;
    while (tested < 50) {
        const double s2 = rng.uniform(distinct.front() - 0.5, distinct.back() + 0.5);
        const NearestEigenvalue ne = nearest_eigenvalue(distinct, s2);
        bool near_mid = false;
        for (std::size_t i = 0; i + 1 < distinct.size(); ++i) {
            if (std::abs(s2 - 0.5 * (distinct[i] + distinct[i + 1])) < 0.02) near_mid = true;
        }
        if (near_mid) continue;
        CHECK(std::abs(exact_ite_energy(eig, s2, gap_time(s2), v0) - ne.lambda) < 1e-6);
        ++tested;
    }
}

TEST_CASE("zero initial state") {
    const PauliSum z = pauli_z();
    try {
        exact_ite_state(z, 0.0, 1.0, Statevector::Zero(2));
        FAIL("expected ZeroNorm");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ZeroNorm);
    }
}

TEST_CASE("shifted energy never rises along exact ITE") {
    SplitMix64 rng(22);
    std::vector<double> times;
    for (int i = 0; i <= 100; ++i) times.push_back(0.1 * i);
    for (int t = 0; t < 20; ++t) {
        const int n = 1 + static_cast<int>(rng.below(3));
        const PauliSum h = testing::random_pauli_sum(rng, n, 5);
        const HermitianEigen eig = hermitian_eigendecomposition(to_dense(h));
        const ITETrajectory tr = exact_ite_trajectory(eig, rng.uniform(-2, 2), times, testing::random_state(rng, n));
        REQUIRE(tr.shifted_energies.size() == times.size());
        for (std::size_t i = 1; i < times.size(); ++i) {
            CHECK(tr.shifted_energies[i] <= tr.shifted_energies[i - 1] + 1e-10);
        }
    }
}

TEST_CASE("nearest eigenvalue") {
    const std::vector<double> pm{-1.0, 1.0};
    const NearestEigenvalue a = nearest_eigenvalue(pm, 0.2);
    CHECK(a.lambda == 1.0);
    CHECK(a.index == 1);
    CHECK_FALSE(a.midpoint);
    const NearestEigenvalue b = nearest_eigenvalue(pm, 0.0);
    CHECK(b.lambda == -1.0);
    CHECK(b.index == 0);
    CHECK(b.midpoint);
    try {
        nearest_eigenvalue({}, 0.0);
        FAIL("expected EmptySpectrum");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::EmptySpectrum);
    }
}

TEST_CASE("single-qubit VITE step matches the closed-form flow") {
    // Hs = (Z + 1)^2 = 2I + 2Z; A = 1/4, C = -sin(theta), so d theta / dt = 4 sin(theta).
    const PauliSum hs = shift_and_square(pauli_z(), -1.0);
    const AnsatzCircuit ry = single_ry();
    Eigen::VectorXd t0(1);
    t0 << pi / 2;
    const VITESystem sys = vite_system(hs, ry, t0, zero_state(1));
    CHECK(sys.a(0, 0) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(sys.c(0) == doctest::Approx(-1.0).epsilon(1e-14));
    const Eigen::VectorXd t1 = vite_step(hs, ry, t0, 0.1, 0.0);
    CHECK(std::abs(t1(0) - (pi / 2 + 0.4)) < 1e-12);

    SplitMix64 rng(5);
    for (int i = 0; i < 10; ++i) {
        Eigen::VectorXd th(1);
        th << rng.uniform(0.1, 3.0);
        const double expect = th(0) + 0.01 * 4 * std::sin(th(0));
        CHECK(std::abs(vite_step(hs, ry, th, 0.01, 1e-12)(0) - expect) < 1e-8);
    }
}

TEST_CASE("VITE is stationary at an eigenstate of Hs with eigenvalue zero") {
    const PauliSum hs = shift_and_square(pauli_z(), 1.0);  // (Z - 1)^2 vanishes on |0>
    Eigen::VectorXd th = Eigen::VectorXd::Zero(1);
    CHECK(std::abs(vite_step(hs, single_ry(), th, 0.1, 1e-6)(0)) < 1e-15);
}

TEST_CASE("VITE steps descend") {
    const PauliSum h = build_heisenberg_1d(HeisenbergParams{});
    const AnsatzCircuit a = build_ansatz(AnsatzFamily::c0_hat, 4, 1);
    SplitMix64 rng(33);
    for (int t = 0; t < 20; ++t) {
        const PauliSum hs = shift_and_square(h, rng.uniform(-2.5, 2));
        Eigen::VectorXd th(a.n_params);
        for (auto& x : th) x = rng.angle();
        const double before = expectation(apply_circuit(a, th, zero_state(4)), hs);
        const Eigen::VectorXd next = vite_step(hs, a, th, 0.1, 1e-6);
        CHECK(expectation(apply_circuit(a, next, zero_state(4)), hs) <= before + 1e-12);
    }
}

TEST_CASE("VITE run follows the closed-form flow") {
    const AnsatzCircuit ry = single_ry();
    Eigen::VectorXd t0(1);
    t0 << pi / 2;
    const VITERun run = vite_run(pauli_z(), -1.0, ry, t0, VITEConfig{}, std::nullopt, 7);
    CHECK(std::abs(run.final_theta(0) - pi) < 0.1);
    REQUIRE(run.records.size() == 5);
    CHECK(run.records.back().step == 25);
    CHECK(run.records.back().energy == doctest::Approx(-1.0).epsilon(0.05));
    CHECK(run.records.back().seed == 7);
    CHECK(run.energy_history.size() == 25);
}

TEST_CASE("VITE runs outside the spectrum reach the extremal eigenvalues") {
    const PauliSum h = build_heisenberg_1d(2, 0.5, 0.5, 0.6, 1.0);
    const AnsatzCircuit a = build_ansatz(AnsatzFamily::c0, 2, 2);
    VITEConfig cfg;
    cfg.steps = 200;
    cfg.record_at = {200};
    SplitMix64 rng(44);
    Eigen::VectorXd th(a.n_params);
    for (auto& x : th) x = rng.angle();
    CHECK(vite_run(h, -3.0, a, th, cfg).records[0].energy == doctest::Approx(-0.8).epsilon(1e-3));
    CHECK(vite_run(h, 3.0, a, th, cfg).records[0].energy == doctest::Approx(0.3 + std::sqrt(0.5)).epsilon(1e-3));
}

TEST_CASE("snapshot energies stay inside the spectrum") {
    const PauliSum h = build_heisenberg_1d(HeisenbergParams{});
    const HermitianEigen eig = hermitian_eigendecomposition(to_dense(h));
    const AnsatzCircuit a = build_ansatz(AnsatzFamily::c0, 4, 1);
    SplitMix64 rng(55);
    for (double s : {-2.6, -1.0, 0.4, 2.1}) {
        Eigen::VectorXd th(a.n_params);
        for (auto& x : th) x = rng.angle();
        for (const auto& r : vite_run(h, s, a, th, VITEConfig{}).records) {
            CHECK(r.energy >= eig.values(0) - 1e-10);
            CHECK(r.energy <= eig.values(15) + 1e-10);
            CHECK(r.theta.minCoeff() >= 0.0);
            CHECK(r.theta.maxCoeff() < 2 * pi);
        }
    }
}

TEST_CASE("angle reduction keeps the ray") {
    const AnsatzCircuit a = build_ansatz(AnsatzFamily::c0, 4, 1);
    SplitMix64 rng(66);
    Eigen::VectorXd th(a.n_params);
    for (auto& x : th) x = rng.uniform(-20, 20);
    const Eigen::VectorXd w = wrap_angles(th);
    const Statevector u = apply_circuit(a, th, zero_state(4));
    const Statevector v = apply_circuit(a, w, zero_state(4));
    CHECK(std::abs(std::abs(u.dot(v)) - 1.0) < 1e-10);
}

TEST_CASE("config validation") {
    VITEConfig c;
    c.dt = 0;
    CHECK_THROWS_AS(c.validate(), Error);
    c = VITEConfig{};
    c.record_at = {26};
    CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("records CSV round trip") {
    std::vector<ParameterRecord> recs;
    SplitMix64 rng(77);
    for (int i = 0; i < 5; ++i) {
        ParameterRecord r;
        r.s = -1.0 + 0.25 * i;
        r.theta = Eigen::VectorXd(3);
        for (auto& x : r.theta) x = rng.angle();
        r.energy = rng.uniform(-2, 2);
        r.ansatz_tag = "c0";
        r.step = 5 * (i + 1);
        r.seed = rng.next();
        recs.push_back(r);
    }
    std::stringstream ss;
    write_records_csv(ss, recs, "abc123");
    CHECK(ss.str().rfind("# manifest_hash=abc123", 0) == 0);
    const std::vector<ParameterRecord> back = read_records_csv(ss);
    REQUIRE(back.size() == recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
        CHECK(back[i].s == recs[i].s);
        CHECK(back[i].theta == recs[i].theta);
        CHECK(back[i].energy == recs[i].energy);
        CHECK(back[i].ansatz_tag == recs[i].ansatz_tag);
        CHECK(back[i].step == recs[i].step);
        CHECK(back[i].seed == recs[i].seed);
    }
}
