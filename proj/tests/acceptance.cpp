// Acceptance criteria A1-A10. One line per criterion; exit status is the
// number of failing criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "specprior/pipeline.hpp"
#include "specprior/random.hpp"

using namespace specprior;

namespace {

// Tolerances, pinned.
constexpr double kA1EnergyTol = 1e-6;
constexpr double kA1MidpointGuard = 1e-3;
constexpr double kA1MaxSeconds = 10.0;
constexpr double kA2DescentTol = 1e-10;
constexpr double kA3MaxMeanError = 0.15;
constexpr int kA3MinClusters = 4;
constexpr double kA3MaxSeconds = 300.0;
constexpr double kA4MinHopkins = 0.75;
constexpr double kA4MaxP = 0.05;
constexpr double kA4UniformLo = 0.4;
constexpr double kA4UniformHi = 0.6;
constexpr double kA5MaxMeanError = 0.25;
constexpr double kA5MaxSecondsN8 = 1800.0;
constexpr int kA6MinClusters = 3;
constexpr double kA6MinP = 0.05;
constexpr double kA7FewerOrEqual = 0.8;
constexpr double kA7Strict = 0.5;
constexpr double kA8Agreement = 1e-6;
constexpr int kA8Degree = 31;
constexpr double kA9Tol = 1e-10;
constexpr double kA10Tol = 1e-12;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(const char* id, bool pass, const std::string& detail) {
    std::printf("%s %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

PauliSum random_pauli_sum(SplitMix64& rng, int n, int terms) {
    static const char letters[] = {'I', 'X', 'Y', 'Z'};
    PauliSum h(n);
    for (int t = 0; t < terms; ++t) {
        std::string p(static_cast<std::size_t>(n), 'I');
        for (auto& c : p) c = letters[rng.below(4)];
        h.add(rng.uniform(-1, 1), p);
    }
    h.prune();
    return h;
}

Statevector random_state(SplitMix64& rng, int n) {
    Statevector v(1 << n);
    for (auto& x : v) x = Complex(rng.uniform(-1, 1), rng.uniform(-1, 1));
    return v.normalized();
}

PipelineConfig heisenberg4_config() {
    PipelineConfig cfg;
    cfg.heisenberg = HeisenbergParams{};
    cfg.family = AnsatzFamily::c0;
    cfg.layers = 1;
    cfg.grid_step = 0.25;
    cfg.vite.steps = 25;
    return cfg;
}

// ---------------------------------------------------------------------------

void a1() {
    const auto t0 = Clock::now();
    const PauliSum h = build_heisenberg_1d(HeisenbergParams{});
    const HermitianEigen eig = hermitian_eigendecomposition(to_dense(h));
    const std::vector<double> distinct = distinct_eigenvalues(eig.values);
    const double lo = distinct.front() - 0.5, hi = distinct.back() + 0.5;
    SplitMix64 rng(101);
    const Statevector v0 = uniform_state(4);
    double worst = 0;
    int tested = 0;
    while (tested < 50) {
        const double s = rng.uniform(lo, hi);
        bool near_mid = false;
        for (std::size_t i = 0; i + 1 < distinct.size(); ++i) {
            if (std::abs(s - 0.5 * (distinct[i] + distinct[i + 1])) < kA1MidpointGuard) near_mid = true;
        }
        if (near_mid) continue;
        // Gap of (H - sI)^2 between its two lowest distinct levels.
        std::vector<double> d2;
        for (double l : distinct) d2.push_back((l - s) * (l - s));
        std::sort(d2.begin(), d2.end());
        const double gap = d2[1] - d2[0];
        const double t = 10.0 / (gap * gap);
        const double e = exact_ite_energy(eig, s, t, v0);
        worst = std::max(worst, std::abs(e - nearest_eigenvalue(distinct, s).lambda));
        ++tested;
    }
    const double secs = seconds_since(t0);
    report("A1", worst < kA1EnergyTol && secs < kA1MaxSeconds,
           "max |f(s,T) - lambda| = " + fmt("%.2e", worst) + " over 50 s, " + fmt("%.2f", secs) + " s");
}

void a2() {
    SplitMix64 rng(202);
    double worst_rise = -1e300;
    for (int draw = 0; draw < 20; ++draw) {
        const int n = 1 + static_cast<int>(rng.below(3));
        const PauliSum h = random_pauli_sum(rng, n, 1 + static_cast<int>(rng.below(6)));
        const HermitianEigen eig = hermitian_eigendecomposition(to_dense(h));
        const double s = rng.uniform(-2, 2);
        std::vector<double> times;
        for (int i = 0; i <= 200; ++i) times.push_back(0.05 * i);
        const ITETrajectory tr = exact_ite_trajectory(eig, s, times, random_state(rng, n));
        for (std::size_t i = 1; i < tr.shifted_energies.size(); ++i) {
            worst_rise = std::max(worst_rise, tr.shifted_energies[i] - tr.shifted_energies[i - 1]);
        }
    }
    report("A2", worst_rise <= kA2DescentTol, "largest step increase of <(H-sI)^2> = " + fmt("%.2e", worst_rise));
}

struct A3Run {
    PipelineConfig cfg;
    PauliSum h;
    ExactSpectrum spec;
    ClusterOutcome outcome;
};

A3Run a3_a4() {
    const auto t0 = Clock::now();
    A3Run run;
    run.cfg = heisenberg4_config();
    // Full window so every eigenvalue owns grid points.
    run.h = build_hamiltonian(run.cfg);
    run.spec = exact_spectrum(run.h, run.cfg);
    const std::vector<double> grid = drift_grid(run.cfg, run.spec);
    const SweepResult sweep = run_sweep(run.h, run.cfg, grid);
    run.outcome = run_cluster(sweep.records, run.cfg);
    const ClusterReport& rep = run.outcome.report;
    const SpectrumScore sc = score_estimates(estimate_spectrum(rep), run.spec.intervals, 4);
    const double secs = seconds_since(t0);

    std::string detail = "seed " + std::to_string(run.cfg.seed) + ", k = " + std::to_string(rep.k) +
                         ", mean error = " + fmt("%.4f", sc.mean_error) + ", contained =";
    for (const auto& e : sc.per_eigenvalue) detail += e.contained ? " y" : " n";
    detail += ", " + fmt("%.1f", secs) + " s";
    report("A3", rep.k >= kA3MinClusters && sc.all_contained && sc.mean_error <= kA3MaxMeanError && secs < kA3MaxSeconds,
           detail);

    // Uniform control in the same dimension and size as the A3 embedding.
    const EmbeddedDataset data = embed_angles(run.outcome.chosen_records);
    SplitMix64 rng(404);
    RealMatrix uniform(data.points.rows(), data.points.cols());
    for (Eigen::Index i = 0; i < uniform.size(); ++i) uniform(i) = rng.uniform();
    const HopkinsResult ctrl = hopkins_statistic(uniform, run.cfg.cluster.hopkins, 405);
    const bool ok = rep.hopkins.mean > kA4MinHopkins && rep.hopkins.p_value < kA4MaxP && ctrl.mean >= kA4UniformLo &&
                    ctrl.mean <= kA4UniformHi;
    report("A4", ok,
           "hopkins = " + fmt("%.4f", rep.hopkins.mean) + " (p = " + fmt("%.2e", rep.hopkins.p_value) +
               "), uniform control = " + fmt("%.4f", ctrl.mean));
    return run;
}

void a5() {
    double err[2] = {0, 0};
    double secs[2] = {0, 0};
    const int ns[2] = {6, 8};
    for (int i = 0; i < 2; ++i) {
        const auto t0 = Clock::now();
        PipelineConfig cfg = heisenberg4_config();
        cfg.heisenberg.n = ns[i];
        cfg.family = AnsatzFamily::c0_hat;
        const PauliSum h = build_hamiltonian(cfg);
        const ExactSpectrum spec = exact_spectrum(h, cfg);
        // Window of the lowest four eigenvalues, one step of margin.
        cfg.grid_start = spec.distinct.front() - cfg.grid_step;
        cfg.grid_stop = spec.distinct[std::min<std::size_t>(4, spec.distinct.size() - 1)];
        const std::vector<double> grid = drift_grid(cfg, spec);
        const SweepResult sweep = run_sweep(h, cfg, grid);
        const ClusterOutcome co = run_cluster(sweep.records, cfg);
        err[i] = score_estimates(estimate_spectrum(co.report), spec.intervals, 4).mean_error;
        secs[i] = seconds_since(t0);
    }
    const bool ok = err[0] <= kA5MaxMeanError && err[1] <= kA5MaxMeanError && err[1] <= err[0] &&
                    secs[1] < kA5MaxSecondsN8;
    report("A5", ok,
           "c0_hat mean error n=6: " + fmt("%.4f", err[0]) + ", n=8: " + fmt("%.4f", err[1]) + ", n=8 runtime " +
               fmt("%.1f", secs[1]) + " s");
}

void a6() {
    // Documented seed sets; alternates are only consulted after a failure.
    const std::uint64_t seed_sets[3] = {20240611, 20240612, 20240613};
    std::string detail;
    bool ok = false;
    for (std::uint64_t seed : seed_sets) {
        PipelineConfig cfg = heisenberg4_config();
        cfg.seed = seed;
        cfg.noise.p1 = 0.001;
        cfg.noise_p2_list = {0.005, 0.010, 0.030};
        const PauliSum h = build_hamiltonian(cfg);
        const NoiseStudy study = run_noise_study(h, cfg);
        const int step = cfg.vite.steps;
        int min_k = 1 << 30;
        std::string errs;
        for (const auto& l : study.levels) {
            if (l.p2 > 0) min_k = std::min(min_k, l.clusters_by_step.at(step));
            errs += " " + fmt("%.3f", l.error_by_step.at(step));
        }
        const auto it = study.trend_by_step.find(step);
        const double p = it == study.trend_by_step.end() ? 0.0 : it->second.p_value;
        ok = min_k >= kA6MinClusters && p >= kA6MinP;
        detail += "seed " + std::to_string(seed) + ": errors (p2 = 0, .005, .01, .03)" + errs + ", min k " +
                  std::to_string(min_k) + ", MK p = " + fmt("%.3f", p) + "; ";
        if (ok) break;
    }
    report("A6", ok, detail);
}

void a7(const A3Run& run) {
    const std::vector<RefineRow> rows = run_refine(run.outcome.report, run.h, [&] {
        PipelineConfig c = run.cfg;
        c.refine_method = "exact";
        return c;
    }());
    int clusters = 0, le = 0, lt = 0;
    for (const auto& w : rows) {
        if (w.start != "warm") continue;
        for (const auto& u : rows) {
            if (u.start != "uniform" || u.cluster_id != w.cluster_id) continue;
            const int wi = w.iterations_to_accuracy < 0 ? 1 << 30 : w.iterations_to_accuracy;
            const int ui = u.iterations_to_accuracy < 0 ? 1 << 30 : u.iterations_to_accuracy;
            ++clusters;
            le += wi <= ui;
            lt += wi < ui;
        }
    }
    const bool ok = clusters > 0 && le >= kA7FewerOrEqual * clusters && lt >= kA7Strict * clusters;
    report("A7", ok,
           std::to_string(le) + "/" + std::to_string(clusters) + " clusters warm <= uniform, " + std::to_string(lt) +
               " strictly fewer");
}

void a8() {
    double worst = 0;
    const Statevector u3 = Statevector::Constant(3, 1.0 / std::sqrt(3.0));
    Eigen::Matrix3cd d = Eigen::Matrix3cd::Zero();
    d.diagonal() << 1, 2, 4;
    const DenseHamiltonian diag = DenseHamiltonian::from(ComplexMatrix(d));
    for (double s : {1.9, 0.7, 3.2}) {
        const double e = inverse_power_iterate(diag, s, u3).eigenvalue_estimate;
        const double p = polynomial_inverse_power(diag, s, u3, kA8Degree).eigenvalue_estimate;
        worst = std::max(worst, std::abs(e - p));
    }
    const DenseHamiltonian heis = DenseHamiltonian::from(build_heisenberg_1d(HeisenbergParams{}));
    const Statevector u16 = uniform_state(4);
    for (double s : {-2.3, -1.8, -0.6, 0.1, 1.0, 1.9}) {
        const double e = inverse_power_iterate(heis, s, u16).eigenvalue_estimate;
        const double p = polynomial_inverse_power(heis, s, u16, kA8Degree).eigenvalue_estimate;
        worst = std::max(worst, std::abs(e - p));
    }
    report("A8", worst < kA8Agreement, "max |poly - exact| = " + fmt("%.2e", worst) + " at degree 31");
}

void a9() {
    SplitMix64 rng(909);
    double worst_sq = 0, worst_rt = 0, worst_orth = 0;
    for (int draw = 0; draw < 200; ++draw) {
        const int n = 1 + static_cast<int>(rng.below(3));
        const PauliSum h = random_pauli_sum(rng, n, 1 + static_cast<int>(rng.below(6)));
        const double s = rng.uniform(-2, 2);
        const ComplexMatrix dense = to_dense(h);
        const ComplexMatrix shifted = dense - s * ComplexMatrix::Identity(dense.rows(), dense.cols());
        worst_sq = std::max(worst_sq, (to_dense(shift_and_square(h, s)) - shifted * shifted).norm());
        const HermitianEigen eig = hermitian_eigendecomposition(dense);
        const double scale = std::max(1.0, dense.norm());
        worst_rt = std::max(worst_rt, (eig.reconstruct() - dense).norm() / scale);
        worst_orth = std::max(
            worst_orth, (eig.vectors.adjoint() * eig.vectors - ComplexMatrix::Identity(dense.rows(), dense.cols())).norm());
    }
    report("A9", worst_sq <= kA9Tol && worst_rt <= kA9Tol && worst_orth <= kA9Tol,
           "square " + fmt("%.1e", worst_sq) + ", round trip " + fmt("%.1e", worst_rt) + ", orthonormality " +
               fmt("%.1e", worst_orth));
}

void a10() {
    const double w0 = tau_weakest({0.0, 1.0, 0.724});
    double worst = std::abs(w0 - 1.0 / 0.724);
    double worst_id = 0;
    for (int i = 0; i < 100; ++i) {
        const double f = (i + 0.5) / 100.0;
        const double m = 0.5 + 0.03 * i;
        const double lhs = tau_save(std::acos(std::sqrt(f)), m, 0.724);
        const double rhs = tau_weakest({f, m, 0.724});
        worst_id = std::max(worst_id, std::abs(lhs - rhs));
    }
    report("A10", worst <= kA10Tol && worst_id <= kA10Tol,
           "|tau_weakest(0) - 1/0.724| = " + fmt("%.1e", worst) + ", identity defect " + fmt("%.1e", worst_id));
}

}  // namespace

int main() {
    a1();
    a2();
    const A3Run run = a3_a4();
    a5();
    a6();
    a7(run);
    a8();
    a9();
    a10();
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
