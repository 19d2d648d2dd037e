#pragma once

// Batch orchestration shared by the CLI and the acceptance suite.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "specprior/clustering.hpp"
#include "specprior/refine.hpp"
#include "specprior/stats.hpp"

namespace specprior {

struct PipelineConfig {
    // hamiltonian.*
    std::string hamiltonian_kind = "heisenberg";  // or "file"
    HeisenbergParams heisenberg;
    std::string hamiltonian_file;
    // ansatz.*
    AnsatzFamily family = AnsatzFamily::c0;
    int layers = 1;
    // grid.*; start/stop default to [lambda_min - step, lambda_max + step]
    std::optional<double> grid_start;
    std::optional<double> grid_stop;
    double grid_step = 0.25;
    // vite.*
    VITEConfig vite;
    int init_trials = 8;
    // noise.*
    NoiseModel noise;
    std::vector<double> noise_p2_list{0.005, 0.010, 0.030};
    // cluster.* / hopkins.*
    ClusterOptions cluster;
    int cluster_step = 0;  // snapshot fed to clustering; 0 = final step
    // refine.*
    std::string refine_method = "both";  // exact | poly | both
    int refine_degree = 31;
    RefineOptions refine;
    double refine_accuracy = 1e-8;
    // run
    std::uint64_t seed = 20240611;
    std::string output_dir = "out";
    int threads = 0;  // 0 = hardware concurrency
    int eval_count = 4;  // lowest eigenvalues scored against theoretical medians

    void validate() const;
};

PipelineConfig parse_config(const std::string& text);
PipelineConfig load_config(const std::string& path);
/// Applies one `key = value` assignment.
void set_config_value(PipelineConfig& cfg, const std::string& key, const std::string& value);
/// Canonical text; parse_config(config_to_text(c)) reproduces c.
std::string config_to_text(const PipelineConfig& cfg);
/// FNV-1a of the canonical text, hex.
std::string manifest_hash(const PipelineConfig& cfg);

PauliSum build_hamiltonian(const PipelineConfig& cfg);
AnsatzCircuit build_config_ansatz(const PipelineConfig& cfg);

struct TheoreticalInterval {
    double lambda;
    double lo;      // clipped to the window
    double hi;
    double median;  // midpoint of [lo, hi]
};

/// V_i of each distinct eigenvalue: bounded by neighbouring midpoints and the window.
std::vector<TheoreticalInterval> theoretical_intervals(const std::vector<double>& distinct, double window_lo,
                                                       double window_hi);

struct ExactSpectrum {
    RealVector eigenvalues;
    std::vector<double> distinct;
    std::vector<TheoreticalInterval> intervals;
    double window_lo = 0, window_hi = 0;
};

ExactSpectrum exact_spectrum(const PauliSum& h, const PipelineConfig& cfg);
std::vector<double> drift_grid(const PipelineConfig& cfg, const ExactSpectrum& spec);

std::string spectrum_csv(const ExactSpectrum& spec, const std::string& manifest_hash);

struct SweepResult {
    std::vector<double> grid;
    std::vector<ParameterRecord> records;  // sorted by (seed, s, step)
    std::vector<std::vector<double>> energy_histories;  // per (trial, s) run, same order as runs
    int skipped = 0;
    std::vector<std::string> failures;
};

/// `warm_start` maps drifts to initial parameters (nearest median_s wins); empty = cold start.
SweepResult run_sweep(const PauliSum& h, const PipelineConfig& cfg, const std::vector<double>& grid,
                      const std::optional<NoiseModel>& noise = std::nullopt,
                      const std::vector<ClusterSummary>& warm_start = {});

struct TrialScore {
    std::uint64_t seed;
    int k;
    double silhouette;
    double score;  // k * silhouette
};

struct ClusterOutcome {
    ClusterReport report;
    std::uint64_t chosen_seed = 0;
    std::vector<TrialScore> trials;
    std::vector<ParameterRecord> chosen_records;
};

/// Clusters the configured snapshot of every trial and keeps the trial with the best k * silhouette.
ClusterOutcome run_cluster(const std::vector<ParameterRecord>& records, const PipelineConfig& cfg);

struct EigenvalueScore {
    double lambda;
    double theoretical_median;
    double estimate;
    double error;
    bool contained;
};

struct SpectrumScore {
    std::vector<EigenvalueScore> per_eigenvalue;
    double mean_error = 0;
    bool all_contained = false;
};

/// For each of the lowest `count` intervals, the cluster median nearest its theoretical median.
SpectrumScore score_estimates(const std::vector<SpectrumEstimate>& estimates,
                              const std::vector<TheoreticalInterval>& intervals, int count);

struct RefineRow {
    int cluster_id;
    std::string method;  // exact_inverse | poly_inverse
    std::string start;   // warm | uniform
    double s;
    double target;
    double eigenvalue;
    int iterations;
    int iterations_to_accuracy;
    double residual;
    bool converged;
};

std::vector<RefineRow> run_refine(const ClusterReport& report, const PauliSum& h, const PipelineConfig& cfg);
std::string refine_csv(const std::vector<RefineRow>& rows, const std::string& manifest_hash);

struct NoiseLevelResult {
    double p1, p2;
    std::map<int, double> error_by_step;     // average |estimate - theoretical median|
    std::map<int, int> clusters_by_step;
};

struct NoiseStudy {
    std::vector<NoiseLevelResult> levels;  // sorted by p2
    std::map<int, MannKendallResult> trend_by_step;
};

/// A p2 = 0 baseline (p1 = 0 as well) is always included.
NoiseStudy run_noise_study(const PauliSum& h, const PipelineConfig& cfg);
std::string noise_study_csv(const NoiseStudy& study, const std::string& manifest_hash);

std::string sweep_manifest_json(const PipelineConfig& cfg, const SweepResult& sweep);

}  // namespace specprior
