#pragma once

// Classical stage: angle embedding, Hopkins clusterability, k-means++ with
// silhouette model selection, Tukey filtering and spectrum estimates.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "specprior/ite.hpp"

namespace specprior {

struct EmbeddedDataset {
    RealMatrix points;               // rows (cos t0, sin t0, cos t1, sin t1, ...)
    std::vector<double> s;           // drift of each row
    std::vector<std::size_t> record;  // index into the source record list
};

EmbeddedDataset embed_angles(const std::vector<ParameterRecord>& records);
RealMatrix embed_angles(const RealMatrix& thetas);  // one parameter vector per row

struct HopkinsOptions {
    double sample_fraction = 0.5;
    int repeats = 100;
    // Distances are raised to this power; 0 means the data dimension, which
    // makes Beta(m,m) the exact null for uniform data but is very noisy when
    // the dimension is large and N small.
    double exponent = 1;
};

struct HopkinsResult {
    double mean = 0;
    double p_value = 1;
    int m = 0;
    bool degenerate = false;  // all points coincide
};

HopkinsResult hopkins_statistic(const RealMatrix& data, const HopkinsOptions& opts, std::uint64_t seed);

/// Upper tail P(X >= x) for X ~ Beta(m, m), integer m.
double beta_symmetric_upper_tail(double x, int m);

struct KMeansResult {
    std::vector<int> assignment;
    RealMatrix centroids;
    double inertia = 0;
    std::vector<double> inertia_history;  // of the winning restart, one entry per Lloyd iteration
};

KMeansResult kmeans(const RealMatrix& data, int k, int restarts, int max_iters, std::uint64_t seed);

double silhouette(const RealMatrix& data, const std::vector<int>& assignment);

/// Linear interpolation between order statistics at position (n-1)p.
double quantile(std::vector<double> values, double p);
double median(std::vector<double> values);

std::vector<double> iqr_filter(const std::vector<double>& values, double multiplier = 1.5);

struct ClusterSummary {
    int id = 0;
    std::vector<std::size_t> members;  // row indices into the dataset
    std::vector<double> member_s;
    std::vector<double> filtered_s;
    double median_s = 0;
    double s_min = 0;
    double s_max = 0;
    Eigen::VectorXd median_theta;  // optional warm-start parameters
};

struct ClusterReport {
    int k = 0;
    std::vector<int> assignment;
    RealMatrix centroids;
    double inertia = 0;
    double mean_silhouette = 0;
    std::vector<std::pair<int, double>> silhouette_by_k;
    HopkinsResult hopkins;
    std::vector<ClusterSummary> clusters;
    std::vector<std::string> warnings;
};

struct ClusterOptions {
    int k_min = 2;
    int k_max = 12;  // clipped to N - 1
    int restarts = 50;
    int max_iters = 300;
    double iqr_multiplier = 1.5;
    HopkinsOptions hopkins;
};

ClusterReport select_k_and_cluster(const EmbeddedDataset& data, const ClusterOptions& opts, std::uint64_t seed);

/// Fills member/filtered s statistics of each cluster from an assignment.
void summarize_clusters(ClusterReport& report, const std::vector<double>& s, double iqr_multiplier);

struct SpectrumEstimate {
    int cluster_id;
    double median_s;
    double s_min;
    double s_max;
};

std::vector<SpectrumEstimate> estimate_spectrum(const ClusterReport& report);

struct ClusterSeparationCriteria {
    double delta = 0.35;
    double eps1 = 0.1;
    double eps2 = 1.0;

    void validate() const;
};

/// min over global phase of |a - e^{i phi} b|.
double ray_distance(const Statevector& a, const Statevector& b);

struct SeparationReport {
    std::vector<int> nearest_class;      // index into the distinct eigenvalue list
    std::vector<double> distance;        // ray distance to that eigenspace
    std::vector<int> classes_within_delta;
    double max_intra_distance = 0;
    double min_inter_distance = 0;
    bool verdict = false;
};

/// Distances are to eigenspaces, so degenerate eigenvalues form one class.
SeparationReport validate_separation(const std::vector<ParameterRecord>& records, const AnsatzCircuit& ansatz,
                                     const ClusterSeparationCriteria& criteria, const HermitianEigen& eig,
                                     double degeneracy_tol = 1e-9);

std::string report_to_json(const ClusterReport& report, const std::string& manifest_hash = {});
ClusterReport report_from_json(const std::string& text);
std::string boxplot_csv(const ClusterReport& report, const std::string& manifest_hash = {});

}  // namespace specprior
