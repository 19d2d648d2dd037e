#include "specprior/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "specprior/random.hpp"

namespace specprior {

namespace {

double sq_dist(const RealMatrix& a, Eigen::Index i, const RealMatrix& b, Eigen::Index j) {
    return (a.row(i) - b.row(j)).squaredNorm();
}

struct LloydRun {
    std::vector<int> assignment;
    RealMatrix centroids;
    double inertia;
    std::vector<double> history;
};

RealMatrix plus_plus_seeds(const RealMatrix& data, int k, SplitMix64& rng) {
    const Eigen::Index n = data.rows();
    RealMatrix c(k, data.cols());
    c.row(0) = data.row(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n))));
    std::vector<double> d2(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
    for (int j = 1; j < k; ++j) {
        double total = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            d2[static_cast<std::size_t>(i)] = std::min(d2[static_cast<std::size_t>(i)], sq_dist(data, i, c, j - 1));
            total += d2[static_cast<std::size_t>(i)];
        }
        Eigen::Index pick = n - 1;
        if (total > 0) {
            double r = rng.uniform() * total;
            for (Eigen::Index i = 0; i < n; ++i) {
                r -= d2[static_cast<std::size_t>(i)];
                if (r < 0) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
        }
        c.row(j) = data.row(pick);
    }
    return c;
}

LloydRun lloyd(const RealMatrix& data, RealMatrix centroids, int max_iters) {
    const Eigen::Index n = data.rows();
    const int k = static_cast<int>(centroids.rows());
    LloydRun run;
    run.assignment.assign(static_cast<std::size_t>(n), -1);
    for (int it = 0; it < max_iters; ++it) {
        bool changed = false;
        double inertia = 0;
        std::vector<double> dist(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) {
            int best = 0;
            double bd = sq_dist(data, i, centroids, 0);
            for (int j = 1; j < k; ++j) {
                const double d = sq_dist(data, i, centroids, j);
                if (d < bd) {
                    bd = d;
                    best = j;
                }
            }
            if (run.assignment[static_cast<std::size_t>(i)] != best) changed = true;
            run.assignment[static_cast<std::size_t>(i)] = best;
            dist[static_cast<std::size_t>(i)] = bd;
            inertia += bd;
        }
        run.history.push_back(inertia);
        run.inertia = inertia;
        if (!changed && it > 0) break;

        RealMatrix sum = RealMatrix::Zero(k, data.cols());
        std::vector<int> count(static_cast<std::size_t>(k), 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            const int a = run.assignment[static_cast<std::size_t>(i)];
            sum.row(a) += data.row(i);
            ++count[static_cast<std::size_t>(a)];
        }
        for (int j = 0; j < k; ++j) {
            if (count[static_cast<std::size_t>(j)] > 0) {
                centroids.row(j) = sum.row(j) / count[static_cast<std::size_t>(j)];
            } else {
                // Empty cluster: reseed on the worst-served point.
                const auto far = std::max_element(dist.begin(), dist.end()) - dist.begin();
                centroids.row(j) = data.row(far);
                dist[static_cast<std::size_t>(far)] = 0;
            }
        }
    }
    run.centroids = centroids;
    return run;
}

}  // namespace

EmbeddedDataset embed_angles(const std::vector<ParameterRecord>& records) {
    EmbeddedDataset out;
    if (records.empty()) {
        out.points.resize(0, 0);
        return out;
    }
    const auto& tag = records.front().ansatz_tag;
    const Eigen::Index p = records.front().theta.size();
    RealMatrix thetas(static_cast<Eigen::Index>(records.size()), p);
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (records[i].ansatz_tag != tag || records[i].theta.size() != p) {
            throw Error(ErrorKind::MixedAnsatz, "records mix ansatz tags or parameter counts");
        }
        thetas.row(static_cast<Eigen::Index>(i)) = records[i].theta.transpose();
        out.s.push_back(records[i].s);
        out.record.push_back(i);
    }
    out.points = embed_angles(thetas);
    return out;
}

RealMatrix embed_angles(const RealMatrix& thetas) {
    RealMatrix out(thetas.rows(), 2 * thetas.cols());
    for (Eigen::Index k = 0; k < thetas.cols(); ++k) {
        out.col(2 * k) = thetas.col(k).array().cos();
        out.col(2 * k + 1) = thetas.col(k).array().sin();
    }
    return out;
}

double beta_symmetric_upper_tail(double x, int m) {
    if (m < 1) throw Error(ErrorKind::InvalidArgument, "Beta shape must be >= 1");
    if (x <= 0) return 1.0;
    if (x >= 1) return 0.0;
    // P(X >= x) = sum_{j<m} C(2m-1, j) x^j (1-x)^(2m-1-j).
    const int n = 2 * m - 1;
    const double lx = std::log(x), l1x = std::log1p(-x);
    double p = 0;
    for (int j = 0; j < m; ++j) {
        const double lc = std::lgamma(n + 1.0) - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0);
        p += std::exp(lc + j * lx + (n - j) * l1x);
    }
    return std::clamp(p, 0.0, 1.0);
}

HopkinsResult hopkins_statistic(const RealMatrix& data, const HopkinsOptions& opts, std::uint64_t seed) {
    const Eigen::Index n = data.rows();
    const Eigen::Index d = data.cols();
    if (n < 10) throw Error(ErrorKind::TooFewPoints, "Hopkins statistic needs at least 10 points");
    if (!(opts.sample_fraction > 0 && opts.sample_fraction <= 0.5)) {
        throw Error(ErrorKind::InvalidArgument, "sample_fraction must lie in (0, 0.5]");
    }
    if (opts.repeats < 1) throw Error(ErrorKind::InvalidArgument, "repeats must be >= 1");
    HopkinsResult res;
    res.m = static_cast<int>(std::ceil(opts.sample_fraction * static_cast<double>(n)));
    const RealVector lo = data.colwise().minCoeff();
    const RealVector hi = data.colwise().maxCoeff();
    if ((hi - lo).maxCoeff() == 0.0) {
        res.mean = 1.0;
        res.p_value = 0.0;
        res.degenerate = true;
        return res;
    }
    const double power = opts.exponent > 0 ? opts.exponent : static_cast<double>(d);
    SplitMix64 rng(seed);
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    double acc = 0;
    RealVector u(d);
    for (int rep = 0; rep < opts.repeats; ++rep) {
        std::iota(idx.begin(), idx.end(), 0);
        // Partial Fisher-Yates for m distinct rows.
        for (int i = 0; i < res.m; ++i) {
            const auto j = i + static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n - i)));
            std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
        }
        double su = 0, sw = 0;
        for (int i = 0; i < res.m; ++i) {
            for (Eigen::Index c = 0; c < d; ++c) u(c) = rng.uniform(lo(c), hi(c));
            double best = std::numeric_limits<double>::infinity();
            for (Eigen::Index r = 0; r < n; ++r) best = std::min(best, (data.row(r).transpose() - u).squaredNorm());
            su += std::pow(std::sqrt(best), power);

            const Eigen::Index self = idx[static_cast<std::size_t>(i)];
            best = std::numeric_limits<double>::infinity();
            for (Eigen::Index r = 0; r < n; ++r) {
                if (r != self) best = std::min(best, (data.row(r) - data.row(self)).squaredNorm());
            }
            sw += std::pow(std::sqrt(best), power);
        }
        acc += (su + sw) > 0 ? su / (su + sw) : 1.0;
    }
    res.mean = acc / opts.repeats;
    res.p_value = beta_symmetric_upper_tail(res.mean, res.m);
    return res;
}

KMeansResult kmeans(const RealMatrix& data, int k, int restarts, int max_iters, std::uint64_t seed) {
    const Eigen::Index n = data.rows();
    if (k < 1) throw Error(ErrorKind::InvalidArgument, "k must be >= 1");
    if (k > n) throw Error(ErrorKind::KTooLarge, "k exceeds the number of points");
    if (restarts < 1 || max_iters < 1) throw Error(ErrorKind::InvalidArgument, "restarts and max_iters must be >= 1");
    KMeansResult best;
    best.inertia = std::numeric_limits<double>::infinity();
    for (int r = 0; r < restarts; ++r) {
        SplitMix64 rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
        LloydRun run = lloyd(data, plus_plus_seeds(data, k, rng), max_iters);
        if (run.inertia < best.inertia) {
            best.assignment = std::move(run.assignment);
            best.centroids = std::move(run.centroids);
            best.inertia = run.inertia;
            best.inertia_history = std::move(run.history);
        }
    }
    return best;
}

double silhouette(const RealMatrix& data, const std::vector<int>& assignment) {
    const auto n = static_cast<Eigen::Index>(assignment.size());
    if (n != data.rows()) throw Error(ErrorKind::ShapeMismatch, "assignment length differs from point count");
    std::vector<int> labels(assignment.begin(), assignment.end());
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    if (labels.size() < 2) throw Error(ErrorKind::SingleCluster, "silhouette needs at least two clusters");
    const auto slot = [&](int label) {
        return static_cast<std::size_t>(std::lower_bound(labels.begin(), labels.end(), label) - labels.begin());
    };
    std::vector<int> size(labels.size(), 0);
    for (int a : assignment) ++size[slot(a)];

    double total = 0;
    std::vector<double> sum(labels.size());
    for (Eigen::Index i = 0; i < n; ++i) {
        std::fill(sum.begin(), sum.end(), 0.0);
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j != i) sum[slot(assignment[static_cast<std::size_t>(j)])] += (data.row(i) - data.row(j)).norm();
        }
        const std::size_t own = slot(assignment[static_cast<std::size_t>(i)]);
        if (size[own] == 1) continue;  // singleton contributes 0
        const double a = sum[own] / (size[own] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < labels.size(); ++c) {
            if (c != own) b = std::min(b, sum[c] / size[c]);
        }
        const double denom = std::max(a, b);
        total += denom > 0 ? (b - a) / denom : 0.0;
    }
    return total / static_cast<double>(n);
}

double quantile(std::vector<double> values, double p) {
    if (values.empty()) throw Error(ErrorKind::TooFewValues, "quantile of empty list");
    std::sort(values.begin(), values.end());
    const double pos = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

std::vector<double> iqr_filter(const std::vector<double>& values, double multiplier) {
    if (values.size() < 4) throw Error(ErrorKind::TooFewValues, "IQR filter needs at least 4 values");
    const double q1 = quantile(values, 0.25), q3 = quantile(values, 0.75);
    const double lo = q1 - multiplier * (q3 - q1), hi = q3 + multiplier * (q3 - q1);
    std::vector<double> out;
    for (double v : values) {
        if (v >= lo && v <= hi) out.push_back(v);
    }
    return out;
}

void summarize_clusters(ClusterReport& report, const std::vector<double>& s, double iqr_multiplier) {
    report.clusters.clear();
    for (int c = 0; c < report.k; ++c) {
        ClusterSummary cs;
        cs.id = c;
        for (std::size_t i = 0; i < report.assignment.size(); ++i) {
            if (report.assignment[i] == c) {
                cs.members.push_back(i);
                cs.member_s.push_back(s[i]);
            }
        }
        if (cs.members.empty()) {
            report.warnings.push_back("cluster " + std::to_string(c) + " is empty");
            continue;
        }
        // Fewer than four members cannot be Tukey-filtered; kept as is.
        cs.filtered_s = cs.member_s.size() >= 4 ? iqr_filter(cs.member_s, iqr_multiplier) : cs.member_s;
        if (!cs.filtered_s.empty()) {
            cs.median_s = median(cs.filtered_s);
            cs.s_min = *std::min_element(cs.filtered_s.begin(), cs.filtered_s.end());
            cs.s_max = *std::max_element(cs.filtered_s.begin(), cs.filtered_s.end());
        }
        report.clusters.push_back(std::move(cs));
    }
}

ClusterReport select_k_and_cluster(const EmbeddedDataset& data, const ClusterOptions& opts, std::uint64_t seed) {
    const auto n = static_cast<int>(data.points.rows());
    if (n < 3) throw Error(ErrorKind::TooFewPoints, "clustering needs at least 3 points");
    ClusterReport report;
    if (n >= 10) {
        report.hopkins = hopkins_statistic(data.points, opts.hopkins, derive_seed(seed, 0xB0B));
    } else {
        report.warnings.push_back("fewer than 10 points: Hopkins statistic skipped");
    }

    const double spread = (data.points.colwise().maxCoeff() - data.points.colwise().minCoeff()).maxCoeff();
    if (spread == 0.0) {
        report.k = 1;
        report.assignment.assign(static_cast<std::size_t>(n), 0);
        report.centroids = data.points.topRows(1);
        report.warnings.push_back("degenerate data: all points coincide");
        summarize_clusters(report, data.s, opts.iqr_multiplier);
        return report;
    }

    const int k_max = std::min(opts.k_max, n - 1);
    if (opts.k_min < 2 || opts.k_min > k_max) {
        throw Error(ErrorKind::KTooLarge, "k range must lie within [2, N-1]");
    }
    double best_sil = -std::numeric_limits<double>::infinity();
    KMeansResult best;
    for (int k = opts.k_min; k <= k_max; ++k) {
        KMeansResult km = kmeans(data.points, k, opts.restarts, opts.max_iters, derive_seed(seed, static_cast<std::uint64_t>(k)));
        std::set<int> used(km.assignment.begin(), km.assignment.end());
        const double sil = used.size() >= 2 ? silhouette(data.points, km.assignment) : -1.0;
        report.silhouette_by_k.emplace_back(k, sil);
        if (sil > best_sil + 1e-12) {
            best_sil = sil;
            best = std::move(km);
            report.k = k;
        }
    }
    report.assignment = best.assignment;
    report.centroids = best.centroids;
    report.inertia = best.inertia;
    report.mean_silhouette = best_sil;
    summarize_clusters(report, data.s, opts.iqr_multiplier);
    if (report.clusters.size() == 1) report.warnings.push_back("single cluster spans the grid");
    return report;
}

std::vector<SpectrumEstimate> estimate_spectrum(const ClusterReport& report) {
    std::vector<SpectrumEstimate> out;
    for (const auto& c : report.clusters) {
        if (c.filtered_s.empty()) throw Error(ErrorKind::EmptyCluster, "cluster " + std::to_string(c.id) + " empty after filtering");
        out.push_back({c.id, c.median_s, c.s_min, c.s_max});
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return a.median_s < b.median_s || (a.median_s == b.median_s && a.cluster_id < b.cluster_id);
    });
    return out;
}

void ClusterSeparationCriteria::validate() const {
    if (!(std::numbers::pi / 2 > eps2 && eps2 > 2 * delta && delta > eps1 && eps1 > 0)) {
        throw Error(ErrorKind::InvalidArgument, "criteria must satisfy pi/2 > eps2 > 2 delta > delta > eps1 > 0");
    }
}

double ray_distance(const Statevector& a, const Statevector& b) {
    if (a.size() != b.size()) throw Error(ErrorKind::DimensionMismatch, "state sizes differ");
    return std::sqrt(std::max(0.0, 2.0 - 2.0 * std::abs(a.dot(b))));
}

SeparationReport validate_separation(const std::vector<ParameterRecord>& records, const AnsatzCircuit& ansatz,
                                     const ClusterSeparationCriteria& criteria, const HermitianEigen& eig,
                                     double degeneracy_tol) {
    criteria.validate();
    if (eig.dim() != (Eigen::Index{1} << ansatz.n_qubits)) {
        throw Error(ErrorKind::DimensionMismatch, "eigenvectors do not match ansatz qubit count");
    }
    // Group eigenvector columns by distinct eigenvalue.
    std::vector<std::vector<Eigen::Index>> groups;
    for (Eigen::Index i = 0; i < eig.dim(); ++i) {
        if (groups.empty() || eig.values(i) - eig.values(groups.back().front()) > degeneracy_tol) groups.emplace_back();
        groups.back().push_back(i);
    }
    SeparationReport rep;
    std::vector<Statevector> states;
    for (const auto& r : records) {
        const Statevector psi = apply_circuit(ansatz, r.theta, zero_state(ansatz.n_qubits));
        const ComplexVector c = eig.vectors.adjoint() * psi;
        int best = -1, within = 0;
        double bd = std::numeric_limits<double>::infinity();
        for (std::size_t g = 0; g < groups.size(); ++g) {
            double w = 0;
            for (Eigen::Index i : groups[g]) w += std::norm(c(i));
            const double dist = std::sqrt(std::max(0.0, 2.0 - 2.0 * std::sqrt(w)));
            if (dist <= criteria.delta) ++within;
            if (dist < bd) {
                bd = dist;
                best = static_cast<int>(g);
            }
        }
        rep.nearest_class.push_back(best);
        rep.distance.push_back(bd);
        rep.classes_within_delta.push_back(within);
        states.push_back(psi);
    }
    rep.min_inter_distance = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < states.size(); ++i) {
        for (std::size_t j = i + 1; j < states.size(); ++j) {
            const double d = ray_distance(states[i], states[j]);
            if (rep.nearest_class[i] == rep.nearest_class[j]) {
                rep.max_intra_distance = std::max(rep.max_intra_distance, d);
            } else {
                rep.min_inter_distance = std::min(rep.min_inter_distance, d);
            }
        }
    }
    rep.verdict = std::all_of(rep.classes_within_delta.begin(), rep.classes_within_delta.end(),
                              [](int w) { return w == 1; }) &&
                  rep.max_intra_distance < rep.min_inter_distance;
    return rep;
}

std::string report_to_json(const ClusterReport& report, const std::string& manifest_hash) {
    nlohmann::ordered_json j;
    if (!manifest_hash.empty()) j["manifest_hash"] = manifest_hash;
    j["k"] = report.k;
    j["inertia"] = report.inertia;
    j["mean_silhouette"] = report.mean_silhouette;
    j["hopkins_mean"] = report.hopkins.mean;
    j["hopkins_p"] = report.hopkins.p_value;
    j["hopkins_m"] = report.hopkins.m;
    j["hopkins_degenerate"] = report.hopkins.degenerate;
    j["assignment"] = report.assignment;
    nlohmann::ordered_json sil = nlohmann::ordered_json::array();
    for (const auto& [k, v] : report.silhouette_by_k) sil.push_back({{"k", k}, {"silhouette", v}});
    j["silhouette_by_k"] = sil;
    nlohmann::ordered_json cents = nlohmann::ordered_json::array();
    for (Eigen::Index r = 0; r < report.centroids.rows(); ++r) {
        cents.push_back(std::vector<double>(report.centroids.row(r).begin(), report.centroids.row(r).end()));
    }
    j["centroids"] = cents;
    nlohmann::ordered_json cl = nlohmann::ordered_json::array();
    for (const auto& c : report.clusters) {
        cl.push_back({{"id", c.id},
                      {"members", c.members},
                      {"member_s", c.member_s},
                      {"filtered_s", c.filtered_s},
                      {"median_s", c.median_s},
                      {"s_interval", {c.s_min, c.s_max}}});
        if (c.median_theta.size() > 0) {
            cl.back()["median_theta"] = std::vector<double>(c.median_theta.data(), c.median_theta.data() + c.median_theta.size());
        }
    }
    j["clusters"] = cl;
    j["warnings"] = report.warnings;
    return j.dump(2) + "\n";
}

ClusterReport report_from_json(const std::string& text) {
    ClusterReport r;
    try {
        const auto j = nlohmann::json::parse(text);
        r.k = j.at("k").get<int>();
        r.inertia = j.at("inertia").get<double>();
        r.mean_silhouette = j.at("mean_silhouette").get<double>();
        r.hopkins.mean = j.at("hopkins_mean").get<double>();
        r.hopkins.p_value = j.at("hopkins_p").get<double>();
        r.hopkins.m = j.at("hopkins_m").get<int>();
        r.hopkins.degenerate = j.at("hopkins_degenerate").get<bool>();
        r.assignment = j.at("assignment").get<std::vector<int>>();
        for (const auto& e : j.at("silhouette_by_k")) r.silhouette_by_k.emplace_back(e.at("k").get<int>(), e.at("silhouette").get<double>());
        const auto cents = j.at("centroids").get<std::vector<std::vector<double>>>();
        r.centroids.resize(static_cast<Eigen::Index>(cents.size()), cents.empty() ? 0 : static_cast<Eigen::Index>(cents[0].size()));
        for (std::size_t i = 0; i < cents.size(); ++i) {
            for (std::size_t c = 0; c < cents[i].size(); ++c) r.centroids(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = cents[i][c];
        }
        for (const auto& e : j.at("clusters")) {
            ClusterSummary c;
            c.id = e.at("id").get<int>();
            c.members = e.at("members").get<std::vector<std::size_t>>();
            c.member_s = e.at("member_s").get<std::vector<double>>();
            c.filtered_s = e.at("filtered_s").get<std::vector<double>>();
            c.median_s = e.at("median_s").get<double>();
            const auto iv = e.at("s_interval").get<std::vector<double>>();
            if (iv.size() != 2) throw Error(ErrorKind::ParseError, "s_interval must have two entries");
            c.s_min = iv[0];
            c.s_max = iv[1];
            if (e.contains("median_theta")) {
                const auto th = e.at("median_theta").get<std::vector<double>>();
                c.median_theta = Eigen::Map<const Eigen::VectorXd>(th.data(), static_cast<Eigen::Index>(th.size()));
            }
            r.clusters.push_back(std::move(c));
        }
        r.warnings = j.at("warnings").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ParseError, std::string("cluster report: ") + e.what());
    }
    return r;
}

std::string boxplot_csv(const ClusterReport& report, const std::string& manifest_hash) {
    std::ostringstream os;
    os.precision(17);
    if (!manifest_hash.empty()) os << "# manifest_hash=" << manifest_hash << '\n';
    os << "cluster_id,min,q1,median,q3,max,n_members,n_outliers\n";
    for (const auto& c : report.clusters) {
        if (c.filtered_s.empty()) continue;
        os << c.id << ',' << c.s_min << ',' << quantile(c.filtered_s, 0.25) << ',' << c.median_s << ','
           << quantile(c.filtered_s, 0.75) << ',' << c.s_max << ',' << c.member_s.size() << ','
           << c.member_s.size() - c.filtered_s.size() << '\n';
    }
    return os.str();
}

}  // namespace specprior
