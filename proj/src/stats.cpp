#include "specprior/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>

namespace specprior {

double tau_weakest(const SpeedLimitInput& in) {
    if (!(in.delta_fid >= 0 && in.delta_fid <= 1)) throw Error(ErrorKind::DomainError, "delta_fid must lie in [0,1]");
    if (!(in.mean_excess > 0)) throw Error(ErrorKind::DomainError, "mean excess energy must be positive");
    if (!(in.beta > 0)) throw Error(ErrorKind::DomainError, "beta must be positive");
    const double ac = std::acos(std::sqrt(in.delta_fid));
    return 4 * ac * ac / (in.beta * std::numbers::pi * std::numbers::pi * in.mean_excess);
}

double tau_save(double delta, double mean_excess, double beta) {
    if (!(delta >= 0 && delta <= std::numbers::pi / 2)) throw Error(ErrorKind::DomainError, "delta must lie in [0, pi/2]");
    if (!(mean_excess > 0)) throw Error(ErrorKind::DomainError, "mean excess energy must be positive");
    if (!(beta > 0)) throw Error(ErrorKind::DomainError, "beta must be positive");
    return 4 * delta * delta / (beta * std::numbers::pi * std::numbers::pi * mean_excess);
}

namespace {

// Counts of permutations of n items by inversion number.
std::vector<double> mahonian(int n) {
    std::vector<double> row{1.0};
    for (int k = 2; k <= n; ++k) {
        std::vector<double> next(row.size() + static_cast<std::size_t>(k - 1), 0.0);
        for (std::size_t i = 0; i < row.size(); ++i) {
            for (int j = 0; j < k; ++j) next[i + static_cast<std::size_t>(j)] += row[i];
        }
        row = std::move(next);
    }
    return row;
}

}  // namespace

MannKendallResult mann_kendall(const std::vector<double>& x, MannKendallMode mode) {
    const int n = static_cast<int>(x.size());
    if (n < 4) throw Error(ErrorKind::TooShort, "Mann-Kendall needs at least 4 values");
    MannKendallResult r;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) r.s += (x[j] > x[i]) - (x[j] < x[i]);
    }
    const double pairs = n * (n - 1) / 2.0;
    r.tau = r.s / pairs;

    std::map<double, int> counts;
    for (double v : x) ++counts[v];
    double tie_term = 0;
    bool ties = false;
    for (const auto& [v, t] : counts) {
        if (t > 1) ties = true;
        tie_term += t * (t - 1.0) * (2.0 * t + 5.0);
    }
    r.variance = (n * (n - 1.0) * (2.0 * n + 5.0) - tie_term) / 18.0;

    if (mode == MannKendallMode::Exact && n <= 10 && !ties) {
        // S = pairs - 2 * inversions.
        const auto dist = mahonian(n);
        const double total = std::accumulate(dist.begin(), dist.end(), 0.0);
        double tail = 0;
        for (std::size_t inv = 0; inv < dist.size(); ++inv) {
            const double s = pairs - 2.0 * static_cast<double>(inv);
            if (std::abs(s) >= std::abs(r.s) - 1e-9) tail += dist[inv];
        }
        r.p_value = std::min(1.0, tail / total);
        r.exact = true;
        if (r.variance > 0) r.z = r.s / std::sqrt(r.variance);
        return r;
    }

    if (r.variance <= 0) {
        r.p_value = 1.0;
        return r;
    }
    if (r.s > 0) r.z = (r.s - 1) / std::sqrt(r.variance);
    else if (r.s < 0) r.z = (r.s + 1) / std::sqrt(r.variance);
    r.p_value = std::erfc(std::abs(r.z) / std::numbers::sqrt2);
    return r;
}

FisherScores fisher_score(const RealMatrix& features, const std::vector<int>& labels) {
    const Eigen::Index n = features.rows();
    if (static_cast<Eigen::Index>(labels.size()) != n) throw Error(ErrorKind::ShapeMismatch, "label count mismatch");
    std::map<int, std::vector<Eigen::Index>> classes;
    for (Eigen::Index i = 0; i < n; ++i) classes[labels[static_cast<std::size_t>(i)]].push_back(i);
    if (classes.size() < 2) throw Error(ErrorKind::DegenerateLabels, "need at least two classes");
    for (const auto& [c, rows] : classes) {
        if (rows.size() < 2) throw Error(ErrorKind::DegenerateLabels, "every class needs at least two members");
    }
    FisherScores out;
    const RealVector mu = features.colwise().mean();
    for (Eigen::Index f = 0; f < features.cols(); ++f) {
        double num = 0, den = 0;
        for (const auto& [c, rows] : classes) {
            double m = 0;
            for (auto i : rows) m += features(i, f);
            m /= static_cast<double>(rows.size());
            double var = 0;
            for (auto i : rows) var += (features(i, f) - m) * (features(i, f) - m);
            var /= static_cast<double>(rows.size());
            num += static_cast<double>(rows.size()) * (m - mu(f)) * (m - mu(f));
            den += static_cast<double>(rows.size()) * var;
        }
        if (den < kFisherDenominatorGuard) {
            const bool inf = num > kFisherDenominatorGuard;
            out.score.push_back(inf ? std::numeric_limits<double>::infinity() : 0.0);
            out.infinite.push_back(inf);
        } else {
            out.score.push_back(num / den);
            out.infinite.push_back(false);
        }
    }
    out.ranking.resize(out.score.size());
    std::iota(out.ranking.begin(), out.ranking.end(), 0);
    std::stable_sort(out.ranking.begin(), out.ranking.end(),
                     [&](int a, int b) { return out.score[static_cast<std::size_t>(a)] > out.score[static_cast<std::size_t>(b)]; });
    return out;
}

}  // namespace specprior
