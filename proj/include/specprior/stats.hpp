#pragma once

// Trend test, Fisher score and the speed-limit bound calculators.

#include <vector>

#include "specprior/numerics.hpp"

namespace specprior {

inline constexpr double kMargolusLevitinBeta = 0.724;

struct SpeedLimitInput {
    double delta_fid = 0;
    double mean_excess = 1;  // <H0 - sigma_min>
    double beta = kMargolusLevitinBeta;
};

double tau_weakest(const SpeedLimitInput& in);
double tau_save(double delta, double mean_excess, double beta = kMargolusLevitinBeta);

enum class MannKendallMode { Normal, Exact };

struct MannKendallResult {
    double s = 0;
    double tau = 0;
    double variance = 0;
    double z = 0;
    double p_value = 1;  // two-sided
    bool exact = false;
};

/// Exact mode is used only for n <= 10 without ties; otherwise falls back to Normal.
MannKendallResult mann_kendall(const std::vector<double>& series, MannKendallMode mode = MannKendallMode::Normal);

struct FisherScores {
    std::vector<double> score;     // +inf where flagged
    std::vector<bool> infinite;
    std::vector<int> ranking;      // feature indices, highest first
};

inline constexpr double kFisherDenominatorGuard = 1e-15;

FisherScores fisher_score(const RealMatrix& features, const std::vector<int>& labels);

}  // namespace specprior
