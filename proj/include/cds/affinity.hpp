#pragma once

#include <string>
#include <vector>

#include "cds/features.hpp"
#include "cds/graph.hpp"

namespace cds::seg {

enum class SigmaMode { kBest, kSingle, kSelfTuning };

std::string to_string(SigmaMode mode);
/// Accepts "best", "single" or "self-tuning".
SigmaMode parse_sigma_mode(const std::string& name);

struct SigmaStrategy {
    SigmaMode mode = SigmaMode::kSingle;
    double value = 0.15;
    double sweep_low = 0.05;
    double sweep_high = 0.2;
    int sweep_steps = 16;
    int knn_k = 7;

    /// Throws InvalidArgument on a nonpositive sigma, an empty or inverted
    /// sweep range, or knn_k < 1.
    void validate() const;
    /// Log-spaced grid from sweep_low to sweep_high inclusive.
    [[nodiscard]] std::vector<double> sweep() const;
    /// Stable text key, used for caching and diagnostics.
    [[nodiscard]] std::string key() const;

    static SigmaStrategy single(double sigma);
    static SigmaStrategy self_tuning(int k = 7);
    static SigmaStrategy best();
};

/// a_ij = exp(-|f_i - f_j|^2 / (2 sigma^2)) for i != j, zero diagonal.
AffinityMatrix gaussian_affinity(const std::vector<FeatureVector>& features, double sigma);

/// Local scaling: sigma^2 replaced by s_i * s_j, s_i the mean distance from
/// f_i to its k nearest neighbours. k is truncated to n - 1 and every s_i is
/// floored at 1e-6; both events append a warning when `warnings` is given.
AffinityMatrix self_tuning_affinity(const std::vector<FeatureVector>& features, int k,
                                    std::vector<std::string>* warnings = nullptr);

/// Dispatch on the strategy. kBest has no single matrix and throws
/// InvalidArgument; the evaluation harness sweeps it explicitly.
AffinityMatrix build_affinity(const std::vector<FeatureVector>& features, const SigmaStrategy& strategy,
                              std::vector<std::string>* warnings = nullptr);

} // namespace cds::seg
