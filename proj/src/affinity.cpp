#include "cds/affinity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "cds/error.hpp"

namespace cds::seg {

namespace {

constexpr double kScaleFloor = 1e-6;

void require_pairs(const std::vector<FeatureVector>& features) {
    if (features.size() < 2) throw InvalidArgument("affinity needs at least two feature vectors");
    for (const auto& f : features)
        for (double v : f)
            if (!std::isfinite(v)) throw InvalidArgument("feature vector has a non-finite entry");
}

Eigen::MatrixXd squared_distances(const std::vector<FeatureVector>& features) {
    const auto n = static_cast<Eigen::Index>(features.size());
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            double s = 0.0;
            const auto& a = features[static_cast<std::size_t>(i)];
            const auto& b = features[static_cast<std::size_t>(j)];
            for (int k = 0; k < kFeatureDimension; ++k) {
                const double diff = a[static_cast<std::size_t>(k)] - b[static_cast<std::size_t>(k)];
                s += diff * diff;
            }
            d(i, j) = s;
            d(j, i) = s;
        }
    }
    return d;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

} // namespace

std::string to_string(SigmaMode mode) {
    switch (mode) {
    case SigmaMode::kBest:
        return "best";
    case SigmaMode::kSingle:
        return "single";
    case SigmaMode::kSelfTuning:
        return "self-tuning";
    }
    return "single";
}

SigmaMode parse_sigma_mode(const std::string& name) {
    if (name == "best") return SigmaMode::kBest;
    if (name == "single") return SigmaMode::kSingle;
    if (name == "self-tuning") return SigmaMode::kSelfTuning;
    throw InvalidArgument("unknown sigma mode '" + name + "' (expected best, single or self-tuning)");
}

void SigmaStrategy::validate() const {
    switch (mode) {
    case SigmaMode::kSingle:
        if (!(value > 0.0) || !std::isfinite(value)) throw InvalidArgument("sigma must be positive");
        break;
    case SigmaMode::kBest:
        if (!(sweep_low > 0.0) || !(sweep_high >= sweep_low) || sweep_steps < 1) {
            throw InvalidArgument("sigma sweep needs 0 < low <= high and at least one step");
        }
        break;
    case SigmaMode::kSelfTuning:
        if (knn_k < 1) throw InvalidArgument("knn_k must be at least 1");
        break;
    }
}

std::vector<double> SigmaStrategy::sweep() const {
    validate();
    std::vector<double> out;
    if (sweep_steps == 1) return {sweep_low};
    const double lo = std::log(sweep_low);
    const double hi = std::log(sweep_high);
    for (int i = 0; i < sweep_steps; ++i) out.push_back(std::exp(lo + (hi - lo) * i / (sweep_steps - 1)));
    out.front() = sweep_low;
    out.back() = sweep_high;
    return out;
}

std::string SigmaStrategy::key() const {
    switch (mode) {
    case SigmaMode::kSingle:
        return "single:" + format_double(value);
    case SigmaMode::kSelfTuning:
        return "self-tuning:" + std::to_string(knn_k);
    case SigmaMode::kBest:
        return "best:" + format_double(sweep_low) + "-" + format_double(sweep_high) + "/" + std::to_string(sweep_steps);
    }
    return {};
}

SigmaStrategy SigmaStrategy::single(double sigma) {
    SigmaStrategy s;
    s.mode = SigmaMode::kSingle;
    s.value = sigma;
    return s;
}

SigmaStrategy SigmaStrategy::self_tuning(int k) {
    SigmaStrategy s;
    s.mode = SigmaMode::kSelfTuning;
    s.knn_k = k;
    return s;
}

SigmaStrategy SigmaStrategy::best() {
    SigmaStrategy s;
    s.mode = SigmaMode::kBest;
    return s;
}

AffinityMatrix gaussian_affinity(const std::vector<FeatureVector>& features, double sigma) {
    require_pairs(features);
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidArgument("sigma must be positive");
    Eigen::MatrixXd w = squared_distances(features);
    const double denom = 2.0 * sigma * sigma;
    w = (-w.array() / denom).exp().matrix();
    w.diagonal().setZero();
    return AffinityMatrix::from_dense(w);
}

AffinityMatrix self_tuning_affinity(const std::vector<FeatureVector>& features, int k, std::vector<std::string>* warnings) {
    require_pairs(features);
    if (k < 1) throw InvalidArgument("knn_k must be at least 1");
    const auto n = static_cast<Eigen::Index>(features.size());
    if (k > n - 1) {
        if (warnings) {
            warnings->push_back("knn_k=" + std::to_string(k) + " exceeds n-1=" + std::to_string(n - 1) +
                                "; using " + std::to_string(n - 1) + " neighbours");
        }
        k = static_cast<int>(n - 1);
    }
    const Eigen::MatrixXd d2 = squared_distances(features);
    std::vector<double> scale(static_cast<std::size_t>(n));
    int floored = 0;
    std::vector<double> row;
    for (Eigen::Index i = 0; i < n; ++i) {
        row.clear();
        for (Eigen::Index j = 0; j < n; ++j)
            if (j != i) row.push_back(std::sqrt(d2(i, j)));
        std::partial_sort(row.begin(), row.begin() + k, row.end());
        double s = 0.0;
        for (int t = 0; t < k; ++t) s += row[static_cast<std::size_t>(t)];
        s /= k;
        if (s < kScaleFloor) {
            s = kScaleFloor;
            ++floored;
        }
        scale[static_cast<std::size_t>(i)] = s;
    }
    if (floored > 0 && warnings) {
        warnings->push_back(std::to_string(floored) + " local scale(s) floored at 1e-6");
    }
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double v = std::exp(-d2(i, j) / (2.0 * scale[static_cast<std::size_t>(i)] * scale[static_cast<std::size_t>(j)]));
            w(i, j) = v;
            w(j, i) = v;
        }
    }
    return AffinityMatrix::from_dense(w);
}

AffinityMatrix build_affinity(const std::vector<FeatureVector>& features, const SigmaStrategy& strategy,
                              std::vector<std::string>* warnings) {
    strategy.validate();
    switch (strategy.mode) {
    case SigmaMode::kSingle:
        return gaussian_affinity(features, strategy.value);
    case SigmaMode::kSelfTuning:
        return self_tuning_affinity(features, strategy.knn_k, warnings);
    case SigmaMode::kBest:
        break;
    }
    throw InvalidArgument("the best-sigma strategy needs ground truth and is only available in evaluation");
}

} // namespace cds::seg
