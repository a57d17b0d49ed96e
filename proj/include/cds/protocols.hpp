#pragma once

// Evaluation protocols on fixtures with ground truth: synthetic scribbles
// with controlled errors, the loose-box sweep and the scribble-error sweep.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "cds/annotation.hpp"
#include "cds/fixtures.hpp"
#include "cds/segmentation.hpp"

namespace cds::seg {

struct ScribbleProtocol {
    int n_foreground = 50;
    int n_background = 50;
    /// Error zone: background pixels closer to the foreground than this
    /// percentage of the image diagonal.
    double error_zone_percent = 5.0;
    std::vector<int> error_counts = {0, 5, 10, 20, 30, 40, 50};
    std::uint64_t seed = 1;

    /// Throws InvalidArgument on negative sizes or decreasing error counts.
    void validate() const;
};

/// Background pixels within the error-zone distance of the foreground.
std::vector<Point> error_zone(const Mask& truth, double percent_of_diagonal);

/// scribble-with-errors annotation: n_foreground fg pixels and n_background
/// bg pixels sampled without replacement from the truth, plus error_count
/// error-zone pixels tagged fg. Every pixel is its own stroke. The samples
/// for smaller error counts are prefixes of those for larger ones. Throws
/// InvalidArgument when the truth lacks enough fg or bg pixels; a short error
/// zone is used whole with a warning.
Annotation generate_synthetic_scribbles(const Mask& truth, const ScribbleProtocol& protocol, int error_count,
                                        std::vector<std::string>* warnings = nullptr);

/// Segments once per candidate affinity and keeps the best result: highest
/// Jaccard for scribble kinds, lowest error rate in the effective box for box
/// kinds. Single and self-tuning strategies have one candidate.
struct EvaluatedRun {
    SegmentationResult result;
    std::string sigma;
};

class FixtureEvaluator {
public:
    FixtureEvaluator(const Fixture& fixture, const PipelineSettings& settings);

    EvaluatedRun run(const Annotation& annotation) const;
    [[nodiscard]] const PreparedImage& prepared() const { return prepared_; }
    [[nodiscard]] const Fixture& fixture() const { return fixture_; }

private:
    Fixture fixture_;
    PipelineSettings settings_;
    PreparedImage prepared_;
    std::vector<std::pair<std::string, AffinityMatrix>> candidates_;
    std::vector<std::string> warnings_;
};

struct LoosenessRow {
    std::string fixture;
    double looseness = 0.0;
    Box box;
    double error_rate = 0.0;          // inside the dilated box given to the method
    double error_rate_baseline = 0.0; // inside the L = 0 box
    double jaccard = 0.0;
    std::size_t clusters = 0;
    std::string sigma;
};

struct LoosenessReport {
    std::vector<double> looseness;
    std::vector<LoosenessRow> rows;
    std::vector<double> mean_error;
    std::vector<double> mean_error_baseline;
    /// mean_error at the largest looseness minus at the first.
    [[nodiscard]] double degradation() const;
};

LoosenessReport run_looseness_sweep(const std::vector<Fixture>& fixtures, const std::vector<double>& looseness,
                                    const PipelineSettings& settings);

struct ScribbleErrorRow {
    std::string fixture;
    int error_count = 0;
    double error_percent = 0.0; // error_count / n_foreground * 100
    double jaccard = 0.0;
    double dice = 0.0;
    std::size_t clusters = 0;
    std::size_t discarded = 0;
    std::string sigma;
    std::vector<std::string> warnings;
};

struct ScribbleErrorReport {
    std::vector<int> error_counts;
    std::vector<ScribbleErrorRow> rows;
    std::vector<double> mean_jaccard;
    /// mean_jaccard at the first level minus at the last.
    [[nodiscard]] double drop() const;
};

ScribbleErrorReport run_scribble_error_sweep(const std::vector<Fixture>& fixtures, const ScribbleProtocol& protocol,
                                             const PipelineSettings& settings);

struct ScribbleRow {
    std::string fixture;
    double jaccard = 0.0;
    double dice = 0.0;
    double error_rate = 0.0;
    std::string sigma;
};

/// Plain scribble mode with every fixture's hand-placed scribble.
std::vector<ScribbleRow> run_scribble_suite(const std::vector<Fixture>& fixtures, const PipelineSettings& settings);

std::string to_csv(const LoosenessReport& report);
std::string to_csv(const ScribbleErrorReport& report);
std::string to_csv(const std::vector<ScribbleRow>& rows);
nlohmann::ordered_json summary_json(const LoosenessReport& looseness, const ScribbleErrorReport& errors,
                                    const std::vector<ScribbleRow>& scribbles);

} // namespace cds::seg
