#include "cds/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <random>
#include <sstream>

#include <opencv2/imgproc.hpp>

#include "cds/error.hpp"
#include "cds/metrics.hpp"

namespace cds::seg {

void ScribbleProtocol::validate() const {
    if (n_foreground < 1 || n_background < 1) throw InvalidArgument("scribble protocol needs fg and bg samples");
    if (!(error_zone_percent > 0.0)) throw InvalidArgument("error zone distance must be positive");
    for (std::size_t i = 0; i < error_counts.size(); ++i) {
        if (error_counts[i] < 0) throw InvalidArgument("error counts must be >= 0");
        if (i > 0 && error_counts[i] < error_counts[i - 1]) throw InvalidArgument("error counts must be non-decreasing");
    }
}

std::vector<Point> error_zone(const Mask& truth, double percent_of_diagonal) {
    cv::Mat1b background(truth.height(), truth.width());
    bool any_fg = false;
    for (int y = 0; y < truth.height(); ++y)
        for (int x = 0; x < truth.width(); ++x) {
            background(y, x) = truth.at(x, y) ? 0 : 255;
            any_fg = any_fg || truth.at(x, y);
        }
    std::vector<Point> out;
    if (!any_fg) return out;
    cv::Mat1f dist;
    cv::distanceTransform(background, dist, cv::DIST_L2, cv::DIST_MASK_PRECISE);
    const double limit = percent_of_diagonal / 100.0 * std::hypot(truth.width(), truth.height());
    for (int y = 0; y < truth.height(); ++y)
        for (int x = 0; x < truth.width(); ++x)
            if (!truth.at(x, y) && dist(y, x) < limit) out.push_back(Point{x, y});
    return out;
}

namespace {

// Partial Fisher-Yates on a copy; the first k entries are the sample. Uses
// raw engine output so results do not depend on library distributions.
std::vector<Point> sample(std::vector<Point> pool, std::size_t k, std::mt19937_64& rng) {
    k = std::min(k, pool.size());
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng() % (pool.size() - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
}

Stroke pixel_stroke(StrokeTag tag, Point p) { return Stroke{tag, {p}}; }

} // namespace

Annotation generate_synthetic_scribbles(const Mask& truth, const ScribbleProtocol& protocol, int error_count,
                                        std::vector<std::string>* warnings) {
    protocol.validate();
    if (error_count < 0) throw InvalidArgument("error count must be >= 0");
    std::vector<Point> fg;
    std::vector<Point> bg;
    for (int y = 0; y < truth.height(); ++y)
        for (int x = 0; x < truth.width(); ++x) (truth.at(x, y) ? fg : bg).push_back(Point{x, y});
    if (fg.size() < static_cast<std::size_t>(protocol.n_foreground)) {
        throw InvalidArgument("ground truth has fewer foreground pixels than the protocol samples");
    }
    if (bg.size() < static_cast<std::size_t>(protocol.n_background)) {
        throw InvalidArgument("ground truth has fewer background pixels than the protocol samples");
    }
    std::mt19937_64 rng(protocol.seed);
    const auto fg_sample = sample(std::move(fg), static_cast<std::size_t>(protocol.n_foreground), rng);
    const auto bg_sample = sample(std::move(bg), static_cast<std::size_t>(protocol.n_background), rng);
    auto zone = error_zone(truth, protocol.error_zone_percent);
    // Draw the whole zone order so every error count reads a prefix of it.
    const std::size_t zone_size = zone.size();
    const auto zone_order = sample(std::move(zone), zone_size, rng);
    std::size_t errors = static_cast<std::size_t>(error_count);
    if (errors > zone_order.size()) {
        if (warnings) {
            warnings->push_back("error zone has " + std::to_string(zone_order.size()) + " pixels; requested " +
                                std::to_string(error_count));
        }
        errors = zone_order.size();
    }

    Annotation a;
    a.kind = AnnotationKind::kScribbleWithErrors;
    for (const auto& p : fg_sample) a.strokes.push_back(pixel_stroke(StrokeTag::kForeground, p));
    for (std::size_t i = 0; i < errors; ++i) a.strokes.push_back(pixel_stroke(StrokeTag::kForeground, zone_order[i]));
    for (const auto& p : bg_sample) a.strokes.push_back(pixel_stroke(StrokeTag::kBackground, p));
    a.validate();
    return a;
}

FixtureEvaluator::FixtureEvaluator(const Fixture& fixture, const PipelineSettings& settings)
    : fixture_(fixture), settings_(settings) {
    settings_.validate();
    prepared_ = prepare_image(fixture_.image, settings_.superpixels, settings_.slic);
    if (settings_.sigma.mode == SigmaMode::kBest) {
        for (double s : settings_.sigma.sweep()) {
            const SigmaStrategy single = SigmaStrategy::single(s);
            candidates_.emplace_back(single.key(), build_affinity(prepared_.features, single, &warnings_));
        }
    } else {
        candidates_.emplace_back(settings_.sigma.key(), build_affinity(prepared_.features, settings_.sigma, &warnings_));
    }
}

EvaluatedRun FixtureEvaluator::run(const Annotation& annotation) const {
    std::optional<EvaluatedRun> best;
    double best_score = -1.0;
    for (const auto& [key, affinity] : candidates_) {
        SegmentationResult r = segment_with_affinity(prepared_, affinity, annotation, settings_.extraction, key);
        double score;
        if (is_box_kind(annotation.kind)) {
            score = 1.0 - error_rate(r.mask, fixture_.truth, *r.constraints.effective_box);
        } else {
            score = jaccard(r.mask, fixture_.truth);
        }
        // Strict improvement keeps the smallest sigma on ties.
        if (!best || score > best_score) {
            best_score = score;
            r.warnings.insert(r.warnings.begin(), warnings_.begin(), warnings_.end());
            best = EvaluatedRun{std::move(r), key};
        }
    }
    return std::move(*best);
}

namespace {

template <class Row, class Fn>
std::vector<std::vector<Row>> per_fixture(const std::vector<Fixture>& fixtures, Fn fn) {
    std::vector<std::future<std::vector<Row>>> jobs;
    jobs.reserve(fixtures.size());
    for (const auto& f : fixtures) jobs.push_back(std::async(std::launch::async, fn, std::cref(f)));
    std::vector<std::vector<Row>> out;
    out.reserve(jobs.size());
    for (auto& j : jobs) out.push_back(j.get());
    return out;
}

double mean(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

} // namespace

double LoosenessReport::degradation() const {
    if (mean_error.empty()) return 0.0;
    return mean_error.back() - mean_error.front();
}

LoosenessReport run_looseness_sweep(const std::vector<Fixture>& fixtures, const std::vector<double>& looseness,
                                    const PipelineSettings& settings) {
    if (looseness.empty()) throw InvalidArgument("looseness sweep needs at least one value");
    const auto per = per_fixture<LoosenessRow>(fixtures, [&](const Fixture& f) {
        const FixtureEvaluator eval(f, settings);
        std::vector<LoosenessRow> rows;
        for (double l : looseness) {
            const EvaluatedRun run = eval.run(f.box_annotation(l));
            LoosenessRow row;
            row.fixture = f.name;
            row.looseness = l;
            row.box = *run.result.constraints.effective_box;
            row.error_rate = error_rate(run.result.mask, f.truth, row.box);
            row.error_rate_baseline = error_rate(run.result.mask, f.truth, f.baseline_box);
            row.jaccard = jaccard(run.result.mask, f.truth);
            row.clusters = run.result.extraction.clusters.size();
            row.sigma = run.sigma;
            rows.push_back(row);
        }
        return rows;
    });
    LoosenessReport report;
    report.looseness = looseness;
    for (std::size_t k = 0; k < looseness.size(); ++k) {
        std::vector<double> e;
        std::vector<double> eb;
        for (const auto& rows : per) {
            e.push_back(rows[k].error_rate);
            eb.push_back(rows[k].error_rate_baseline);
        }
        report.mean_error.push_back(mean(e));
        report.mean_error_baseline.push_back(mean(eb));
    }
    for (const auto& rows : per) report.rows.insert(report.rows.end(), rows.begin(), rows.end());
    return report;
}

double ScribbleErrorReport::drop() const {
    if (mean_jaccard.empty()) return 0.0;
    return mean_jaccard.front() - mean_jaccard.back();
}

ScribbleErrorReport run_scribble_error_sweep(const std::vector<Fixture>& fixtures, const ScribbleProtocol& protocol,
                                             const PipelineSettings& settings) {
    protocol.validate();
    if (protocol.error_counts.empty()) throw InvalidArgument("scribble sweep needs at least one error count");
    const auto per = per_fixture<ScribbleErrorRow>(fixtures, [&](const Fixture& f) {
        const FixtureEvaluator eval(f, settings);
        std::vector<ScribbleErrorRow> rows;
        for (int count : protocol.error_counts) {
            ScribbleErrorRow row;
            const Annotation a = generate_synthetic_scribbles(f.truth, protocol, count, &row.warnings);
            const EvaluatedRun run = eval.run(a);
            row.fixture = f.name;
            row.error_count = count;
            row.error_percent = 100.0 * count / protocol.n_foreground;
            row.jaccard = jaccard(run.result.mask, f.truth, &row.warnings);
            row.dice = dice(run.result.mask, f.truth);
            row.clusters = run.result.extraction.clusters.size();
            row.discarded = static_cast<std::size_t>(
                std::count(run.result.discarded.begin(), run.result.discarded.end(), true));
            row.sigma = run.sigma;
            row.warnings.insert(row.warnings.end(), run.result.warnings.begin(), run.result.warnings.end());
            rows.push_back(std::move(row));
        }
        return rows;
    });
    ScribbleErrorReport report;
    report.error_counts = protocol.error_counts;
    for (std::size_t k = 0; k < protocol.error_counts.size(); ++k) {
        std::vector<double> j;
        for (const auto& rows : per) j.push_back(rows[k].jaccard);
        report.mean_jaccard.push_back(mean(j));
    }
    for (const auto& rows : per) report.rows.insert(report.rows.end(), rows.begin(), rows.end());
    return report;
}

std::vector<ScribbleRow> run_scribble_suite(const std::vector<Fixture>& fixtures, const PipelineSettings& settings) {
    const auto per = per_fixture<ScribbleRow>(fixtures, [&](const Fixture& f) {
        const FixtureEvaluator eval(f, settings);
        const EvaluatedRun run = eval.run(f.scribble_annotation());
        ScribbleRow row;
        row.fixture = f.name;
        row.jaccard = jaccard(run.result.mask, f.truth);
        row.dice = dice(run.result.mask, f.truth);
        row.error_rate = error_rate(run.result.mask, f.truth, f.baseline_box);
        row.sigma = run.sigma;
        return std::vector<ScribbleRow>{row};
    });
    std::vector<ScribbleRow> out;
    for (const auto& rows : per) out.insert(out.end(), rows.begin(), rows.end());
    return out;
}

std::string to_csv(const LoosenessReport& report) {
    std::ostringstream os;
    os << "fixture,looseness,box_x,box_y,box_w,box_h,error_rate,error_rate_baseline_box,jaccard,clusters,sigma\n";
    for (const auto& r : report.rows) {
        os << r.fixture << ',' << fmt(r.looseness) << ',' << r.box.x << ',' << r.box.y << ',' << r.box.width << ','
           << r.box.height << ',' << fmt(r.error_rate) << ',' << fmt(r.error_rate_baseline) << ',' << fmt(r.jaccard)
           << ',' << r.clusters << ',' << r.sigma << '\n';
    }
    return os.str();
}

std::string to_csv(const ScribbleErrorReport& report) {
    std::ostringstream os;
    os << "fixture,error_count,error_percent,jaccard,dice,clusters,discarded,sigma\n";
    for (const auto& r : report.rows) {
        os << r.fixture << ',' << r.error_count << ',' << fmt(r.error_percent) << ',' << fmt(r.jaccard) << ','
           << fmt(r.dice) << ',' << r.clusters << ',' << r.discarded << ',' << r.sigma << '\n';
    }
    return os.str();
}

std::string to_csv(const std::vector<ScribbleRow>& rows) {
    std::ostringstream os;
    os << "fixture,jaccard,dice,error_rate_baseline_box,sigma\n";
    for (const auto& r : rows) {
        os << r.fixture << ',' << fmt(r.jaccard) << ',' << fmt(r.dice) << ',' << fmt(r.error_rate) << ',' << r.sigma
           << '\n';
    }
    return os.str();
}

nlohmann::ordered_json summary_json(const LoosenessReport& looseness, const ScribbleErrorReport& errors,
                                    const std::vector<ScribbleRow>& scribbles) {
    nlohmann::ordered_json doc;
    std::vector<double> j;
    for (const auto& r : scribbles) j.push_back(r.jaccard);
    doc["scribble"] = {{"fixtures", scribbles.size()}, {"mean_jaccard", mean(j)}};
    nlohmann::ordered_json loose = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < looseness.looseness.size(); ++k) {
        loose.push_back({{"looseness", looseness.looseness[k]},
                         {"mean_error_rate", looseness.mean_error[k]},
                         {"mean_error_rate_baseline_box", looseness.mean_error_baseline[k]}});
    }
    doc["looseness_sweep"] = {{"levels", loose}, {"degradation", looseness.degradation()}};
    nlohmann::ordered_json levels = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < errors.error_counts.size(); ++k) {
        levels.push_back({{"error_count", errors.error_counts[k]}, {"mean_jaccard", errors.mean_jaccard[k]}});
    }
    doc["scribble_error_sweep"] = {{"levels", levels}, {"jaccard_drop", errors.drop()}};
    return doc;
}

} // namespace cds::seg
