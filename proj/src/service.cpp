#include "cds/service.hpp"

#include <chrono>

#include <httplib.h>
#include <opencv2/imgproc.hpp>

#include "cds/error.hpp"

namespace cds::seg {

struct SegmentationService::Session {
    std::mutex run; // held for the duration of one segmentation
    PreparedImage prepared;
    int requested_superpixels = 0;
    std::map<std::string, AffinityMatrix> affinity_cache;
    std::size_t cache_hits = 0;
    std::optional<Annotation> last_annotation;
    std::optional<Mask> last_mask;
};

std::vector<std::pair<std::size_t, std::size_t>> run_length_encode(const Mask& mask) {
    std::vector<std::pair<std::size_t, std::size_t>> runs;
    const auto& d = mask.data();
    std::size_t i = 0;
    while (i < d.size()) {
        if (!d[i]) {
            ++i;
            continue;
        }
        const std::size_t start = i;
        while (i < d.size() && d[i]) ++i;
        runs.emplace_back(start, i - start);
    }
    return runs;
}

Mask run_length_decode(int width, int height, const std::vector<std::pair<std::size_t, std::size_t>>& runs) {
    Mask m(width, height);
    const auto total = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    for (const auto& [start, length] : runs) {
        if (start + length > total) throw InvalidArgument("run exceeds mask size");
        for (std::size_t p = start; p < start + length; ++p) {
            m.set(static_cast<int>(p % static_cast<std::size_t>(width)), static_cast<int>(p / static_cast<std::size_t>(width)), 1);
        }
    }
    return m;
}

nlohmann::json superpixel_boundaries(const SuperpixelMap& sp) {
    std::vector<cv::Rect> bounds(static_cast<std::size_t>(sp.count), cv::Rect());
    std::vector<bool> seen(static_cast<std::size_t>(sp.count), false);
    for (int y = 0; y < sp.height; ++y)
        for (int x = 0; x < sp.width; ++x) {
            const auto l = static_cast<std::size_t>(sp.label(x, y));
            const cv::Rect px(x, y, 1, 1);
            bounds[l] = seen[l] ? (bounds[l] | px) : px;
            seen[l] = true;
        }
    nlohmann::json out = nlohmann::json::array();
    for (int l = 0; l < sp.count; ++l) {
        const cv::Rect r = bounds[static_cast<std::size_t>(l)];
        // One pixel of zero padding so contours never touch the ROI border.
        cv::Mat1b roi = cv::Mat1b::zeros(r.height + 2, r.width + 2);
        for (int y = 0; y < r.height; ++y)
            for (int x = 0; x < r.width; ++x)
                if (sp.label(r.x + x, r.y + y) == l) roi(y + 1, x + 1) = 255;
        std::vector<std::vector<cv::Point>> contours;
        cv::findContours(roi, contours, cv::RETR_EXTERNAL, cv::CHAIN_APPROX_SIMPLE);
        // Superpixels are 4-connected, so there is exactly one outer contour.
        nlohmann::json polygon = nlohmann::json::array();
        if (!contours.empty()) {
            for (const auto& p : contours.front()) polygon.push_back({p.x - 1 + r.x, p.y - 1 + r.y});
        }
        out.push_back({{"label", l}, {"polygon", polygon}});
    }
    return out;
}

namespace {

ServiceResponse json_response(int status, const nlohmann::json& body) { return {status, body.dump(), "application/json"}; }

ServiceResponse error_response(int status, const std::string& message) {
    return json_response(status, {{"error", message}, {"status", status}});
}

// Overrides from the optional "settings" object of a segment request.
PipelineSettings apply_overrides(PipelineSettings s, const nlohmann::json& doc) {
    if (!doc.contains("settings") || doc["settings"].is_null()) return s;
    const auto& o = doc["settings"];
    if (!o.is_object()) throw InvalidArgument("'settings' must be an object");
    try {
        if (o.contains("sigma_mode")) s.sigma.mode = parse_sigma_mode(o["sigma_mode"].get<std::string>());
        if (o.contains("sigma")) s.sigma.value = o["sigma"].get<double>();
        if (o.contains("knn_k")) s.sigma.knn_k = o["knn_k"].get<int>();
        if (o.contains("margin")) s.extraction.margin = o["margin"].get<double>();
        if (o.contains("dynamics")) s.extraction.dynamics = parse_dynamics(o["dynamics"].get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("bad settings: ") + e.what());
    }
    if (s.sigma.mode == SigmaMode::kBest) throw InvalidArgument("the best-sigma strategy needs ground truth");
    s.validate();
    return s;
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

} // namespace

SegmentationService::SegmentationService(PipelineSettings defaults) : defaults_(std::move(defaults)) {
    defaults_.validate();
}

SegmentationService::~SegmentationService() = default;

std::shared_ptr<SegmentationService::Session> SegmentationService::find(const std::string& id) const {
    std::lock_guard lock(mutex_);
    const auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
}

std::size_t SegmentationService::session_count() const {
    std::lock_guard lock(mutex_);
    return sessions_.size();
}

void SegmentationService::set_in_flight_hook(std::function<void()> hook) {
    std::lock_guard lock(mutex_);
    hook_ = std::move(hook);
}

ServiceResponse SegmentationService::create_session(const std::string& image_bytes, int superpixels) {
    const int requested = superpixels > 0 ? superpixels : defaults_.superpixels;
    if (requested < kMinSuperpixels || requested > kMaxSuperpixels) {
        return error_response(400, "superpixels must lie in [" + std::to_string(kMinSuperpixels) + ", " +
                                       std::to_string(kMaxSuperpixels) + "]");
    }
    auto session = std::make_shared<Session>();
    try {
        const auto* data = reinterpret_cast<const std::uint8_t*>(image_bytes.data());
        session->prepared = prepare_image(decode_image({data, image_bytes.size()}), requested, defaults_.slic);
    } catch (const Error& e) {
        return error_response(400, e.what());
    }
    session->requested_superpixels = requested;
    std::string id;
    {
        std::lock_guard lock(mutex_);
        id = std::to_string(next_id_++);
        sessions_[id] = session;
    }
    const auto& sp = session->prepared.superpixels;
    return json_response(200, {{"id", id},
                               {"width", sp.width},
                               {"height", sp.height},
                               {"requested_superpixels", requested},
                               {"superpixels", sp.count},
                               {"boundaries", superpixel_boundaries(sp)}});
}

ServiceResponse SegmentationService::segment(const std::string& id, const std::string& body) {
    const auto session = find(id);
    if (!session) return error_response(404, "unknown session " + id);
    std::unique_lock run(session->run, std::try_to_lock);
    if (!run.owns_lock()) return error_response(409, "a segmentation is already running for session " + id);
    std::function<void()> hook;
    {
        std::lock_guard lock(mutex_);
        hook = hook_;
    }
    if (hook) hook();

    const auto t0 = std::chrono::steady_clock::now();
    nlohmann::json doc;
    Annotation annotation;
    PipelineSettings settings;
    try {
        doc = nlohmann::json::parse(body);
        annotation = annotation_from_json(doc);
    } catch (const nlohmann::json::parse_error& e) {
        return error_response(422, std::string("annotation is not valid JSON: ") + e.what());
    } catch (const AnnotationError& e) {
        return error_response(422, e.what());
    }
    try {
        settings = apply_overrides(defaults_, doc);
    } catch (const Error& e) {
        return error_response(400, e.what());
    }

    const std::string key = settings.sigma.key();
    bool hit = false;
    std::vector<std::string> warnings;
    auto cached = session->affinity_cache.find(key);
    if (cached != session->affinity_cache.end()) {
        hit = true;
        ++session->cache_hits;
    } else {
        cached = session->affinity_cache
                     .emplace(key, build_affinity(session->prepared.features, settings.sigma, &warnings))
                     .first;
    }
    const double affinity_ms = elapsed_ms(t0);

    SegmentationResult result;
    try {
        result = segment_with_affinity(session->prepared, cached->second, annotation, settings.extraction, key);
    } catch (const AnnotationError& e) {
        return error_response(422, e.what());
    } catch (const Error& e) {
        return error_response(500, e.what());
    }
    result.warnings.insert(result.warnings.begin(), warnings.begin(), warnings.end());
    session->last_annotation = annotation;
    session->last_mask = result.mask;

    nlohmann::ordered_json diagnostics = diagnostics_json(result);
    diagnostics["affinity_cache_hit"] = hit;
    diagnostics["cache_hits"] = session->cache_hits;
    diagnostics["timing_ms"] = {{"affinity", affinity_ms}, {"total", elapsed_ms(t0)}};
    nlohmann::ordered_json rle = nlohmann::ordered_json::array();
    for (const auto& [start, length] : run_length_encode(result.mask)) rle.push_back({start, length});
    nlohmann::ordered_json out;
    out["mask"] = {{"width", result.mask.width()}, {"height", result.mask.height()}, {"rle", rle}};
    out["diagnostics"] = std::move(diagnostics);
    return {200, out.dump(), "application/json"};
}

ServiceResponse SegmentationService::mask_png(const std::string& id) {
    const auto session = find(id);
    if (!session) return error_response(404, "unknown session " + id);
    std::unique_lock run(session->run, std::try_to_lock);
    if (!run.owns_lock()) return error_response(409, "a segmentation is running for session " + id);
    if (!session->last_mask) return error_response(404, "session " + id + " has no mask yet");
    const auto png = encode_mask_png(*session->last_mask);
    return {200, std::string(png.begin(), png.end()), "image/png"};
}

ServiceResponse SegmentationService::remove_session(const std::string& id) {
    std::lock_guard lock(mutex_);
    if (sessions_.erase(id) == 0) return error_response(404, "unknown session " + id);
    return json_response(200, {{"deleted", id}});
}

ServiceResponse SegmentationService::health() const {
    return json_response(200, {{"status", "ok"}, {"sessions", session_count()}});
}

void SegmentationService::mount(httplib::Server& server) {
    const auto send = [](httplib::Response& res, const ServiceResponse& r) {
        res.status = r.status;
        res.set_content(r.body, r.content_type);
    };
    server.Post("/sessions", [this, send](const httplib::Request& req, httplib::Response& res) {
        int superpixels = 0;
        if (req.has_param("superpixels")) {
            try {
                superpixels = std::stoi(req.get_param_value("superpixels"));
            } catch (const std::exception&) {
                send(res, error_response(400, "superpixels must be an integer"));
                return;
            }
        }
        send(res, create_session(req.body, superpixels));
    });
    server.Post(R"(/sessions/([^/]+)/segment)", [this, send](const httplib::Request& req, httplib::Response& res) {
        send(res, segment(req.matches[1], req.body));
    });
    server.Get(R"(/sessions/([^/]+)/mask\.png)", [this, send](const httplib::Request& req, httplib::Response& res) {
        send(res, mask_png(req.matches[1]));
    });
    server.Delete(R"(/sessions/([^/]+))", [this, send](const httplib::Request& req, httplib::Response& res) {
        send(res, remove_session(req.matches[1]));
    });
    server.Get("/healthz", [this, send](const httplib::Request&, httplib::Response& res) { send(res, health()); });
}

} // namespace cds::seg
