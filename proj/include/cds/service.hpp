#pragma once

// HTTP/JSON front end for the annotation UI.
//
//   POST   /sessions?superpixels=N   body: PNG or PPM bytes
//          -> {id, width, height, requested_superpixels, superpixels, boundaries:[{label, polygon:[[x,y],...]}]}
//   POST   /sessions/{id}/segment    body: annotation JSON, optional "settings":
//          {sigma_mode, sigma, knn_k, margin, dynamics}
//          -> {mask:{width, height, rle:[[start, length], ...]}, diagnostics:{...}}
//   GET    /sessions/{id}/mask.png   last mask, single channel 0/255
//   DELETE /sessions/{id}
//   GET    /healthz
//
// RLE runs cover foreground pixels in row-major order. Status codes: 400 bad
// upload or settings, 404 unknown session or no mask yet, 409 segmentation
// already running for the session, 422 invalid annotation.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cds/segmentation.hpp"

namespace httplib {
class Server;
}

namespace cds::seg {

struct ServiceResponse {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";
};

/// [start, length] runs of foreground pixels, row-major.
std::vector<std::pair<std::size_t, std::size_t>> run_length_encode(const Mask& mask);
Mask run_length_decode(int width, int height, const std::vector<std::pair<std::size_t, std::size_t>>& runs);

/// Outer boundary polygon of every superpixel, ordered by label.
nlohmann::json superpixel_boundaries(const SuperpixelMap& superpixels);

class SegmentationService {
public:
    explicit SegmentationService(PipelineSettings defaults = {});
    ~SegmentationService();
    SegmentationService(const SegmentationService&) = delete;
    SegmentationService& operator=(const SegmentationService&) = delete;

    ServiceResponse create_session(const std::string& image_bytes, int superpixels = 0);
    ServiceResponse segment(const std::string& id, const std::string& body);
    ServiceResponse mask_png(const std::string& id);
    ServiceResponse remove_session(const std::string& id);
    ServiceResponse health() const;

    /// Registers every route on `server`.
    void mount(httplib::Server& server);

    /// Runs inside segment() while the session is locked. For tests.
    void set_in_flight_hook(std::function<void()> hook);

    [[nodiscard]] std::size_t session_count() const;

private:
    struct Session;
    std::shared_ptr<Session> find(const std::string& id) const;

    PipelineSettings defaults_;
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    std::uint64_t next_id_ = 1;
    std::function<void()> hook_;
};

} // namespace cds::seg
