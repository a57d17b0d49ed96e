#include <doctest.h>

#include <atomic>
#include <future>
#include <random>
#include <thread>

#include "cds/error.hpp"
#include "cds/fixtures.hpp"
#include "cds/service.hpp"

// Last: it pulls in <resolv.h>, whose _res macro breaks Eigen templates.
#include <httplib.h>

using namespace cds;
using namespace cds::seg;
using json = nlohmann::json;

namespace {

constexpr int kSuperpixels = 120;

std::string png_bytes(const Image& image) {
    const auto png = encode_png(image);
    return {png.begin(), png.end()};
}

Image gradient(int w, int h) {
    Image img(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            img.set(x, y, {static_cast<std::uint8_t>(4 * x % 256), static_cast<std::uint8_t>(3 * y % 256), 100});
    return img;
}

PipelineSettings service_settings() {
    PipelineSettings s;
    s.superpixels = kSuperpixels;
    return s;
}

Mask rle_mask(const json& mask) {
    std::vector<std::pair<std::size_t, std::size_t>> runs;
    for (const auto& r : mask.at("rle")) runs.emplace_back(r.at(0).get<std::size_t>(), r.at(1).get<std::size_t>());
    return run_length_decode(mask.at("width").get<int>(), mask.at("height").get<int>(), runs);
}

// The service adds cache and timing keys to the deterministic diagnostics.
json strip_service_keys(json diagnostics) {
    diagnostics.erase("affinity_cache_hit");
    diagnostics.erase("cache_hits");
    diagnostics.erase("timing_ms");
    return diagnostics;
}

std::string create(SegmentationService& service, const Image& image) {
    const auto r = service.create_session(png_bytes(image), kSuperpixels);
    REQUIRE(r.status == 200);
    return json::parse(r.body).at("id").get<std::string>();
}

} // namespace

TEST_CASE("run length encoding round trip") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        const int w = std::uniform_int_distribution<int>(1, 30)(rng);
        const int h = std::uniform_int_distribution<int>(1, 30)(rng);
        std::bernoulli_distribution on(std::uniform_real_distribution<double>(0.0, 1.0)(rng));
        Mask m(w, h);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) m.set(x, y, on(rng) ? 1 : 0);
        const auto runs = run_length_encode(m);
        CHECK(run_length_decode(w, h, runs) == m);
        std::size_t total = 0;
        for (std::size_t k = 0; k < runs.size(); ++k) {
            CHECK(runs[k].second > 0);
            total += runs[k].second;
            // Runs are maximal: separated by at least one background pixel.
            if (k > 0) CHECK(runs[k].first > runs[k - 1].first + runs[k - 1].second);
        }
        CHECK(total == m.count());
    }
    Mask row(4, 2);
    row.set(1, 0, 1);
    row.set(2, 0, 1);
    row.set(3, 0, 1);
    row.set(0, 1, 1);
    // Runs continue across row ends.
    CHECK(run_length_encode(row) == std::vector<std::pair<std::size_t, std::size_t>>{{1, 4}});
    CHECK_THROWS_AS(run_length_decode(4, 2, {{6, 3}}), InvalidArgument);
}

TEST_CASE("superpixel boundaries cover every label") {
    const auto prepared = prepare_image(gradient(64, 48), 30);
    const json b = superpixel_boundaries(prepared.superpixels);
    REQUIRE(b.size() == static_cast<std::size_t>(prepared.superpixels.count));
    for (int l = 0; l < prepared.superpixels.count; ++l) {
        const auto& entry = b[static_cast<std::size_t>(l)];
        CHECK(entry.at("label") == l);
        const auto& polygon = entry.at("polygon");
        REQUIRE_FALSE(polygon.empty());
        for (const auto& p : polygon) {
            const int x = p.at(0);
            const int y = p.at(1);
            CHECK(x >= 0);
            CHECK(y >= 0);
            CHECK(x < 64);
            CHECK(y < 48);
            // Vertices lie on pixels of their own superpixel.
            CHECK(prepared.superpixels.label(x, y) == l);
        }
    }
}

TEST_CASE("session upload and errors") {
    SegmentationService service(service_settings());
    CHECK(service.create_session("not an image").status == 400);
    CHECK(service.create_session(png_bytes(gradient(64, 64)), 1).status == 400);
    CHECK(service.create_session(png_bytes(gradient(64, 64)), 100000).status == 400);
    CHECK(service.session_count() == 0);

    const auto r = service.create_session(png_bytes(gradient(64, 64)), 40);
    REQUIRE(r.status == 200);
    const json doc = json::parse(r.body);
    CHECK(doc.at("width") == 64);
    CHECK(doc.at("height") == 64);
    CHECK(doc.at("requested_superpixels") == 40);
    const int count = doc.at("superpixels");
    CHECK(count >= 32);
    CHECK(count <= 48);
    CHECK(doc.at("boundaries").size() == static_cast<std::size_t>(count));
    CHECK(service.session_count() == 1);

    // Defaults apply when no count is given.
    const auto d = service.create_session(png_bytes(gradient(64, 64)));
    REQUIRE(d.status == 200);
    CHECK(json::parse(d.body).at("requested_superpixels") == kSuperpixels);
    CHECK(json::parse(d.body).at("id") != doc.at("id"));
}

TEST_CASE("segment handler status codes") {
    const auto fixture = make_fixtures().front();
    SegmentationService service(service_settings());
    const std::string id = create(service, fixture.image);
    const json scribble = to_json(fixture.scribble_annotation());

    CHECK(service.segment("999", scribble.dump()).status == 404);
    CHECK(service.mask_png(id).status == 404);
    CHECK(service.segment(id, "{not json").status == 422);
    CHECK(service.segment(id, R"({"kind":"scribble-foreground","strokes":[]})").status == 422);
    CHECK(service.segment(id, R"({"kind":"lasso"})").status == 422);

    json bad = scribble;
    bad["settings"] = {{"sigma_mode", "best"}};
    CHECK(service.segment(id, bad.dump()).status == 400);
    bad["settings"] = {{"sigma", -1.0}};
    CHECK(service.segment(id, bad.dump()).status == 400);
    bad["settings"] = {{"dynamics", "newton"}};
    CHECK(service.segment(id, bad.dump()).status == 400);
    bad["settings"] = "fast";
    CHECK(service.segment(id, bad.dump()).status == 400);

    // A stroke off the image is an annotation error.
    json outside = scribble;
    outside["strokes"] = json::array({{{"tag", "fg"}, {"points", {{500, 500}}}}});
    const auto off = service.segment(id, outside.dump());
    CHECK(off.status == 422);
    CHECK(service.mask_png(id).status == 404);
}

TEST_CASE("service mask matches the library path") {
    const auto fixtures = make_fixtures();
    SegmentationService service(service_settings());
    for (const auto& fixture : {fixtures[0], fixtures[3]}) {
        CAPTURE(fixture.name);
        const std::string id = create(service, fixture.image);
        for (const auto& annotation : {fixture.scribble_annotation(), fixture.box_annotation(120.0)}) {
            const auto r = service.segment(id, to_json(annotation).dump());
            REQUIRE(r.status == 200);
            const json doc = json::parse(r.body);
            const auto expected = segment(fixture.image, annotation, service_settings());
            CHECK(rle_mask(doc.at("mask")) == expected.mask);
            CHECK(strip_service_keys(doc.at("diagnostics")) == json::parse(diagnostics_json(expected).dump()));

            const auto png = service.mask_png(id);
            REQUIRE(png.status == 200);
            CHECK(png.content_type == "image/png");
            const auto bytes = encode_mask_png(expected.mask);
            CHECK(png.body == std::string(bytes.begin(), bytes.end()));
        }
    }
}

TEST_CASE("affinity cache is reused per sigma key") {
    const auto fixture = make_fixtures().front();
    SegmentationService service(service_settings());
    const std::string id = create(service, fixture.image);
    const auto run = [&](const json& body) {
        const auto r = service.segment(id, body.dump());
        REQUIRE(r.status == 200);
        return json::parse(r.body).at("diagnostics");
    };
    json body = to_json(fixture.scribble_annotation());
    auto d = run(body);
    CHECK(d.at("affinity_cache_hit") == false);
    CHECK(d.at("cache_hits") == 0);
    CHECK(d.at("timing_ms").contains("total"));

    d = run(to_json(fixture.box_annotation()));
    CHECK(d.at("affinity_cache_hit") == true);
    CHECK(d.at("cache_hits") == 1);

    // Extraction settings do not touch the affinity.
    body["settings"] = {{"dynamics", "pairwise"}, {"margin", 0.2}};
    d = run(body);
    CHECK(d.at("affinity_cache_hit") == true);
    CHECK(d.at("cache_hits") == 2);

    body["settings"] = {{"sigma", 0.3}};
    d = run(body);
    CHECK(d.at("affinity_cache_hit") == false);
    d = run(body);
    CHECK(d.at("affinity_cache_hit") == true);
    CHECK(d.at("cache_hits") == 3);
}

TEST_CASE("delete and health") {
    SegmentationService service(service_settings());
    const std::string id = create(service, gradient(64, 64));
    CHECK(json::parse(service.health().body).at("sessions") == 1);
    CHECK(service.remove_session(id).status == 200);
    CHECK(service.remove_session(id).status == 404);
    CHECK(service.mask_png(id).status == 404);
    const json h = json::parse(service.health().body);
    CHECK(h.at("status") == "ok");
    CHECK(h.at("sessions") == 0);
}

TEST_CASE("concurrent segment on one session is rejected") {
    const auto fixture = make_fixtures().front();
    SegmentationService service(service_settings());
    const std::string id = create(service, fixture.image);
    const std::string other = create(service, fixture.image);
    const std::string body = to_json(fixture.scribble_annotation()).dump();

    std::atomic<int> nested_same{0};
    std::atomic<int> nested_other{0};
    std::atomic<bool> armed{true};
    service.set_in_flight_hook([&] {
        if (!armed.exchange(false)) return;
        // The session lock is held here; ask from another thread.
        nested_same = std::async(std::launch::async, [&] { return service.segment(id, body).status; }).get();
        nested_other = std::async(std::launch::async, [&] { return service.mask_png(id).status; }).get();
        armed = false;
    });
    CHECK(service.segment(id, body).status == 200);
    CHECK(nested_same == 409);
    CHECK(nested_other == 409);

    // Other sessions are not blocked.
    armed = true;
    service.set_in_flight_hook([&] {
        if (!armed.exchange(false)) return;
        nested_other = std::async(std::launch::async, [&] { return service.segment(other, body).status; }).get();
    });
    CHECK(service.segment(id, body).status == 200);
    CHECK(nested_other == 200);
}

TEST_CASE("routes over a real HTTP server") {
    const auto fixture = make_fixtures().front();
    SegmentationService service(service_settings());
    httplib::Server server;
    service.mount(server);
    const int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread listener([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    httplib::Client client("127.0.0.1", port);
    client.set_read_timeout(120, 0);

    auto health = client.Get("/healthz");
    REQUIRE(health);
    CHECK(health->status == 200);

    auto bad = client.Post("/sessions?superpixels=abc", png_bytes(fixture.image), "application/octet-stream");
    REQUIRE(bad);
    CHECK(bad->status == 400);

    auto created = client.Post("/sessions?superpixels=" + std::to_string(kSuperpixels), png_bytes(fixture.image),
                               "application/octet-stream");
    REQUIRE(created);
    REQUIRE(created->status == 200);
    const json session = json::parse(created->body);
    const std::string id = session.at("id");
    CHECK(session.at("width") == kFixtureSide);

    const std::string body = to_json(fixture.scribble_annotation()).dump();
    auto seg = client.Post("/sessions/" + id + "/segment", body, "application/json");
    REQUIRE(seg);
    REQUIRE(seg->status == 200);
    const auto expected = segment(fixture.image, fixture.scribble_annotation(), service_settings());
    CHECK(rle_mask(json::parse(seg->body).at("mask")) == expected.mask);

    auto png = client.Get("/sessions/" + id + "/mask.png");
    REQUIRE(png);
    CHECK(png->status == 200);
    CHECK(png->get_header_value("Content-Type") == "image/png");
    const auto bytes = encode_mask_png(expected.mask);
    CHECK(png->body == std::string(bytes.begin(), bytes.end()));

    // 409 over the wire: a second client asks while the first is in flight.
    std::atomic<int> nested{0};
    std::atomic<bool> armed{true};
    service.set_in_flight_hook([&] {
        if (!armed.exchange(false)) return;
        httplib::Client second("127.0.0.1", port);
        auto r = second.Post("/sessions/" + id + "/segment", body, "application/json");
        nested = r ? r->status : -1;
    });
    auto first = client.Post("/sessions/" + id + "/segment", body, "application/json");
    REQUIRE(first);
    CHECK(first->status == 200);
    CHECK(nested == 409);
    service.set_in_flight_hook({});

    auto missing = client.Post("/sessions/999/segment", body, "application/json");
    REQUIRE(missing);
    CHECK(missing->status == 404);
    auto invalid = client.Post("/sessions/" + id + "/segment", "[]", "application/json");
    REQUIRE(invalid);
    CHECK(invalid->status == 422);
    CHECK(json::parse(invalid->body).contains("error"));

    auto removed = client.Delete("/sessions/" + id);
    REQUIRE(removed);
    CHECK(removed->status == 200);
    auto gone = client.Get("/sessions/" + id + "/mask.png");
    REQUIRE(gone);
    CHECK(gone->status == 404);

    server.stop();
    listener.join();
}
