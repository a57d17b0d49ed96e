#include "cds/annotation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "cds/error.hpp"

namespace cds::seg {

std::string to_string(AnnotationKind kind) {
    switch (kind) {
    case AnnotationKind::kScribbleForeground:
        return "scribble-foreground";
    case AnnotationKind::kScribbleWithErrors:
        return "scribble-with-errors";
    case AnnotationKind::kBoundingBox:
        return "bounding-box";
    case AnnotationKind::kLooseBox:
        return "loose-box";
    }
    return "scribble-foreground";
}

AnnotationKind parse_annotation_kind(const std::string& name) {
    if (name == "scribble-foreground") return AnnotationKind::kScribbleForeground;
    if (name == "scribble-with-errors") return AnnotationKind::kScribbleWithErrors;
    if (name == "bounding-box") return AnnotationKind::kBoundingBox;
    if (name == "loose-box") return AnnotationKind::kLooseBox;
    throw AnnotationError("unknown annotation kind '" + name + "'");
}

void Annotation::validate() const {
    if (!std::isfinite(looseness_percent) || looseness_percent < 0.0) {
        throw AnnotationError("looseness must be a finite value >= 0");
    }
    for (const auto& s : strokes)
        if (s.points.empty()) throw AnnotationError("stroke without points");
    const auto tagged = [&](StrokeTag t) {
        return std::any_of(strokes.begin(), strokes.end(), [t](const Stroke& s) { return s.tag == t; });
    };
    if (is_box_kind(kind)) {
        if (!box) throw AnnotationError(to_string(kind) + " needs a box");
        if (!strokes.empty()) throw AnnotationError(to_string(kind) + " does not take strokes");
        if (box->width <= 0 || box->height <= 0) throw AnnotationError("box has zero area");
        if (kind == AnnotationKind::kBoundingBox && looseness_percent != 0.0) {
            throw AnnotationError("bounding-box takes no looseness; use loose-box");
        }
        return;
    }
    if (box) throw AnnotationError(to_string(kind) + " does not take a box");
    if (looseness_percent != 0.0) throw AnnotationError("looseness only applies to loose-box");
    if (!tagged(StrokeTag::kForeground)) throw AnnotationError("no foreground stroke");
    if (kind == AnnotationKind::kScribbleForeground && tagged(StrokeTag::kBackground)) {
        throw AnnotationError("scribble-foreground cannot carry background strokes");
    }
    if (kind == AnnotationKind::kScribbleWithErrors && !tagged(StrokeTag::kBackground)) {
        throw AnnotationError("scribble-with-errors needs at least one background stroke");
    }
}

nlohmann::json to_json(const Annotation& a) {
    nlohmann::json doc;
    doc["kind"] = to_string(a.kind);
    nlohmann::json strokes = nlohmann::json::array();
    for (const auto& s : a.strokes) {
        nlohmann::json pts = nlohmann::json::array();
        for (const auto& p : s.points) pts.push_back({p.x, p.y});
        strokes.push_back({{"tag", s.tag == StrokeTag::kForeground ? "fg" : "bg"}, {"points", pts}});
    }
    doc["strokes"] = strokes;
    if (a.box) doc["box"] = {a.box->x, a.box->y, a.box->width, a.box->height};
    doc["looseness"] = a.looseness_percent;
    return doc;
}

namespace {

int as_int(const nlohmann::json& v, const char* what) {
    if (!v.is_number_integer()) throw AnnotationError(std::string(what) + " must be an integer");
    const auto i = v.get<long long>();
    if (i < -(1LL << 30) || i > (1LL << 30)) throw AnnotationError(std::string(what) + " out of range");
    return static_cast<int>(i);
}

} // namespace

Annotation annotation_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw AnnotationError("annotation must be a JSON object");
    Annotation a;
    if (!doc.contains("kind") || !doc["kind"].is_string()) throw AnnotationError("annotation needs a string 'kind'");
    a.kind = parse_annotation_kind(doc["kind"].get<std::string>());
    if (doc.contains("strokes") && !doc["strokes"].is_null()) {
        if (!doc["strokes"].is_array()) throw AnnotationError("'strokes' must be an array");
        for (const auto& s : doc["strokes"]) {
            if (!s.is_object()) throw AnnotationError("stroke must be an object");
            Stroke stroke;
            const std::string tag = s.value("tag", std::string("fg"));
            if (tag == "fg") {
                stroke.tag = StrokeTag::kForeground;
            } else if (tag == "bg") {
                stroke.tag = StrokeTag::kBackground;
            } else {
                throw AnnotationError("stroke tag must be 'fg' or 'bg'");
            }
            if (!s.contains("points") || !s["points"].is_array()) throw AnnotationError("stroke needs a 'points' array");
            for (const auto& p : s["points"]) {
                if (!p.is_array() || p.size() != 2) throw AnnotationError("stroke point must be [x, y]");
                stroke.points.push_back(Point{as_int(p[0], "x"), as_int(p[1], "y")});
            }
            a.strokes.push_back(std::move(stroke));
        }
    }
    if (doc.contains("box") && !doc["box"].is_null()) {
        const auto& b = doc["box"];
        if (!b.is_array() || b.size() != 4) throw AnnotationError("'box' must be [x, y, width, height]");
        a.box = Box{as_int(b[0], "box x"), as_int(b[1], "box y"), as_int(b[2], "box width"), as_int(b[3], "box height")};
    }
    if (doc.contains("looseness") && !doc["looseness"].is_null()) {
        if (!doc["looseness"].is_number()) throw AnnotationError("'looseness' must be a number");
        a.looseness_percent = doc["looseness"].get<double>();
    }
    a.validate();
    return a;
}

Annotation parse_annotation(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw AnnotationError(std::string("annotation is not valid JSON: ") + e.what());
    }
    return annotation_from_json(doc);
}

Box dilate_box(const Box& box, double looseness_percent, int image_width, int image_height) {
    if (!std::isfinite(looseness_percent) || looseness_percent < 0.0) throw InvalidArgument("looseness must be >= 0");
    if (box.width <= 0 || box.height <= 0) throw InvalidArgument("box has zero area");
    const double w = box.width;
    const double h = box.height;
    const double target = (1.0 + looseness_percent / 100.0) * w * h;
    // (w + 2p)(h + 2p) = target
    const double pad = (-(w + h) + std::sqrt((w + h) * (w + h) + 4.0 * (target - w * h))) / 4.0;
    const int p = static_cast<int>(std::lround(pad));
    return Box{box.x - p, box.y - p, box.width + 2 * p, box.height + 2 * p}.clamped(image_width, image_height);
}

std::vector<Point> rasterize_strokes(const std::vector<Stroke>& strokes, StrokeTag tag, int image_width,
                                     int image_height) {
    std::vector<Point> out;
    std::vector<char> seen(static_cast<std::size_t>(image_width) * static_cast<std::size_t>(image_height), 0);
    auto visit = [&](int x, int y) {
        if (x < 0 || y < 0 || x >= image_width || y >= image_height) return;
        auto& flag = seen[static_cast<std::size_t>(y) * static_cast<std::size_t>(image_width) + static_cast<std::size_t>(x)];
        if (flag) return;
        flag = 1;
        out.push_back(Point{x, y});
    };
    for (const auto& s : strokes) {
        if (s.tag != tag) continue;
        visit(s.points.front().x, s.points.front().y);
        for (std::size_t i = 1; i < s.points.size(); ++i) {
            // Bresenham between consecutive points.
            int x0 = s.points[i - 1].x;
            int y0 = s.points[i - 1].y;
            const int x1 = s.points[i].x;
            const int y1 = s.points[i].y;
            const int dx = std::abs(x1 - x0);
            const int dy = -std::abs(y1 - y0);
            const int sx = x0 < x1 ? 1 : -1;
            const int sy = y0 < y1 ? 1 : -1;
            int err = dx + dy;
            while (true) {
                visit(x0, y0);
                if (x0 == x1 && y0 == y1) break;
                const int e2 = 2 * err;
                if (e2 >= dy) {
                    err += dy;
                    x0 += sx;
                }
                if (e2 <= dx) {
                    err += dx;
                    y0 += sy;
                }
            }
        }
    }
    return out;
}

std::vector<Point> box_ring(const Box& box) {
    std::vector<Point> out;
    if (box.width <= 0 || box.height <= 0) return out;
    const int x0 = box.x;
    const int y0 = box.y;
    const int x1 = box.x + box.width - 1;
    const int y1 = box.y + box.height - 1;
    for (int x = x0; x <= x1; ++x) {
        out.push_back(Point{x, y0});
        if (y1 != y0) out.push_back(Point{x, y1});
    }
    for (int y = y0 + 1; y < y1; ++y) {
        out.push_back(Point{x0, y});
        if (x1 != x0) out.push_back(Point{x1, y});
    }
    return out;
}

namespace {

VertexSet superpixels_under(const std::vector<Point>& pixels, const SuperpixelMap& sp) {
    std::vector<Vertex> ids;
    ids.reserve(pixels.size());
    for (const auto& p : pixels) ids.push_back(sp.label(p.x, p.y));
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return VertexSet(std::move(ids));
}

} // namespace

AnnotationConstraints annotation_to_constraints(const Annotation& annotation, const SuperpixelMap& sp) {
    annotation.validate();
    AnnotationConstraints out;
    if (is_box_kind(annotation.kind)) {
        const double looseness = annotation.kind == AnnotationKind::kLooseBox ? annotation.looseness_percent : 0.0;
        const Box clamped = annotation.box->clamped(sp.width, sp.height);
        if (clamped.area() == 0) throw AnnotationError("box lies outside the image");
        const Box effective = dilate_box(clamped, looseness, sp.width, sp.height);
        out.effective_box = effective;
        out.extracted_is_foreground = false;
        out.constraints = superpixels_under(box_ring(effective), sp);
    } else {
        out.extracted_is_foreground = true;
        out.constraints =
            superpixels_under(rasterize_strokes(annotation.strokes, StrokeTag::kForeground, sp.width, sp.height), sp);
        if (annotation.kind == AnnotationKind::kScribbleWithErrors) {
            out.background_marked = superpixels_under(
                rasterize_strokes(annotation.strokes, StrokeTag::kBackground, sp.width, sp.height), sp);
        }
    }
    if (out.constraints.empty()) throw AnnotationError("annotation does not touch any superpixel inside the image");
    return out;
}

} // namespace cds::seg
