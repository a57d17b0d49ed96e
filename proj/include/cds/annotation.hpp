#pragma once

// User input for interactive segmentation and its mapping onto superpixels.
//
// JSON interchange:
//   { "kind": "scribble-foreground" | "scribble-with-errors" | "bounding-box" | "loose-box",
//     "strokes": [ { "tag": "fg" | "bg", "points": [[x, y], ...] }, ... ],
//     "box": [x, y, width, height],
//     "looseness": <percent, >= 0> }
// Strokes are polylines in pixel coordinates; consecutive points are joined
// by 8-connected line segments and a single point marks one pixel.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cds/graph.hpp"
#include "cds/image.hpp"
#include "cds/superpixels.hpp"

namespace cds::seg {

enum class AnnotationKind { kScribbleForeground, kScribbleWithErrors, kBoundingBox, kLooseBox };

std::string to_string(AnnotationKind kind);
AnnotationKind parse_annotation_kind(const std::string& name);
[[nodiscard]] inline bool is_box_kind(AnnotationKind k) {
    return k == AnnotationKind::kBoundingBox || k == AnnotationKind::kLooseBox;
}

enum class StrokeTag { kForeground, kBackground };

struct Point {
    int x = 0;
    int y = 0;
    friend bool operator==(const Point&, const Point&) = default;
};

struct Stroke {
    StrokeTag tag = StrokeTag::kForeground;
    std::vector<Point> points;
    friend bool operator==(const Stroke&, const Stroke&) = default;
};

struct Annotation {
    AnnotationKind kind = AnnotationKind::kScribbleForeground;
    std::vector<Stroke> strokes;
    std::optional<Box> box;
    double looseness_percent = 0.0;

    /// Structural checks independent of any image:
    /// - scribble kinds carry strokes and no box; scribble-foreground has no
    ///   bg stroke; scribble-with-errors has both tags
    /// - box kinds carry a box and no strokes; bounding-box has looseness 0
    /// - every stroke has at least one point; looseness is finite and >= 0
    /// Throws AnnotationError.
    void validate() const;

    friend bool operator==(const Annotation&, const Annotation&) = default;
};

nlohmann::json to_json(const Annotation& annotation);
/// Parses and validates; throws AnnotationError on schema violations.
Annotation annotation_from_json(const nlohmann::json& doc);
Annotation parse_annotation(const std::string& text);

/// Pads every side by the same whole number of pixels so that the area grows
/// by looseness_percent (pad rounded to nearest), then clamps to the image.
Box dilate_box(const Box& box, double looseness_percent, int image_width, int image_height);

/// Pixels covered by the strokes with the given tag, clipped to the image,
/// deduplicated, in first-visit order.
std::vector<Point> rasterize_strokes(const std::vector<Stroke>& strokes, StrokeTag tag, int image_width,
                                     int image_height);

/// The 1-pixel-wide boundary of a box already clamped to the image.
std::vector<Point> box_ring(const Box& box);

struct AnnotationConstraints {
    /// Superpixels hit by fg strokes (scribble kinds) or by the box ring.
    VertexSet constraints;
    /// True for scribble kinds: the union of extracted clusters is the
    /// foreground. False for box kinds: the union is the background.
    bool extracted_is_foreground = true;
    /// Superpixels hit by bg strokes (scribble-with-errors only).
    VertexSet background_marked;
    /// Box after dilation and clamping (box kinds only).
    std::optional<Box> effective_box;
};

/// Throws AnnotationError when the annotation is invalid for the image or
/// when the constraint set comes out empty.
AnnotationConstraints annotation_to_constraints(const Annotation& annotation, const SuperpixelMap& superpixels);

} // namespace cds::seg
