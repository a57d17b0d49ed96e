#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cds/annotation.hpp"
#include "cds/image.hpp"

namespace cds::seg {

inline constexpr int kFixtureSide = 128;

struct Fixture {
    std::string name;
    Image image;
    Mask truth;
    /// Bounding box of the truth padded by max(4 px, 5% of its side), clamped.
    Box baseline_box;
    /// Foreground polylines placed well inside the object.
    std::vector<Stroke> scribble;

    [[nodiscard]] Annotation scribble_annotation() const;
    [[nodiscard]] Annotation box_annotation(double looseness_percent = 0.0) const;
};

/// The eight synthetic scenes, deterministic across runs.
std::vector<Fixture> make_fixtures();

/// Smallest box covering every foreground pixel; throws on an empty mask.
Box bounding_box(const Mask& mask);
Box padded_box(const Box& box, int image_width, int image_height);

/// Writes <name>.png, <name>_gt.png, <name>_scribble.json and <name>_box.json.
void write_fixtures(const std::filesystem::path& directory, const std::vector<Fixture>& fixtures);

} // namespace cds::seg
