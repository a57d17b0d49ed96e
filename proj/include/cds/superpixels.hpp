#pragma once

#include <utility>
#include <vector>

#include "cds/image.hpp"

namespace cds::seg {

inline constexpr int kMinSuperpixels = 16;
inline constexpr int kMaxSuperpixels = 4096;

struct SuperpixelMap {
    int width = 0;
    int height = 0;
    int count = 0;
    std::vector<int> labels;                    // row-major, dense ids in [0, count)
    std::vector<std::pair<int, int>> adjacency; // 4-neighbour pairs (a < b), sorted

    [[nodiscard]] int label(int x, int y) const {
        return labels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)];
    }
    /// Pixel count of every superpixel.
    [[nodiscard]] std::vector<int> sizes() const;
};

struct SlicSettings {
    /// Weight of the spatial term relative to CIELAB colour distance.
    double compactness = 10.0;
    int iterations = 10;
};

/// SLIC-style clustering in (L*, a*, b*, x, y) seeded on a regular grid,
/// followed by relabelling of 4-connected components where fragments smaller
/// than a quarter of the nominal superpixel area are absorbed by a neighbour.
/// Deterministic for a given image and target. Throws InvalidArgument unless
/// target_count lies in [kMinSuperpixels, kMaxSuperpixels].
SuperpixelMap compute_superpixels(const Image& image, int target_count, const SlicSettings& settings = {});

} // namespace cds::seg
