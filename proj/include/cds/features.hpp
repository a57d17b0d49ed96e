#pragma once

#include <array>
#include <vector>

#include <opencv2/core.hpp>

#include "cds/image.hpp"
#include "cds/superpixels.hpp"

namespace cds::seg {

inline constexpr int kColorFeatures = 9;
inline constexpr int kFilterBankSize = 48;
inline constexpr int kFeatureDimension = kColorFeatures + kFilterBankSize; // 57

/// Per-superpixel descriptor. Layout: RGB medians (0-2), L*a*b* medians
/// (3-5), HSV medians (6-8), then the mean absolute response of each filter
/// of the Leung-Malik bank (9-56). Colour channels are scaled to [0, 1].
using FeatureVector = std::array<double, kFeatureDimension>;

/// The 48-filter Leung-Malik bank on a 49x49 support, in the usual order:
/// 18 first-derivative (edge) filters, 18 second-derivative (bar) filters
/// (6 orientations x scales sqrt2, 2, 2sqrt2, elongation 3), then for each
/// scale sqrt2, 2, 2sqrt2, 4: a Gaussian, a LoG at that scale and a LoG at
/// three times that scale. Every filter has zero mean and unit L1 norm.
std::vector<cv::Mat1d> leung_malik_filter_bank();

/// Luminance in [0, 1] filtered with every bank member (reflected borders).
std::vector<cv::Mat1f> filter_responses(const Image& image);

std::vector<FeatureVector> extract_features(const Image& image, const SuperpixelMap& superpixels);

} // namespace cds::seg
