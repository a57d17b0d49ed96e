#pragma once

#include <string>
#include <vector>

#include "cds/image.hpp"

namespace cds::seg {

/// Misclassified pixels inside `box` divided by the box area. The box is
/// clamped to the mask; throws InvalidArgument if nothing is left or the
/// shapes differ.
double error_rate(const Mask& mask, const Mask& truth, const Box& box);

/// |truth & mask| / |truth | mask|. Both empty gives 1 plus a warning.
double jaccard(const Mask& mask, const Mask& truth, std::vector<std::string>* warnings = nullptr);

/// 2 |truth & mask| / (|truth| + |mask|). Both empty gives 1 plus a warning.
double dice(const Mask& mask, const Mask& truth, std::vector<std::string>* warnings = nullptr);

} // namespace cds::seg
