#include "cds/metrics.hpp"

#include "cds/error.hpp"

namespace cds::seg {

namespace {

void require_same_shape(const Mask& a, const Mask& b) {
    if (a.width() != b.width() || a.height() != b.height()) throw InvalidArgument("mask shapes differ");
}

struct Overlap {
    std::size_t both = 0;
    std::size_t mask = 0;
    std::size_t truth = 0;
};

Overlap overlap(const Mask& mask, const Mask& truth) {
    require_same_shape(mask, truth);
    Overlap o;
    const auto& m = mask.data();
    const auto& t = truth.data();
    for (std::size_t i = 0; i < m.size(); ++i) {
        o.mask += m[i];
        o.truth += t[i];
        o.both += static_cast<std::size_t>(m[i] & t[i]);
    }
    return o;
}

} // namespace

double error_rate(const Mask& mask, const Mask& truth, const Box& box) {
    require_same_shape(mask, truth);
    const Box b = box.clamped(mask.width(), mask.height());
    if (b.area() == 0) throw InvalidArgument("error rate needs a nonempty box inside the image");
    long long wrong = 0;
    for (int y = b.y; y < b.y + b.height; ++y)
        for (int x = b.x; x < b.x + b.width; ++x) wrong += mask.at(x, y) != truth.at(x, y);
    return static_cast<double>(wrong) / static_cast<double>(b.area());
}

double jaccard(const Mask& mask, const Mask& truth, std::vector<std::string>* warnings) {
    const Overlap o = overlap(mask, truth);
    const std::size_t uni = o.mask + o.truth - o.both;
    if (uni == 0) {
        if (warnings) warnings->push_back("jaccard of two empty masks defined as 1");
        return 1.0;
    }
    return static_cast<double>(o.both) / static_cast<double>(uni);
}

double dice(const Mask& mask, const Mask& truth, std::vector<std::string>* warnings) {
    const Overlap o = overlap(mask, truth);
    if (o.mask + o.truth == 0) {
        if (warnings) warnings->push_back("dice of two empty masks defined as 1");
        return 1.0;
    }
    return 2.0 * static_cast<double>(o.both) / static_cast<double>(o.mask + o.truth);
}

} // namespace cds::seg
