#include "cds/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <opencv2/imgproc.hpp>

#include "cds/error.hpp"

namespace cds::seg {

namespace {

constexpr int kSupport = 49;
constexpr int kHalf = (kSupport - 1) / 2;

double gauss1d(double sigma, double x, int order) {
    const double variance = sigma * sigma;
    const double g = std::exp(-x * x / (2.0 * variance)) / std::sqrt(std::numbers::pi * 2.0 * variance);
    switch (order) {
    case 1:
        return -g * x / variance;
    case 2:
        return g * (x * x - variance) / (variance * variance);
    default:
        return g;
    }
}

void normalise(cv::Mat1d& f) {
    f -= cv::mean(f)[0];
    const double l1 = cv::norm(f, cv::NORM_L1);
    if (l1 > 0.0) f /= l1;
}

// Oriented filter: order `phase_y` derivative across the axis, Gaussian of
// width 3*scale along it. Rows run top to bottom with y pointing up.
cv::Mat1d oriented_filter(double scale, int phase_y, double angle) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    cv::Mat1d f(kSupport, kSupport);
    for (int r = 0; r < kSupport; ++r) {
        for (int col = 0; col < kSupport; ++col) {
            const double x = col - kHalf;
            const double y = kHalf - r;
            const double rx = c * x - s * y;
            const double ry = s * x + c * y;
            f(r, col) = gauss1d(3.0 * scale, rx, 0) * gauss1d(scale, ry, phase_y);
        }
    }
    normalise(f);
    return f;
}

cv::Mat1d gaussian_filter(double sigma) {
    cv::Mat1d f(kSupport, kSupport);
    for (int r = 0; r < kSupport; ++r)
        for (int col = 0; col < kSupport; ++col) {
            const double x = col - kHalf;
            const double y = r - kHalf;
            f(r, col) = std::exp(-(x * x + y * y) / (2.0 * sigma * sigma));
        }
    f /= cv::sum(f)[0];
    normalise(f);
    return f;
}

cv::Mat1d log_filter(double sigma) {
    cv::Mat1d h(kSupport, kSupport);
    for (int r = 0; r < kSupport; ++r)
        for (int col = 0; col < kSupport; ++col) {
            const double x = col - kHalf;
            const double y = r - kHalf;
            h(r, col) = std::exp(-(x * x + y * y) / (2.0 * sigma * sigma));
        }
    h /= cv::sum(h)[0];
    const double s2 = sigma * sigma;
    cv::Mat1d f(kSupport, kSupport);
    for (int r = 0; r < kSupport; ++r)
        for (int col = 0; col < kSupport; ++col) {
            const double x = col - kHalf;
            const double y = r - kHalf;
            f(r, col) = h(r, col) * (x * x + y * y - 2.0 * s2) / (s2 * s2);
        }
    normalise(f);
    return f;
}

double median(std::vector<float>& v) {
    const std::size_t n = v.size();
    const std::size_t mid = n / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double upper = v[mid];
    if (n % 2 == 1) return upper;
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

} // namespace

std::vector<cv::Mat1d> leung_malik_filter_bank() {
    constexpr int kOrientations = 6;
    constexpr int kOriented = 18;
    std::vector<cv::Mat1d> bank(kFilterBankSize);
    const double root2 = std::numbers::sqrt2;
    const double oriented_scales[3] = {root2, 2.0, 2.0 * root2};
    int k = 0;
    for (double scale : oriented_scales) {
        for (int o = 0; o < kOrientations; ++o) {
            const double angle = std::numbers::pi * o / kOrientations;
            bank[static_cast<std::size_t>(k)] = oriented_filter(scale, 1, angle);
            bank[static_cast<std::size_t>(k + kOriented)] = oriented_filter(scale, 2, angle);
            ++k;
        }
    }
    k = 2 * kOriented;
    const double blob_scales[4] = {root2, 2.0, 2.0 * root2, 4.0};
    for (double scale : blob_scales) {
        bank[static_cast<std::size_t>(k++)] = gaussian_filter(scale);
        bank[static_cast<std::size_t>(k++)] = log_filter(scale);
        bank[static_cast<std::size_t>(k++)] = log_filter(3.0 * scale);
    }
    return bank;
}

std::vector<cv::Mat1f> filter_responses(const Image& image) {
    cv::Mat3f rgb;
    image.rgb().convertTo(rgb, CV_32FC3, 1.0 / 255.0);
    cv::Mat1f gray;
    cv::cvtColor(rgb, gray, cv::COLOR_RGB2GRAY);
    static const std::vector<cv::Mat1d> bank = leung_malik_filter_bank();
    std::vector<cv::Mat1f> out(bank.size());
    for (std::size_t k = 0; k < bank.size(); ++k) {
        cv::Mat1f kernel;
        bank[k].convertTo(kernel, CV_32F);
        cv::filter2D(gray, out[k], CV_32F, kernel, cv::Point(-1, -1), 0.0, cv::BORDER_REFLECT);
    }
    return out;
}

std::vector<FeatureVector> extract_features(const Image& image, const SuperpixelMap& sp) {
    if (sp.width != image.width() || sp.height != image.height()) {
        throw InvalidArgument("superpixel map does not match the image size");
    }
    const int w = image.width();
    const int h = image.height();
    cv::Mat3f rgb;
    image.rgb().convertTo(rgb, CV_32FC3, 1.0 / 255.0);
    cv::Mat3f lab;
    cv::Mat3f hsv;
    cv::cvtColor(rgb, lab, cv::COLOR_RGB2Lab);
    cv::cvtColor(rgb, hsv, cv::COLOR_RGB2HSV);
    const std::vector<cv::Mat1f> responses = filter_responses(image);

    const auto count = static_cast<std::size_t>(sp.count);
    std::vector<std::array<std::vector<float>, kColorFeatures>> channels(count);
    std::vector<FeatureVector> features(count);
    for (auto& f : features) f.fill(0.0);
    std::vector<int> sizes(count, 0);

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const auto l = static_cast<std::size_t>(sp.label(x, y));
            const cv::Vec3f c = rgb(y, x);
            const cv::Vec3f lb = lab(y, x);
            const cv::Vec3f hs = hsv(y, x);
            const float values[kColorFeatures] = {
                c[0],
                c[1],
                c[2],
                std::clamp(lb[0] / 100.0f, 0.0f, 1.0f),
                std::clamp((lb[1] + 127.0f) / 254.0f, 0.0f, 1.0f),
                std::clamp((lb[2] + 127.0f) / 254.0f, 0.0f, 1.0f),
                std::clamp(hs[0] / 360.0f, 0.0f, 1.0f),
                hs[1],
                hs[2],
            };
            for (int k = 0; k < kColorFeatures; ++k) channels[l][static_cast<std::size_t>(k)].push_back(values[k]);
            for (int k = 0; k < kFilterBankSize; ++k) {
                features[l][static_cast<std::size_t>(kColorFeatures + k)] += std::abs(responses[static_cast<std::size_t>(k)](y, x));
            }
            ++sizes[l];
        }
    }
    for (std::size_t l = 0; l < count; ++l) {
        if (sizes[l] == 0) throw InvalidArgument("superpixel map has an empty label");
        for (int k = 0; k < kColorFeatures; ++k) {
            features[l][static_cast<std::size_t>(k)] = median(channels[l][static_cast<std::size_t>(k)]);
        }
        for (int k = 0; k < kFilterBankSize; ++k) features[l][static_cast<std::size_t>(kColorFeatures + k)] /= sizes[l];
    }
    return features;
}

} // namespace cds::seg
