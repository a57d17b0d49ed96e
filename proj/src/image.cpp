#include "cds/image.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "cds/error.hpp"

namespace cds::seg {

Image::Image(int width, int height) {
    if (width <= 0 || height <= 0) throw InvalidArgument("image dimensions must be positive");
    rgb_ = cv::Mat3b(height, width, cv::Vec3b(0, 0, 0));
}

Image Image::from_rgb(cv::Mat3b rgb) {
    Image img;
    img.rgb_ = std::move(rgb);
    return img;
}

namespace {

Image from_decoded(const cv::Mat& bgr, const std::string& source) {
    if (bgr.empty()) throw ParseError("cannot decode image " + source);
    if (bgr.cols < kMinImageSide || bgr.rows < kMinImageSide) {
        throw ParseError("image " + source + " is smaller than " + std::to_string(kMinImageSide) + "x" +
                         std::to_string(kMinImageSide));
    }
    cv::Mat3b rgb;
    cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
    return Image::from_rgb(std::move(rgb));
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("failed writing " + path.string());
}

} // namespace

Image load_image(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    const cv::Mat raw(1, static_cast<int>(bytes.size()), CV_8UC1, const_cast<std::uint8_t*>(bytes.data()));
    return from_decoded(cv::imdecode(raw, cv::IMREAD_COLOR), path.string());
}

Image decode_image(std::span<const std::uint8_t> bytes) {
    if (bytes.empty()) throw ParseError("empty image payload");
    const cv::Mat raw(1, static_cast<int>(bytes.size()), CV_8UC1, const_cast<std::uint8_t*>(bytes.data()));
    return from_decoded(cv::imdecode(raw, cv::IMREAD_COLOR), "payload");
}

std::vector<std::uint8_t> encode_png(const Image& image) {
    cv::Mat3b bgr;
    cv::cvtColor(image.rgb(), bgr, cv::COLOR_RGB2BGR);
    std::vector<std::uint8_t> out;
    if (!cv::imencode(".png", bgr, out)) throw Error("PNG encoding failed");
    return out;
}

void save_image(const std::filesystem::path& path, const Image& image) {
    const std::string ext = path.extension().string();
    cv::Mat3b bgr;
    cv::cvtColor(image.rgb(), bgr, cv::COLOR_RGB2BGR);
    std::vector<std::uint8_t> out;
    const std::string format = (ext == ".ppm" || ext == ".PPM") ? ".ppm" : ".png";
    if (!cv::imencode(format, bgr, out)) throw Error("image encoding failed for " + path.string());
    write_file(path, out);
}

// Mask -----------------------------------------------------------------------

Mask::Mask(int width, int height, std::uint8_t fill)
    : width_(width), height_(height),
      data_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill ? 1 : 0) {
    if (width <= 0 || height <= 0) throw InvalidArgument("mask dimensions must be positive");
}

std::size_t Mask::count() const { return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), 1)); }

Mask Mask::complement() const {
    Mask out = *this;
    for (auto& v : out.data_) v = v ? 0 : 1;
    return out;
}

std::vector<std::uint8_t> encode_mask_png(const Mask& mask) {
    cv::Mat1b img(mask.height(), mask.width());
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x) img(y, x) = mask.at(x, y) ? 255 : 0;
    std::vector<std::uint8_t> out;
    if (!cv::imencode(".png", img, out)) throw Error("PNG encoding failed");
    return out;
}

void save_mask_png(const std::filesystem::path& path, const Mask& mask) { write_file(path, encode_mask_png(mask)); }

namespace {

Mask mask_from_gray(const cv::Mat& gray, const std::string& source) {
    if (gray.empty()) throw ParseError("cannot decode mask " + source);
    Mask m(gray.cols, gray.rows);
    for (int y = 0; y < gray.rows; ++y)
        for (int x = 0; x < gray.cols; ++x) m.set(x, y, gray.at<std::uint8_t>(y, x) != 0);
    return m;
}

} // namespace

Mask load_mask(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    return decode_mask(bytes);
}

Mask decode_mask(std::span<const std::uint8_t> bytes) {
    if (bytes.empty()) throw ParseError("empty mask payload");
    const cv::Mat raw(1, static_cast<int>(bytes.size()), CV_8UC1, const_cast<std::uint8_t*>(bytes.data()));
    return mask_from_gray(cv::imdecode(raw, cv::IMREAD_GRAYSCALE), "payload");
}

Box Box::clamped(int image_width, int image_height) const {
    const int x0 = std::clamp(x, 0, image_width);
    const int y0 = std::clamp(y, 0, image_height);
    const int x1 = std::clamp(x + width, 0, image_width);
    const int y1 = std::clamp(y + height, 0, image_height);
    return Box{x0, y0, std::max(0, x1 - x0), std::max(0, y1 - y0)};
}

} // namespace cds::seg
