#pragma once

// RGB images, binary masks and axis-aligned boxes. OpenCV handles decoding and
// encoding; pixels are kept in RGB order.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <opencv2/core.hpp>

namespace cds::seg {

inline constexpr int kMinImageSide = 16;

class Image {
public:
    Image() = default;
    /// Black image.
    Image(int width, int height);
    /// Wraps an 8-bit 3-channel matrix already in RGB order.
    static Image from_rgb(cv::Mat3b rgb);

    [[nodiscard]] int width() const { return rgb_.cols; }
    [[nodiscard]] int height() const { return rgb_.rows; }
    [[nodiscard]] bool empty() const { return rgb_.empty(); }
    [[nodiscard]] cv::Vec3b at(int x, int y) const { return rgb_(y, x); }
    void set(int x, int y, cv::Vec3b rgb) { rgb_(y, x) = rgb; }
    [[nodiscard]] const cv::Mat3b& rgb() const { return rgb_; }

private:
    cv::Mat3b rgb_;
};

/// PNG or binary PPM (anything OpenCV decodes). Throws ParseError on failure
/// or when a side is shorter than kMinImageSide.
Image load_image(const std::filesystem::path& path);
Image decode_image(std::span<const std::uint8_t> bytes);
void save_image(const std::filesystem::path& path, const Image& image);
std::vector<std::uint8_t> encode_png(const Image& image);

/// Per-pixel binary label, 1 = foreground.
class Mask {
public:
    Mask() = default;
    Mask(int width, int height, std::uint8_t fill = 0);

    [[nodiscard]] int width() const { return width_; }
    [[nodiscard]] int height() const { return height_; }
    [[nodiscard]] std::uint8_t at(int x, int y) const { return data_[index(x, y)]; }
    void set(int x, int y, std::uint8_t v) { data_[index(x, y)] = v ? 1 : 0; }
    [[nodiscard]] const std::vector<std::uint8_t>& data() const { return data_; }
    [[nodiscard]] std::size_t count() const;
    [[nodiscard]] Mask complement() const;

    friend bool operator==(const Mask&, const Mask&) = default;

private:
    [[nodiscard]] std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> data_;
};

/// Single-channel PNG with values 0/255.
std::vector<std::uint8_t> encode_mask_png(const Mask& mask);
void save_mask_png(const std::filesystem::path& path, const Mask& mask);
/// Any nonzero pixel is foreground.
Mask load_mask(const std::filesystem::path& path);
Mask decode_mask(std::span<const std::uint8_t> bytes);

/// Integer rectangle: columns [x, x + width), rows [y, y + height).
struct Box {
    int x = 0;
    int y = 0;
    int width = 0;
    int height = 0;

    [[nodiscard]] long long area() const { return static_cast<long long>(width) * height; }
    [[nodiscard]] bool contains(int px, int py) const {
        return px >= x && px < x + width && py >= y && py < y + height;
    }
    /// Intersection with [0, image_width) x [0, image_height).
    [[nodiscard]] Box clamped(int image_width, int image_height) const;

    friend bool operator==(const Box&, const Box&) = default;
};

} // namespace cds::seg
