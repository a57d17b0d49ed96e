#include "cds/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>

#include "cds/error.hpp"

namespace cds::seg {

namespace {

using Rgb = cv::Vec3b;
using Painter = std::function<Rgb(int x, int y, bool foreground)>;
using Region = std::function<bool(int x, int y)>;

// Integer noise in [-amplitude, amplitude] from a fixed-seed engine, so the
// pixels do not depend on the standard library's distribution code.
Fixture render(std::string name, std::uint64_t seed, int amplitude, const Region& inside, const Painter& paint,
               std::vector<Stroke> scribble) {
    Fixture f;
    f.name = std::move(name);
    f.image = Image(kFixtureSide, kFixtureSide);
    f.truth = Mask(kFixtureSide, kFixtureSide);
    std::mt19937_64 rng(seed);
    const auto span = static_cast<std::uint64_t>(2 * amplitude + 1);
    for (int y = 0; y < kFixtureSide; ++y) {
        for (int x = 0; x < kFixtureSide; ++x) {
            const bool fg = inside(x, y);
            f.truth.set(x, y, fg);
            Rgb c = paint(x, y, fg);
            for (int k = 0; k < 3; ++k) {
                const int noise = amplitude > 0 ? static_cast<int>(rng() % span) - amplitude : 0;
                c[k] = static_cast<std::uint8_t>(std::clamp(c[k] + noise, 0, 255));
            }
            f.image.set(x, y, c);
        }
    }
    f.baseline_box = padded_box(bounding_box(f.truth), kFixtureSide, kFixtureSide);
    f.scribble = std::move(scribble);
    return f;
}

Stroke fg_stroke(std::initializer_list<Point> pts) { return Stroke{StrokeTag::kForeground, std::vector<Point>(pts)}; }

bool in_disk(int x, int y, double cx, double cy, double r) {
    const double dx = x - cx;
    const double dy = y - cy;
    return dx * dx + dy * dy <= r * r;
}

// Same-sign test of the three edge functions.
bool in_triangle(int x, int y, Point a, Point b, Point c) {
    auto edge = [](Point p, Point q, int px, int py) {
        return static_cast<long long>(q.x - p.x) * (py - p.y) - static_cast<long long>(q.y - p.y) * (px - p.x);
    };
    const long long d1 = edge(a, b, x, y);
    const long long d2 = edge(b, c, x, y);
    const long long d3 = edge(c, a, x, y);
    const bool neg = d1 < 0 || d2 < 0 || d3 < 0;
    const bool pos = d1 > 0 || d2 > 0 || d3 > 0;
    return !(neg && pos);
}

} // namespace

Annotation Fixture::scribble_annotation() const {
    Annotation a;
    a.kind = AnnotationKind::kScribbleForeground;
    a.strokes = scribble;
    return a;
}

Annotation Fixture::box_annotation(double looseness_percent) const {
    Annotation a;
    a.kind = looseness_percent > 0.0 ? AnnotationKind::kLooseBox : AnnotationKind::kBoundingBox;
    a.box = baseline_box;
    a.looseness_percent = looseness_percent;
    return a;
}

Box bounding_box(const Mask& mask) {
    int x0 = mask.width();
    int y0 = mask.height();
    int x1 = -1;
    int y1 = -1;
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x)
            if (mask.at(x, y)) {
                x0 = std::min(x0, x);
                y0 = std::min(y0, y);
                x1 = std::max(x1, x);
                y1 = std::max(y1, y);
            }
    if (x1 < 0) throw InvalidArgument("bounding box of an empty mask");
    return Box{x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

Box padded_box(const Box& box, int image_width, int image_height) {
    const int px = std::max(4, static_cast<int>(std::lround(0.05 * box.width)));
    const int py = std::max(4, static_cast<int>(std::lround(0.05 * box.height)));
    return Box{box.x - px, box.y - py, box.width + 2 * px, box.height + 2 * py}.clamped(image_width, image_height);
}

std::vector<Fixture> make_fixtures() {
    std::vector<Fixture> out;

    out.push_back(render(
        "disk", 1, 6, [](int x, int y) { return in_disk(x, y, 64, 64, 30); },
        [](int, int, bool fg) { return fg ? Rgb(200, 40, 40) : Rgb(40, 60, 190); },
        {fg_stroke({{50, 64}, {78, 64}}), fg_stroke({{64, 52}, {64, 76}})}));

    out.push_back(render(
        "ring", 2, 6,
        [](int x, int y) { return in_disk(x, y, 64, 64, 40) && !in_disk(x, y, 64, 64, 20); },
        [](int, int, bool fg) { return fg ? Rgb(50, 170, 70) : Rgb(150, 150, 150); },
        {fg_stroke({{34, 64}, {43, 43}, {64, 34}, {85, 43}, {94, 64}}), fg_stroke({{94, 64}, {85, 85}, {64, 94}, {43, 85}, {34, 64}})}));

    out.push_back(render(
        "two-blobs", 3, 6,
        [](int x, int y) { return in_disk(x, y, 40, 44, 20) || in_disk(x, y, 88, 84, 24); },
        [](int, int, bool fg) { return fg ? Rgb(230, 210, 50) : Rgb(70, 30, 90); },
        {fg_stroke({{30, 44}, {50, 44}}), fg_stroke({{76, 84}, {100, 84}})}));

    out.push_back(render(
        "textured-square", 4, 4, [](int x, int y) { return x >= 36 && x < 92 && y >= 36 && y < 92; },
        [](int x, int, bool fg) {
            if (!fg) return Rgb(128, 128, 128);
            return (x / 2) % 2 == 0 ? Rgb(70, 70, 70) : Rgb(186, 186, 186);
        },
        {fg_stroke({{46, 64}, {82, 64}}), fg_stroke({{64, 46}, {64, 82}})}));

    out.push_back(render(
        "ellipse-gradient", 5, 5,
        [](int x, int y) {
            const double dx = (x - 64.0) / 42.0;
            const double dy = (y - 60.0) / 24.0;
            return dx * dx + dy * dy <= 1.0;
        },
        [](int x, int, bool fg) {
            if (fg) return Rgb(240, 140, 30);
            const int t = x * 160 / (kFixtureSide - 1);
            return Rgb(20, static_cast<std::uint8_t>(60 + t / 2), static_cast<std::uint8_t>(120 + t / 2));
        },
        {fg_stroke({{36, 60}, {92, 60}})}));

    out.push_back(render(
        "blob-on-checker", 6, 4, [](int x, int y) { return in_disk(x, y, 60, 68, 28); },
        [](int x, int y, bool fg) {
            if (fg) return Rgb(230, 120, 170);
            return ((x / 8) + (y / 8)) % 2 == 0 ? Rgb(90, 90, 90) : Rgb(150, 150, 150);
        },
        {fg_stroke({{46, 68}, {74, 68}}), fg_stroke({{60, 56}, {60, 80}})}));

    const Point ta{64, 16};
    const Point tb{20, 108};
    const Point tc{108, 108};
    out.push_back(render(
        "triangle", 7, 6, [=](int x, int y) { return in_triangle(x, y, ta, tb, tc); },
        [](int, int, bool fg) { return fg ? Rgb(235, 235, 220) : Rgb(30, 90, 40); },
        {fg_stroke({{64, 50}, {64, 96}}), fg_stroke({{44, 96}, {84, 96}})}));

    out.push_back(render(
        "corner-rectangle", 8, 8, [](int x, int y) { return x >= 10 && x < 60 && y >= 14 && y < 50; },
        [](int, int, bool fg) { return fg ? Rgb(40, 200, 210) : Rgb(120, 80, 50); },
        {fg_stroke({{20, 32}, {50, 32}})}));

    return out;
}

void write_fixtures(const std::filesystem::path& dir, const std::vector<Fixture>& fixtures) {
    std::filesystem::create_directories(dir);
    for (const auto& f : fixtures) {
        save_image(dir / (f.name + ".png"), f.image);
        save_mask_png(dir / (f.name + "_gt.png"), f.truth);
        std::ofstream(dir / (f.name + "_scribble.json")) << to_json(f.scribble_annotation()).dump(2) << '\n';
        std::ofstream(dir / (f.name + "_box.json")) << to_json(f.box_annotation()).dump(2) << '\n';
    }
}

} // namespace cds::seg
