#include "cds/superpixels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <opencv2/imgproc.hpp>

#include "cds/error.hpp"

namespace cds::seg {

std::vector<int> SuperpixelMap::sizes() const {
    std::vector<int> out(static_cast<std::size_t>(count), 0);
    for (int l : labels) ++out[static_cast<std::size_t>(l)];
    return out;
}

namespace {

struct Center {
    double l, a, b, x, y;
};

cv::Mat3f to_lab(const Image& image) {
    cv::Mat3f rgb;
    image.rgb().convertTo(rgb, CV_32FC3, 1.0 / 255.0);
    cv::Mat3f lab;
    cv::cvtColor(rgb, lab, cv::COLOR_RGB2Lab);
    return lab;
}

// Moves a seed to the lowest-gradient position of its 3x3 neighbourhood.
void perturb_seed(const cv::Mat3f& lab, Center& c) {
    const int w = lab.cols;
    const int h = lab.rows;
    auto grad = [&](int x, int y) {
        const cv::Vec3f dx = lab(y, std::min(x + 1, w - 1)) - lab(y, std::max(x - 1, 0));
        const cv::Vec3f dy = lab(std::min(y + 1, h - 1), x) - lab(std::max(y - 1, 0), x);
        return dx.dot(dx) + dy.dot(dy);
    };
    const int cx = std::clamp(static_cast<int>(std::lround(c.x)), 0, w - 1);
    const int cy = std::clamp(static_cast<int>(std::lround(c.y)), 0, h - 1);
    double best = grad(cx, cy);
    int bx = cx;
    int by = cy;
    for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
            const int x = cx + dx;
            const int y = cy + dy;
            if (x < 0 || y < 0 || x >= w || y >= h) continue;
            const double g = grad(x, y);
            if (g < best) {
                best = g;
                bx = x;
                by = y;
            }
        }
    }
    const cv::Vec3f v = lab(by, bx);
    if (bx == cx && by == cy) {
        c = Center{v[0], v[1], v[2], c.x, c.y};
    } else {
        c = Center{v[0], v[1], v[2], static_cast<double>(bx), static_cast<double>(by)};
    }
}

} // namespace

SuperpixelMap compute_superpixels(const Image& image, int target_count, const SlicSettings& settings) {
    if (target_count < kMinSuperpixels || target_count > kMaxSuperpixels) {
        throw InvalidArgument("superpixel target must lie in [" + std::to_string(kMinSuperpixels) + ", " +
                              std::to_string(kMaxSuperpixels) + "], got " + std::to_string(target_count));
    }
    if (image.width() < kMinImageSide || image.height() < kMinImageSide) {
        throw InvalidArgument("image too small for superpixels");
    }
    const int w = image.width();
    const int h = image.height();
    const cv::Mat3f lab = to_lab(image);

    const double step = std::sqrt(static_cast<double>(w) * h / target_count);
    const int nx = std::max(1, static_cast<int>(std::lround(w / step)));
    const int ny = std::max(1, static_cast<int>(std::lround(h / step)));
    const double sx = static_cast<double>(w) / nx;
    const double sy = static_cast<double>(h) / ny;

    std::vector<Center> centers;
    centers.reserve(static_cast<std::size_t>(nx * ny));
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            Center c{0, 0, 0, (i + 0.5) * sx - 0.5, (j + 0.5) * sy - 0.5};
            perturb_seed(lab, c);
            centers.push_back(c);
        }
    }

    const std::size_t npix = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
    std::vector<int> assign(npix, -1);
    std::vector<double> dist(npix);
    const double spatial = settings.compactness / step;
    const int window = static_cast<int>(std::ceil(std::max(sx, sy)));

    for (int it = 0; it < settings.iterations; ++it) {
        std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
        for (std::size_t k = 0; k < centers.size(); ++k) {
            const Center& c = centers[k];
            const int x0 = std::max(0, static_cast<int>(c.x) - window);
            const int x1 = std::min(w - 1, static_cast<int>(c.x) + window);
            const int y0 = std::max(0, static_cast<int>(c.y) - window);
            const int y1 = std::min(h - 1, static_cast<int>(c.y) + window);
            for (int y = y0; y <= y1; ++y) {
                for (int x = x0; x <= x1; ++x) {
                    const cv::Vec3f v = lab(y, x);
                    const double dl = v[0] - c.l;
                    const double da = v[1] - c.a;
                    const double db = v[2] - c.b;
                    const double dx = x - c.x;
                    const double dy = y - c.y;
                    const double d = dl * dl + da * da + db * db + spatial * spatial * (dx * dx + dy * dy);
                    const std::size_t p = static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x);
                    if (d < dist[p]) {
                        dist[p] = d;
                        assign[p] = static_cast<int>(k);
                    }
                }
            }
        }
        std::vector<Center> sum(centers.size(), Center{0, 0, 0, 0, 0});
        std::vector<int> members(centers.size(), 0);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const std::size_t p = static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x);
                if (assign[p] < 0) continue;
                const auto k = static_cast<std::size_t>(assign[p]);
                const cv::Vec3f v = lab(y, x);
                sum[k].l += v[0];
                sum[k].a += v[1];
                sum[k].b += v[2];
                sum[k].x += x;
                sum[k].y += y;
                ++members[k];
            }
        }
        for (std::size_t k = 0; k < centers.size(); ++k) {
            if (members[k] == 0) continue;
            const double inv = 1.0 / members[k];
            centers[k] = Center{sum[k].l * inv, sum[k].a * inv, sum[k].b * inv, sum[k].x * inv, sum[k].y * inv};
        }
    }

    // Connectivity: relabel 4-connected components in scan order; fragments
    // below a quarter of the nominal size join the previously labelled
    // neighbour met first.
    const int min_size = std::max(1, static_cast<int>(sx * sy) / 4);
    SuperpixelMap map;
    map.width = w;
    map.height = h;
    map.labels.assign(npix, -1);
    const int dx4[4] = {-1, 0, 1, 0};
    const int dy4[4] = {0, -1, 0, 1};
    std::vector<std::size_t> component;
    int next = 0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t start = static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x);
            if (map.labels[start] >= 0) continue;
            int adjacent = -1;
            for (int d = 0; d < 4; ++d) {
                const int ax = x + dx4[d];
                const int ay = y + dy4[d];
                if (ax < 0 || ay < 0 || ax >= w || ay >= h) continue;
                const int l = map.labels[static_cast<std::size_t>(ay) * static_cast<std::size_t>(w) + static_cast<std::size_t>(ax)];
                if (l >= 0) {
                    adjacent = l;
                    break;
                }
            }
            component.clear();
            component.push_back(start);
            map.labels[start] = next;
            for (std::size_t head = 0; head < component.size(); ++head) {
                const int cx = static_cast<int>(component[head] % static_cast<std::size_t>(w));
                const int cy = static_cast<int>(component[head] / static_cast<std::size_t>(w));
                for (int d = 0; d < 4; ++d) {
                    const int ax = cx + dx4[d];
                    const int ay = cy + dy4[d];
                    if (ax < 0 || ay < 0 || ax >= w || ay >= h) continue;
                    const std::size_t q = static_cast<std::size_t>(ay) * static_cast<std::size_t>(w) + static_cast<std::size_t>(ax);
                    if (map.labels[q] < 0 && assign[q] == assign[start]) {
                        map.labels[q] = next;
                        component.push_back(q);
                    }
                }
            }
            if (static_cast<int>(component.size()) < min_size && adjacent >= 0) {
                for (std::size_t q : component) map.labels[q] = adjacent;
            } else {
                ++next;
            }
        }
    }
    map.count = next;

    std::set<std::pair<int, int>> pairs;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int l = map.label(x, y);
            if (x + 1 < w && map.label(x + 1, y) != l) pairs.emplace(std::minmax(l, map.label(x + 1, y)));
            if (y + 1 < h && map.label(x, y + 1) != l) pairs.emplace(std::minmax(l, map.label(x, y + 1)));
        }
    }
    map.adjacency.assign(pairs.begin(), pairs.end());
    return map;
}

} // namespace cds::seg
