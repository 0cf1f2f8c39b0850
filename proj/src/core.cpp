#include "svx/core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace svx {

const char* to_string(ResultClass c) {
    switch (c) {
        case ResultClass::sv_match_rel: return "SV-Match-Rel";
        case ResultClass::s_unmatch_rel: return "S-UNMatch-Rel";
        case ResultClass::v_unmatch_rel: return "V-UNMatch-Rel";
    }
    return "?";
}

void Dataset::validate() const {
    std::unordered_set<std::string> seen;
    seen.reserve(images.size());
    for (const auto& img : images) {
        if (static_cast<int>(img.v.size()) != dim)
            throw std::invalid_argument("dataset: image " + img.id + " has dimension " +
                                        std::to_string(img.v.size()) + ", expected " +
                                        std::to_string(dim));
        if (!seen.insert(img.id).second)
            throw std::invalid_argument("dataset: duplicate image id " + img.id);
    }
    if (dim < 1) throw std::invalid_argument("dataset: dimension must be >= 1");
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw std::invalid_argument("euclidean_distance: dimension mismatch (" +
                                    std::to_string(a.size()) + " vs " +
                                    std::to_string(b.size()) + ")");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

bool rect_contains(const Rect& r, Point2 p) {
    return r.lo.x <= p.x && p.x <= r.hi.x && r.lo.y <= p.y && p.y <= r.hi.y;
}

bool rect_is_valid(const Rect& r) { return r.lo.x <= r.hi.x && r.lo.y <= r.hi.y; }

bool rects_intersect(const Rect& a, const Rect& b) {
    return a.lo.x <= b.hi.x && b.lo.x <= a.hi.x && a.lo.y <= b.hi.y && b.lo.y <= a.hi.y;
}

Rect rect_union(const Rect& a, const Rect& b) {
    return Rect{{std::min(a.lo.x, b.lo.x), std::min(a.lo.y, b.lo.y)},
                {std::max(a.hi.x, b.hi.x), std::max(a.hi.y, b.hi.y)}};
}

double rect_area(const Rect& r) { return (r.hi.x - r.lo.x) * (r.hi.y - r.lo.y); }

double rect_margin(const Rect& r) { return (r.hi.x - r.lo.x) + (r.hi.y - r.lo.y); }

double rect_overlap_area(const Rect& a, const Rect& b) {
    const double w = std::min(a.hi.x, b.hi.x) - std::max(a.lo.x, b.lo.x);
    const double h = std::min(a.hi.y, b.hi.y) - std::max(a.lo.y, b.lo.y);
    if (w <= 0.0 || h <= 0.0) return 0.0;
    return w * h;
}

Rect expand_rect(const Rect& r, double ratio) {
    if (ratio < 0.0) throw std::invalid_argument("expand_rect: negative ratio");
    const double cx = 0.5 * (r.lo.x + r.hi.x);
    const double cy = 0.5 * (r.lo.y + r.hi.y);
    const double hw = 0.5 * (r.hi.x - r.lo.x) * (1.0 + ratio);
    const double hh = 0.5 * (r.hi.y - r.lo.y) * (1.0 + ratio);
    return Rect{{cx - hw, cy - hh}, {cx + hw, cy + hh}};
}

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t splitmix64(std::uint64_t& x) {
    x += kGolden;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}
}  // namespace

std::uint64_t Rng::next_u64() { return splitmix64(state_); }

double Rng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform_open() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
}

double Rng::gaussian() {
    const double u1 = uniform_open();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t x = a ^ (b * kGolden + 0x5851F42D4C957F2DULL);
    return splitmix64(x);
}

std::vector<std::vector<double>> sample_in_ball(std::span<const double> center,
                                                double radius, int count,
                                                std::uint64_t seed) {
    if (radius < 0.0) throw std::invalid_argument("sample_in_ball: negative radius");
    if (count < 0) throw std::invalid_argument("sample_in_ball: negative count");
    const std::size_t d = center.size();
    Rng rng(seed);
    std::vector<std::vector<double>> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        std::vector<double> dir(d);
        double norm2 = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            dir[j] = rng.gaussian();
            norm2 += dir[j] * dir[j];
        }
        const double u = rng.uniform();
        double norm = std::sqrt(norm2);
        if (norm < 1e-300) {  // zero direction: fall back to the first axis
            dir.assign(d, 0.0);
            if (d > 0) dir[0] = 1.0;
            norm = 1.0;
        }
        const double scale =
            d > 0 ? radius * std::pow(u, 1.0 / static_cast<double>(d)) / norm : 0.0;
        std::vector<double> v(d);
        for (std::size_t j = 0; j < d; ++j) v[j] = center[j] + dir[j] * scale;
        out.push_back(std::move(v));
    }
    return out;
}

}  // namespace svx
