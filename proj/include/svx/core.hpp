// Core domain types for spatial-visual search: geo-tagged records, axis-aligned
// rectangles, range queries, and the deterministic randomness everything else
// builds on.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace svx {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

/// Axis-aligned rectangle, lo = bottom-left, hi = top-right.
struct Rect {
    Point2 lo;
    Point2 hi;
};

/// One record: opaque id, 2-d camera location, d-dim visual feature vector.
struct GeoImage {
    std::string id;
    Point2 s;
    std::vector<double> v;
};

struct Dataset {
    int dim = 0;
    std::vector<GeoImage> images;

    std::size_t size() const { return images.size(); }
    // Throws if ids collide or any vector deviates from `dim`.
    void validate() const;
};

/// Rectangle + (query vector, threshold sigma), with optional exploration
/// knobs: explore_spatial enlarges the rectangle, explore_visual adds probe
/// vectors. `seed` drives any per-query randomness (probe sampling).
struct SpatialVisualRangeQuery {
    Rect spatial;
    std::vector<double> query_vector;
    double sigma = 0.0;
    double explore_spatial = 0.0;
    int explore_visual = 0;
    std::uint64_t seed = 0;
};

enum class ResultClass { sv_match_rel, s_unmatch_rel, v_unmatch_rel };

const char* to_string(ResultClass c);

// ---- geometry -------------------------------------------------------------

double euclidean_distance(std::span<const double> a, std::span<const double> b);

/// Boundaries are inclusive on all four sides.
bool rect_contains(const Rect& r, Point2 p);

bool rect_is_valid(const Rect& r);
bool rects_intersect(const Rect& a, const Rect& b);
Rect rect_union(const Rect& a, const Rect& b);
double rect_area(const Rect& r);
double rect_margin(const Rect& r);
double rect_overlap_area(const Rect& a, const Rect& b);

/// Grows each side by (1 + ratio) about the center; ratio 0 is the identity.
Rect expand_rect(const Rect& r, double ratio);

// ---- deterministic randomness ---------------------------------------------

/// Thin wrapper over mt19937_64 producing uniforms and gaussians with a fixed
/// draw count per call, so sample streams are reproducible across platforms.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64();
    double uniform();    // [0, 1)
    double uniform_open();  // (0, 1], safe for log()
    double gaussian();   // Box-Muller, consumes exactly two uniforms

  private:
    std::uint64_t state_;
};

/// Stable combination of two seeds (workload seed + entity id, etc.).
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

/// Exactly `count` vectors uniform in the closed ball of `radius` around
/// `center`; bit-identical for a fixed seed, and the first k of count k+1
/// match the count-k output (prefix property).
std::vector<std::vector<double>> sample_in_ball(std::span<const double> center,
                                                double radius, int count,
                                                std::uint64_t seed);

}  // namespace svx
