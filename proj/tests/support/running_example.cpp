#include "support/running_example.hpp"

namespace svx::testsupport {

RunningExample make_running_example() {
    RunningExample ex;
    ex.dataset.dim = 2;

    // id, location, visual vector. The query vector is (3.05, 6.05); visual
    // distances reproduce the reference table: 1.5, 0.6, 0.1, 0.3, 0.2, 0.8,
    // 0.6, 0.4, 0.4. Hashes are floor(2x) in table 1 and floor(y) in table 2,
    // so the probed buckets are key 6 in both tables.
    const struct {
        const char* id;
        double sx, sy;
        double vx, vy;
    } rows[] = {
        {"I1", 20.0, -100.0, 3.95, 4.85},   // far visually, bucket (7, 4)
        {"I2", 25.0, -120.0, 2.69, 5.57},   // 0.6 away, bucket (5, 5)
        {"I3", 31.0, -110.0, 3.15, 6.05},   // 0.1, bucket (6, 6), in rect
        {"I4", 32.0, -106.0, 3.35, 6.05},   // 0.3, bucket (6, 6), in rect
        {"I5", 40.0, -102.0, 3.05, 6.25},   // 0.2, bucket (6, 6), out of rect
        {"I6", 38.0, -95.0, 2.41, 6.53},    // 0.8, bucket (4, 6)
        {"I7", 33.0, -111.0, 2.69, 6.53},   // 0.6, bucket (5, 6), in rect
        {"I8", 35.0, -105.0, 3.45, 6.05},   // 0.4, bucket (6, 6), out of rect
        {"I9", 31.5, -112.5, 2.81, 5.73},   // 0.4, bucket (5, 5): LSH-invisible
    };
    for (const auto& r : rows) {
        GeoImage img;
        img.id = r.id;
        img.s = {r.sx, r.sy};
        img.v = {r.vx, r.vy};
        ex.dataset.images.push_back(std::move(img));
    }

    ex.query.spatial = Rect{{30.0, -116.0}, {34.0, -104.0}};
    ex.query.query_vector = {3.05, 6.05};
    ex.query.sigma = 0.5;

    // Leaves R1..R6; Ra holds R1-R3, Rb holds R4-R6. The query rectangle
    // overlaps exactly R3 = {I3, I7, I9} and R4 = {I4, I8}.
    ex.layout.leaves = {
        {RunningExample::ord(1)},
        {RunningExample::ord(2)},
        {RunningExample::ord(3), RunningExample::ord(7), RunningExample::ord(9)},
        {RunningExample::ord(4), RunningExample::ord(8)},
        {RunningExample::ord(5)},
        {RunningExample::ord(6)},
    };
    ex.layout.internal_groups = {{0, 1, 2}, {3, 4, 5}};

    ex.family = std::make_shared<const HashFamily>(HashFamily::explicit_functions(
        1.0, {{{2.0, 0.0}}, {{0.0, 1.0}}}, {{0.0}, {0.0}}));
    return ex;
}

BuildConfig RunningExample::build_config() const {
    BuildConfig cfg;
    cfg.lsh.tables = 2;
    cfg.lsh.functions = 1;
    cfg.lsh.width = 1.0;
    cfg.lsh.dim = 2;
    cfg.hash_override = family;
    cfg.layout = layout;
    return cfg;
}

}  // namespace svx::testsupport
