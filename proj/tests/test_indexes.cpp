#include <algorithm>
#include <map>
#include <set>

#include "doctest.h"
#include "support/running_example.hpp"
#include "svx/evalkit.hpp"
#include "svx/indexes.hpp"
#include "svx/workbench.hpp"

using namespace svx;
using testsupport::RunningExample;

namespace {

struct Bench {
    PageStore store;
    Dataset dataset;
    DataFiles data;
    std::map<IndexKind, SpatialVisualIndex> indexes;
    BuildConfig cfg;

    explicit Bench(PageStoreConfig pcfg = {}) : store(pcfg) {}

    const SpatialVisualIndex& at(IndexKind k) const { return indexes.at(k); }
};

Bench build_fixture() {
    Bench b;
    const auto ex = testsupport::make_running_example();
    b.dataset = ex.dataset;
    b.cfg = ex.build_config();
    b.data = write_dataset(b.store, b.dataset);
    for (IndexKind k : kAllIndexKinds)
        b.indexes.emplace(k, SpatialVisualIndex::build(k, b.dataset, b.store, b.data, b.cfg));
    return b;
}

Dataset clustered_dataset(std::size_t n, int dim, std::uint64_t seed) {
    DatasetSpec spec;
    spec.n = n;
    spec.dim = dim;
    spec.seed = seed;
    spec.coupling = 0.6;
    spec.spatial = {{{20.0, 20.0}, 2.0, 0.3},
                    {{70.0, 30.0}, 4.0, 0.3},
                    {{40.0, 75.0}, 8.0, 0.4}};
    spec.visual = {{{}, 1.0, 0.3}, {{}, 2.0, 0.3}, {{}, 3.0, 0.4}};
    return generate_dataset(spec);
}

Bench build_clustered(std::size_t n, int dim, std::uint64_t seed,
                      bool duplicate_vfi = false) {
    Bench b;
    b.dataset = clustered_dataset(n, dim, seed);
    b.cfg.lsh.tables = 3;
    b.cfg.lsh.functions = 7;
    b.cfg.lsh.width = default_lsh_width(b.dataset, seed);
    b.cfg.lsh.seed = seed + 1;
    b.cfg.duplicate_vfi_trees = duplicate_vfi;
    b.data = write_dataset(b.store, b.dataset);
    for (IndexKind k : kAllIndexKinds)
        b.indexes.emplace(k, SpatialVisualIndex::build(k, b.dataset, b.store, b.data, b.cfg));
    return b;
}

std::vector<SpatialVisualRangeQuery> random_workload(const Dataset& ds, std::size_t count,
                                                     std::uint64_t seed, double sigma_scale) {
    const double sigma_mid = pairwise_distance_quantile(ds, 0.05, seed);
    std::vector<SpatialVisualRangeQuery> out;
    Rng rng(seed);
    for (std::size_t i = 0; i < count; ++i) {
        const auto& img = ds.images[rng.next_u64() % ds.size()];
        SpatialVisualRangeQuery q;
        const double sx = 4.0 + rng.uniform() * 30.0;
        const double sy = 4.0 + rng.uniform() * 30.0;
        q.spatial = Rect{{img.s.x - sx / 2, img.s.y - sy / 2},
                         {img.s.x + sx / 2, img.s.y + sy / 2}};
        q.query_vector = img.v;
        q.sigma = sigma_mid * sigma_scale * (0.5 + rng.uniform());
        q.seed = mix_seed(seed, i);
        out.push_back(std::move(q));
    }
    return out;
}

// Independent oracle for the LSH visual side: collision by direct hashing of
// the stored vectors, then the exact distance filter.
std::vector<std::uint32_t> lsh_visual_oracle(const Dataset& ds, const HashFamily& fam,
                                             const SpatialVisualRangeQuery& q) {
    std::vector<std::uint32_t> out;
    for (std::uint32_t i = 0; i < ds.size(); ++i) {
        if (!lsh_visible(fam, ds.images[i].v, q.query_vector)) continue;
        if (euclidean_distance(ds.images[i].v, q.query_vector) <= q.sigma) out.push_back(i);
    }
    return out;
}

std::vector<std::uint32_t> strict_oracle(const Dataset& ds,
                                         const SpatialVisualRangeQuery& q) {
    return oracle_query(ds, q, 0.0).strict;
}

std::vector<std::string> ids_of(const Bench& b, const std::vector<std::uint32_t>& ords) {
    std::vector<std::string> out;
    for (auto o : ords) out.push_back(b.data.ids[o]);
    return out;
}

}  // namespace

TEST_CASE("running example: every structure reproduces its walk-through result") {
    const Bench b = build_fixture();
    const auto ex = testsupport::make_running_example();

    const std::map<IndexKind, std::vector<std::string>> expected = {
        {IndexKind::di, {"I3", "I4"}},
        {IndexKind::aug_rtree, {"I3", "I4", "I9"}},
        {IndexKind::aug_lsh, {"I3", "I4"}},
        {IndexKind::sfi, {"I3", "I4"}},
        {IndexKind::vfi, {"I3", "I4"}},
        {IndexKind::aug_sfi, {"I3", "I4"}},
        {IndexKind::aug_vfi, {"I3", "I4"}},
    };
    for (const auto& [kind, want] : expected) {
        const auto outcome = b.at(kind).query(ex.query);
        CHECK_MESSAGE(ids_of(b, outcome.result) == want, to_string(kind));
    }
}

TEST_CASE("running example: the double-index trace pays the documented pages") {
    const Bench b = build_fixture();
    const auto ex = testsupport::make_running_example();
    const auto outcome = b.at(IndexKind::di).query(ex.query);
    // Two internal nodes and two leaves (the root is memory-resident), plus
    // the two probed buckets.
    CHECK(outcome.stats.pages_rtree == 4);
    CHECK(outcome.stats.pages_lsh == 2);
    CHECK(outcome.stats.pages_data > 0);
    CHECK(outcome.stats.simulated_time ==
          doctest::Approx(0.001 * static_cast<double>(outcome.stats.total_pages())));

    // The fixture build mirrors the reference figures: six leaves, 4+3 buckets.
    CHECK(b.at(IndexKind::di).primary_tree_meta()->leaf_count == 6);
    CHECK(b.at(IndexKind::di).primary_lsh_meta()->bucket_count(0) == 4);
    CHECK(b.at(IndexKind::di).primary_lsh_meta()->bucket_count(1) == 3);
}

TEST_CASE("running example: augmented spatial-first skips leaf pages") {
    const Bench b = build_fixture();
    const auto ex = testsupport::make_running_example();
    const auto plain = b.at(IndexKind::sfi).query(ex.query);
    const auto aug = b.at(IndexKind::aug_sfi).query(ex.query);
    CHECK(aug.stats.pages_rtree == 2);    // internal level only
    CHECK(plain.stats.pages_rtree == 4);  // internals + leaves
    CHECK(aug.stats.total_pages() <= plain.stats.total_pages());
}

TEST_CASE("running example: augmented visual-first reads no primary bucket") {
    const Bench b = build_fixture();
    const auto ex = testsupport::make_running_example();
    const auto plain = b.at(IndexKind::vfi).query(ex.query);
    const auto aug = b.at(IndexKind::aug_vfi).query(ex.query);
    CHECK(aug.stats.pages_lsh == 0);
    CHECK(plain.stats.pages_lsh == 2);
    CHECK(aug.stats.pages_rtree == plain.stats.pages_rtree);
    CHECK(aug.stats.total_pages() <= plain.stats.total_pages());
    CHECK(aug.result == plain.result);
}

TEST_CASE("a one-image dataset answers through every structure") {
    Bench b;
    b.dataset.dim = 3;
    b.dataset.images.push_back({"only", {5.0, 5.0}, {1.0, 2.0, 3.0}});
    b.cfg.lsh.tables = 2;
    b.cfg.lsh.functions = 2;
    b.cfg.lsh.width = 4.0;
    b.data = write_dataset(b.store, b.dataset);
    SpatialVisualRangeQuery q;
    q.spatial = Rect{{0, 0}, {10, 10}};
    q.query_vector = {1.0, 2.0, 3.0};
    q.sigma = 0.0;
    for (IndexKind k : kAllIndexKinds) {
        const auto idx = SpatialVisualIndex::build(k, b.dataset, b.store, b.data, b.cfg);
        CHECK_MESSAGE(idx.query(q).result == std::vector<std::uint32_t>{0}, to_string(k));
    }
}

TEST_CASE("empty dataset is rejected at build time") {
    PageStore store;
    Dataset empty;
    empty.dim = 4;
    const DataFiles data = write_dataset(store, empty);
    CHECK_THROWS_AS(
        SpatialVisualIndex::build(IndexKind::di, empty, store, data, BuildConfig{}),
        std::invalid_argument);
}

TEST_CASE("augmented R*-tree equals the strict linear-scan answer") {
    const Bench b = build_clustered(600, 8, 42);
    for (const auto& q : random_workload(b.dataset, 60, 9, 1.0)) {
        CHECK(b.at(IndexKind::aug_rtree).query(q).result == strict_oracle(b.dataset, q));
    }
}

TEST_CASE("double index equals the componentwise oracle") {
    const Bench b = build_clustered(600, 8, 43);
    const auto& fam = b.at(IndexKind::di).family();
    for (const auto& q : random_workload(b.dataset, 40, 10, 1.0)) {
        const auto visual = lsh_visual_oracle(b.dataset, fam, q);
        std::vector<std::uint32_t> expect;
        for (std::uint32_t i : visual)
            if (rect_contains(q.spatial, b.dataset.images[i].s)) expect.push_back(i);
        CHECK(b.at(IndexKind::di).query(q).result == expect);
    }
}

TEST_CASE("augmented LSH equals the componentwise oracle") {
    const Bench b = build_clustered(600, 8, 44);
    const auto& fam = b.at(IndexKind::aug_lsh).family();
    for (const auto& q : random_workload(b.dataset, 40, 11, 1.0)) {
        const auto visual = lsh_visual_oracle(b.dataset, fam, q);
        std::vector<std::uint32_t> expect;
        for (std::uint32_t i : visual)
            if (rect_contains(q.spatial, b.dataset.images[i].s)) expect.push_back(i);
        CHECK(b.at(IndexKind::aug_lsh).query(q).result == expect);
    }
}

TEST_CASE("cross-structure result equivalence with shared hash functions") {
    for (bool duplicated : {false, true}) {
        CAPTURE(duplicated);
        const Bench b = build_clustered(700, 8, duplicated ? 45 : 46, duplicated);
        for (const auto& q : random_workload(b.dataset, 50, 12, 1.2)) {
            const auto di = b.at(IndexKind::di).query(q).result;
            CHECK(b.at(IndexKind::sfi).query(q).result == di);
            CHECK(b.at(IndexKind::vfi).query(q).result == di);
            CHECK(b.at(IndexKind::aug_sfi).query(q).result == di);
            CHECK(b.at(IndexKind::aug_vfi).query(q).result == di);
        }
    }
}

TEST_CASE("double index results are a subset of the augmented R*-tree's") {
    const Bench b = build_clustered(500, 8, 47);
    for (const auto& q : random_workload(b.dataset, 40, 13, 1.0)) {
        const auto di = b.at(IndexKind::di).query(q).result;
        const auto aug = b.at(IndexKind::aug_rtree).query(q).result;
        CHECK(std::includes(aug.begin(), aug.end(), di.begin(), di.end()));
    }
}

TEST_CASE("visual exploration only adds results, deterministically") {
    const Bench b = build_clustered(700, 8, 48);
    for (auto q : random_workload(b.dataset, 25, 14, 1.2)) {
        q.explore_visual = 0;
        const auto base = b.at(IndexKind::aug_sfi).query(q).result;
        q.explore_visual = 15;
        const auto grown = b.at(IndexKind::aug_sfi).query(q).result;
        const auto grown_again = b.at(IndexKind::aug_sfi).query(q).result;
        CHECK(grown == grown_again);
        CHECK(std::includes(grown.begin(), grown.end(), base.begin(), base.end()));

        // Probe streams share prefixes, so candidate growth is monotone in E.v.
        q.explore_visual = 9;
        const auto mid = b.at(IndexKind::aug_sfi).query(q).result;
        CHECK(std::includes(grown.begin(), grown.end(), mid.begin(), mid.end()));
        CHECK(std::includes(mid.begin(), mid.end(), base.begin(), base.end()));
    }
}

TEST_CASE("spatial exploration only adds results") {
    const Bench b = build_clustered(700, 8, 49);
    for (auto q : random_workload(b.dataset, 25, 15, 1.2)) {
        q.explore_spatial = 0.0;
        const auto base = b.at(IndexKind::aug_vfi).query(q).result;
        q.explore_spatial = 0.5;
        const auto grown = b.at(IndexKind::aug_vfi).query(q).result;
        CHECK(std::includes(grown.begin(), grown.end(), base.begin(), base.end()));
        q.explore_spatial = 0.9;
        const auto grown_more = b.at(IndexKind::aug_vfi).query(q).result;
        CHECK(std::includes(grown_more.begin(), grown_more.end(), grown.begin(), grown.end()));
    }
}

TEST_CASE("per-query page bounds of the augmented hybrids") {
    const Bench b = build_clustered(800, 8, 50);
    for (const auto& q : random_workload(b.dataset, 60, 16, 1.2)) {
        const auto sfi = b.at(IndexKind::sfi).query(q);
        const auto aug_sfi = b.at(IndexKind::aug_sfi).query(q);
        CHECK(aug_sfi.stats.total_pages() <= sfi.stats.total_pages());
        CHECK(aug_sfi.result == sfi.result);

        const auto vfi = b.at(IndexKind::vfi).query(q);
        const auto aug_vfi = b.at(IndexKind::aug_vfi).query(q);
        CHECK(aug_vfi.stats.total_pages() <= vfi.stats.total_pages());
        CHECK(aug_vfi.result == vfi.result);
        CHECK(aug_vfi.stats.pages_lsh == 0);
    }
}

TEST_CASE("every structure returns only images satisfying its effective query") {
    const Bench b = build_clustered(600, 8, 51);
    for (auto q : random_workload(b.dataset, 30, 17, 1.2)) {
        q.explore_visual = 9;
        q.explore_spatial = 0.5;
        for (IndexKind k : kAllIndexKinds) {
            const auto outcome = b.at(k).query(q);
            const Rect effective =
                k == IndexKind::aug_vfi ? expand_rect(q.spatial, q.explore_spatial) : q.spatial;
            for (std::uint32_t ord : outcome.result) {
                CHECK(rect_contains(effective, b.dataset.images[ord].s));
                CHECK(euclidean_distance(b.dataset.images[ord].v, q.query_vector) <= q.sigma);
            }
        }
    }
}

TEST_CASE("manifest round-trip reopens a structure with identical behavior") {
    Bench b;
    b.dataset = clustered_dataset(300, 8, 52);
    b.cfg.lsh.tables = 3;
    b.cfg.lsh.functions = 5;
    b.cfg.lsh.width = default_lsh_width(b.dataset, 3);
    b.cfg.lsh.seed = 8;
    b.data = write_dataset(b.store, b.dataset);

    const auto dir = std::filesystem::temp_directory_path() / "svx_manifest_test";
    std::filesystem::create_directories(dir);
    for (IndexKind k : kAllIndexKinds) {
        const auto idx = SpatialVisualIndex::build(k, b.dataset, b.store, b.data, b.cfg);
        const auto path = dir / (std::string("manifest_") + to_string(k) + ".txt");
        idx.save_manifest(path);
        const auto reopened = SpatialVisualIndex::open(path, b.store, b.data);
        for (const auto& q : random_workload(b.dataset, 10, 18, 1.0)) {
            const auto a = idx.query(q);
            const auto c = reopened.query(q);
            CHECK(a.result == c.result);
            CHECK(a.stats.total_pages() == c.stats.total_pages());
        }
    }
    std::filesystem::remove_all(dir);
}
