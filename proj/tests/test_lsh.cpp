#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "support/running_example.hpp"
#include "svx/lsh.hpp"
#include "svx/records.hpp"

using namespace svx;

namespace {

struct LshUnderTest {
    PageStore store;
    std::uint32_t visual_file = 0;
    std::uint32_t spatial_file = 0;
    std::uint32_t bucket_file = 0;
    std::vector<RecordPointer> vptr;
};

LshUnderTest prepare_store(const Dataset& ds) {
    LshUnderTest t;
    t.spatial_file = t.store.create_file("spatial", FileKind::data);
    t.visual_file = t.store.create_file("visual", FileKind::data);
    t.bucket_file = t.store.create_file("buckets", FileKind::lsh_buckets);
    for (std::uint32_t i = 0; i < ds.size(); ++i) {
        t.store.append(t.spatial_file,
                       encode_spatial_record({i, ds.images[i].id, ds.images[i].s}),
                       Placement::packed);
        t.vptr.push_back(t.store.append(
            t.visual_file, encode_visual_record({i, ds.images[i].id, ds.images[i].v}),
            Placement::packed));
    }
    return t;
}

std::vector<std::uint32_t> ordinals_of(const std::vector<BucketEntry>& entries) {
    std::vector<std::uint32_t> out;
    for (const auto& e : entries) out.push_back(e.ordinal);
    return out;
}

Dataset random_dataset(std::size_t n, int dim, std::uint64_t seed) {
    Dataset ds;
    ds.dim = dim;
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        GeoImage img;
        img.id = "r" + std::to_string(i);
        img.s = {rng.uniform() * 10, rng.uniform() * 10};
        img.v.resize(dim);
        for (auto& x : img.v) x = rng.gaussian() * 3.0;
        ds.images.push_back(std::move(img));
    }
    return ds;
}

}  // namespace

TEST_CASE("hash values follow the floor((a.o + b)/W) form") {
    const auto fam = HashFamily::explicit_functions(10.0, {{{2.0}}}, {{3.0}});
    const std::vector<double> o{4.0};
    CHECK(fam.single_hash(0, 0, o) == 1);  // floor((8 + 3)/10)
    CHECK(fam.key(0, o) == BucketKey{1});

    const auto zero_shift = HashFamily::explicit_functions(
        5.0, {{{1.0, 1.0}, {2.0, -1.0}}}, {{0.0, 0.0}});
    const std::vector<double> zeros{0.0, 0.0};
    CHECK(zero_shift.key(0, zeros) == BucketKey{0, 0});

    CHECK_THROWS_AS(fam.key(0, zeros), std::invalid_argument);  // wrong dimension
}

TEST_CASE("derived families are deterministic in the seed") {
    LshParams p;
    p.tables = 3;
    p.functions = 7;
    p.width = 4.0;
    p.dim = 16;
    p.seed = 99;
    const auto f1 = HashFamily::derive(p);
    const auto f2 = HashFamily::derive(p);
    std::vector<double> v(16);
    Rng rng(1);
    for (auto& x : v) x = rng.gaussian();
    for (std::uint32_t t = 0; t < 3; ++t) CHECK(f1.key(t, v) == f2.key(t, v));

    p.seed = 100;
    const auto f3 = HashFamily::derive(p);
    bool any_differ = false;
    for (std::uint32_t t = 0; t < 3; ++t) any_differ |= f1.key(t, v) != f3.key(t, v);
    CHECK(any_differ);
}

TEST_CASE("each image lands in exactly one bucket per table") {
    Dataset ds = random_dataset(1, 4, 2);
    auto t = prepare_store(ds);
    LshParams p;
    p.tables = 3;
    p.functions = 2;
    p.width = 2.0;
    p.dim = 4;
    const auto fam = HashFamily::derive(p);
    LshBuilder lb(&fam, BucketFlavor::plain);
    lb.insert(0, ds.images[0].v, t.vptr[0]);
    const auto meta = lb.persist(t.store, t.bucket_file, t.visual_file, t.spatial_file);
    CHECK(meta.directory.size() == 3);
    for (const auto& [tk, ref] : meta.directory) CHECK(ref.entries == 1);
}

TEST_CASE("bucket counts audit over a larger population") {
    Dataset ds = random_dataset(1000, 8, 5);
    auto t = prepare_store(ds);
    LshParams p;
    p.tables = 2;
    p.functions = 3;
    p.width = 3.0;
    p.dim = 8;
    const auto fam = HashFamily::derive(p);
    LshBuilder lb(&fam, BucketFlavor::plain);
    for (std::uint32_t i = 0; i < ds.size(); ++i) lb.insert(i, ds.images[i].v, t.vptr[i]);
    const auto meta = lb.persist(t.store, t.bucket_file, t.visual_file, t.spatial_file);
    std::size_t table0_entries = 0;
    for (const auto& [tk, ref] : meta.directory)
        if (tk.table == 0) table0_entries += ref.entries;
    CHECK(table0_entries == 1000);
}

TEST_CASE("running example: bucket layout, candidates, similarity result") {
    const auto ex = testsupport::make_running_example();
    auto t = prepare_store(ex.dataset);
    LshBuilder lb(ex.family.get(), BucketFlavor::plain);
    for (std::uint32_t i = 0; i < ex.dataset.size(); ++i)
        lb.insert(i, ex.dataset.images[i].v, t.vptr[i]);
    const auto meta = lb.persist(t.store, t.bucket_file, t.visual_file, t.spatial_file);
    const LshIndex index(&t.store, ex.family.get(), meta);

    CHECK(meta.bucket_count(0) == 4);  // first table: four buckets
    CHECK(meta.bucket_count(1) == 3);  // second table: three

    QueryContext ctx;
    const auto cands = index.candidate_set(ex.query.query_vector, &ctx);
    using O = testsupport::RunningExample;
    CHECK(ordinals_of(cands) == std::vector<std::uint32_t>{O::ord(3), O::ord(4), O::ord(5),
                                                           O::ord(6), O::ord(7), O::ord(8)});
    CHECK(ctx.ledger.pages_lsh() == 2);  // one bucket per table

    QueryContext ctx2;
    const auto result = index.similarity_query(ex.query.query_vector, 0.5, &ctx2);
    CHECK(result ==
          std::vector<std::uint32_t>{O::ord(3), O::ord(4), O::ord(5), O::ord(8)});

    // Re-running is idempotent and candidates never leave the dataset.
    const auto again = index.candidate_set(ex.query.query_vector, &ctx);
    CHECK(ordinals_of(again) == ordinals_of(cands));
    for (const auto& e : cands) CHECK(e.ordinal < ex.dataset.size());
}

TEST_CASE("probing an absent key costs nothing and returns nothing") {
    const auto ex = testsupport::make_running_example();
    auto t = prepare_store(ex.dataset);
    LshBuilder lb(ex.family.get(), BucketFlavor::plain);
    for (std::uint32_t i = 0; i < ex.dataset.size(); ++i)
        lb.insert(i, ex.dataset.images[i].v, t.vptr[i]);
    const LshIndex index(&t.store, ex.family.get(),
                         lb.persist(t.store, t.bucket_file, t.visual_file, t.spatial_file));
    QueryContext ctx;
    const std::vector<double> far{-50.0, -50.0};
    CHECK(index.candidate_set(far, &ctx).empty());
    CHECK(ctx.ledger.total() == 0);
}

TEST_CASE("similarity query never returns a false positive") {
    Dataset ds = random_dataset(300, 8, 11);
    auto t = prepare_store(ds);
    LshParams p;
    p.tables = 3;
    p.functions = 4;
    p.width = 2.5;
    p.dim = 8;
    p.seed = 4;
    const auto fam = HashFamily::derive(p);
    LshBuilder lb(&fam, BucketFlavor::plain);
    for (std::uint32_t i = 0; i < ds.size(); ++i) lb.insert(i, ds.images[i].v, t.vptr[i]);
    const LshIndex index(&t.store, &fam,
                         lb.persist(t.store, t.bucket_file, t.visual_file, t.spatial_file));

    Rng rng(12);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<double> q(8);
        for (auto& x : q) x = rng.gaussian() * 3.0;
        const double sigma = rng.uniform() * 6.0;
        const auto got = index.similarity_query(q, sigma, nullptr);
        std::vector<std::uint32_t> exact;
        for (std::uint32_t i = 0; i < ds.size(); ++i)
            if (euclidean_distance(ds.images[i].v, q) <= sigma) exact.push_back(i);
        CHECK(std::includes(exact.begin(), exact.end(), got.begin(), got.end()));
    }
}

TEST_CASE("sigma zero with the query equal to a stored vector returns it") {
    Dataset ds = random_dataset(50, 6, 31);
    auto t = prepare_store(ds);
    LshParams p;
    p.tables = 2;
    p.functions = 3;
    p.width = 2.0;
    p.dim = 6;
    const auto fam = HashFamily::derive(p);
    LshBuilder lb(&fam, BucketFlavor::plain);
    for (std::uint32_t i = 0; i < ds.size(); ++i) lb.insert(i, ds.images[i].v, t.vptr[i]);
    const LshIndex index(&t.store, &fam,
                         lb.persist(t.store, t.bucket_file, t.visual_file, t.spatial_file));
    const auto got = index.similarity_query(ds.images[17].v, 0.0, nullptr);
    REQUIRE(!got.empty());
    for (std::uint32_t ord : got)
        CHECK(euclidean_distance(ds.images[ord].v, ds.images[17].v) == 0.0);
    CHECK(std::count(got.begin(), got.end(), 17U) == 1);
}

TEST_CASE("single-function collision rate separates near from far pairs") {
    const int dim = 16;
    const double W = 4.0;
    std::size_t near_hits = 0, far_hits = 0, pairs = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        LshParams p;
        p.tables = 1;
        p.functions = 1;
        p.width = W;
        p.dim = dim;
        p.seed = seed;
        const auto fam = HashFamily::derive(p);
        Rng rng(seed * 91 + 3);
        for (int i = 0; i < 1000; ++i) {
            std::vector<double> x(dim), dir(dim);
            double norm = 0;
            for (int j = 0; j < dim; ++j) {
                x[j] = rng.gaussian() * 10;
                dir[j] = rng.gaussian();
                norm += dir[j] * dir[j];
            }
            norm = std::sqrt(norm);
            auto at = [&](double dist) {
                std::vector<double> y(x);
                for (int j = 0; j < dim; ++j) y[j] += dir[j] / norm * dist;
                return y;
            };
            near_hits += fam.single_hash(0, 0, x) == fam.single_hash(0, 0, at(W / 4)) ? 1 : 0;
            far_hits += fam.single_hash(0, 0, x) == fam.single_hash(0, 0, at(4 * W)) ? 1 : 0;
            ++pairs;
        }
    }
    const double near_rate = static_cast<double>(near_hits) / static_cast<double>(pairs);
    const double far_rate = static_cast<double>(far_hits) / static_cast<double>(pairs);
    CHECK(near_rate - far_rate >= 0.1);
}

TEST_CASE("identical builds produce byte-identical bucket files") {
    auto build = [] {
        Dataset ds = random_dataset(200, 8, 77);
        auto t = prepare_store(ds);
        LshParams p;
        p.tables = 3;
        p.functions = 5;
        p.width = 2.0;
        p.dim = 8;
        p.seed = 13;
        const auto fam = HashFamily::derive(p);
        LshBuilder lb(&fam, BucketFlavor::plain);
        for (std::uint32_t i = 0; i < ds.size(); ++i) lb.insert(i, ds.images[i].v, t.vptr[i]);
        lb.persist(t.store, t.bucket_file, t.visual_file, t.spatial_file);
        return t.store.serialize_file(t.bucket_file);
    };
    CHECK(build() == build());
}

TEST_CASE("adding a hash table only grows the candidate set") {
    Dataset ds = random_dataset(400, 8, 15);
    LshParams p;
    p.tables = 2;
    p.functions = 4;
    p.width = 2.0;
    p.dim = 8;
    p.seed = 21;

    auto build_index = [&](int tables, LshUnderTest& t) {
        LshParams q = p;
        q.tables = tables;
        const auto fam = std::make_shared<const HashFamily>(HashFamily::derive(q));
        LshBuilder lb(fam.get(), BucketFlavor::plain);
        for (std::uint32_t i = 0; i < ds.size(); ++i) lb.insert(i, ds.images[i].v, t.vptr[i]);
        auto meta = lb.persist(t.store, t.bucket_file, t.visual_file, t.spatial_file);
        return std::make_pair(fam, meta);
    };

    auto t2 = prepare_store(ds);
    auto t3 = prepare_store(ds);
    const auto [fam2, meta2] = build_index(2, t2);
    const auto [fam3, meta3] = build_index(3, t3);
    const LshIndex i2(&t2.store, fam2.get(), meta2);
    const LshIndex i3(&t3.store, fam3.get(), meta3);

    // The coefficient grid is drawn table by table, so the first two tables of
    // the three-table family coincide with the two-table one.
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> q(8);
        for (auto& x : q) x = rng.gaussian() * 3;
        const auto c2 = ordinals_of(i2.candidate_set(q, nullptr));
        const auto c3 = ordinals_of(i3.candidate_set(q, nullptr));
        CHECK(std::includes(c3.begin(), c3.end(), c2.begin(), c2.end()));
    }
}
