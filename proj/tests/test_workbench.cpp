#include <algorithm>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "support/running_example.hpp"
#include "svx/workbench.hpp"

using namespace svx;

namespace {

DatasetSpec small_spec(std::size_t n, std::uint64_t seed) {
    DatasetSpec spec;
    spec.n = n;
    spec.dim = 8;
    spec.seed = seed;
    spec.coupling = 0.5;
    spec.spatial = {{{20.0, 20.0}, 1.5, 0.4},
                    {{70.0, 40.0}, 6.0, 0.3},
                    {{40.0, 75.0}, 10.0, 0.3}};
    spec.visual = {{{}, 1.0, 0.4}, {{}, 2.5, 0.3}, {{}, 4.0, 0.3}};
    return spec;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("dataset generation is deterministic and round-trips through its file") {
    const auto spec = small_spec(300, 5);
    const Dataset a = generate_dataset(spec);
    const Dataset b = generate_dataset(spec);
    REQUIRE(a.size() == 300);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.images[i].id == b.images[i].id);
        CHECK(a.images[i].s.x == b.images[i].s.x);
        CHECK(a.images[i].v == b.images[i].v);
    }

    const auto dir = std::filesystem::temp_directory_path() / "svx_wb_ds";
    std::filesystem::create_directories(dir);
    write_dataset_file(dir / "a.csv", a);
    write_dataset_file(dir / "b.csv", b);
    CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));

    const Dataset back = read_dataset_file(dir / "a.csv");
    REQUIRE(back.size() == a.size());
    CHECK(back.dim == a.dim);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(back.images[i].id == a.images[i].id);
        CHECK(back.images[i].s.x == a.images[i].s.x);  // full-precision round trip
        CHECK(back.images[i].s.y == a.images[i].s.y);
        CHECK(back.images[i].v == a.images[i].v);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("an empty dataset still writes a valid header") {
    DatasetSpec spec;
    spec.n = 0;
    spec.dim = 4;
    const Dataset empty = generate_dataset(spec);
    const auto dir = std::filesystem::temp_directory_path() / "svx_wb_empty";
    std::filesystem::create_directories(dir);
    write_dataset_file(dir / "empty.csv", empty);
    CHECK(slurp(dir / "empty.csv") == "svx-dataset,v1,0,4\n");
    const Dataset back = read_dataset_file(dir / "empty.csv");
    CHECK(back.size() == 0);
    CHECK(back.dim == 4);
    std::filesystem::remove_all(dir);
}

TEST_CASE("tight clusters are denser than wide ones in a probe rectangle") {
    DatasetSpec spec;
    spec.n = 1000;
    spec.dim = 4;
    spec.seed = 9;
    spec.spatial = {{{20.0, 20.0}, 0.5, 0.5}, {{80.0, 80.0}, 10.0, 0.5}};
    spec.visual = {{{}, 1.0, 1.0}};
    const Dataset ds = generate_dataset(spec);
    auto count_in = [&ds](Rect r) {
        std::size_t n = 0;
        for (const auto& img : ds.images) n += rect_contains(r, img.s) ? 1 : 0;
        return n;
    };
    // Equal-sized probe rects centered on each cluster.
    const std::size_t tight = count_in(Rect{{19.0, 19.0}, {21.0, 21.0}});
    const std::size_t wide = count_in(Rect{{79.0, 79.0}, {81.0, 81.0}});
    CHECK(tight > 2 * wide);
}

TEST_CASE("invalid specs are rejected") {
    DatasetSpec spec = small_spec(10, 1);
    spec.coupling = 1.5;
    CHECK_THROWS_AS(generate_dataset(spec), std::invalid_argument);
    spec = small_spec(10, 1);
    spec.spatial[0].spread = 0.0;
    CHECK_THROWS_AS(generate_dataset(spec), std::invalid_argument);
    spec = small_spec(10, 1);
    spec.spatial[0].center = {1.0};
    CHECK_THROWS_AS(generate_dataset(spec), std::invalid_argument);
}

TEST_CASE("selectivity pools follow the density terciles") {
    const Dataset ds = generate_dataset(small_spec(600, 11));
    const auto st = rank_terciles(knn_distance_spatial(ds, 10));
    const auto vt = rank_terciles(knn_distance_visual(ds, 10));

    QueryTemplate tpl;
    tpl.side_x = tpl.side_y = 4.0;
    tpl.sigma = 1.0;

    const Workload uu = select_queries(ds, SelectivityGroup::su_vu, 50, 3, tpl);
    REQUIRE(uu.queries.size() == 50);
    std::map<std::string, std::uint32_t> by_id;
    for (std::uint32_t i = 0; i < ds.size(); ++i) by_id[ds.images[i].id] = i;
    for (const auto& q : uu.queries) {
        // Query vectors come verbatim from dataset images; find the image by
        // rect center and check its terciles.
        bool found = false;
        for (std::uint32_t i = 0; i < ds.size(); ++i) {
            if (ds.images[i].v == q.query_vector) {
                CHECK(st[i] == 1);
                CHECK(vt[i] == 1);
                found = true;
                break;
            }
        }
        CHECK(found);
    }

    const Workload dd = select_queries(ds, SelectivityGroup::sd_vd, 30, 3, tpl);
    for (const auto& q : dd.queries) {
        for (std::uint32_t i = 0; i < ds.size(); ++i) {
            if (ds.images[i].v == q.query_vector) {
                CHECK(st[i] == 0);  // top spatial density tercile
                CHECK(vt[i] == 0);
                break;
            }
        }
    }

    CHECK(select_queries(ds, SelectivityGroup::su_vu, 0, 3, tpl).queries.empty());
}

TEST_CASE("an impossible group names itself in the error") {
    // Spatial and visual densities are perfectly aligned, so dense-spatial
    // with sparse-visual has no members.
    Dataset ds;
    ds.dim = 2;
    for (int i = 0; i < 30; ++i) {
        const double x = static_cast<double>(i) * static_cast<double>(i);
        ds.images.push_back({"p" + std::to_string(i), {x, 0.0}, {x, 0.0}});
    }
    QueryTemplate tpl;
    try {
        select_queries(ds, SelectivityGroup::sd_vs, 5, 1, tpl);
        FAIL("expected an error");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("SD-VS") != std::string::npos);
    }
}

TEST_CASE("workload files round-trip") {
    const Dataset ds = generate_dataset(small_spec(200, 13));
    QueryTemplate tpl;
    tpl.side_x = 5.0;
    tpl.side_y = 3.0;
    tpl.sigma = 1.25;
    tpl.explore_spatial = 0.5;
    tpl.explore_visual = 15;
    const Workload wl = select_queries(ds, SelectivityGroup::su_vu, 20, 17, tpl);
    const auto dir = std::filesystem::temp_directory_path() / "svx_wb_wl";
    std::filesystem::create_directories(dir);
    write_workload_file(dir / "wl.csv", wl);
    const Workload back = read_workload_file(dir / "wl.csv");
    REQUIRE(back.queries.size() == wl.queries.size());
    CHECK(back.qids == wl.qids);
    for (std::size_t i = 0; i < wl.queries.size(); ++i) {
        CHECK(back.queries[i].spatial.lo.x == wl.queries[i].spatial.lo.x);
        CHECK(back.queries[i].sigma == wl.queries[i].sigma);
        CHECK(back.queries[i].explore_spatial == wl.queries[i].explore_spatial);
        CHECK(back.queries[i].explore_visual == wl.queries[i].explore_visual);
        CHECK(back.queries[i].seed == wl.queries[i].seed);
        CHECK(back.queries[i].query_vector == wl.queries[i].query_vector);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("benchmark over the running example reproduces the walk-through column") {
    const auto ex = testsupport::make_running_example();
    BenchmarkConfig cfg;
    cfg.dataset_inline = ex.dataset;
    Workload wl;
    wl.qids = {"q0000"};
    wl.queries = {ex.query};
    cfg.workload_inline = wl;
    cfg.layout = ex.layout;
    cfg.hash_override = ex.family;
    cfg.lsh.tables = 2;
    cfg.lsh.functions = 1;
    cfg.lsh.width = 1.0;
    cfg.sigma_values = {0.5};
    cfg.emit_series = false;
    cfg.timing_repeats = 1;
    cfg.out_dir = (std::filesystem::temp_directory_path() / "svx_wb_fixture").string();

    const auto out = run_benchmark(cfg);
    auto ids = [&out](const char* structure) {
        return out.results.at(std::make_pair(std::string("SU-VU:q0000"), structure));
    };
    CHECK(ids("DI") == std::vector<std::string>{"I3", "I4"});
    CHECK(ids("AugRTree") == std::vector<std::string>{"I3", "I4", "I9"});
    CHECK(ids("AugLSH") == std::vector<std::string>{"I3", "I4"});
    CHECK(ids("SFI") == std::vector<std::string>{"I3", "I4"});
    CHECK(ids("VFI") == std::vector<std::string>{"I3", "I4"});
    CHECK(ids("AugSFI") == std::vector<std::string>{"I3", "I4"});
    CHECK(ids("AugVFI") == std::vector<std::string>{"I3", "I4"});

    // Explorative runs may only add relevant images.
    const auto explored = ids("AugSFI-E");
    const auto plain = ids("AugSFI");
    CHECK(std::includes(explored.begin(), explored.end(), plain.begin(), plain.end()));
    std::filesystem::remove_all(cfg.out_dir);
}

TEST_CASE("empty workload produces a valid zero-row report") {
    BenchmarkConfig cfg;
    cfg.dataset_inline = generate_dataset(small_spec(60, 21));
    cfg.workload_inline = Workload{};
    cfg.sigma_values = {1.0};
    cfg.emit_series = false;
    cfg.timing_repeats = 1;
    cfg.out_dir = (std::filesystem::temp_directory_path() / "svx_wb_zero").string();
    const auto out = run_benchmark(cfg);
    CHECK(out.rows.empty());
    CHECK(read_report_rows(out.out_dir / "rows.csv").empty());
    std::filesystem::remove_all(cfg.out_dir);
}

TEST_CASE("benchmark rows recompute from stored results and the oracle") {
    BenchmarkConfig cfg;
    cfg.dataset_spec = small_spec(250, 23);
    cfg.queries_per_group = 12;
    cfg.emit_series = false;
    cfg.timing_repeats = 1;
    cfg.out_dir = (std::filesystem::temp_directory_path() / "svx_wb_verify").string();
    const auto out = run_benchmark(cfg);
    REQUIRE(!out.rows.empty());

    std::map<std::string, SpatialVisualRangeQuery> queries;
    for (const auto& run : out.groups)
        for (std::size_t i = 0; i < run.workload.queries.size(); ++i)
            queries.emplace(std::string(to_string(run.group)) + ":" + run.workload.qids[i],
                            run.workload.queries[i]);

    const auto rows = read_report_rows(out.out_dir / "rows.csv");
    const auto results = read_result_sets(out.out_dir / "results.csv");
    const HashFamily family = HashFamily::derive(out.resolved.lsh);
    const double es_max =
        *std::max_element(out.resolved.es_values.begin(), out.resolved.es_values.end());
    const auto verification =
        verify_report(out.dataset, queries, rows, results, family, es_max,
                      out.resolved.es_values[out.resolved.es_default]);
    CHECK(verification.rows_checked == rows.size());
    const std::string first_issue =
        verification.mismatches.empty() ? std::string() : verification.mismatches.front();
    CHECK_MESSAGE(verification.ok(), first_issue);
    std::filesystem::remove_all(cfg.out_dir);
}

TEST_CASE("benchmark output is deterministic apart from wall-clock sections") {
    auto run_into = [](const std::string& dir) {
        BenchmarkConfig cfg;
        cfg.dataset_spec = small_spec(200, 29);
        cfg.queries_per_group = 8;
        cfg.emit_series = true;
        cfg.timing_repeats = 1;
        cfg.out_dir = dir;
        return run_benchmark(cfg);
    };
    const auto base = std::filesystem::temp_directory_path();
    run_into((base / "svx_wb_det1").string());
    run_into((base / "svx_wb_det2").string());
    for (const char* name :
         {"rows.csv", "results.csv", "dataset.csv", "workload_SU-VU.csv",
          "series/pages_vs_structure.csv", "series/recall_vs_ev.csv",
          "series/recall_vs_sigma.csv", "series/pages_vs_range.csv"}) {
        CAPTURE(name);
        CHECK(slurp(base / "svx_wb_det1" / name) == slurp(base / "svx_wb_det2" / name));
    }
    std::filesystem::remove_all(base / "svx_wb_det1");
    std::filesystem::remove_all(base / "svx_wb_det2");
}
