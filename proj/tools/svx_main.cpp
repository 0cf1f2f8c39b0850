// Command-line front end: dataset generation, workload construction, index
// build/query against a persisted store, the full benchmark grid, and report
// recomputation from raw rows.
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "svx/evalkit.hpp"
#include "svx/indexes.hpp"
#include "svx/workbench.hpp"

using nlohmann::json;

namespace {

svx::DatasetSpec spec_from_json(const json& j) {
    svx::DatasetSpec spec;
    spec.n = j.value("n", std::size_t{0});
    spec.dim = j.value("dim", 150);
    spec.coupling = j.value("coupling", 0.0);
    spec.seed = j.value("seed", std::uint64_t{0});
    auto read_clusters = [](const json& arr) {
        std::vector<svx::ClusterSpec> out;
        for (const auto& c : arr) {
            svx::ClusterSpec cs;
            if (c.contains("center")) cs.center = c["center"].get<std::vector<double>>();
            cs.spread = c.value("spread", 1.0);
            cs.weight = c.value("weight", 1.0);
            out.push_back(std::move(cs));
        }
        return out;
    };
    if (j.contains("spatial_clusters")) spec.spatial = read_clusters(j["spatial_clusters"]);
    if (j.contains("visual_clusters")) spec.visual = read_clusters(j["visual_clusters"]);
    return spec;
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    json j;
    in >> j;
    return j;
}

// Applies config-file values first; CLI flags that were actually passed win.
void apply_bench_json(const json& j, svx::BenchmarkConfig& cfg) {
    if (j.contains("dataset_spec")) cfg.dataset_spec = spec_from_json(j["dataset_spec"]);
    if (j.contains("dataset")) cfg.dataset_path = j["dataset"].get<std::string>();
    if (j.contains("structures")) {
        cfg.structures.clear();
        for (const auto& s : j["structures"])
            cfg.structures.push_back(svx::index_kind_from_string(s.get<std::string>()));
    }
    if (j.contains("groups")) {
        cfg.groups.clear();
        for (const auto& g : j["groups"])
            cfg.groups.push_back(svx::selectivity_group_from_string(g.get<std::string>()));
    }
    if (j.contains("queries_per_group")) cfg.queries_per_group = j["queries_per_group"];
    if (j.contains("side_values")) cfg.side_values = j["side_values"].get<std::vector<double>>();
    if (j.contains("side_default")) cfg.side_default = j["side_default"];
    if (j.contains("sigma_values"))
        cfg.sigma_values = j["sigma_values"].get<std::vector<double>>();
    if (j.contains("sigma_quantiles"))
        cfg.sigma_quantiles = j["sigma_quantiles"].get<std::vector<double>>();
    if (j.contains("sigma_default")) cfg.sigma_default = j["sigma_default"];
    if (j.contains("es_values")) cfg.es_values = j["es_values"].get<std::vector<double>>();
    if (j.contains("es_default")) cfg.es_default = j["es_default"];
    if (j.contains("ev_values")) cfg.ev_values = j["ev_values"].get<std::vector<int>>();
    if (j.contains("ev_default")) cfg.ev_default = j["ev_default"];
    if (j.contains("page_size")) cfg.page.page_size = j["page_size"];
    if (j.contains("t_disk")) cfg.page.t_disk = j["t_disk"];
    if (j.contains("fan_out")) cfg.tree.fan_out = j["fan_out"];
    if (j.contains("min_fill")) cfg.tree.min_fill = j["min_fill"];
    if (j.contains("lsh_tables")) cfg.lsh.tables = j["lsh_tables"];
    if (j.contains("lsh_functions")) cfg.lsh.functions = j["lsh_functions"];
    if (j.contains("lsh_width")) cfg.lsh.width = j["lsh_width"];
    if (j.contains("lsh_seed")) cfg.lsh.seed = j["lsh_seed"];
    if (j.contains("workload_seed")) cfg.workload_seed = j["workload_seed"];
    if (j.contains("timing_repeats")) cfg.timing_repeats = j["timing_repeats"];
    if (j.contains("duplicate_vfi_trees")) cfg.duplicate_vfi_trees = j["duplicate_vfi_trees"];
    if (j.contains("emit_series")) cfg.emit_series = j["emit_series"];
    if (j.contains("out_dir")) cfg.out_dir = j["out_dir"].get<std::string>();
}

int cmd_gen(const std::string& spec_path, const std::string& out_path,
            std::optional<std::uint64_t> seed) {
    auto spec = spec_from_json(load_json(spec_path));
    if (seed) spec.seed = *seed;
    const svx::Dataset ds = svx::generate_dataset(spec);
    svx::write_dataset_file(out_path, ds);
    std::cout << "wrote " << ds.size() << " images (d=" << ds.dim << ") to " << out_path
              << "\n";
    return 0;
}

int cmd_queries(const std::string& dataset_path, const std::string& group_name,
                std::size_t count, std::uint64_t seed, const std::string& out_path,
                double side, double sigma, double es, int ev, double sigma_quantile) {
    const svx::Dataset ds = svx::read_dataset_file(dataset_path);
    svx::QueryTemplate tpl;
    tpl.side_x = tpl.side_y = side;
    tpl.sigma = sigma >= 0 ? sigma : svx::pairwise_distance_quantile(ds, sigma_quantile, seed);
    tpl.explore_spatial = es;
    tpl.explore_visual = ev;
    const auto wl = svx::select_queries(ds, svx::selectivity_group_from_string(group_name),
                                        count, seed, tpl);
    svx::write_workload_file(out_path, wl);
    std::cout << "wrote " << wl.queries.size() << " queries (sigma=" << tpl.sigma << ") to "
              << out_path << "\n";
    return 0;
}

int cmd_build(const std::string& dataset_path, const std::string& kind_name,
              const std::string& store_dir, std::uint32_t page_size, double t_disk,
              std::uint32_t fan_out, int tables, int functions, double width,
              std::uint64_t lsh_seed, bool duplicate_vfi) {
    const svx::Dataset ds = svx::read_dataset_file(dataset_path);
    const svx::IndexKind kind = svx::index_kind_from_string(kind_name);

    svx::PageStoreConfig pcfg;
    pcfg.page_size = page_size;
    pcfg.t_disk = t_disk;
    svx::PageStore store(pcfg);
    const svx::DataFiles data = svx::write_dataset(store, ds);

    svx::BuildConfig cfg;
    cfg.page = pcfg;
    cfg.tree.fan_out = fan_out;
    cfg.lsh.tables = tables;
    cfg.lsh.functions = functions;
    cfg.lsh.width = width > 0 ? width : svx::default_lsh_width(ds, lsh_seed);
    cfg.lsh.dim = ds.dim;
    cfg.lsh.seed = lsh_seed;
    cfg.duplicate_vfi_trees = duplicate_vfi;

    const auto idx = svx::SpatialVisualIndex::build(kind, ds, store, data, cfg);
    std::filesystem::create_directories(store_dir);
    store.save(store_dir);
    data.save(std::filesystem::path(store_dir) / "data.txt");
    idx.save_manifest(std::filesystem::path(store_dir) / "index.txt");

    const auto space = svx::measured_space(idx);
    std::cout << "built " << kind_name << " over " << ds.size() << " images into " << store_dir
              << "\n";
    std::cout << "space pages: nodes=" << space.s_r << " buckets=" << space.s_lsh
              << " data=" << space.s_data << " (W=" << cfg.lsh.width << ")\n";
    return 0;
}

int cmd_query(const std::string& store_dir, const std::vector<double>& rect, double sigma,
              const std::vector<double>& vec, const std::string& vec_from_id, double es,
              int ev, std::uint64_t seed) {
    const svx::PageStore store = svx::PageStore::load(store_dir);
    const auto data = svx::DataFiles::load(std::filesystem::path(store_dir) / "data.txt", store);
    const auto idx = svx::SpatialVisualIndex::open(
        std::filesystem::path(store_dir) / "index.txt", store, data);

    svx::SpatialVisualRangeQuery q;
    if (rect.size() != 4) throw std::runtime_error("--rect needs min_x,min_y,max_x,max_y");
    q.spatial = svx::Rect{{rect[0], rect[1]}, {rect[2], rect[3]}};
    q.sigma = sigma;
    q.explore_spatial = es;
    q.explore_visual = ev;
    q.seed = seed;
    if (!vec_from_id.empty()) {
        const auto it = std::find(data.ids.begin(), data.ids.end(), vec_from_id);
        if (it == data.ids.end()) throw std::runtime_error("unknown image id: " + vec_from_id);
        const auto ord = static_cast<std::uint32_t>(it - data.ids.begin());
        q.query_vector = svx::load_visual_vector(store, data.visual_ptr[ord], nullptr);
    } else {
        q.query_vector = vec;
    }

    const auto outcome = idx.query(q);
    std::cout << "result (" << outcome.result.size() << "):";
    for (std::uint32_t ord : outcome.result) std::cout << ' ' << data.ids[ord];
    std::cout << "\npages: rtree=" << outcome.stats.pages_rtree
              << " lsh=" << outcome.stats.pages_lsh << " data=" << outcome.stats.pages_data
              << " sim_time=" << outcome.stats.simulated_time << "s\n";
    for (const auto& [phase, n] : outcome.stats.intermediate_sizes)
        std::cout << "  " << phase << "=" << n << "\n";
    return 0;
}

int cmd_report(const std::string& dir_name) {
    const std::filesystem::path dir(dir_name);
    const auto rows = svx::read_report_rows(dir / "rows.csv");
    const auto results = svx::read_result_sets(dir / "results.csv");
    const svx::Dataset ds = svx::read_dataset_file(dir / "dataset.csv");

    // Benchmark settings written alongside the raw rows.
    svx::LshParams lsh;
    double es_max = 0.0, default_es = 0.0;
    std::vector<std::string> groups;
    {
        std::ifstream in(dir / "bench.txt");
        if (!in) throw std::runtime_error("missing bench.txt in " + dir_name);
        std::string line;
        std::getline(in, line);
        while (std::getline(in, line)) {
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            const std::string k = line.substr(0, eq), v = line.substr(eq + 1);
            if (k == "lsh_tables") lsh.tables = std::stoi(v);
            else if (k == "lsh_functions") lsh.functions = std::stoi(v);
            else if (k == "lsh_width") lsh.width = std::stod(v);
            else if (k == "lsh_seed") lsh.seed = std::stoull(v);
            else if (k == "lsh_dim") lsh.dim = std::stoi(v);
            else if (k == "es_max") es_max = std::stod(v);
            else if (k == "default_es") default_es = std::stod(v);
            else if (k == "group") groups.push_back(v);
        }
    }

    std::map<std::string, svx::SpatialVisualRangeQuery> queries;
    for (const auto& g : groups) {
        const auto wl = svx::read_workload_file(dir / ("workload_" + g + ".csv"));
        for (std::size_t i = 0; i < wl.queries.size(); ++i)
            queries.emplace(g + ":" + wl.qids[i], wl.queries[i]);
    }

    const auto family = svx::HashFamily::derive(lsh);
    const auto verification =
        svx::verify_report(ds, queries, rows, results, family, es_max, default_es);
    std::cout << "checked " << verification.rows_checked << " rows: "
              << (verification.ok() ? "consistent" : "INCONSISTENT") << "\n";
    for (const auto& m : verification.mismatches) std::cout << "  " << m << "\n";

    // Summary means and lemma verdicts recomputed from the rows alone.
    std::map<std::string, std::vector<svx::QueryStats>> by_label;
    std::map<std::string, std::pair<double, std::size_t>> recall_acc;
    for (const auto& r : rows) {
        svx::QueryStats st;
        st.pages_rtree = r.pages_rtree;
        st.pages_lsh = r.pages_lsh;
        st.pages_data = r.pages_data;
        by_label[r.structure].push_back(st);
        if (!std::isnan(r.recall)) {
            recall_acc[r.structure].first += r.recall;
            recall_acc[r.structure].second += 1;
        }
    }
    std::cout << "structure,mean_pages,mean_recall\n";
    for (const auto& [label, stats] : by_label) {
        double pages = 0;
        for (const auto& s : stats) pages += static_cast<double>(s.total_pages());
        const auto& [rsum, rcount] = recall_acc[label];
        std::cout << label << ',' << pages / static_cast<double>(stats.size()) << ','
                  << (rcount ? rsum / static_cast<double>(rcount) : 0.0) << "\n";
    }
    if (by_label.size() >= 2) {
        bool aligned = true;
        const std::size_t n = by_label.begin()->second.size();
        for (const auto& [label, stats] : by_label) aligned &= stats.size() == n;
        if (aligned) {
            for (const auto& v : svx::lemma_report(by_label))
                std::cout << v.label << ": pages(" << v.lhs << ") <= pages(" << v.rhs << ") "
                          << (v.per_query ? "[per-query] " : "[mean] ")
                          << (v.holds ? "HOLDS" : "FAILS") << " satisfaction=" << v.satisfaction
                          << "\n";
        }
    }
    return verification.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"svx: spatial-visual range query index benchmark"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "generate a synthetic dataset from a spec file");
    std::string gen_spec, gen_out = "dataset.csv";
    std::optional<std::uint64_t> gen_seed;
    gen->add_option("--spec", gen_spec, "dataset spec JSON")->required();
    gen->add_option("--out", gen_out, "output dataset file");
    gen->add_option("--seed", gen_seed, "override the spec's seed");

    // queries
    auto* queries = app.add_subcommand("queries", "build a query workload from a dataset");
    std::string q_dataset, q_group = "SU-VU", q_out = "workload.csv";
    std::size_t q_count = 100;
    std::uint64_t q_seed = 7;
    double q_side = 6.18, q_sigma = -1.0, q_es = 0.0, q_quantile = 0.05;
    int q_ev = 0;
    queries->add_option("--dataset", q_dataset)->required();
    queries->add_option("--group", q_group, "SD-VD, SD-VS, SS-VD, SS-VS or SU-VU");
    queries->add_option("--count", q_count);
    queries->add_option("--seed", q_seed);
    queries->add_option("--out", q_out);
    queries->add_option("--side", q_side, "query rectangle side length");
    queries->add_option("--sigma", q_sigma, "visual threshold (negative: use quantile)");
    queries->add_option("--sigma-quantile", q_quantile);
    queries->add_option("--es", q_es, "spatial exploration ratio");
    queries->add_option("--ev", q_ev, "visual exploration probe count");

    // build
    auto* build = app.add_subcommand("build", "build one index structure and persist it");
    std::string b_dataset, b_kind = "DI", b_store = "index_store";
    std::uint32_t b_page = 4096, b_fanout = 85;
    double b_tdisk = 0.001, b_width = 0.0;
    int b_tables = 3, b_functions = 7;
    std::uint64_t b_seed = 1;
    bool b_dup = false;
    build->add_option("--dataset", b_dataset)->required();
    build->add_option("--kind", b_kind, "DI, AugRTree, AugLSH, SFI, VFI, AugSFI, AugVFI");
    build->add_option("--store-dir", b_store);
    build->add_option("--page-size", b_page);
    build->add_option("--t-disk", b_tdisk);
    build->add_option("--fan-out", b_fanout);
    build->add_option("--tables", b_tables);
    build->add_option("--functions", b_functions);
    build->add_option("--width", b_width, "LSH bucket width (0: derive from data)");
    build->add_option("--lsh-seed", b_seed);
    build->add_flag("--duplicate-vfi-trees", b_dup,
                    "attach a secondary tree to every table's buckets");

    // query
    auto* query = app.add_subcommand("query", "run one query against a persisted index");
    std::string s_store = "index_store", s_from_id;
    std::vector<double> s_rect, s_vec;
    double s_sigma = 0.0, s_es = 0.0;
    int s_ev = 0;
    std::uint64_t s_seed = 0;
    query->add_option("--store-dir", s_store);
    query->add_option("--rect", s_rect, "min_x,min_y,max_x,max_y")->delimiter(',')->expected(4);
    query->add_option("--sigma", s_sigma)->required();
    query->add_option("--vector", s_vec, "query vector components")->delimiter(',');
    query->add_option("--vector-from-id", s_from_id, "use a stored image's vector");
    query->add_option("--es", s_es);
    query->add_option("--ev", s_ev);
    query->add_option("--seed", s_seed);

    // bench
    auto* bench = app.add_subcommand("bench", "run the full benchmark grid");
    std::string bench_config;
    svx::BenchmarkConfig bcfg;
    std::string bench_dataset, bench_out;
    std::vector<std::string> bench_structs, bench_groups;
    std::size_t bench_count = 0;
    std::uint64_t bench_seed = 0;
    bool bench_no_series = false;
    bench->add_option("--config", bench_config, "benchmark config JSON");
    bench->add_option("--dataset", bench_dataset, "dataset file (overrides config)");
    bench->add_option("--out-dir", bench_out);
    bench->add_option("--structures", bench_structs)->delimiter(',');
    bench->add_option("--groups", bench_groups)->delimiter(',');
    bench->add_option("--queries-per-group", bench_count);
    bench->add_option("--workload-seed", bench_seed);
    bench->add_flag("--no-series", bench_no_series);

    // report
    auto* report = app.add_subcommand("report", "recompute summaries from raw rows");
    std::string r_dir;
    report->add_option("--dir", r_dir, "benchmark output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_gen(gen_spec, gen_out, gen_seed);
        if (queries->parsed())
            return cmd_queries(q_dataset, q_group, q_count, q_seed, q_out, q_side, q_sigma,
                               q_es, q_ev, q_quantile);
        if (build->parsed())
            return cmd_build(b_dataset, b_kind, b_store, b_page, b_tdisk, b_fanout, b_tables,
                             b_functions, b_width, b_seed, b_dup);
        if (query->parsed())
            return cmd_query(s_store, s_rect, s_sigma, s_vec, s_from_id, s_es, s_ev, s_seed);
        if (bench->parsed()) {
            if (!bench_config.empty()) apply_bench_json(load_json(bench_config), bcfg);
            if (!bench_dataset.empty()) bcfg.dataset_path = bench_dataset;
            if (!bench_out.empty()) bcfg.out_dir = bench_out;
            if (!bench_structs.empty()) {
                bcfg.structures.clear();
                for (const auto& s : bench_structs)
                    bcfg.structures.push_back(svx::index_kind_from_string(s));
            }
            if (!bench_groups.empty()) {
                bcfg.groups.clear();
                for (const auto& g : bench_groups)
                    bcfg.groups.push_back(svx::selectivity_group_from_string(g));
            }
            if (bench_count > 0) bcfg.queries_per_group = bench_count;
            if (bench_seed > 0) bcfg.workload_seed = bench_seed;
            if (bench_no_series) bcfg.emit_series = false;
            const auto out = svx::run_benchmark(bcfg);
            std::cout << "benchmark complete: " << out.rows.size() << " rows in "
                      << out.out_dir.string() << "\n";
            for (const auto& v : out.lemmas)
                std::cout << v.label << " " << (v.holds ? "HOLDS" : "FAILS") << " ("
                          << v.lhs << " vs " << v.rhs << ")\n";
            return 0;
        }
        if (report->parsed()) return cmd_report(r_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
