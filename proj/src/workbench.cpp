#include "svx/workbench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace svx {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

void DatasetSpec::validate() const {
    if (dim < 1) throw std::invalid_argument("dataset spec: dim must be >= 1");
    if (coupling < 0.0 || coupling > 1.0)
        throw std::invalid_argument("dataset spec: coupling must be in [0, 1]");
    if (n > 0 && (spatial.empty() || visual.empty()))
        throw std::invalid_argument("dataset spec: need at least one cluster per space");
    double wsum = 0.0;
    for (const auto& c : spatial) {
        if (c.spread <= 0.0) throw std::invalid_argument("dataset spec: spread must be > 0");
        if (c.weight <= 0.0) throw std::invalid_argument("dataset spec: weight must be > 0");
        if (c.center.size() != 2)
            throw std::invalid_argument("dataset spec: spatial centers are 2-d");
        wsum += c.weight;
    }
    for (const auto& c : visual) {
        if (c.spread <= 0.0) throw std::invalid_argument("dataset spec: spread must be > 0");
        if (c.weight <= 0.0) throw std::invalid_argument("dataset spec: weight must be > 0");
        if (!c.center.empty() && c.center.size() != static_cast<std::size_t>(dim))
            throw std::invalid_argument("dataset spec: visual center dimension mismatch");
    }
    (void)wsum;
}

Dataset generate_dataset(const DatasetSpec& spec) {
    spec.validate();
    Dataset ds;
    ds.dim = spec.dim;
    if (spec.n == 0) return ds;

    Rng rng(spec.seed);

    // Missing visual centers are drawn first so image sampling stays stable.
    std::vector<std::vector<double>> vcenters;
    for (const auto& c : spec.visual) {
        if (!c.center.empty()) {
            vcenters.push_back(c.center);
        } else {
            std::vector<double> center(spec.dim);
            for (auto& x : center) x = rng.uniform() * 100.0;
            vcenters.push_back(std::move(center));
        }
    }

    auto categorical = [&rng](const std::vector<ClusterSpec>& clusters) {
        double total = 0.0;
        for (const auto& c : clusters) total += c.weight;
        const double u = rng.uniform() * total;
        double acc = 0.0;
        for (std::size_t i = 0; i < clusters.size(); ++i) {
            acc += clusters[i].weight;
            if (u < acc) return i;
        }
        return clusters.size() - 1;
    };

    ds.images.reserve(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) {
        const std::size_t cs = categorical(spec.spatial);
        const bool couple = rng.uniform() < spec.coupling;
        const std::size_t cv = couple ? cs % spec.visual.size() : categorical(spec.visual);

        GeoImage img;
        char idbuf[24];
        std::snprintf(idbuf, sizeof(idbuf), "i%06zu", i);
        img.id = idbuf;
        img.s.x = spec.spatial[cs].center[0] + spec.spatial[cs].spread * rng.gaussian();
        img.s.y = spec.spatial[cs].center[1] + spec.spatial[cs].spread * rng.gaussian();
        img.v.resize(spec.dim);
        for (int j = 0; j < spec.dim; ++j)
            img.v[j] = vcenters[cv][j] + spec.visual[cv].spread * rng.gaussian();
        ds.images.push_back(std::move(img));
    }
    return ds;
}

const char* to_string(SelectivityGroup g) {
    switch (g) {
        case SelectivityGroup::sd_vd: return "SD-VD";
        case SelectivityGroup::sd_vs: return "SD-VS";
        case SelectivityGroup::ss_vd: return "SS-VD";
        case SelectivityGroup::ss_vs: return "SS-VS";
        case SelectivityGroup::su_vu: return "SU-VU";
    }
    return "?";
}

SelectivityGroup selectivity_group_from_string(const std::string& s) {
    for (SelectivityGroup g : kAllGroups)
        if (s == to_string(g)) return g;
    throw std::invalid_argument("unknown selectivity group: " + s);
}

namespace {

std::vector<double> knn_distance(const Dataset& ds, int k,
                                 const std::function<double(std::uint32_t, std::uint32_t)>& dist) {
    const std::size_t n = ds.size();
    std::vector<double> out(n, 0.0);
    if (n < 2 || k < 1) return out;
    const std::size_t kk = std::min<std::size_t>(static_cast<std::size_t>(k), n - 1);
    std::vector<double> row(n - 1);
    for (std::uint32_t i = 0; i < n; ++i) {
        std::size_t m = 0;
        for (std::uint32_t j = 0; j < n; ++j)
            if (j != i) row[m++] = dist(i, j);
        std::nth_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(kk - 1),
                         row.end());
        out[i] = row[kk - 1];
    }
    return out;
}

}  // namespace

std::vector<double> knn_distance_spatial(const Dataset& ds, int k) {
    return knn_distance(ds, k, [&ds](std::uint32_t i, std::uint32_t j) {
        const double dx = ds.images[i].s.x - ds.images[j].s.x;
        const double dy = ds.images[i].s.y - ds.images[j].s.y;
        return std::sqrt(dx * dx + dy * dy);
    });
}

std::vector<double> knn_distance_visual(const Dataset& ds, int k) {
    return knn_distance(ds, k, [&ds](std::uint32_t i, std::uint32_t j) {
        return euclidean_distance(ds.images[i].v, ds.images[j].v);
    });
}

std::vector<int> rank_terciles(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&values](std::uint32_t a, std::uint32_t b) {
        return values[a] < values[b];
    });
    std::vector<int> tercile(n, 1);
    for (std::size_t rank = 0; rank < n; ++rank) {
        const int t = rank < n / 3 ? 0 : (rank < 2 * n / 3 ? 1 : 2);
        tercile[order[rank]] = t;
    }
    return tercile;
}

Workload select_queries(const Dataset& ds, SelectivityGroup group, std::size_t count,
                        std::uint64_t seed, const QueryTemplate& tpl) {
    if (ds.size() == 0) throw std::invalid_argument("select_queries: empty dataset");

    const int k = 10;
    const auto st = rank_terciles(knn_distance_spatial(ds, k));
    const auto vt = rank_terciles(knn_distance_visual(ds, k));

    int want_s = 1, want_v = 1;
    switch (group) {
        case SelectivityGroup::sd_vd: want_s = 0; want_v = 0; break;
        case SelectivityGroup::sd_vs: want_s = 0; want_v = 2; break;
        case SelectivityGroup::ss_vd: want_s = 2; want_v = 0; break;
        case SelectivityGroup::ss_vs: want_s = 2; want_v = 2; break;
        case SelectivityGroup::su_vu: want_s = 1; want_v = 1; break;
    }

    std::vector<std::uint32_t> pool;
    for (std::uint32_t i = 0; i < ds.size(); ++i)
        if (st[i] == want_s && vt[i] == want_v) pool.push_back(i);
    if (pool.empty() && count > 0)
        throw std::runtime_error(std::string("selectivity group ") + to_string(group) +
                                 " has no images in this dataset");

    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(group)));
    for (std::size_t i = pool.size(); i > 1; --i)
        std::swap(pool[i - 1], pool[rng.next_u64() % i]);

    Workload wl;
    for (std::size_t i = 0; i < count; ++i) {
        const std::uint32_t pick = pool[i % pool.size()];
        const GeoImage& img = ds.images[pick];
        SpatialVisualRangeQuery q;
        q.spatial = Rect{{img.s.x - tpl.side_x / 2, img.s.y - tpl.side_y / 2},
                         {img.s.x + tpl.side_x / 2, img.s.y + tpl.side_y / 2}};
        q.query_vector = img.v;
        q.sigma = tpl.sigma;
        q.explore_spatial = tpl.explore_spatial;
        q.explore_visual = tpl.explore_visual;
        q.seed = mix_seed(seed, i);
        char buf[24];
        std::snprintf(buf, sizeof(buf), "q%04zu", i);
        wl.qids.emplace_back(buf);
        wl.queries.push_back(std::move(q));
    }
    return wl;
}

double pairwise_distance_quantile(const Dataset& ds, double quantile, std::uint64_t seed) {
    if (ds.size() < 2) throw std::invalid_argument("distance quantile: need >= 2 images");
    std::vector<std::uint32_t> sample(ds.size());
    std::iota(sample.begin(), sample.end(), 0);
    Rng rng(mix_seed(seed, 0x5157ULL));
    for (std::size_t i = sample.size(); i > 1; --i)
        std::swap(sample[i - 1], sample[rng.next_u64() % i]);
    if (sample.size() > 500) sample.resize(500);

    std::vector<double> dists;
    dists.reserve(sample.size() * (sample.size() - 1) / 2);
    for (std::size_t i = 0; i < sample.size(); ++i)
        for (std::size_t j = i + 1; j < sample.size(); ++j)
            dists.push_back(
                euclidean_distance(ds.images[sample[i]].v, ds.images[sample[j]].v));
    std::sort(dists.begin(), dists.end());
    const double pos = std::clamp(quantile, 0.0, 1.0) * static_cast<double>(dists.size() - 1);
    return dists[static_cast<std::size_t>(pos)];
}

double default_lsh_width(const Dataset& ds, std::uint64_t seed) {
    return pairwise_distance_quantile(ds, 0.5, seed) / 4.0;
}

// ---- file formats -------------------------------------------------------------

void write_dataset_file(const std::filesystem::path& path, const Dataset& ds) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write dataset file: " + path.string());
    out << "svx-dataset,v1," << ds.size() << ',' << ds.dim << "\n";
    for (const auto& img : ds.images) {
        out << img.id << ',' << fmt(img.s.x) << ',' << fmt(img.s.y);
        for (double v : img.v) out << ',' << fmt(v);
        out << "\n";
    }
}

Dataset read_dataset_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read dataset file: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty dataset file");
    const auto head = split(line, ',');
    if (head.size() != 4 || head[0] != "svx-dataset" || head[1] != "v1")
        throw std::runtime_error("bad dataset header: " + line);
    Dataset ds;
    const std::size_t n = std::stoul(head[2]);
    ds.dim = std::stoi(head[3]);
    ds.images.reserve(n);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto parts = split(line, ',');
        if (parts.size() != 3 + static_cast<std::size_t>(ds.dim))
            throw std::runtime_error("bad dataset row: " + line);
        GeoImage img;
        img.id = parts[0];
        img.s.x = std::stod(parts[1]);
        img.s.y = std::stod(parts[2]);
        img.v.reserve(ds.dim);
        for (int j = 0; j < ds.dim; ++j) img.v.push_back(std::stod(parts[3 + j]));
        ds.images.push_back(std::move(img));
    }
    if (ds.images.size() != n) throw std::runtime_error("dataset row count mismatch");
    ds.validate();
    return ds;
}

void write_workload_file(const std::filesystem::path& path, const Workload& wl) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write workload file: " + path.string());
    out << "svx-workload,v1\n";
    for (std::size_t i = 0; i < wl.queries.size(); ++i) {
        const auto& q = wl.queries[i];
        out << wl.qids[i] << ',' << fmt(q.spatial.lo.x) << ',' << fmt(q.spatial.lo.y) << ','
            << fmt(q.spatial.hi.x) << ',' << fmt(q.spatial.hi.y) << ',' << fmt(q.sigma) << ','
            << fmt(q.explore_spatial) << ',' << q.explore_visual << ',' << q.seed;
        for (double v : q.query_vector) out << ',' << fmt(v);
        out << "\n";
    }
}

Workload read_workload_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read workload file: " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != "svx-workload,v1")
        throw std::runtime_error("bad workload header");
    Workload wl;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto parts = split(line, ',');
        if (parts.size() < 10) throw std::runtime_error("bad workload row: " + line);
        SpatialVisualRangeQuery q;
        q.spatial.lo.x = std::stod(parts[1]);
        q.spatial.lo.y = std::stod(parts[2]);
        q.spatial.hi.x = std::stod(parts[3]);
        q.spatial.hi.y = std::stod(parts[4]);
        q.sigma = std::stod(parts[5]);
        q.explore_spatial = std::stod(parts[6]);
        q.explore_visual = std::stoi(parts[7]);
        q.seed = std::stoull(parts[8]);
        for (std::size_t j = 9; j < parts.size(); ++j) q.query_vector.push_back(std::stod(parts[j]));
        wl.qids.push_back(parts[0]);
        wl.queries.push_back(std::move(q));
    }
    return wl;
}

void write_report_rows(const std::filesystem::path& path, const std::vector<ReportRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write report file: " + path.string());
    out << "# qid,structure,pages_rtree,pages_lsh,pages_data,sim_time,result_count,recall,"
           "precision,sv_match,s_unmatch,v_unmatch\n";
    for (const auto& r : rows) {
        out << r.qid << ',' << r.structure << ',' << r.pages_rtree << ',' << r.pages_lsh << ','
            << r.pages_data << ',' << fmt(r.sim_time) << ',' << r.result_count << ','
            << fmt(r.recall) << ',' << fmt(r.precision) << ',' << r.sv_match << ','
            << r.s_unmatch << ',' << r.v_unmatch << "\n";
    }
}

std::vector<ReportRow> read_report_rows(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read report file: " + path.string());
    std::vector<ReportRow> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto p = split(line, ',');
        if (p.size() != 12) throw std::runtime_error("bad report row: " + line);
        ReportRow r;
        r.qid = p[0];
        r.structure = p[1];
        r.pages_rtree = std::stoul(p[2]);
        r.pages_lsh = std::stoul(p[3]);
        r.pages_data = std::stoul(p[4]);
        r.sim_time = std::stod(p[5]);
        r.result_count = std::stoul(p[6]);
        r.recall = std::stod(p[7]);
        r.precision = std::stod(p[8]);
        r.sv_match = std::stoul(p[9]);
        r.s_unmatch = std::stoul(p[10]);
        r.v_unmatch = std::stoul(p[11]);
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_result_sets(const std::filesystem::path& path, const ResultSets& results) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write results file: " + path.string());
    out << "# qid,structure,ids\n";
    for (const auto& [key, ids] : results) {
        out << key.first << ',' << key.second << ',';
        for (std::size_t i = 0; i < ids.size(); ++i) out << (i ? ";" : "") << ids[i];
        out << "\n";
    }
}

ResultSets read_result_sets(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read results file: " + path.string());
    ResultSets results;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto p = split(line, ',');
        if (p.size() != 3) throw std::runtime_error("bad results row: " + line);
        std::vector<std::string> ids;
        if (!p[2].empty()) ids = split(p[2], ';');
        results.emplace(std::make_pair(p[0], p[1]), std::move(ids));
    }
    return results;
}

// ---- benchmark driver -----------------------------------------------------------

namespace {

struct RunLabel {
    std::string label;
    IndexKind kind;
    double es = 0.0;
    int ev = 0;
};

std::vector<RunLabel> make_labels(const std::vector<IndexKind>& structures, double es_def,
                                  int ev_def) {
    std::vector<RunLabel> labels;
    for (IndexKind k : structures) labels.push_back({to_string(k), k, 0.0, 0});
    for (IndexKind k : structures) {
        if (k == IndexKind::aug_sfi) labels.push_back({"AugSFI-E", k, 0.0, ev_def});
        if (k == IndexKind::aug_vfi) labels.push_back({"AugVFI-E", k, es_def, 0});
    }
    return labels;
}

double wall_seconds_of(const std::vector<double>& samples) {
    // Five timed runs with min and max dropped, per the measurement protocol.
    if (samples.empty()) return 0.0;
    if (samples.size() <= 2) return mean_of(samples);
    std::vector<double> v = samples;
    std::sort(v.begin(), v.end());
    v.erase(v.begin());
    v.pop_back();
    return mean_of(v);
}

}  // namespace

BenchmarkOutput run_benchmark(const BenchmarkConfig& cfg_in) {
    BenchmarkConfig cfg = cfg_in;
    BenchmarkOutput out;
    out.out_dir = cfg.out_dir;
    std::filesystem::create_directories(out.out_dir);

    // Dataset resolution: inline > generated from spec > read from file.
    bool generated = false;
    if (cfg.dataset_inline) {
        out.dataset = *cfg.dataset_inline;
    } else if (cfg.dataset_spec) {
        out.dataset = generate_dataset(*cfg.dataset_spec);
        generated = true;
    } else if (!cfg.dataset_path.empty()) {
        out.dataset = read_dataset_file(cfg.dataset_path);
    } else {
        throw std::invalid_argument("benchmark: no dataset given");
    }
    const Dataset& ds = out.dataset;
    if (ds.size() == 0) throw std::invalid_argument("benchmark: empty dataset");
    if (generated) write_dataset_file(out.out_dir / "dataset.csv", ds);

    if (cfg.lsh.width <= 0.0) cfg.lsh.width = default_lsh_width(ds, cfg.lsh.seed);
    cfg.lsh.dim = ds.dim;
    if (cfg.sigma_values.empty()) {
        for (double q : cfg.sigma_quantiles)
            cfg.sigma_values.push_back(pairwise_distance_quantile(ds, q, cfg.lsh.seed));
    }
    cfg.sigma_default = std::min(cfg.sigma_default, cfg.sigma_values.size() - 1);
    cfg.side_default = std::min(cfg.side_default, cfg.side_values.size() - 1);
    cfg.es_default = std::min(cfg.es_default, cfg.es_values.size() - 1);
    cfg.ev_default = std::min(cfg.ev_default, cfg.ev_values.size() - 1);
    cfg.default_sigma_resolved = cfg.sigma_values[cfg.sigma_default];
    const double es_max =
        cfg.es_values.empty() ? 0.0 : *std::max_element(cfg.es_values.begin(), cfg.es_values.end());

    // One store and one set of data files shared by every structure.
    PageStore store(cfg.page);
    const DataFiles data = write_dataset(store, ds);

    BuildConfig bcfg;
    bcfg.page = cfg.page;
    bcfg.tree = cfg.tree;
    bcfg.lsh = cfg.lsh;
    bcfg.hash_override = cfg.hash_override;
    bcfg.duplicate_vfi_trees = cfg.duplicate_vfi_trees;
    bcfg.layout = cfg.layout;

    std::map<IndexKind, SpatialVisualIndex> built;
    for (IndexKind k : cfg.structures) {
        const auto t0 = std::chrono::steady_clock::now();
        built.emplace(k, SpatialVisualIndex::build(k, ds, store, data, bcfg));
        const auto t1 = std::chrono::steady_clock::now();
        out.build_seconds[to_string(k)] = std::chrono::duration<double>(t1 - t0).count();
    }

    const double default_es = cfg.es_values[cfg.es_default];
    const int default_ev = cfg.ev_values[cfg.ev_default];
    const auto labels = make_labels(cfg.structures, default_es, default_ev);

    QueryTemplate tpl;
    tpl.side_x = tpl.side_y = cfg.side_values[cfg.side_default];
    tpl.sigma = cfg.sigma_values[cfg.sigma_default];
    tpl.explore_spatial = default_es;
    tpl.explore_visual = default_ev;

    auto run_one = [&](const SpatialVisualIndex& idx, const SpatialVisualRangeQuery& base,
                       const RunLabel& rl, std::vector<double>* wall) {
        SpatialVisualRangeQuery q = base;
        q.explore_spatial = rl.es;
        q.explore_visual = rl.ev;
        QueryOutcome outcome;
        std::vector<double> samples;
        const int reps = std::max(1, cfg.timing_repeats);
        for (int r = 0; r < reps; ++r) {
            const auto t0 = std::chrono::steady_clock::now();
            outcome = idx.query(q);
            const auto t1 = std::chrono::steady_clock::now();
            samples.push_back(std::chrono::duration<double>(t1 - t0).count());
        }
        if (wall) wall->push_back(wall_seconds_of(samples));
        return outcome;
    };

    // Base runs, one per selectivity group (or the inline workload).
    std::vector<std::pair<SelectivityGroup, Workload>> workloads;
    if (cfg.workload_inline) {
        workloads.emplace_back(cfg.groups.empty() ? SelectivityGroup::su_vu : cfg.groups[0],
                               *cfg.workload_inline);
    } else {
        for (SelectivityGroup g : cfg.groups)
            workloads.emplace_back(
                g, select_queries(ds, g, cfg.queries_per_group, cfg.workload_seed, tpl));
    }

    for (const auto& [group, wl] : workloads) {
        GroupRun run;
        run.group = group;
        run.workload = wl;
        write_workload_file(out.out_dir / (std::string("workload_") + to_string(group) + ".csv"),
                            wl);

        std::vector<GroundTruth> truths;
        truths.reserve(wl.queries.size());
        for (const auto& q : wl.queries) truths.push_back(oracle_query(ds, q, es_max));

        for (const auto& rl : labels) {
            auto& outcomes = run.outcomes[rl.label];
            auto& evals = run.evals[rl.label];
            auto& walls = run.wall_seconds[rl.label];
            const SpatialVisualIndex& idx = built.at(rl.kind);
            for (std::size_t i = 0; i < wl.queries.size(); ++i) {
                QueryOutcome oc = run_one(idx, wl.queries[i], rl, &walls);
                SpatialVisualRangeQuery effective_q = wl.queries[i];
                effective_q.explore_spatial = rl.es;
                effective_q.explore_visual = rl.ev;
                evals.push_back(evaluate_result(ds, effective_q, truths[i], oc.result,
                                                built.at(rl.kind).family(), rl.es));
                outcomes.push_back(std::move(oc));
            }
        }
        out.groups.push_back(std::move(run));
    }

    // Report rows and stored result sets.
    for (const auto& run : out.groups) {
        for (const auto& rl : labels) {
            const auto& outcomes = run.outcomes.at(rl.label);
            const auto& evals = run.evals.at(rl.label);
            for (std::size_t i = 0; i < outcomes.size(); ++i) {
                ReportRow row;
                row.qid = std::string(to_string(run.group)) + ":" + run.workload.qids[i];
                row.structure = rl.label;
                row.pages_rtree = outcomes[i].stats.pages_rtree;
                row.pages_lsh = outcomes[i].stats.pages_lsh;
                row.pages_data = outcomes[i].stats.pages_data;
                row.sim_time = outcomes[i].stats.simulated_time;
                row.result_count = outcomes[i].result.size();
                row.recall = evals[i].recall;
                row.precision = evals[i].precision;
                row.sv_match = evals[i].sv_match;
                row.s_unmatch = evals[i].s_unmatch;
                row.v_unmatch = evals[i].v_unmatch;
                out.rows.push_back(row);
                std::vector<std::string> ids;
                ids.reserve(outcomes[i].result.size());
                for (std::uint32_t ord : outcomes[i].result) ids.push_back(data.ids[ord]);
                out.results.emplace(std::make_pair(row.qid, row.structure), std::move(ids));
            }
        }
    }
    write_report_rows(out.out_dir / "rows.csv", out.rows);
    write_result_sets(out.out_dir / "results.csv", out.results);

    // Lemma verdicts over the first group when every structure ran.
    if (!out.groups.empty()) {
        std::map<std::string, std::vector<QueryStats>> by_label;
        for (const auto& [label, outcomes] : out.groups.front().outcomes) {
            auto& v = by_label[label];
            for (const auto& oc : outcomes) v.push_back(oc.stats);
        }
        if (by_label.size() >= 2 && !out.groups.front().workload.queries.empty())
            out.lemmas = lemma_report(by_label);
    }

    // Plot-ready series over the first group's query images.
    if (cfg.emit_series && !out.groups.empty() && !out.groups.front().workload.queries.empty() &&
        !cfg.workload_inline) {
        const auto series_dir = out.out_dir / "series";
        std::filesystem::create_directories(series_dir);
        const Workload& wl = out.groups.front().workload;

        {
            std::ofstream f(series_dir / "pages_vs_structure.csv");
            f << "# structure,mean_pages\n";
            for (const auto& [label, outcomes] : out.groups.front().outcomes) {
                double sum = 0.0;
                for (const auto& oc : outcomes) sum += static_cast<double>(oc.stats.total_pages());
                f << label << ',' << fmt(sum / static_cast<double>(outcomes.size())) << "\n";
            }
        }

        if (built.count(IndexKind::aug_sfi) != 0) {
            std::ofstream f(series_dir / "recall_vs_ev.csv");
            f << "# ev,mean_recall\n";
            std::vector<int> evs = {0};
            evs.insert(evs.end(), cfg.ev_values.begin(), cfg.ev_values.end());
            for (int ev : evs) {
                std::vector<double> recalls;
                for (std::size_t i = 0; i < wl.queries.size(); ++i) {
                    RunLabel rl{"sweep", IndexKind::aug_sfi, 0.0, ev};
                    const auto oc = run_one(built.at(IndexKind::aug_sfi), wl.queries[i], rl,
                                            nullptr);
                    const auto truth = oracle_query(ds, wl.queries[i], 0.0);
                    if (truth.strict.empty()) continue;
                    recalls.push_back(
                        static_cast<double>(intersect_sorted(oc.result, truth.strict).size()) /
                        static_cast<double>(truth.strict.size()));
                }
                f << ev << ',' << fmt(mean_of(recalls)) << "\n";
            }
        }

        {
            std::ofstream f(series_dir / "recall_vs_sigma.csv");
            f << "# sigma,structure,mean_recall\n";
            for (double sigma : cfg.sigma_values) {
                for (const auto& rl : labels) {
                    std::vector<double> recalls;
                    for (std::size_t i = 0; i < wl.queries.size(); ++i) {
                        SpatialVisualRangeQuery q = wl.queries[i];
                        q.sigma = sigma;
                        const auto oc = run_one(built.at(rl.kind), q, rl, nullptr);
                        const auto truth = oracle_query(ds, q, 0.0);
                        if (truth.strict.empty()) continue;
                        recalls.push_back(
                            static_cast<double>(
                                intersect_sorted(oc.result, truth.strict).size()) /
                            static_cast<double>(truth.strict.size()));
                    }
                    f << fmt(sigma) << ',' << rl.label << ',' << fmt(mean_of(recalls)) << "\n";
                }
            }
        }

        {
            std::ofstream f(series_dir / "pages_vs_range.csv");
            f << "# side,structure,mean_pages\n";
            for (double side : cfg.side_values) {
                for (const auto& rl : labels) {
                    double sum = 0.0;
                    for (std::size_t i = 0; i < wl.queries.size(); ++i) {
                        SpatialVisualRangeQuery q = wl.queries[i];
                        const double cx = (q.spatial.lo.x + q.spatial.hi.x) / 2;
                        const double cy = (q.spatial.lo.y + q.spatial.hi.y) / 2;
                        q.spatial = Rect{{cx - side / 2, cy - side / 2},
                                         {cx + side / 2, cy + side / 2}};
                        const auto oc = run_one(built.at(rl.kind), q, rl, nullptr);
                        sum += static_cast<double>(oc.stats.total_pages());
                    }
                    f << fmt(side) << ',' << rl.label << ','
                      << fmt(sum / static_cast<double>(wl.queries.size())) << "\n";
                }
            }
        }
    }

    // Summary: deterministic metrics first, wall-clock section at the end.
    {
        std::ofstream f(out.out_dir / "summary.txt");
        f << "svx benchmark summary\n";
        f << "images=" << ds.size() << " dim=" << ds.dim << " page_size=" << cfg.page.page_size
          << " t_disk=" << fmt(cfg.page.t_disk) << "\n";
        f << "lsh: T=" << cfg.lsh.tables << " F=" << cfg.lsh.functions
          << " W=" << fmt(cfg.lsh.width) << " seed=" << cfg.lsh.seed << "\n";
        f << "sigma_default=" << fmt(cfg.default_sigma_resolved) << " es_default="
          << fmt(default_es) << " ev_default=" << default_ev << "\n\n";
        for (const auto& run : out.groups) {
            f << "[group " << to_string(run.group) << ", " << run.workload.queries.size()
              << " queries]\n";
            f << "structure,mean_pages,mean_rtree,mean_lsh,mean_data,mean_recall,mean_precision\n";
            for (const auto& [label, outcomes] : run.outcomes) {
                double pages = 0, pr = 0, pl = 0, pd = 0;
                for (const auto& oc : outcomes) {
                    pages += static_cast<double>(oc.stats.total_pages());
                    pr += static_cast<double>(oc.stats.pages_rtree);
                    pl += static_cast<double>(oc.stats.pages_lsh);
                    pd += static_cast<double>(oc.stats.pages_data);
                }
                std::vector<double> recalls;
                double prec = 0;
                for (const auto& ev : run.evals.at(label)) {
                    if (!std::isnan(ev.recall)) recalls.push_back(ev.recall);
                    prec += ev.precision;
                }
                const double nq = static_cast<double>(outcomes.size());
                f << label << ',' << fmt(pages / nq) << ',' << fmt(pr / nq) << ','
                  << fmt(pl / nq) << ',' << fmt(pd / nq) << ',' << fmt(mean_of(recalls)) << ','
                  << fmt(prec / nq) << "\n";
            }
            f << "\n";
        }
        if (!out.lemmas.empty()) {
            f << "[lemma verdicts]\n";
            for (const auto& v : out.lemmas) {
                f << v.label << ": pages(" << v.lhs << ") <= pages(" << v.rhs << ") "
                  << (v.per_query ? "[per-query] " : "[mean] ") << (v.holds ? "HOLDS" : "FAILS")
                  << " satisfaction=" << fmt(v.satisfaction) << " lhs_mean=" << fmt(v.lhs_mean)
                  << " rhs_mean=" << fmt(v.rhs_mean) << "\n";
            }
            f << "\n";
        }
        f << "[wall clock, informational]\n";
        for (const auto& [label, secs] : out.build_seconds)
            f << "build," << label << ',' << fmt(secs) << "\n";
        for (const auto& run : out.groups)
            for (const auto& [label, walls] : run.wall_seconds)
                f << "query-mean," << to_string(run.group) << ',' << label << ','
                  << fmt(mean_of(walls)) << "\n";
    }

    // Machine-readable settings for later `report` runs.
    {
        std::ofstream f(out.out_dir / "bench.txt");
        f << "svx-bench,v1\n";
        f << "lsh_tables=" << cfg.lsh.tables << "\n";
        f << "lsh_functions=" << cfg.lsh.functions << "\n";
        f << "lsh_width=" << fmt(cfg.lsh.width) << "\n";
        f << "lsh_seed=" << cfg.lsh.seed << "\n";
        f << "lsh_dim=" << cfg.lsh.dim << "\n";
        f << "es_max=" << fmt(es_max) << "\n";
        f << "default_es=" << fmt(default_es) << "\n";
        f << "default_ev=" << default_ev << "\n";
        for (const auto& run : out.groups) f << "group=" << to_string(run.group) << "\n";
    }

    out.resolved = cfg;
    return out;
}

ReportVerification verify_report(const Dataset& ds,
                                 const std::map<std::string, SpatialVisualRangeQuery>& queries,
                                 const std::vector<ReportRow>& rows, const ResultSets& results,
                                 const HashFamily& family, double es_max, double default_es) {
    ReportVerification out;
    std::map<std::string, std::uint32_t> ordinal_of;
    for (std::uint32_t i = 0; i < ds.size(); ++i) ordinal_of[ds.images[i].id] = i;

    std::map<std::string, GroundTruth> truth_cache;
    for (const auto& row : rows) {
        ++out.rows_checked;
        const auto qit = queries.find(row.qid);
        if (qit == queries.end()) {
            out.mismatches.push_back(row.qid + ": query not found");
            continue;
        }
        const auto rit = results.find(std::make_pair(row.qid, row.structure));
        if (rit == results.end()) {
            out.mismatches.push_back(row.qid + "," + row.structure + ": result set missing");
            continue;
        }
        std::vector<std::uint32_t> result;
        for (const auto& id : rit->second) result.push_back(ordinal_of.at(id));
        std::sort(result.begin(), result.end());
        if (result.size() != row.result_count) {
            out.mismatches.push_back(row.qid + "," + row.structure + ": result count differs");
            continue;
        }
        auto tit = truth_cache.find(row.qid);
        if (tit == truth_cache.end())
            tit = truth_cache.emplace(row.qid, oracle_query(ds, qit->second, es_max)).first;
        const double es = row.structure == "AugVFI-E" ? default_es : 0.0;
        const QueryEval eval =
            evaluate_result(ds, qit->second, tit->second, result, family, es);
        const bool recall_same = (std::isnan(eval.recall) && std::isnan(row.recall)) ||
                                 eval.recall == row.recall;
        if (!recall_same)
            out.mismatches.push_back(row.qid + "," + row.structure + ": recall differs");
        if (eval.precision != row.precision)
            out.mismatches.push_back(row.qid + "," + row.structure + ": precision differs");
        if (eval.sv_match != row.sv_match || eval.s_unmatch != row.s_unmatch ||
            eval.v_unmatch != row.v_unmatch)
            out.mismatches.push_back(row.qid + "," + row.structure + ": class counts differ");
    }
    return out;
}

}  // namespace svx
