// Synthetic dataset generation with controllable spatial/visual density,
// query-workload construction by selectivity group, the benchmark driver, and
// the text file formats shared with the CLI.
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "svx/core.hpp"
#include "svx/evalkit.hpp"
#include "svx/indexes.hpp"

namespace svx {

struct ClusterSpec {
    std::vector<double> center;  // empty visual center -> drawn from the seed
    double spread = 1.0;
    double weight = 1.0;
};

struct DatasetSpec {
    std::size_t n = 0;
    int dim = 150;
    std::vector<ClusterSpec> spatial;
    std::vector<ClusterSpec> visual;
    double coupling = 0.0;  // fraction with matching spatial/visual cluster index
    std::uint64_t seed = 0;

    void validate() const;
};

Dataset generate_dataset(const DatasetSpec& spec);

enum class SelectivityGroup { sd_vd, sd_vs, ss_vd, ss_vs, su_vu };

const char* to_string(SelectivityGroup g);
SelectivityGroup selectivity_group_from_string(const std::string& s);
constexpr std::array<SelectivityGroup, 5> kAllGroups = {
    SelectivityGroup::sd_vd, SelectivityGroup::sd_vs, SelectivityGroup::ss_vd,
    SelectivityGroup::ss_vs, SelectivityGroup::su_vu};

// Local-density statistics: distance to the k-th nearest neighbor in each
// space, and rank terciles over them (0 = dense, 1 = uniform, 2 = sparse).
std::vector<double> knn_distance_spatial(const Dataset& ds, int k);
std::vector<double> knn_distance_visual(const Dataset& ds, int k);
std::vector<int> rank_terciles(const std::vector<double>& values);

struct QueryTemplate {
    double side_x = 1.0;
    double side_y = 1.0;
    double sigma = 0.0;
    double explore_spatial = 0.0;
    int explore_visual = 0;
};

struct Workload {
    std::vector<std::string> qids;
    std::vector<SpatialVisualRangeQuery> queries;
};

/// Picks `count` query images from the group's density pool and pairs each
/// with a rect centered on it. Throws when the group intersection is empty.
Workload select_queries(const Dataset& ds, SelectivityGroup group, std::size_t count,
                        std::uint64_t seed, const QueryTemplate& tpl);

// ---- dataset statistics used for defaults -----------------------------------

/// Quantile of pairwise visual distances over a seeded sample (<= 500 images).
double pairwise_distance_quantile(const Dataset& ds, double quantile, std::uint64_t seed);

/// Default LSH bucket width: median pairwise distance of the sample over 4.
double default_lsh_width(const Dataset& ds, std::uint64_t seed);

// ---- file formats -------------------------------------------------------------

void write_dataset_file(const std::filesystem::path& path, const Dataset& ds);
Dataset read_dataset_file(const std::filesystem::path& path);

void write_workload_file(const std::filesystem::path& path, const Workload& wl);
Workload read_workload_file(const std::filesystem::path& path);

struct ReportRow {
    std::string qid;
    std::string structure;
    std::size_t pages_rtree = 0;
    std::size_t pages_lsh = 0;
    std::size_t pages_data = 0;
    double sim_time = 0.0;
    std::size_t result_count = 0;
    double recall = 0.0;
    double precision = 1.0;
    std::size_t sv_match = 0;
    std::size_t s_unmatch = 0;
    std::size_t v_unmatch = 0;
};

void write_report_rows(const std::filesystem::path& path, const std::vector<ReportRow>& rows);
std::vector<ReportRow> read_report_rows(const std::filesystem::path& path);

/// Result sets per (qid, structure), needed to recompute every report row.
using ResultSets = std::map<std::pair<std::string, std::string>, std::vector<std::string>>;

void write_result_sets(const std::filesystem::path& path, const ResultSets& results);
ResultSets read_result_sets(const std::filesystem::path& path);

// ---- benchmark driver ---------------------------------------------------------

struct BenchmarkConfig {
    std::optional<DatasetSpec> dataset_spec;
    std::string dataset_path;            // used when no spec is given
    std::optional<Dataset> dataset_inline;
    std::optional<Workload> workload_inline;

    std::vector<IndexKind> structures{kAllIndexKinds.begin(), kAllIndexKinds.end()};
    std::vector<SelectivityGroup> groups{SelectivityGroup::su_vu};
    std::size_t queries_per_group = 100;

    // Sweep values; the default run uses the *_default entry of each.
    std::vector<double> side_values{1.25, 3.7, 6.18, 8.1};
    std::size_t side_default = 2;
    std::vector<double> sigma_quantiles{0.01, 0.02, 0.05, 0.10};
    std::size_t sigma_default = 2;
    std::vector<double> sigma_values;    // overrides quantiles when nonempty
    std::vector<double> es_values{0.1, 0.3, 0.5, 0.7};
    std::size_t es_default = 2;
    std::vector<int> ev_values{9, 15, 21, 27};
    std::size_t ev_default = 1;

    PageStoreConfig page;
    TreeConfig tree;
    LshParams lsh;                        // width <= 0 -> derived from the data
    bool duplicate_vfi_trees = false;
    std::optional<SpatialLayout> layout;
    std::shared_ptr<const HashFamily> hash_override;

    std::uint64_t workload_seed = 7;
    int timing_repeats = 5;
    int density_k = 10;
    bool emit_series = true;
    std::string out_dir = "bench_out";

    double default_sigma_resolved = -1.0;  // filled in by the run
};

struct GroupRun {
    SelectivityGroup group;
    Workload workload;
    // label -> aligned per-query outcomes/evaluations
    std::map<std::string, std::vector<QueryOutcome>> outcomes;
    std::map<std::string, std::vector<QueryEval>> evals;
    std::map<std::string, std::vector<double>> wall_seconds;
};

struct BenchmarkOutput {
    std::filesystem::path out_dir;
    Dataset dataset;
    BenchmarkConfig resolved;
    std::vector<GroupRun> groups;
    std::vector<ReportRow> rows;
    ResultSets results;
    std::vector<LemmaVerdict> lemmas;
    std::map<std::string, double> build_seconds;
};

BenchmarkOutput run_benchmark(const BenchmarkConfig& cfg);

/// Recomputes recall/precision/class counts of every row from the stored
/// result sets and the oracle; returns human-readable mismatch descriptions.
struct ReportVerification {
    std::size_t rows_checked = 0;
    std::vector<std::string> mismatches;
    bool ok() const { return mismatches.empty(); }
};

ReportVerification verify_report(const Dataset& ds,
                                 const std::map<std::string, SpatialVisualRangeQuery>& queries,
                                 const std::vector<ReportRow>& rows, const ResultSets& results,
                                 const HashFamily& family, double es_max, double default_es);

}  // namespace svx
