// The seven spatial-visual index structures behind one build/query interface.
// Three baselines (double index, augmented R*-tree, augmented LSH), two
// hybrids (spatial-first, visual-first), and their augmented variants with
// optional exploration at query time.
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "svx/core.hpp"
#include "svx/lsh.hpp"
#include "svx/pagestore.hpp"
#include "svx/rstar.hpp"

namespace svx {

enum class IndexKind { di, aug_rtree, aug_lsh, sfi, vfi, aug_sfi, aug_vfi };

const char* to_string(IndexKind k);
IndexKind index_kind_from_string(const std::string& s);
constexpr std::array<IndexKind, 7> kAllIndexKinds = {
    IndexKind::di,      IndexKind::aug_rtree, IndexKind::aug_lsh, IndexKind::sfi,
    IndexKind::vfi,     IndexKind::aug_sfi,   IndexKind::aug_vfi};

struct QueryStats {
    std::size_t pages_rtree = 0;
    std::size_t pages_lsh = 0;
    std::size_t pages_data = 0;
    double simulated_time = 0.0;
    std::vector<std::pair<std::string, std::size_t>> intermediate_sizes;

    std::size_t total_pages() const { return pages_rtree + pages_lsh + pages_data; }
};

struct QueryOutcome {
    std::vector<std::uint32_t> result;  // sorted image ordinals
    QueryStats stats;
    AccessTrace trace;
};

/// Prescribed tree shape (explicit leaf membership by image ordinal plus an
/// internal grouping level); used to mirror reference layouts in tests.
struct SpatialLayout {
    std::vector<std::vector<std::uint32_t>> leaves;
    std::vector<std::vector<std::size_t>> internal_groups;
};

struct BuildConfig {
    PageStoreConfig page;
    TreeConfig tree;
    LshParams lsh;
    std::shared_ptr<const HashFamily> hash_override;  // tests: pinned coefficients
    bool duplicate_vfi_trees = false;  // secondary tree per (table, bucket) instead of table 1
    std::optional<SpatialLayout> layout;
};

/// Dataset records placed in the store once and shared by all structures.
struct DataFiles {
    std::uint32_t spatial_file = 0;
    std::uint32_t visual_file = 0;
    std::vector<RecordPointer> spatial_ptr;  // by image ordinal
    std::vector<RecordPointer> visual_ptr;
    std::vector<std::string> ids;

    void save(const std::filesystem::path& path) const;
    static DataFiles load(const std::filesystem::path& path, const PageStore& store);
};

DataFiles write_dataset(PageStore& store, const Dataset& ds);

class SpatialVisualIndex {
  public:
    static SpatialVisualIndex build(IndexKind kind, const Dataset& ds, PageStore& store,
                                    const DataFiles& data, const BuildConfig& cfg);

    QueryOutcome query(const SpatialVisualRangeQuery& q) const;

    IndexKind kind() const { return kind_; }
    const HashFamily& family() const { return *family_; }
    const DataFiles& data() const { return data_; }
    const BuildConfig& config() const { return cfg_; }

    // Introspection for the cost models and reports.
    bool has_node_file() const { return node_file_ != UINT32_MAX; }
    bool has_bucket_file() const { return bucket_file_ != UINT32_MAX; }
    std::uint32_t node_file() const { return node_file_; }
    std::uint32_t bucket_file() const { return bucket_file_; }
    const std::optional<TreeMeta>& primary_tree_meta() const { return primary_tree_meta_; }
    const std::optional<LshMeta>& primary_lsh_meta() const { return primary_lsh_meta_; }
    const std::map<std::uint32_t, LshMeta>& leaf_lsh_metas() const { return leaf_lsh_metas_; }
    const std::map<std::uint32_t, TreeMeta>& secondary_tree_metas() const { return tree_metas_; }
    const std::map<TableKey, std::uint32_t>& bucket_ordinal_directory() const {
        return bucket_dir_;
    }
    const std::map<std::uint32_t, RecordPointer>& routing_records() const {
        return routing_ptrs_;
    }
    const PageStore& store() const { return *store_; }

    void save_manifest(const std::filesystem::path& path) const;
    static SpatialVisualIndex open(const std::filesystem::path& path, const PageStore& store,
                                   const DataFiles& data);

  private:
    SpatialVisualIndex() = default;
    void finish_open();

    QueryOutcome query_di(const SpatialVisualRangeQuery& q) const;
    QueryOutcome query_aug_rtree(const SpatialVisualRangeQuery& q) const;
    QueryOutcome query_aug_lsh(const SpatialVisualRangeQuery& q) const;
    QueryOutcome query_sfi(const SpatialVisualRangeQuery& q) const;
    QueryOutcome query_vfi(const SpatialVisualRangeQuery& q) const;
    QueryOutcome query_aug_sfi(const SpatialVisualRangeQuery& q) const;
    QueryOutcome query_aug_vfi(const SpatialVisualRangeQuery& q) const;

    QueryOutcome finalize(QueryContext& ctx, std::vector<std::uint32_t> result,
                          std::vector<std::pair<std::string, std::size_t>> intermediates) const;

    IndexKind kind_ = IndexKind::di;
    const PageStore* store_ = nullptr;
    BuildConfig cfg_;
    std::shared_ptr<const HashFamily> family_;
    DataFiles data_;

    std::uint32_t node_file_ = UINT32_MAX;
    std::uint32_t bucket_file_ = UINT32_MAX;

    std::optional<TreeMeta> primary_tree_meta_;
    std::optional<RStarTree> primary_tree_;
    std::optional<LshMeta> primary_lsh_meta_;
    std::optional<LshIndex> primary_lsh_;

    // Spatial-first: one secondary LSH per primary leaf page.
    std::map<std::uint32_t, LshMeta> leaf_lsh_metas_;
    std::map<std::uint32_t, LshIndex> leaf_lshs_;

    // Visual-first: secondary trees keyed by bucket-directory ordinal.
    std::map<std::uint32_t, TreeMeta> tree_metas_;
    std::map<std::uint32_t, RStarTree> secondary_trees_;

    // Visual-first augmented: full bucket directory (hash -> ordinal), the
    // probed-bucket -> tree-bucket routing lists, and their persisted records.
    std::map<TableKey, std::uint32_t> bucket_dir_;
    std::map<std::uint32_t, std::vector<std::uint32_t>> routing_;
    std::map<std::uint32_t, RecordPointer> routing_ptrs_;
};

std::vector<std::uint32_t> intersect_sorted(const std::vector<std::uint32_t>& a,
                                            const std::vector<std::uint32_t>& b);

}  // namespace svx
