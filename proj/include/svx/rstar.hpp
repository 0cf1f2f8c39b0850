// Disk-resident R*-tree over 2-d points. One node per page. Insertion uses the
// R*-tree choose-subtree and topological split heuristics (no forced reinsert).
// Leaf entries optionally carry visual-record pointers (augmented variant) or
// visual pointers plus per-entry bucket annotations (secondary trees of the
// visual-first augmented structure).
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "svx/core.hpp"
#include "svx/pagestore.hpp"

namespace svx {

struct TreeConfig {
    std::uint32_t fan_out = 85;
    std::uint32_t min_fill = 0;  // 0 -> 40% of fan_out

    std::uint32_t resolved_min_fill() const;
    void validate() const;
};

enum class LeafFlavor : std::uint8_t {
    spatial_only = 0,      // ordinal, point, spatial pointer
    with_visual = 1,       // + visual pointer
    visual_annotated = 2,  // ordinal, point, visual pointer, bucket ids
};

struct LeafEntry {
    std::uint32_t ordinal = 0;
    Point2 point;
    RecordPointer spatial;
    RecordPointer visual;
    std::vector<std::uint32_t> bucket_ids;  // visual_annotated only
};

struct TreeMeta {
    std::uint32_t node_file = 0;
    std::uint32_t spatial_file = 0;
    std::uint32_t visual_file = 0;
    LeafFlavor flavor = LeafFlavor::spatial_only;
    std::uint32_t bucket_ids_per_entry = 0;
    std::uint32_t root_page = 0;
    bool root_is_leaf = true;
    Rect root_mbr;
    std::uint32_t height = 1;
    std::uint32_t node_count = 0;
    std::uint32_t leaf_count = 0;
    std::uint64_t entry_count = 0;
};

/// In-memory construction; persist() freezes the tree into the page store.
class RStarBuilder {
  public:
    RStarBuilder(TreeConfig cfg, LeafFlavor flavor, std::uint32_t bucket_ids_per_entry = 0);

    void insert(const LeafEntry& entry);

    /// Assemble a tree with a prescribed shape (explicit leaf groups and an
    /// optional internal level over them). Used to mirror reference layouts.
    static RStarBuilder from_layout(TreeConfig cfg, LeafFlavor flavor,
                                    std::uint32_t bucket_ids_per_entry,
                                    const std::vector<std::vector<LeafEntry>>& leaf_groups,
                                    const std::vector<std::vector<std::size_t>>& internal_groups);

    TreeMeta persist(PageStore& store, std::uint32_t node_file, std::uint32_t spatial_file,
                     std::uint32_t visual_file) const;

    /// Structural audit: MBR minimality, occupancy bounds, uniform leaf depth.
    /// Throws on the first violation.
    void check_invariants() const;

    std::size_t node_count() const { return nodes_.size(); }
    std::size_t leaf_count() const;
    std::uint32_t height() const { return height_; }
    std::uint64_t entry_count() const { return entry_count_; }

  private:
    struct BuildNode {
        bool leaf = true;
        Rect mbr;
        std::vector<std::uint32_t> children;  // internal
        std::vector<LeafEntry> entries;       // leaf
    };

    std::uint32_t choose_subtree_child(const BuildNode& node, const Rect& erect,
                                       bool children_are_leaves) const;
    void split_node(std::uint32_t node_id, std::uint32_t& left_out, std::uint32_t& right_out);
    Rect node_rect(std::uint32_t id) const { return nodes_[id].mbr; }
    void recompute_mbr(std::uint32_t id);

    TreeConfig cfg_;
    LeafFlavor flavor_;
    std::uint32_t bucket_ids_per_entry_;
    std::vector<BuildNode> nodes_;
    std::int64_t root_ = -1;
    std::uint32_t height_ = 1;
    std::uint64_t entry_count_ = 0;
};

/// Read-only query handle over a persisted tree. When `root_pinned` the root
/// page is cached at construction and its reads are never charged (primary
/// structures); secondary trees leave it false and pay for every node.
class RStarTree {
  public:
    RStarTree(const PageStore* store, TreeMeta meta, bool root_pinned);

    struct RangeResult {
        std::vector<LeafEntry> hits;                // entries inside the rect
        std::vector<std::uint32_t> visited_leaves;  // leaf pages whose MBR overlapped
    };

    RangeResult range_query(const Rect& rect, QueryContext* ctx) const;

    /// Pages of the leaves whose MBRs overlap `rect`, discovered from their
    /// parents; leaf pages themselves are not read.
    std::vector<std::uint32_t> overlapping_leaves(const Rect& rect, QueryContext* ctx) const;

    /// Uncharged full walk (persistence audits, secondary-structure builds).
    void leaf_iterate(
        const std::function<void(std::uint32_t, const std::vector<LeafEntry>&)>& fn) const;

    const TreeMeta& meta() const { return meta_; }

  private:
    struct ParsedNode {
        bool leaf = true;
        Rect mbr;
        std::vector<std::pair<std::uint32_t, Rect>> children;
        std::vector<LeafEntry> entries;
    };

    ParsedNode fetch(std::uint32_t page, QueryContext* ctx) const;
    ParsedNode parse(const std::vector<std::byte>& bytes) const;
    void range_walk(const ParsedNode& node, std::uint32_t page, std::uint32_t depth,
                    const Rect& rect, QueryContext* ctx, RangeResult& out) const;
    void leaves_walk(const ParsedNode& node, std::uint32_t depth, const Rect& rect,
                     QueryContext* ctx, std::vector<std::uint32_t>& out) const;

    const PageStore* store_;
    TreeMeta meta_;
    bool root_pinned_;
    std::optional<ParsedNode> cached_root_;
};

/// Node wire size for a given flavor; builders reject configurations whose
/// fullest node would not fit in one page.
std::size_t node_bytes_upper_bound(const TreeConfig& cfg, LeafFlavor flavor,
                                   std::uint32_t bucket_ids_per_entry);

}  // namespace svx
