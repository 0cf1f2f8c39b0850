#include "svx/rstar.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "wire.hpp"

namespace svx {

namespace {

Rect point_rect(Point2 p) { return Rect{p, p}; }

std::size_t leaf_entry_bytes(LeafFlavor flavor, std::uint32_t bids) {
    switch (flavor) {
        case LeafFlavor::spatial_only: return 4 + 16 + 12;
        case LeafFlavor::with_visual: return 4 + 16 + 12 + 12;
        case LeafFlavor::visual_annotated: return 4 + 16 + 12 + 4 * static_cast<std::size_t>(bids);
    }
    return 0;
}

constexpr std::size_t kInternalEntryBytes = 4 + 32;
constexpr std::size_t kNodeHeaderBytes = 1 + 2 + 32;

}  // namespace

std::size_t node_bytes_upper_bound(const TreeConfig& cfg, LeafFlavor flavor,
                                   std::uint32_t bids) {
    const std::size_t per_entry =
        std::max(leaf_entry_bytes(flavor, bids), kInternalEntryBytes);
    return kNodeHeaderBytes + cfg.fan_out * per_entry;
}

std::uint32_t TreeConfig::resolved_min_fill() const {
    if (min_fill > 0) return min_fill;
    return std::max<std::uint32_t>(1, static_cast<std::uint32_t>(fan_out * 2 / 5));
}

void TreeConfig::validate() const {
    if (fan_out < 2) throw std::invalid_argument("rstar: fan_out must be >= 2");
    const std::uint32_t m = resolved_min_fill();
    if (2 * m > fan_out + 1)
        throw std::invalid_argument("rstar: min_fill too large for fan_out");
}

RStarBuilder::RStarBuilder(TreeConfig cfg, LeafFlavor flavor, std::uint32_t bids)
    : cfg_(cfg), flavor_(flavor), bucket_ids_per_entry_(bids) {
    cfg_.validate();
}

std::size_t RStarBuilder::leaf_count() const {
    std::size_t n = 0;
    for (const auto& node : nodes_) n += node.leaf ? 1 : 0;
    return n;
}

void RStarBuilder::recompute_mbr(std::uint32_t id) {
    BuildNode& n = nodes_[id];
    bool first = true;
    Rect r{};
    if (n.leaf) {
        for (const auto& e : n.entries) {
            r = first ? point_rect(e.point) : rect_union(r, point_rect(e.point));
            first = false;
        }
    } else {
        for (std::uint32_t c : n.children) {
            r = first ? nodes_[c].mbr : rect_union(r, nodes_[c].mbr);
            first = false;
        }
    }
    n.mbr = r;
}

std::uint32_t RStarBuilder::choose_subtree_child(const BuildNode& node, const Rect& erect,
                                                 bool children_are_leaves) const {
    double best_primary = std::numeric_limits<double>::infinity();
    double best_enlarge = std::numeric_limits<double>::infinity();
    double best_area = std::numeric_limits<double>::infinity();
    std::size_t best = 0;

    for (std::size_t i = 0; i < node.children.size(); ++i) {
        const Rect ri = nodes_[node.children[i]].mbr;
        const Rect grown = rect_union(ri, erect);
        const double enlarge = rect_area(grown) - rect_area(ri);
        const double area = rect_area(ri);

        double primary;
        if (children_are_leaves) {
            // Overlap enlargement against the siblings.
            double before = 0.0, after = 0.0;
            for (std::size_t j = 0; j < node.children.size(); ++j) {
                if (j == i) continue;
                const Rect rj = nodes_[node.children[j]].mbr;
                before += rect_overlap_area(ri, rj);
                after += rect_overlap_area(grown, rj);
            }
            primary = after - before;
        } else {
            primary = enlarge;
        }

        const bool better =
            primary < best_primary ||
            (primary == best_primary &&
             (enlarge < best_enlarge || (enlarge == best_enlarge && area < best_area)));
        if (better) {
            best_primary = primary;
            best_enlarge = enlarge;
            best_area = area;
            best = i;
        }
    }
    return node.children[static_cast<std::uint32_t>(best)];
}

namespace {

// Split machinery shared by leaf and internal overflows: items carry a rect;
// the distribution search is purely geometric.
struct SplitItem {
    Rect rect;
    std::size_t index;  // position in the original node
};

struct SplitChoice {
    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
};

Rect group_bb(const std::vector<SplitItem>& items, std::size_t from, std::size_t to) {
    Rect r = items[from].rect;
    for (std::size_t i = from + 1; i < to; ++i) r = rect_union(r, items[i].rect);
    return r;
}

SplitChoice rstar_split(std::vector<SplitItem> items, std::uint32_t min_fill) {
    const std::size_t total = items.size();
    const std::size_t k_lo = min_fill;
    const std::size_t k_hi = total - min_fill;  // exclusive upper split point

    // Two sort orders per axis: by lower then by upper coordinate.
    auto sorted = [&items](int axis, bool by_upper) {
        std::vector<SplitItem> v = items;
        std::stable_sort(v.begin(), v.end(), [axis, by_upper](const SplitItem& a, const SplitItem& b) {
            const double ka = axis == 0 ? (by_upper ? a.rect.hi.x : a.rect.lo.x)
                                        : (by_upper ? a.rect.hi.y : a.rect.lo.y);
            const double kb = axis == 0 ? (by_upper ? b.rect.hi.x : b.rect.lo.x)
                                        : (by_upper ? b.rect.hi.y : b.rect.lo.y);
            return ka < kb;
        });
        return v;
    };

    // Axis by minimum margin sum across all candidate distributions.
    int best_axis = 0;
    double best_margin = std::numeric_limits<double>::infinity();
    for (int axis = 0; axis < 2; ++axis) {
        double margin_sum = 0.0;
        for (int upper = 0; upper < 2; ++upper) {
            const auto v = sorted(axis, upper == 1);
            for (std::size_t k = k_lo; k <= k_hi; ++k) {
                margin_sum += rect_margin(group_bb(v, 0, k)) + rect_margin(group_bb(v, k, total));
            }
        }
        if (margin_sum < best_margin) {
            best_margin = margin_sum;
            best_axis = axis;
        }
    }

    // Distribution on that axis: minimum overlap, then minimum area, then the
    // earliest candidate (lower-sort first, smaller k first).
    double best_overlap = std::numeric_limits<double>::infinity();
    double best_area = std::numeric_limits<double>::infinity();
    std::vector<SplitItem> best_order;
    std::size_t best_k = 0;
    for (int upper = 0; upper < 2; ++upper) {
        const auto v = sorted(best_axis, upper == 1);
        for (std::size_t k = k_lo; k <= k_hi; ++k) {
            const Rect b1 = group_bb(v, 0, k);
            const Rect b2 = group_bb(v, k, total);
            const double overlap = rect_overlap_area(b1, b2);
            const double area = rect_area(b1) + rect_area(b2);
            if (overlap < best_overlap || (overlap == best_overlap && area < best_area)) {
                best_overlap = overlap;
                best_area = area;
                best_order = v;
                best_k = k;
            }
        }
    }

    SplitChoice choice;
    for (std::size_t i = 0; i < best_k; ++i) choice.left.push_back(best_order[i].index);
    for (std::size_t i = best_k; i < total; ++i) choice.right.push_back(best_order[i].index);
    return choice;
}

}  // namespace

void RStarBuilder::split_node(std::uint32_t node_id, std::uint32_t& left_out,
                              std::uint32_t& right_out) {
    BuildNode overflow = std::move(nodes_[node_id]);
    std::vector<SplitItem> items;
    if (overflow.leaf) {
        items.reserve(overflow.entries.size());
        for (std::size_t i = 0; i < overflow.entries.size(); ++i)
            items.push_back({point_rect(overflow.entries[i].point), i});
    } else {
        items.reserve(overflow.children.size());
        for (std::size_t i = 0; i < overflow.children.size(); ++i)
            items.push_back({nodes_[overflow.children[i]].mbr, i});
    }

    const SplitChoice choice = rstar_split(std::move(items), cfg_.resolved_min_fill());

    BuildNode left, right;
    left.leaf = right.leaf = overflow.leaf;
    if (overflow.leaf) {
        for (std::size_t i : choice.left) left.entries.push_back(overflow.entries[i]);
        for (std::size_t i : choice.right) right.entries.push_back(overflow.entries[i]);
    } else {
        for (std::size_t i : choice.left) left.children.push_back(overflow.children[i]);
        for (std::size_t i : choice.right) right.children.push_back(overflow.children[i]);
    }

    // Reuse the overflowed slot for the left node; the right one is fresh.
    nodes_[node_id] = std::move(left);
    left_out = node_id;
    recompute_mbr(left_out);
    nodes_.push_back(std::move(right));
    right_out = static_cast<std::uint32_t>(nodes_.size() - 1);
    recompute_mbr(right_out);
}

void RStarBuilder::insert(const LeafEntry& entry) {
    if (!std::isfinite(entry.point.x) || !std::isfinite(entry.point.y))
        throw std::invalid_argument("rstar: non-finite point");
    if (flavor_ == LeafFlavor::visual_annotated &&
        entry.bucket_ids.size() != bucket_ids_per_entry_)
        throw std::invalid_argument("rstar: bucket annotation count mismatch");

    ++entry_count_;
    if (root_ < 0) {
        BuildNode leaf;
        leaf.leaf = true;
        leaf.entries.push_back(entry);
        leaf.mbr = point_rect(entry.point);
        nodes_.push_back(std::move(leaf));
        root_ = 0;
        height_ = 1;
        return;
    }

    const Rect erect = point_rect(entry.point);

    // Descend to a leaf, remembering the path.
    std::vector<std::uint32_t> path;
    std::uint32_t cur = static_cast<std::uint32_t>(root_);
    std::uint32_t depth = 0;
    while (!nodes_[cur].leaf) {
        path.push_back(cur);
        const bool children_are_leaves = depth + 2 == height_;
        cur = choose_subtree_child(nodes_[cur], erect, children_are_leaves);
        ++depth;
    }
    nodes_[cur].entries.push_back(entry);
    nodes_[cur].mbr = nodes_[cur].entries.size() == 1
                          ? erect
                          : rect_union(nodes_[cur].mbr, erect);

    // Walk back up: split overflows, refresh MBRs.
    std::uint32_t child = cur;
    std::int64_t split_left = -1, split_right = -1;
    if (nodes_[cur].entries.size() > cfg_.fan_out) {
        std::uint32_t l, r;
        split_node(cur, l, r);
        split_left = l;
        split_right = r;
    }
    for (auto it = path.rbegin(); it != path.rend(); ++it) {
        BuildNode& parent = nodes_[*it];
        if (split_right >= 0) {
            // `child` was replaced in place by the left half; add the right.
            parent.children.push_back(static_cast<std::uint32_t>(split_right));
            split_left = split_right = -1;
        }
        recompute_mbr(*it);
        if (parent.children.size() > cfg_.fan_out) {
            std::uint32_t l, r;
            split_node(*it, l, r);
            split_left = l;
            split_right = r;
        }
        child = *it;
    }
    (void)child;

    if (split_right >= 0) {
        // Root split: grow the tree by one level.
        BuildNode new_root;
        new_root.leaf = false;
        new_root.children = {static_cast<std::uint32_t>(split_left),
                             static_cast<std::uint32_t>(split_right)};
        nodes_.push_back(std::move(new_root));
        root_ = static_cast<std::int64_t>(nodes_.size() - 1);
        recompute_mbr(static_cast<std::uint32_t>(root_));
        ++height_;
    }
}

RStarBuilder RStarBuilder::from_layout(TreeConfig cfg, LeafFlavor flavor, std::uint32_t bids,
                                       const std::vector<std::vector<LeafEntry>>& leaf_groups,
                                       const std::vector<std::vector<std::size_t>>& internal_groups) {
    RStarBuilder b(cfg, flavor, bids);
    if (leaf_groups.empty()) throw std::invalid_argument("rstar: layout needs at least one leaf");

    std::vector<std::uint32_t> leaf_ids;
    for (const auto& group : leaf_groups) {
        if (group.empty()) throw std::invalid_argument("rstar: empty leaf group in layout");
        if (group.size() > cfg.fan_out)
            throw std::invalid_argument("rstar: layout leaf exceeds fan_out");
        BuildNode leaf;
        leaf.leaf = true;
        leaf.entries = group;
        b.nodes_.push_back(std::move(leaf));
        const auto id = static_cast<std::uint32_t>(b.nodes_.size() - 1);
        b.recompute_mbr(id);
        leaf_ids.push_back(id);
        b.entry_count_ += group.size();
    }

    if (internal_groups.empty()) {
        if (leaf_ids.size() == 1) {
            b.root_ = leaf_ids[0];
            b.height_ = 1;
        } else {
            BuildNode root;
            root.leaf = false;
            root.children = leaf_ids;
            b.nodes_.push_back(std::move(root));
            b.root_ = static_cast<std::int64_t>(b.nodes_.size() - 1);
            b.recompute_mbr(static_cast<std::uint32_t>(b.root_));
            b.height_ = 2;
        }
        return b;
    }

    std::vector<std::uint32_t> internal_ids;
    for (const auto& group : internal_groups) {
        if (group.empty()) throw std::invalid_argument("rstar: empty internal group in layout");
        BuildNode inner;
        inner.leaf = false;
        for (std::size_t leaf_index : group) {
            if (leaf_index >= leaf_ids.size())
                throw std::invalid_argument("rstar: layout references missing leaf");
            inner.children.push_back(leaf_ids[leaf_index]);
        }
        b.nodes_.push_back(std::move(inner));
        const auto id = static_cast<std::uint32_t>(b.nodes_.size() - 1);
        b.recompute_mbr(id);
        internal_ids.push_back(id);
    }
    BuildNode root;
    root.leaf = false;
    root.children = internal_ids;
    b.nodes_.push_back(std::move(root));
    b.root_ = static_cast<std::int64_t>(b.nodes_.size() - 1);
    b.recompute_mbr(static_cast<std::uint32_t>(b.root_));
    b.height_ = 3;
    return b;
}

void RStarBuilder::check_invariants() const {
    if (root_ < 0) return;
    const std::uint32_t m = cfg_.resolved_min_fill();
    // Depth-first audit with depth tracking.
    struct Frame {
        std::uint32_t id;
        std::uint32_t depth;
    };
    std::vector<Frame> stack{{static_cast<std::uint32_t>(root_), 0}};
    while (!stack.empty()) {
        const Frame f = stack.back();
        stack.pop_back();
        const BuildNode& n = nodes_[f.id];
        const bool is_root = f.id == static_cast<std::uint32_t>(root_);
        const std::size_t count = n.leaf ? n.entries.size() : n.children.size();
        if (count > cfg_.fan_out) throw std::runtime_error("rstar: node over fan_out");
        if (!is_root && count < m) throw std::runtime_error("rstar: node under min_fill");
        if (is_root && !n.leaf && count < 2) throw std::runtime_error("rstar: degenerate root");
        if (n.leaf) {
            if (f.depth + 1 != height_) throw std::runtime_error("rstar: leaf at wrong depth");
            Rect r = point_rect(n.entries.at(0).point);
            for (const auto& e : n.entries) r = rect_union(r, point_rect(e.point));
            if (r.lo.x != n.mbr.lo.x || r.lo.y != n.mbr.lo.y || r.hi.x != n.mbr.hi.x ||
                r.hi.y != n.mbr.hi.y)
                throw std::runtime_error("rstar: stale leaf MBR");
        } else {
            Rect r = nodes_[n.children.at(0)].mbr;
            for (std::uint32_t c : n.children) {
                r = rect_union(r, nodes_[c].mbr);
                stack.push_back({c, f.depth + 1});
            }
            if (r.lo.x != n.mbr.lo.x || r.lo.y != n.mbr.lo.y || r.hi.x != n.mbr.hi.x ||
                r.hi.y != n.mbr.hi.y)
                throw std::runtime_error("rstar: stale internal MBR");
        }
    }
}

TreeMeta RStarBuilder::persist(PageStore& store, std::uint32_t node_file,
                               std::uint32_t spatial_file, std::uint32_t visual_file) const {
    if (root_ < 0) throw std::runtime_error("rstar: cannot persist an empty tree");
    if (node_bytes_upper_bound(cfg_, flavor_, bucket_ids_per_entry_) > store.page_size())
        throw std::runtime_error("rstar: node does not fit in one page; lower fan_out");

    // Breadth-first page assignment: the root lands on the first page used.
    std::vector<std::uint32_t> order;
    std::vector<std::int64_t> page_of(nodes_.size(), -1);
    std::deque<std::uint32_t> queue{static_cast<std::uint32_t>(root_)};
    while (!queue.empty()) {
        const std::uint32_t id = queue.front();
        queue.pop_front();
        order.push_back(id);
        if (!nodes_[id].leaf)
            for (std::uint32_t c : nodes_[id].children) queue.push_back(c);
    }
    const std::uint32_t first_page = static_cast<std::uint32_t>(store.file_page_count(node_file));
    for (std::size_t i = 0; i < order.size(); ++i)
        page_of[order[i]] = first_page + static_cast<std::int64_t>(i);

    for (std::uint32_t id : order) {
        const BuildNode& n = nodes_[id];
        std::vector<std::byte> bytes;
        wire::put_u8(bytes, n.leaf ? 0 : 1);
        wire::put_u16(bytes, static_cast<std::uint16_t>(n.leaf ? n.entries.size()
                                                               : n.children.size()));
        wire::put_f64(bytes, n.mbr.lo.x);
        wire::put_f64(bytes, n.mbr.lo.y);
        wire::put_f64(bytes, n.mbr.hi.x);
        wire::put_f64(bytes, n.mbr.hi.y);
        if (n.leaf) {
            for (const auto& e : n.entries) {
                wire::put_u32(bytes, e.ordinal);
                wire::put_f64(bytes, e.point.x);
                wire::put_f64(bytes, e.point.y);
                if (flavor_ == LeafFlavor::visual_annotated) {
                    wire::put_u32(bytes, e.visual.page);
                    wire::put_u32(bytes, e.visual.offset);
                    wire::put_u32(bytes, e.visual.length);
                    for (std::uint32_t b : e.bucket_ids) wire::put_u32(bytes, b);
                } else {
                    wire::put_u32(bytes, e.spatial.page);
                    wire::put_u32(bytes, e.spatial.offset);
                    wire::put_u32(bytes, e.spatial.length);
                    if (flavor_ == LeafFlavor::with_visual) {
                        wire::put_u32(bytes, e.visual.page);
                        wire::put_u32(bytes, e.visual.offset);
                        wire::put_u32(bytes, e.visual.length);
                    }
                }
            }
        } else {
            for (std::uint32_t c : n.children) {
                wire::put_u32(bytes, static_cast<std::uint32_t>(page_of[c]));
                wire::put_f64(bytes, nodes_[c].mbr.lo.x);
                wire::put_f64(bytes, nodes_[c].mbr.lo.y);
                wire::put_f64(bytes, nodes_[c].mbr.hi.x);
                wire::put_f64(bytes, nodes_[c].mbr.hi.y);
            }
        }
        const RecordPointer ptr = store.append(node_file, bytes, Placement::full_page);
        if (ptr.page != page_of[id]) throw std::runtime_error("rstar: page assignment drifted");
    }

    TreeMeta meta;
    meta.node_file = node_file;
    meta.spatial_file = spatial_file;
    meta.visual_file = visual_file;
    meta.flavor = flavor_;
    meta.bucket_ids_per_entry = bucket_ids_per_entry_;
    meta.root_page = static_cast<std::uint32_t>(page_of[root_]);
    meta.root_is_leaf = nodes_[root_].leaf;
    meta.root_mbr = nodes_[root_].mbr;
    meta.height = height_;
    meta.node_count = static_cast<std::uint32_t>(nodes_.size());
    meta.leaf_count = static_cast<std::uint32_t>(leaf_count());
    meta.entry_count = entry_count_;
    return meta;
}

// ---- query side -------------------------------------------------------------

RStarTree::RStarTree(const PageStore* store, TreeMeta meta, bool root_pinned)
    : store_(store), meta_(meta), root_pinned_(root_pinned) {
    if (root_pinned_) {
        const RecordPointer ptr{meta_.node_file, meta_.root_page, 0,
                                store_->page_size()};
        cached_root_ = parse(store_->read(ptr, nullptr));
    }
}

RStarTree::ParsedNode RStarTree::parse(const std::vector<std::byte>& bytes) const {
    wire::Reader r(bytes);
    ParsedNode node;
    node.leaf = r.u8() == 0;
    const std::uint16_t count = r.u16();
    node.mbr.lo.x = r.f64();
    node.mbr.lo.y = r.f64();
    node.mbr.hi.x = r.f64();
    node.mbr.hi.y = r.f64();
    if (node.leaf) {
        node.entries.reserve(count);
        for (std::uint16_t i = 0; i < count; ++i) {
            LeafEntry e;
            e.ordinal = r.u32();
            e.point.x = r.f64();
            e.point.y = r.f64();
            if (meta_.flavor == LeafFlavor::visual_annotated) {
                e.visual = {meta_.visual_file, r.u32(), r.u32(), r.u32()};
                e.bucket_ids.resize(meta_.bucket_ids_per_entry);
                for (auto& b : e.bucket_ids) b = r.u32();
            } else {
                e.spatial = {meta_.spatial_file, r.u32(), r.u32(), r.u32()};
                if (meta_.flavor == LeafFlavor::with_visual)
                    e.visual = {meta_.visual_file, r.u32(), r.u32(), r.u32()};
            }
            node.entries.push_back(std::move(e));
        }
    } else {
        node.children.reserve(count);
        for (std::uint16_t i = 0; i < count; ++i) {
            const std::uint32_t page = r.u32();
            Rect mbr;
            mbr.lo.x = r.f64();
            mbr.lo.y = r.f64();
            mbr.hi.x = r.f64();
            mbr.hi.y = r.f64();
            node.children.emplace_back(page, mbr);
        }
    }
    return node;
}

RStarTree::ParsedNode RStarTree::fetch(std::uint32_t page, QueryContext* ctx) const {
    if (root_pinned_ && page == meta_.root_page) return *cached_root_;
    const RecordPointer ptr{meta_.node_file, page, 0, store_->page_size()};
    return parse(store_->read(ptr, ctx));
}

void RStarTree::range_walk(const ParsedNode& node, std::uint32_t page, std::uint32_t depth,
                           const Rect& rect, QueryContext* ctx, RangeResult& out) const {
    if (node.leaf) {
        out.visited_leaves.push_back(page);
        for (const auto& e : node.entries)
            if (rect_contains(rect, e.point)) out.hits.push_back(e);
        return;
    }
    for (const auto& [child_page, child_mbr] : node.children) {
        if (!rects_intersect(child_mbr, rect)) continue;
        range_walk(fetch(child_page, ctx), child_page, depth + 1, rect, ctx, out);
    }
}

RStarTree::RangeResult RStarTree::range_query(const Rect& rect, QueryContext* ctx) const {
    RangeResult out;
    if (!rects_intersect(meta_.root_mbr, rect)) return out;
    range_walk(fetch(meta_.root_page, ctx), meta_.root_page, 0, rect, ctx, out);
    return out;
}

void RStarTree::leaves_walk(const ParsedNode& node, std::uint32_t depth, const Rect& rect,
                            QueryContext* ctx, std::vector<std::uint32_t>& out) const {
    // `node` is internal here; children at depth+1 are leaves when
    // depth + 2 == height.
    const bool children_are_leaves = depth + 2 == meta_.height;
    for (const auto& [child_page, child_mbr] : node.children) {
        if (!rects_intersect(child_mbr, rect)) continue;
        if (children_are_leaves) {
            out.push_back(child_page);
        } else {
            leaves_walk(fetch(child_page, ctx), depth + 1, rect, ctx, out);
        }
    }
}

std::vector<std::uint32_t> RStarTree::overlapping_leaves(const Rect& rect,
                                                         QueryContext* ctx) const {
    std::vector<std::uint32_t> out;
    if (!rects_intersect(meta_.root_mbr, rect)) return out;
    if (meta_.root_is_leaf) {
        out.push_back(meta_.root_page);
        return out;
    }
    leaves_walk(fetch(meta_.root_page, ctx), 0, rect, ctx, out);
    return out;
}

void RStarTree::leaf_iterate(
    const std::function<void(std::uint32_t, const std::vector<LeafEntry>&)>& fn) const {
    std::vector<std::uint32_t> stack{meta_.root_page};
    std::vector<std::pair<std::uint32_t, std::vector<LeafEntry>>> leaves;
    while (!stack.empty()) {
        const std::uint32_t page = stack.back();
        stack.pop_back();
        const ParsedNode node = fetch(page, nullptr);
        if (node.leaf) {
            leaves.emplace_back(page, node.entries);
        } else {
            for (const auto& [child_page, child_mbr] : node.children) stack.push_back(child_page);
        }
    }
    std::sort(leaves.begin(), leaves.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [page, entries] : leaves) fn(page, entries);
}

}  // namespace svx
