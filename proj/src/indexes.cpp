#include "svx/indexes.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "svx/records.hpp"
#include "wire.hpp"

namespace svx {

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string file_suffix(IndexKind k) {
    switch (k) {
        case IndexKind::di: return "di";
        case IndexKind::aug_rtree: return "aug_rtree";
        case IndexKind::aug_lsh: return "aug_lsh";
        case IndexKind::sfi: return "sfi";
        case IndexKind::vfi: return "vfi";
        case IndexKind::aug_sfi: return "aug_sfi";
        case IndexKind::aug_vfi: return "aug_vfi";
    }
    return "?";
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

BucketKey parse_key(const std::string& s) {
    BucketKey k;
    if (s.empty()) return k;
    for (const auto& tok : split(s, ',')) k.push_back(std::stoll(tok));
    return k;
}

std::string key_to_string(const BucketKey& k) {
    std::string out;
    for (std::size_t i = 0; i < k.size(); ++i) {
        if (i) out.push_back(',');
        out += std::to_string(k[i]);
    }
    return out;
}

}  // namespace

const char* to_string(IndexKind k) {
    switch (k) {
        case IndexKind::di: return "DI";
        case IndexKind::aug_rtree: return "AugRTree";
        case IndexKind::aug_lsh: return "AugLSH";
        case IndexKind::sfi: return "SFI";
        case IndexKind::vfi: return "VFI";
        case IndexKind::aug_sfi: return "AugSFI";
        case IndexKind::aug_vfi: return "AugVFI";
    }
    return "?";
}

IndexKind index_kind_from_string(const std::string& s) {
    for (IndexKind k : kAllIndexKinds)
        if (s == to_string(k)) return k;
    throw std::invalid_argument("unknown index kind: " + s);
}

std::vector<std::uint32_t> intersect_sorted(const std::vector<std::uint32_t>& a,
                                            const std::vector<std::uint32_t>& b) {
    std::vector<std::uint32_t> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

// ---- shared data files ------------------------------------------------------

DataFiles write_dataset(PageStore& store, const Dataset& ds) {
    ds.validate();
    DataFiles data;
    data.spatial_file = store.create_file("spatial", FileKind::data);
    data.visual_file = store.create_file("visual", FileKind::data);
    data.spatial_ptr.reserve(ds.size());
    data.visual_ptr.reserve(ds.size());
    data.ids.reserve(ds.size());
    for (std::uint32_t i = 0; i < ds.size(); ++i) {
        const GeoImage& img = ds.images[i];
        if (img.id.find(',') != std::string::npos || img.id.find(';') != std::string::npos ||
            img.id.find('|') != std::string::npos)
            throw std::invalid_argument("image id contains a separator character: " + img.id);
        data.spatial_ptr.push_back(store.append(
            data.spatial_file, encode_spatial_record({i, img.id, img.s}), Placement::packed));
        data.visual_ptr.push_back(store.append(
            data.visual_file, encode_visual_record({i, img.id, img.v}), Placement::packed));
        data.ids.push_back(img.id);
    }
    return data;
}

void DataFiles::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write data manifest: " + path.string());
    out << "svx-data,v1\n";
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const auto& sp = spatial_ptr[i];
        const auto& vp = visual_ptr[i];
        out << ids[i] << '|' << sp.page << ',' << sp.offset << ',' << sp.length << '|'
            << vp.page << ',' << vp.offset << ',' << vp.length << '\n';
    }
}

DataFiles DataFiles::load(const std::filesystem::path& path, const PageStore& store) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("missing data manifest: " + path.string());
    std::string line;
    std::getline(in, line);
    if (line != "svx-data,v1") throw std::runtime_error("bad data manifest header");
    DataFiles data;
    const int sf = store.find_file("spatial");
    const int vf = store.find_file("visual");
    if (sf < 0 || vf < 0) throw std::runtime_error("store lacks data files");
    data.spatial_file = static_cast<std::uint32_t>(sf);
    data.visual_file = static_cast<std::uint32_t>(vf);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto parts = split(line, '|');
        if (parts.size() != 3) throw std::runtime_error("bad data manifest row");
        const auto sp = split(parts[1], ',');
        const auto vp = split(parts[2], ',');
        data.ids.push_back(parts[0]);
        data.spatial_ptr.push_back({data.spatial_file,
                                    static_cast<std::uint32_t>(std::stoul(sp[0])),
                                    static_cast<std::uint32_t>(std::stoul(sp[1])),
                                    static_cast<std::uint32_t>(std::stoul(sp[2]))});
        data.visual_ptr.push_back({data.visual_file,
                                   static_cast<std::uint32_t>(std::stoul(vp[0])),
                                   static_cast<std::uint32_t>(std::stoul(vp[1])),
                                   static_cast<std::uint32_t>(std::stoul(vp[2]))});
    }
    return data;
}

// ---- build ------------------------------------------------------------------

namespace {

RStarBuilder build_primary_tree(const Dataset& ds, const DataFiles& data,
                                const BuildConfig& cfg, LeafFlavor flavor) {
    auto make_entry = [&](std::uint32_t i) {
        LeafEntry e;
        e.ordinal = i;
        e.point = ds.images[i].s;
        e.spatial = data.spatial_ptr[i];
        e.visual = data.visual_ptr[i];
        return e;
    };
    if (cfg.layout) {
        std::vector<std::vector<LeafEntry>> groups;
        for (const auto& leaf : cfg.layout->leaves) {
            std::vector<LeafEntry> g;
            for (std::uint32_t i : leaf) g.push_back(make_entry(i));
            groups.push_back(std::move(g));
        }
        return RStarBuilder::from_layout(cfg.tree, flavor, 0, groups,
                                         cfg.layout->internal_groups);
    }
    RStarBuilder b(cfg.tree, flavor);
    for (std::uint32_t i = 0; i < ds.size(); ++i) b.insert(make_entry(i));
    return b;
}

}  // namespace

SpatialVisualIndex SpatialVisualIndex::build(IndexKind kind, const Dataset& ds,
                                             PageStore& store, const DataFiles& data,
                                             const BuildConfig& cfg) {
    if (ds.size() == 0) throw std::invalid_argument("build: empty dataset");
    ds.validate();
    if (data.ids.size() != ds.size()) throw std::invalid_argument("build: data files mismatch");

    SpatialVisualIndex idx;
    idx.kind_ = kind;
    idx.store_ = &store;
    idx.cfg_ = cfg;
    idx.cfg_.lsh.dim = ds.dim;
    if (cfg.hash_override) {
        idx.family_ = cfg.hash_override;
    } else {
        idx.family_ = std::make_shared<const HashFamily>(HashFamily::derive(idx.cfg_.lsh));
    }
    idx.data_ = data;
    const HashFamily& fam = *idx.family_;
    const std::string suffix = file_suffix(kind);

    const bool wants_nodes = kind != IndexKind::aug_lsh;
    const bool wants_buckets = kind != IndexKind::aug_rtree;
    if (wants_nodes) idx.node_file_ = store.create_file("nodes_" + suffix, FileKind::rtree_nodes);
    if (wants_buckets)
        idx.bucket_file_ = store.create_file("buckets_" + suffix, FileKind::lsh_buckets);

    switch (kind) {
        case IndexKind::di:
        case IndexKind::aug_rtree:
        case IndexKind::sfi:
        case IndexKind::aug_sfi: {
            const LeafFlavor flavor = kind == IndexKind::aug_rtree ? LeafFlavor::with_visual
                                                                   : LeafFlavor::spatial_only;
            RStarBuilder b = build_primary_tree(ds, data, cfg, flavor);
            idx.primary_tree_meta_ =
                b.persist(store, idx.node_file_, data.spatial_file, data.visual_file);
            idx.primary_tree_.emplace(&store, *idx.primary_tree_meta_, /*root_pinned=*/true);
            break;
        }
        default: break;
    }

    switch (kind) {
        case IndexKind::di: {
            LshBuilder lb(&fam, BucketFlavor::plain);
            for (std::uint32_t i = 0; i < ds.size(); ++i)
                lb.insert(i, ds.images[i].v, data.visual_ptr[i]);
            idx.primary_lsh_meta_ =
                lb.persist(store, idx.bucket_file_, data.visual_file, data.spatial_file);
            idx.primary_lsh_.emplace(&store, idx.family_.get(), *idx.primary_lsh_meta_);
            break;
        }
        case IndexKind::aug_rtree:
            break;  // tree only
        case IndexKind::aug_lsh: {
            LshBuilder lb(&fam, BucketFlavor::with_spatial_ptr);
            for (std::uint32_t i = 0; i < ds.size(); ++i)
                lb.insert(i, ds.images[i].v, data.visual_ptr[i], data.spatial_ptr[i]);
            idx.primary_lsh_meta_ =
                lb.persist(store, idx.bucket_file_, data.visual_file, data.spatial_file);
            idx.primary_lsh_.emplace(&store, idx.family_.get(), *idx.primary_lsh_meta_);
            break;
        }
        case IndexKind::sfi:
        case IndexKind::aug_sfi: {
            const BucketFlavor flavor = kind == IndexKind::sfi ? BucketFlavor::plain
                                                               : BucketFlavor::with_point;
            idx.primary_tree_->leaf_iterate([&](std::uint32_t leaf_page,
                                                const std::vector<LeafEntry>& entries) {
                LshBuilder lb(&fam, flavor);
                for (const auto& e : entries)
                    lb.insert(e.ordinal, ds.images[e.ordinal].v, data.visual_ptr[e.ordinal],
                              data.spatial_ptr[e.ordinal], ds.images[e.ordinal].s);
                idx.leaf_lsh_metas_.emplace(
                    leaf_page,
                    lb.persist(store, idx.bucket_file_, data.visual_file, data.spatial_file));
            });
            for (const auto& [leaf, meta] : idx.leaf_lsh_metas_)
                idx.leaf_lshs_.emplace(leaf, LshIndex(&store, idx.family_.get(), meta));
            break;
        }
        case IndexKind::vfi: {
            LshBuilder lb(&fam, BucketFlavor::plain);
            for (std::uint32_t i = 0; i < ds.size(); ++i)
                lb.insert(i, ds.images[i].v, data.visual_ptr[i]);
            idx.primary_lsh_meta_ =
                lb.persist(store, idx.bucket_file_, data.visual_file, data.spatial_file);
            idx.primary_lsh_.emplace(&store, idx.family_.get(), *idx.primary_lsh_meta_);

            // Secondary trees, keyed by bucket-directory ordinal: one per
            // table-1 bucket, or one per bucket of every table when duplicated.
            std::map<std::uint32_t, std::vector<std::uint32_t>> groups;
            const auto& dir = idx.primary_lsh_meta_->directory;
            for (std::uint32_t i = 0; i < ds.size(); ++i) {
                if (cfg.duplicate_vfi_trees) {
                    for (std::uint32_t t = 0; t < fam.tables(); ++t)
                        groups[dir.at(TableKey{t, fam.key(t, ds.images[i].v)}).ordinal]
                            .push_back(i);
                } else {
                    groups[dir.at(TableKey{0, fam.key(0, ds.images[i].v)}).ordinal].push_back(i);
                }
            }
            for (const auto& [ordinal, members] : groups) {
                RStarBuilder tb(cfg.tree, LeafFlavor::spatial_only);
                for (std::uint32_t i : members) {
                    LeafEntry e;
                    e.ordinal = i;
                    e.point = ds.images[i].s;
                    e.spatial = data.spatial_ptr[i];
                    tb.insert(e);
                }
                idx.tree_metas_.emplace(
                    ordinal, tb.persist(store, idx.node_file_, data.spatial_file,
                                        data.visual_file));
            }
            for (const auto& [ordinal, meta] : idx.tree_metas_)
                idx.secondary_trees_.emplace(ordinal, RStarTree(&store, meta, false));
            break;
        }
        case IndexKind::aug_vfi: {
            // Bucket structure is computed in memory: the primary keeps no
            // per-entry bucket contents, only routing lists for tables >= 2.
            std::vector<std::vector<BucketKey>> keys(ds.size());
            std::map<TableKey, std::vector<std::uint32_t>> members;
            for (std::uint32_t i = 0; i < ds.size(); ++i) {
                keys[i].reserve(fam.tables());
                for (std::uint32_t t = 0; t < fam.tables(); ++t) {
                    keys[i].push_back(fam.key(t, ds.images[i].v));
                    members[TableKey{t, keys[i][t]}].push_back(i);
                }
            }
            std::uint32_t next = 0;
            for (const auto& [tk, m] : members) idx.bucket_dir_.emplace(tk, next++);

            std::vector<std::vector<std::uint32_t>> anno(ds.size());
            for (std::uint32_t i = 0; i < ds.size(); ++i)
                for (std::uint32_t t = 0; t < fam.tables(); ++t)
                    anno[i].push_back(idx.bucket_dir_.at(TableKey{t, keys[i][t]}));

            std::map<std::uint32_t, std::vector<std::uint32_t>> groups;
            for (std::uint32_t i = 0; i < ds.size(); ++i) {
                if (cfg.duplicate_vfi_trees) {
                    for (std::uint32_t t = 0; t < fam.tables(); ++t)
                        groups[anno[i][t]].push_back(i);
                } else {
                    groups[anno[i][0]].push_back(i);
                }
            }
            for (const auto& [ordinal, group] : groups) {
                RStarBuilder tb(cfg.tree, LeafFlavor::visual_annotated, fam.tables());
                for (std::uint32_t i : group) {
                    LeafEntry e;
                    e.ordinal = i;
                    e.point = ds.images[i].s;
                    e.visual = data.visual_ptr[i];
                    e.bucket_ids = anno[i];
                    tb.insert(e);
                }
                idx.tree_metas_.emplace(
                    ordinal, tb.persist(store, idx.node_file_, data.spatial_file,
                                        data.visual_file));
            }
            for (const auto& [ordinal, meta] : idx.tree_metas_)
                idx.secondary_trees_.emplace(ordinal, RStarTree(&store, meta, false));

            if (!cfg.duplicate_vfi_trees) {
                for (const auto& [tk, m] : members) {
                    if (tk.table == 0) continue;
                    std::set<std::uint32_t> targets;
                    for (std::uint32_t i : m) targets.insert(anno[i][0]);
                    std::vector<std::byte> bytes;
                    wire::put_u32(bytes, static_cast<std::uint32_t>(targets.size()));
                    for (std::uint32_t tgt : targets) wire::put_u32(bytes, tgt);
                    const std::uint32_t probed = idx.bucket_dir_.at(tk);
                    idx.routing_ptrs_[probed] =
                        store.append(idx.bucket_file_, bytes, Placement::page_aligned);
                    idx.routing_[probed] =
                        std::vector<std::uint32_t>(targets.begin(), targets.end());
                }
            }
            break;
        }
        default: break;
    }
    return idx;
}

// ---- queries ----------------------------------------------------------------

QueryOutcome SpatialVisualIndex::finalize(
    QueryContext& ctx, std::vector<std::uint32_t> result,
    std::vector<std::pair<std::string, std::size_t>> intermediates) const {
    QueryOutcome out;
    out.result = std::move(result);
    out.stats.pages_rtree = ctx.ledger.pages_rtree();
    out.stats.pages_lsh = ctx.ledger.pages_lsh();
    out.stats.pages_data = ctx.ledger.pages_data();
    out.stats.simulated_time = query_cost(ctx.ledger, store_->config());
    out.stats.intermediate_sizes = std::move(intermediates);
    out.trace = std::move(ctx.trace);
    return out;
}

QueryOutcome SpatialVisualIndex::query(const SpatialVisualRangeQuery& q) const {
    if (q.query_vector.size() != family_->dim())
        throw std::invalid_argument("query: vector dimension mismatch");
    if (q.sigma < 0.0) throw std::invalid_argument("query: sigma must be >= 0");
    if (q.explore_spatial < 0.0) throw std::invalid_argument("query: explore_spatial < 0");
    if (q.explore_visual < 0) throw std::invalid_argument("query: explore_visual < 0");
    if (!rect_is_valid(q.spatial)) throw std::invalid_argument("query: malformed rectangle");
    switch (kind_) {
        case IndexKind::di: return query_di(q);
        case IndexKind::aug_rtree: return query_aug_rtree(q);
        case IndexKind::aug_lsh: return query_aug_lsh(q);
        case IndexKind::sfi: return query_sfi(q);
        case IndexKind::vfi: return query_vfi(q);
        case IndexKind::aug_sfi: return query_aug_sfi(q);
        case IndexKind::aug_vfi: return query_aug_vfi(q);
    }
    throw std::logic_error("query: bad kind");
}

QueryOutcome SpatialVisualIndex::query_di(const SpatialVisualRangeQuery& q) const {
    QueryContext ctx;
    const auto rr = primary_tree_->range_query(q.spatial, &ctx);
    std::vector<std::uint32_t> spatial;
    spatial.reserve(rr.hits.size());
    for (const auto& e : rr.hits) spatial.push_back(e.ordinal);
    std::sort(spatial.begin(), spatial.end());

    const auto visual = primary_lsh_->similarity_query(q.query_vector, q.sigma, &ctx);

    return finalize(ctx, intersect_sorted(spatial, visual),
                    {{"spatial", spatial.size()}, {"visual", visual.size()}});
}

QueryOutcome SpatialVisualIndex::query_aug_rtree(const SpatialVisualRangeQuery& q) const {
    QueryContext ctx;
    auto rr = primary_tree_->range_query(q.spatial, &ctx);
    std::sort(rr.hits.begin(), rr.hits.end(),
              [](const LeafEntry& a, const LeafEntry& b) { return a.ordinal < b.ordinal; });
    std::vector<std::uint32_t> result;
    for (const auto& e : rr.hits) {
        const auto vec = load_visual_vector(*store_, e.visual, &ctx);
        if (euclidean_distance(vec, q.query_vector) <= q.sigma) result.push_back(e.ordinal);
    }
    return finalize(ctx, std::move(result), {{"spatial", rr.hits.size()}});
}

QueryOutcome SpatialVisualIndex::query_aug_lsh(const SpatialVisualRangeQuery& q) const {
    QueryContext ctx;
    const auto cands = primary_lsh_->candidate_set(q.query_vector, &ctx);
    std::vector<BucketEntry> passing;
    for (const auto& e : cands) {
        const auto vec = load_visual_vector(*store_, e.visual, &ctx);
        if (euclidean_distance(vec, q.query_vector) <= q.sigma) passing.push_back(e);
    }
    std::vector<std::uint32_t> result;
    for (const auto& e : passing) {
        const Point2 p = load_spatial_point(*store_, e.spatial, &ctx);
        if (rect_contains(q.spatial, p)) result.push_back(e.ordinal);
    }
    return finalize(ctx, std::move(result),
                    {{"candidates", cands.size()}, {"visual", passing.size()}});
}

QueryOutcome SpatialVisualIndex::query_sfi(const SpatialVisualRangeQuery& q) const {
    QueryContext ctx;
    const auto rr = primary_tree_->range_query(q.spatial, &ctx);
    std::vector<std::uint32_t> spatial;
    for (const auto& e : rr.hits) spatial.push_back(e.ordinal);
    std::sort(spatial.begin(), spatial.end());

    std::vector<std::uint32_t> leaves = rr.visited_leaves;
    std::sort(leaves.begin(), leaves.end());
    std::vector<std::uint32_t> visual;
    std::size_t candidate_total = 0;
    for (std::uint32_t leaf : leaves) {
        const LshIndex& sec = leaf_lshs_.at(leaf);
        for (const auto& e : sec.candidate_set(q.query_vector, &ctx)) {
            ++candidate_total;
            const auto vec = load_visual_vector(*store_, e.visual, &ctx);
            if (euclidean_distance(vec, q.query_vector) <= q.sigma) visual.push_back(e.ordinal);
        }
    }
    std::sort(visual.begin(), visual.end());

    return finalize(ctx, intersect_sorted(spatial, visual),
                    {{"spatial", spatial.size()},
                     {"visual_candidates", candidate_total},
                     {"visual", visual.size()}});
}

QueryOutcome SpatialVisualIndex::query_vfi(const SpatialVisualRangeQuery& q) const {
    QueryContext ctx;
    const auto cands = primary_lsh_->candidate_set(q.query_vector, &ctx);
    const auto& dir = primary_lsh_meta_->directory;

    std::vector<std::uint32_t> visual;
    std::set<std::uint32_t> tree_set;
    if (cfg_.duplicate_vfi_trees) {
        for (const auto& tk : primary_lsh_->probe_keys(q.query_vector)) {
            const auto it = dir.find(tk);
            if (it != dir.end()) tree_set.insert(it->second.ordinal);
        }
    }
    for (const auto& e : cands) {
        const auto vec = load_visual_vector(*store_, e.visual, &ctx);
        if (!cfg_.duplicate_vfi_trees) {
            // Spatial check routes through the table-1 bucket of the entry.
            tree_set.insert(dir.at(TableKey{0, family_->key(0, vec)}).ordinal);
        }
        if (euclidean_distance(vec, q.query_vector) <= q.sigma) visual.push_back(e.ordinal);
    }
    std::sort(visual.begin(), visual.end());

    std::vector<std::uint32_t> spatial;
    for (std::uint32_t ordinal : tree_set) {
        const auto rr = secondary_trees_.at(ordinal).range_query(q.spatial, &ctx);
        for (const auto& e : rr.hits) spatial.push_back(e.ordinal);
    }
    std::sort(spatial.begin(), spatial.end());
    spatial.erase(std::unique(spatial.begin(), spatial.end()), spatial.end());

    return finalize(ctx, intersect_sorted(visual, spatial),
                    {{"candidates", cands.size()},
                     {"visual", visual.size()},
                     {"trees", tree_set.size()},
                     {"spatial", spatial.size()}});
}

QueryOutcome SpatialVisualIndex::query_aug_sfi(const SpatialVisualRangeQuery& q) const {
    QueryContext ctx;
    std::vector<std::uint32_t> leaves = primary_tree_->overlapping_leaves(q.spatial, &ctx);
    std::sort(leaves.begin(), leaves.end());

    std::vector<std::uint32_t> result;
    std::size_t candidate_total = 0;
    std::size_t in_rect = 0;
    for (std::uint32_t leaf : leaves) {
        const LshIndex& sec = leaf_lshs_.at(leaf);
        std::vector<std::vector<double>> probes;
        if (q.explore_visual > 0)
            probes = sample_in_ball(q.query_vector, q.sigma, q.explore_visual,
                                    mix_seed(q.seed, leaf));
        for (const auto& e : sec.candidate_set(q.query_vector, &ctx, probes)) {
            ++candidate_total;
            // Bucket entries carry the location inline: spatial filter first,
            // then the exact visual check on survivors only.
            if (!rect_contains(q.spatial, e.point)) continue;
            ++in_rect;
            const auto vec = load_visual_vector(*store_, e.visual, &ctx);
            if (euclidean_distance(vec, q.query_vector) <= q.sigma) result.push_back(e.ordinal);
        }
    }
    std::sort(result.begin(), result.end());

    return finalize(ctx, std::move(result),
                    {{"leaves", leaves.size()},
                     {"candidates", candidate_total},
                     {"spatial_pass", in_rect}});
}

QueryOutcome SpatialVisualIndex::query_aug_vfi(const SpatialVisualRangeQuery& q) const {
    QueryContext ctx;
    // Hashing alone selects the secondary trees; primary buckets stay unread.
    const std::uint32_t tables = family_->tables();
    std::vector<std::uint32_t> probe_ord(tables, UINT32_MAX);
    for (std::uint32_t t = 0; t < tables; ++t) {
        const auto it = bucket_dir_.find(TableKey{t, family_->key(t, q.query_vector)});
        if (it != bucket_dir_.end()) probe_ord[t] = it->second;
    }
    std::set<std::uint32_t> tree_set;
    if (cfg_.duplicate_vfi_trees) {
        for (std::uint32_t t = 0; t < tables; ++t)
            if (probe_ord[t] != UINT32_MAX) tree_set.insert(probe_ord[t]);
    } else {
        if (probe_ord[0] != UINT32_MAX) tree_set.insert(probe_ord[0]);
        for (std::uint32_t t = 1; t < tables; ++t) {
            if (probe_ord[t] == UINT32_MAX) continue;
            const auto it = routing_.find(probe_ord[t]);
            if (it == routing_.end()) continue;
            tree_set.insert(it->second.begin(), it->second.end());
        }
    }

    const Rect effective = expand_rect(q.spatial, q.explore_spatial);
    std::vector<std::uint32_t> result;
    std::set<std::uint32_t> seen;
    std::size_t in_rect = 0;
    std::size_t rechecked = 0;
    for (std::uint32_t ordinal : tree_set) {
        const auto rr = secondary_trees_.at(ordinal).range_query(effective, &ctx);
        for (const auto& e : rr.hits) {
            ++in_rect;
            // Candidacy recheck from the leaf annotations: the entry must share
            // a probed bucket with the query in some table.
            bool candidate = false;
            for (std::uint32_t t = 0; t < tables; ++t) {
                if (probe_ord[t] != UINT32_MAX && e.bucket_ids[t] == probe_ord[t]) {
                    candidate = true;
                    break;
                }
            }
            if (!candidate) continue;
            ++rechecked;
            if (!seen.insert(e.ordinal).second) continue;
            const auto vec = load_visual_vector(*store_, e.visual, &ctx);
            if (euclidean_distance(vec, q.query_vector) <= q.sigma) result.push_back(e.ordinal);
        }
    }
    std::sort(result.begin(), result.end());

    return finalize(ctx, std::move(result),
                    {{"trees", tree_set.size()},
                     {"spatial", in_rect},
                     {"candidates", rechecked}});
}

// ---- persistence ------------------------------------------------------------

namespace {

std::string tree_meta_line(const TreeMeta& m) {
    std::ostringstream out;
    out << m.root_page << ' ' << (m.root_is_leaf ? 1 : 0) << ' ' << fmt_double(m.root_mbr.lo.x)
        << ' ' << fmt_double(m.root_mbr.lo.y) << ' ' << fmt_double(m.root_mbr.hi.x) << ' '
        << fmt_double(m.root_mbr.hi.y) << ' ' << m.height << ' ' << m.node_count << ' '
        << m.leaf_count << ' ' << m.entry_count << ' ' << static_cast<int>(m.flavor) << ' '
        << m.bucket_ids_per_entry;
    return out.str();
}

TreeMeta parse_tree_meta(const std::string& line, std::uint32_t node_file,
                         std::uint32_t spatial_file, std::uint32_t visual_file) {
    std::istringstream in(line);
    TreeMeta m;
    int leaf = 0, flavor = 0;
    in >> m.root_page >> leaf >> m.root_mbr.lo.x >> m.root_mbr.lo.y >> m.root_mbr.hi.x >>
        m.root_mbr.hi.y >> m.height >> m.node_count >> m.leaf_count >> m.entry_count >> flavor >>
        m.bucket_ids_per_entry;
    if (!in) throw std::runtime_error("bad tree meta line in manifest");
    m.root_is_leaf = leaf == 1;
    m.flavor = static_cast<LeafFlavor>(flavor);
    m.node_file = node_file;
    m.spatial_file = spatial_file;
    m.visual_file = visual_file;
    return m;
}

std::string bucket_ref_line(const TableKey& tk, const BucketRef& ref) {
    std::ostringstream out;
    out << tk.table << '|' << key_to_string(tk.key) << '|' << ref.ptr.page << '|'
        << ref.ptr.offset << '|' << ref.ptr.length << '|' << ref.ordinal << '|' << ref.entries;
    return out.str();
}

}  // namespace

void SpatialVisualIndex::save_manifest(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write index manifest: " + path.string());
    out << "svx-index,v1\n";
    out << "kind=" << to_string(kind_) << "\n";
    out << "fan_out=" << cfg_.tree.fan_out << "\n";
    out << "min_fill=" << cfg_.tree.min_fill << "\n";
    out << "lsh_tables=" << cfg_.lsh.tables << "\n";
    out << "lsh_functions=" << cfg_.lsh.functions << "\n";
    out << "lsh_width=" << fmt_double(cfg_.lsh.width) << "\n";
    out << "lsh_seed=" << cfg_.lsh.seed << "\n";
    out << "lsh_dim=" << cfg_.lsh.dim << "\n";
    out << "duplicate_vfi_trees=" << (cfg_.duplicate_vfi_trees ? 1 : 0) << "\n";
    if (cfg_.hash_override)
        throw std::runtime_error("indexes with explicit hash functions cannot be persisted");
    if (has_node_file()) out << "node_file=" << store_->file_name(node_file_) << "\n";
    if (has_bucket_file()) out << "bucket_file=" << store_->file_name(bucket_file_) << "\n";
    if (primary_tree_meta_) out << "ptree=" << tree_meta_line(*primary_tree_meta_) << "\n";
    if (primary_lsh_meta_) {
        out << "plsh_flavor=" << static_cast<int>(primary_lsh_meta_->flavor) << "\n";
        for (const auto& [tk, ref] : primary_lsh_meta_->directory)
            out << "bucket=" << bucket_ref_line(tk, ref) << "\n";
    }
    for (const auto& [leaf, meta] : leaf_lsh_metas_) {
        out << "leaflsh=" << leaf << '|' << static_cast<int>(meta.flavor) << "\n";
        for (const auto& [tk, ref] : meta.directory)
            out << "leafbucket=" << leaf << '|' << bucket_ref_line(tk, ref) << "\n";
    }
    for (const auto& [ordinal, meta] : tree_metas_)
        out << "stree=" << ordinal << '|' << tree_meta_line(meta) << "\n";
    for (const auto& [tk, ordinal] : bucket_dir_)
        out << "dir=" << tk.table << '|' << key_to_string(tk.key) << '|' << ordinal << "\n";
    for (const auto& [probed, targets] : routing_) {
        const auto& ptr = routing_ptrs_.at(probed);
        out << "routing=" << probed << '|';
        for (std::size_t i = 0; i < targets.size(); ++i)
            out << (i ? "," : "") << targets[i];
        out << '|' << ptr.page << '|' << ptr.offset << '|' << ptr.length << "\n";
    }
}

SpatialVisualIndex SpatialVisualIndex::open(const std::filesystem::path& path,
                                            const PageStore& store, const DataFiles& data) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("missing index manifest: " + path.string());
    std::string line;
    std::getline(in, line);
    if (line != "svx-index,v1") throw std::runtime_error("bad index manifest header");

    SpatialVisualIndex idx;
    idx.store_ = &store;
    idx.data_ = data;

    std::string node_file_name, bucket_file_name, ptree_line;
    int plsh_flavor = -1;
    std::vector<std::string> bucket_lines, leaflsh_lines, leafbucket_lines, stree_lines,
        dir_lines, routing_lines;

    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw std::runtime_error("bad manifest line: " + line);
        const std::string k = line.substr(0, eq);
        const std::string v = line.substr(eq + 1);
        if (k == "kind") idx.kind_ = index_kind_from_string(v);
        else if (k == "fan_out") idx.cfg_.tree.fan_out = std::stoul(v);
        else if (k == "min_fill") idx.cfg_.tree.min_fill = std::stoul(v);
        else if (k == "lsh_tables") idx.cfg_.lsh.tables = std::stoi(v);
        else if (k == "lsh_functions") idx.cfg_.lsh.functions = std::stoi(v);
        else if (k == "lsh_width") idx.cfg_.lsh.width = std::stod(v);
        else if (k == "lsh_seed") idx.cfg_.lsh.seed = std::stoull(v);
        else if (k == "lsh_dim") idx.cfg_.lsh.dim = std::stoi(v);
        else if (k == "duplicate_vfi_trees") idx.cfg_.duplicate_vfi_trees = v == "1";
        else if (k == "node_file") node_file_name = v;
        else if (k == "bucket_file") bucket_file_name = v;
        else if (k == "ptree") ptree_line = v;
        else if (k == "plsh_flavor") plsh_flavor = std::stoi(v);
        else if (k == "bucket") bucket_lines.push_back(v);
        else if (k == "leaflsh") leaflsh_lines.push_back(v);
        else if (k == "leafbucket") leafbucket_lines.push_back(v);
        else if (k == "stree") stree_lines.push_back(v);
        else if (k == "dir") dir_lines.push_back(v);
        else if (k == "routing") routing_lines.push_back(v);
        else throw std::runtime_error("unknown manifest key: " + k);
    }

    idx.cfg_.page = store.config();
    idx.family_ = std::make_shared<const HashFamily>(HashFamily::derive(idx.cfg_.lsh));

    if (!node_file_name.empty()) {
        const int id = store.find_file(node_file_name);
        if (id < 0) throw std::runtime_error("store lacks node file " + node_file_name);
        idx.node_file_ = static_cast<std::uint32_t>(id);
    }
    if (!bucket_file_name.empty()) {
        const int id = store.find_file(bucket_file_name);
        if (id < 0) throw std::runtime_error("store lacks bucket file " + bucket_file_name);
        idx.bucket_file_ = static_cast<std::uint32_t>(id);
    }

    if (!ptree_line.empty())
        idx.primary_tree_meta_ =
            parse_tree_meta(ptree_line, idx.node_file_, data.spatial_file, data.visual_file);

    auto parse_bucket_ref = [&](const std::vector<std::string>& parts, std::size_t at,
                                std::uint32_t file) {
        TableKey tk;
        tk.table = static_cast<std::uint32_t>(std::stoul(parts[at]));
        tk.key = parse_key(parts[at + 1]);
        BucketRef ref;
        ref.ptr = {file, static_cast<std::uint32_t>(std::stoul(parts[at + 2])),
                   static_cast<std::uint32_t>(std::stoul(parts[at + 3])),
                   static_cast<std::uint32_t>(std::stoul(parts[at + 4]))};
        ref.ordinal = static_cast<std::uint32_t>(std::stoul(parts[at + 5]));
        ref.entries = static_cast<std::uint32_t>(std::stoul(parts[at + 6]));
        return std::make_pair(tk, ref);
    };

    if (plsh_flavor >= 0) {
        LshMeta meta;
        meta.bucket_file = idx.bucket_file_;
        meta.visual_file = data.visual_file;
        meta.spatial_file = data.spatial_file;
        meta.flavor = static_cast<BucketFlavor>(plsh_flavor);
        for (const auto& bl : bucket_lines) {
            const auto parts = split(bl, '|');
            if (parts.size() != 7) throw std::runtime_error("bad bucket line");
            meta.directory.insert(parse_bucket_ref(parts, 0, idx.bucket_file_));
        }
        idx.primary_lsh_meta_ = std::move(meta);
    }

    for (const auto& ll : leaflsh_lines) {
        const auto parts = split(ll, '|');
        if (parts.size() != 2) throw std::runtime_error("bad leaflsh line");
        LshMeta meta;
        meta.bucket_file = idx.bucket_file_;
        meta.visual_file = data.visual_file;
        meta.spatial_file = data.spatial_file;
        meta.flavor = static_cast<BucketFlavor>(std::stoi(parts[1]));
        idx.leaf_lsh_metas_.emplace(static_cast<std::uint32_t>(std::stoul(parts[0])),
                                    std::move(meta));
    }
    for (const auto& lb : leafbucket_lines) {
        const auto parts = split(lb, '|');
        if (parts.size() != 8) throw std::runtime_error("bad leafbucket line");
        const auto leaf = static_cast<std::uint32_t>(std::stoul(parts[0]));
        idx.leaf_lsh_metas_.at(leaf).directory.insert(
            parse_bucket_ref(parts, 1, idx.bucket_file_));
    }

    for (const auto& sl : stree_lines) {
        const auto bar = sl.find('|');
        if (bar == std::string::npos) throw std::runtime_error("bad stree line");
        const auto ordinal = static_cast<std::uint32_t>(std::stoul(sl.substr(0, bar)));
        idx.tree_metas_.emplace(ordinal, parse_tree_meta(sl.substr(bar + 1), idx.node_file_,
                                                         data.spatial_file, data.visual_file));
    }
    for (const auto& dl : dir_lines) {
        const auto parts = split(dl, '|');
        if (parts.size() != 3) throw std::runtime_error("bad dir line");
        idx.bucket_dir_.emplace(
            TableKey{static_cast<std::uint32_t>(std::stoul(parts[0])), parse_key(parts[1])},
            static_cast<std::uint32_t>(std::stoul(parts[2])));
    }
    for (const auto& rl : routing_lines) {
        const auto parts = split(rl, '|');
        if (parts.size() != 5) throw std::runtime_error("bad routing line");
        const auto probed = static_cast<std::uint32_t>(std::stoul(parts[0]));
        std::vector<std::uint32_t> targets;
        if (!parts[1].empty())
            for (const auto& tok : split(parts[1], ','))
                targets.push_back(static_cast<std::uint32_t>(std::stoul(tok)));
        idx.routing_.emplace(probed, std::move(targets));
        idx.routing_ptrs_[probed] = {idx.bucket_file_,
                                     static_cast<std::uint32_t>(std::stoul(parts[2])),
                                     static_cast<std::uint32_t>(std::stoul(parts[3])),
                                     static_cast<std::uint32_t>(std::stoul(parts[4]))};
    }

    idx.finish_open();
    return idx;
}

void SpatialVisualIndex::finish_open() {
    if (primary_tree_meta_) primary_tree_.emplace(store_, *primary_tree_meta_, true);
    if (primary_lsh_meta_) primary_lsh_.emplace(store_, family_.get(), *primary_lsh_meta_);
    for (const auto& [leaf, meta] : leaf_lsh_metas_)
        leaf_lshs_.emplace(leaf, LshIndex(store_, family_.get(), meta));
    for (const auto& [ordinal, meta] : tree_metas_)
        secondary_trees_.emplace(ordinal, RStarTree(store_, meta, false));
}

}  // namespace svx
