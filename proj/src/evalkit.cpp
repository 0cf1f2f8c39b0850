#include "svx/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace svx {

GroundTruth oracle_query(const Dataset& ds, const SpatialVisualRangeQuery& q, double es_max) {
    if (static_cast<int>(q.query_vector.size()) != ds.dim)
        throw std::invalid_argument("oracle: query dimension mismatch");
    const Rect wide = expand_rect(q.spatial, es_max);
    GroundTruth truth;
    for (std::uint32_t i = 0; i < ds.size(); ++i) {
        const GeoImage& img = ds.images[i];
        if (euclidean_distance(img.v, q.query_vector) > q.sigma) continue;
        if (rect_contains(q.spatial, img.s)) truth.strict.push_back(i);
        if (rect_contains(wide, img.s)) truth.extended.push_back(i);
    }
    return truth;
}

bool lsh_visible(const HashFamily& family, std::span<const double> v,
                 std::span<const double> q) {
    for (std::uint32_t t = 0; t < family.tables(); ++t)
        if (family.key(t, v) == family.key(t, q)) return true;
    return false;
}

ResultClass classify(std::uint32_t ordinal, const Dataset& ds,
                     const SpatialVisualRangeQuery& q, const GroundTruth& truth,
                     bool visible) {
    if (!std::binary_search(truth.extended.begin(), truth.extended.end(), ordinal))
        throw std::invalid_argument("classify: image " + std::to_string(ordinal) +
                                    " is not relevant to this query");
    const bool inside = rect_contains(q.spatial, ds.images[ordinal].s);
    if (!inside) return ResultClass::s_unmatch_rel;
    return visible ? ResultClass::sv_match_rel : ResultClass::v_unmatch_rel;
}

QueryEval evaluate_result(const Dataset& ds, const SpatialVisualRangeQuery& q,
                          const GroundTruth& truth, const std::vector<std::uint32_t>& result,
                          const HashFamily& family, double effective_es) {
    QueryEval eval;
    if (truth.strict.empty()) {
        eval.recall = std::numeric_limits<double>::quiet_NaN();
    } else {
        const auto hit = intersect_sorted(result, truth.strict);
        eval.recall = static_cast<double>(hit.size()) / static_cast<double>(truth.strict.size());
    }

    const Rect effective = expand_rect(q.spatial, effective_es);
    std::size_t correct = 0;
    for (std::uint32_t r : result) {
        const GeoImage& img = ds.images[r];
        const bool ok = rect_contains(effective, img.s) &&
                        euclidean_distance(img.v, q.query_vector) <= q.sigma;
        if (ok) ++correct;
        if (!std::binary_search(truth.extended.begin(), truth.extended.end(), r)) continue;
        switch (classify(r, ds, q, truth, lsh_visible(family, img.v, q.query_vector))) {
            case ResultClass::sv_match_rel: ++eval.sv_match; break;
            case ResultClass::s_unmatch_rel: ++eval.s_unmatch; break;
            case ResultClass::v_unmatch_rel: ++eval.v_unmatch; break;
        }
    }
    eval.precision = result.empty() ? 1.0
                                    : static_cast<double>(correct) /
                                          static_cast<double>(result.size());
    return eval;
}

namespace {

std::size_t pages_of(std::uint32_t bytes, std::uint32_t page_size) {
    return (static_cast<std::size_t>(bytes) + page_size - 1) / page_size;
}

std::size_t record_span_pages(const std::vector<RecordPointer>& ptrs, std::uint32_t page_size) {
    std::size_t max_page = 0;
    bool any = false;
    for (const auto& p : ptrs) {
        const std::size_t end =
            (static_cast<std::size_t>(p.page) * page_size + p.offset + p.length - 1) / page_size;
        max_page = std::max(max_page, end);
        any = true;
    }
    return any ? max_page + 1 : 0;
}

}  // namespace

SpacePrediction analytic_space_cost(const SpatialVisualIndex& idx) {
    const std::uint32_t P = idx.store().page_size();
    SpacePrediction sp;

    if (idx.primary_tree_meta()) sp.s_r += idx.primary_tree_meta()->node_count;
    for (const auto& [ordinal, meta] : idx.secondary_tree_metas()) sp.s_r += meta.node_count;

    if (idx.primary_lsh_meta())
        for (const auto& [tk, ref] : idx.primary_lsh_meta()->directory)
            sp.s_lsh += pages_of(ref.bytes(), P);
    for (const auto& [leaf, meta] : idx.leaf_lsh_metas())
        for (const auto& [tk, ref] : meta.directory) sp.s_lsh += pages_of(ref.bytes(), P);
    for (const auto& [probed, ptr] : idx.routing_records()) sp.s_lsh += pages_of(ptr.length, P);

    sp.s_data = record_span_pages(idx.data().spatial_ptr, P) +
                record_span_pages(idx.data().visual_ptr, P);
    return sp;
}

SpacePrediction measured_space(const SpatialVisualIndex& idx) {
    SpacePrediction sp;
    const PageStore& store = idx.store();
    if (idx.has_node_file()) sp.s_r = store.file_page_count(idx.node_file());
    if (idx.has_bucket_file()) sp.s_lsh = store.file_page_count(idx.bucket_file());
    sp.s_data = store.file_page_count(idx.data().spatial_file) +
                store.file_page_count(idx.data().visual_file);
    return sp;
}

CostPrediction analytic_query_cost(IndexKind kind, const AccessTrace& trace,
                                   std::uint32_t page_size) {
    // Structural shape of the cost rows: which components may appear at all.
    if (kind == IndexKind::aug_rtree && !trace.bucket_reads.empty())
        throw std::invalid_argument("cost model: augmented R*-tree read a bucket");
    if (kind == IndexKind::aug_lsh && !trace.node_reads.empty())
        throw std::invalid_argument("cost model: augmented LSH read a tree node");
    if (kind == IndexKind::aug_vfi && !trace.bucket_reads.empty())
        throw std::invalid_argument("cost model: visual-first augmented structure read a "
                                    "primary bucket");

    auto distinct_pages = [page_size](const std::vector<RecordPointer>& reads) {
        std::set<std::pair<std::uint32_t, std::uint32_t>> pages;
        for (const auto& p : reads) {
            const std::uint32_t last = static_cast<std::uint32_t>(
                (static_cast<std::size_t>(p.page) * page_size + p.offset + p.length - 1) /
                page_size);
            for (std::uint32_t pg = p.page; pg <= last; ++pg) pages.emplace(p.file, pg);
        }
        return pages.size();
    };

    CostPrediction cp;
    cp.t_r = distinct_pages(trace.node_reads);
    cp.t_lsh = distinct_pages(trace.bucket_reads);
    cp.t_data = distinct_pages(trace.data_reads);
    return cp;
}

std::vector<LemmaVerdict> lemma_report(
    const std::map<std::string, std::vector<QueryStats>>& runs) {
    if (runs.size() < 2)
        throw std::invalid_argument("lemma_report: need at least two structures to compare");
    std::size_t n = 0;
    bool first = true;
    for (const auto& [label, stats] : runs) {
        if (first) {
            n = stats.size();
            first = false;
        } else if (stats.size() != n) {
            throw std::invalid_argument("lemma_report: workload size mismatch for " + label);
        }
    }
    if (n == 0) throw std::invalid_argument("lemma_report: empty workload");

    struct Spec {
        const char* label;
        const char* lhs;
        const char* rhs;
        bool per_query;
    };
    static const Spec kLemmas[] = {
        {"L1", "SFI", "AugRTree", false},   {"L2", "SFI", "DI", false},
        {"L3", "VFI", "AugLSH", false},     {"L4", "VFI", "DI", false},
        {"L5", "AugSFI", "SFI", true},      {"L6", "AugSFI-E", "AugRTree", false},
        {"L7", "AugVFI", "VFI", true},      {"L8", "AugVFI-E", "AugLSH", false},
    };

    std::vector<LemmaVerdict> out;
    for (const auto& spec : kLemmas) {
        const auto li = runs.find(spec.lhs);
        const auto ri = runs.find(spec.rhs);
        if (li == runs.end() || ri == runs.end()) continue;
        LemmaVerdict v;
        v.label = spec.label;
        v.lhs = spec.lhs;
        v.rhs = spec.rhs;
        v.per_query = spec.per_query;
        std::size_t satisfied = 0;
        double lsum = 0.0, rsum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto l = li->second[i].total_pages();
            const auto r = ri->second[i].total_pages();
            if (l <= r) ++satisfied;
            lsum += static_cast<double>(l);
            rsum += static_cast<double>(r);
        }
        v.satisfaction = static_cast<double>(satisfied) / static_cast<double>(n);
        v.lhs_mean = lsum / static_cast<double>(n);
        v.rhs_mean = rsum / static_cast<double>(n);
        v.mean_holds = v.lhs_mean <= v.rhs_mean;
        v.holds = spec.per_query ? satisfied == n : v.mean_holds;
        out.push_back(std::move(v));
    }
    return out;
}

}  // namespace svx
