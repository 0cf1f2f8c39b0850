// Evaluation machinery: the exact linear-scan oracle, result classification,
// recall/precision, the analytic space and query cost models, and the lemma
// verdict table computed over workload runs.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "svx/core.hpp"
#include "svx/indexes.hpp"

namespace svx {

struct GroundTruth {
    std::vector<std::uint32_t> strict;    // inside Q.s and within sigma
    std::vector<std::uint32_t> extended;  // inside the expanded rect and within sigma
};

/// Full linear scan with exact distances. `es_max` controls the extended set's
/// rectangle expansion; 0 makes strict == extended.
GroundTruth oracle_query(const Dataset& ds, const SpatialVisualRangeQuery& q, double es_max);

/// Would `v` share a probed bucket with `q` in any table (no exploration)?
bool lsh_visible(const HashFamily& family, std::span<const double> v,
                 std::span<const double> q);

/// Classification per the three relevance classes. `ordinal` must be relevant
/// (member of the extended truth); classifying anything else throws.
ResultClass classify(std::uint32_t ordinal, const Dataset& ds,
                     const SpatialVisualRangeQuery& q, const GroundTruth& truth,
                     bool visible);

struct QueryEval {
    double recall = 0.0;          // against strict truth; NaN when truth is empty
    double precision = 1.0;       // against the effective (possibly expanded) rect
    std::size_t sv_match = 0;     // classes of the returned relevant images
    std::size_t s_unmatch = 0;
    std::size_t v_unmatch = 0;
};

QueryEval evaluate_result(const Dataset& ds, const SpatialVisualRangeQuery& q,
                          const GroundTruth& truth, const std::vector<std::uint32_t>& result,
                          const HashFamily& family, double effective_es);

struct SpacePrediction {
    std::size_t s_r = 0;     // node pages
    std::size_t s_lsh = 0;   // bucket pages
    std::size_t s_data = 0;  // data pages
};

/// Evaluates the per-structure space model from directory metadata (node
/// counts, bucket byte sizes, record sizes) without consulting file sizes.
SpacePrediction analytic_space_cost(const SpatialVisualIndex& idx);

/// Actual pages of the structure's files, for cross-checking the prediction.
SpacePrediction measured_space(const SpatialVisualIndex& idx);

struct CostPrediction {
    std::size_t t_r = 0;
    std::size_t t_lsh = 0;
    std::size_t t_data = 0;
};

/// Replays the access trace through the per-kind cost formula; must reproduce
/// the measured QueryStats exactly. Structural constraints of the kind (e.g.
/// the visual-first augmented structure never reads primary buckets) are
/// enforced and violations throw.
CostPrediction analytic_query_cost(IndexKind kind, const AccessTrace& trace,
                                   std::uint32_t page_size);

struct LemmaVerdict {
    std::string label;
    std::string lhs;
    std::string rhs;
    bool per_query;          // evaluated per query (lemmas 5 and 7)
    double satisfaction;     // fraction of queries where lhs <= rhs
    double lhs_mean = 0.0;
    double rhs_mean = 0.0;
    bool mean_holds = false;
    bool holds = false;      // per-query lemmas: 100%; mean lemmas: mean holds
};

/// Page totals per structure label, aligned by query index. Labels for the
/// explorative runs are "AugSFI-E" and "AugVFI-E".
std::vector<LemmaVerdict> lemma_report(
    const std::map<std::string, std::vector<QueryStats>>& runs);

}  // namespace svx
