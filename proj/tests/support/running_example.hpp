// Nine-image reference fixture with a prescribed tree layout and pinned hash
// functions. Engineered so every structure's walk-through produces the known
// trace: spatial side {I3,I4,I7,I9}, LSH candidates {I3..I8}, visual side
// {I3,I4,I5,I8}, and the per-structure final results.
#pragma once

#include <memory>

#include "svx/indexes.hpp"
#include "svx/workbench.hpp"

namespace svx::testsupport {

struct RunningExample {
    Dataset dataset;                          // ordinals 0..8 are I1..I9
    SpatialVisualRangeQuery query;            // rect (30,-116)-(34,-104), sigma 0.5
    SpatialLayout layout;                     // leaves R1..R6 under Ra, Rb
    std::shared_ptr<const HashFamily> family; // two tables, one function each

    BuildConfig build_config() const;

    // Convenience: ordinal of image "I<k>" (1-based).
    static std::uint32_t ord(int k) { return static_cast<std::uint32_t>(k - 1); }
};

RunningExample make_running_example();

}  // namespace svx::testsupport
