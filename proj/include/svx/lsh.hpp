// Euclidean locality-sensitive hashing: T tables of F concatenated hash
// functions h(o) = floor((a.o + b)/W) with gaussian a and uniform shift b.
// Buckets live in the page store; the directory (key -> record pointer) is
// index metadata kept in memory.
#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "svx/core.hpp"
#include "svx/pagestore.hpp"

namespace svx {

struct LshParams {
    int tables = 3;
    int functions = 7;
    double width = 1.0;
    int dim = 0;
    std::uint64_t seed = 0;

    void validate() const;
};

using BucketKey = std::vector<std::int64_t>;

struct TableKey {
    std::uint32_t table = 0;
    BucketKey key;

    auto operator<=>(const TableKey&) const = default;
};

/// The (a, b) coefficient grid. Normally derived from a seed; tests may supply
/// explicit coefficients to pin bucket layouts.
class HashFamily {
  public:
    static HashFamily derive(const LshParams& params);
    static HashFamily explicit_functions(double width,
                                         std::vector<std::vector<std::vector<double>>> a,
                                         std::vector<std::vector<double>> b);

    BucketKey key(std::uint32_t table, std::span<const double> v) const;
    std::int64_t single_hash(std::uint32_t table, std::uint32_t func,
                             std::span<const double> v) const;

    std::uint32_t tables() const { return static_cast<std::uint32_t>(a_.size()); }
    std::uint32_t functions() const {
        return a_.empty() ? 0 : static_cast<std::uint32_t>(a_[0].size());
    }
    double width() const { return width_; }
    std::size_t dim() const { return a_.empty() || a_[0].empty() ? 0 : a_[0][0].size(); }

  private:
    HashFamily() = default;
    double width_ = 1.0;
    std::vector<std::vector<std::vector<double>>> a_;  // [table][func][dim]
    std::vector<std::vector<double>> b_;               // [table][func]
};

enum class BucketFlavor : std::uint8_t {
    plain = 0,             // ordinal + visual pointer
    with_spatial_ptr = 1,  // + spatial pointer
    with_point = 2,        // + inline 2-d location
};

struct BucketEntry {
    std::uint32_t ordinal = 0;
    RecordPointer visual;
    RecordPointer spatial;  // with_spatial_ptr
    Point2 point;           // with_point
};

struct BucketRef {
    RecordPointer ptr;
    std::uint32_t ordinal = 0;   // position in the sorted directory
    std::uint32_t entries = 0;
    std::uint32_t bytes() const { return ptr.length; }  // C(b)
};

struct LshMeta {
    std::uint32_t bucket_file = 0;
    std::uint32_t visual_file = 0;
    std::uint32_t spatial_file = 0;
    BucketFlavor flavor = BucketFlavor::plain;
    std::map<TableKey, BucketRef> directory;

    std::size_t bucket_count(std::uint32_t table) const;
};

class LshBuilder {
  public:
    LshBuilder(const HashFamily* family, BucketFlavor flavor);

    void insert(std::uint32_t ordinal, std::span<const double> v, RecordPointer visual,
                RecordPointer spatial = {}, Point2 point = {});

    /// Buckets are written page-aligned in sorted (table, key) order, so a
    /// bucket with C(b) bytes occupies exactly ceil(C(b)/page_size) pages.
    LshMeta persist(PageStore& store, std::uint32_t bucket_file, std::uint32_t visual_file,
                    std::uint32_t spatial_file) const;

    std::size_t entry_count() const { return inserted_; }

  private:
    const HashFamily* family_;
    BucketFlavor flavor_;
    std::map<TableKey, std::vector<BucketEntry>> buckets_;
    std::size_t inserted_ = 0;
};

class LshIndex {
  public:
    LshIndex(const PageStore* store, const HashFamily* family, LshMeta meta);

    /// Bucket lookups for one probe vector, no I/O.
    std::vector<TableKey> probe_keys(std::span<const double> v) const;
    /// Directory ordinal per table for a vector; UINT32_MAX when the key has
    /// no bucket. Used both for leaf annotations and candidacy rechecks.
    std::vector<std::uint32_t> bucket_ordinals(std::span<const double> v) const;

    std::vector<BucketEntry> read_bucket(const TableKey& tk, QueryContext* ctx) const;

    /// Union of the probed buckets across tables, deduplicated by ordinal.
    /// `extra_probes` adds further probe vectors (visual exploration).
    std::vector<BucketEntry> candidate_set(
        std::span<const double> q, QueryContext* ctx,
        const std::vector<std::vector<double>>& extra_probes = {}) const;

    /// Candidates whose stored visual vectors sit within sigma of q; loads
    /// every candidate's visual record. Returns sorted image ordinals.
    std::vector<std::uint32_t> similarity_query(std::span<const double> q, double sigma,
                                                QueryContext* ctx) const;

    const LshMeta& meta() const { return meta_; }
    const HashFamily& family() const { return *family_; }

  private:
    const PageStore* store_;
    const HashFamily* family_;
    LshMeta meta_;
};

/// Visual vector fetched through the store (pages charged to `ctx`).
std::vector<double> load_visual_vector(const PageStore& store, const RecordPointer& ptr,
                                       QueryContext* ctx);
Point2 load_spatial_point(const PageStore& store, const RecordPointer& ptr, QueryContext* ctx);

}  // namespace svx
