#include "svx/lsh.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "svx/records.hpp"
#include "wire.hpp"

namespace svx {

void LshParams::validate() const {
    if (tables < 1) throw std::invalid_argument("lsh: tables must be >= 1");
    if (functions < 1) throw std::invalid_argument("lsh: functions must be >= 1");
    if (width <= 0.0) throw std::invalid_argument("lsh: width must be > 0");
    if (dim < 1) throw std::invalid_argument("lsh: dim must be >= 1");
}

HashFamily HashFamily::derive(const LshParams& params) {
    params.validate();
    HashFamily fam;
    fam.width_ = params.width;
    Rng rng(mix_seed(params.seed, 0x6C7368ULL));  // "lsh"
    fam.a_.resize(params.tables);
    fam.b_.resize(params.tables);
    for (int t = 0; t < params.tables; ++t) {
        fam.a_[t].resize(params.functions);
        fam.b_[t].resize(params.functions);
        for (int f = 0; f < params.functions; ++f) {
            fam.a_[t][f].resize(params.dim);
            for (int j = 0; j < params.dim; ++j) fam.a_[t][f][j] = rng.gaussian();
            fam.b_[t][f] = rng.uniform() * params.width;
        }
    }
    return fam;
}

HashFamily HashFamily::explicit_functions(double width,
                                          std::vector<std::vector<std::vector<double>>> a,
                                          std::vector<std::vector<double>> b) {
    if (width <= 0.0) throw std::invalid_argument("lsh: width must be > 0");
    if (a.empty() || a.size() != b.size())
        throw std::invalid_argument("lsh: coefficient grids disagree");
    HashFamily fam;
    fam.width_ = width;
    fam.a_ = std::move(a);
    fam.b_ = std::move(b);
    return fam;
}

std::int64_t HashFamily::single_hash(std::uint32_t table, std::uint32_t func,
                                     std::span<const double> v) const {
    const auto& a = a_[table][func];
    if (v.size() != a.size())
        throw std::invalid_argument("lsh: vector dimension mismatch");
    double dot = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) dot += a[j] * v[j];
    return static_cast<std::int64_t>(std::floor((dot + b_[table][func]) / width_));
}

BucketKey HashFamily::key(std::uint32_t table, std::span<const double> v) const {
    BucketKey k(functions());
    for (std::uint32_t f = 0; f < functions(); ++f) k[f] = single_hash(table, f, v);
    return k;
}

std::size_t LshMeta::bucket_count(std::uint32_t table) const {
    std::size_t n = 0;
    for (const auto& [tk, ref] : directory) n += tk.table == table ? 1 : 0;
    return n;
}

LshBuilder::LshBuilder(const HashFamily* family, BucketFlavor flavor)
    : family_(family), flavor_(flavor) {}

void LshBuilder::insert(std::uint32_t ordinal, std::span<const double> v, RecordPointer visual,
                        RecordPointer spatial, Point2 point) {
    BucketEntry e;
    e.ordinal = ordinal;
    e.visual = visual;
    e.spatial = spatial;
    e.point = point;
    for (std::uint32_t t = 0; t < family_->tables(); ++t)
        buckets_[TableKey{t, family_->key(t, v)}].push_back(e);
    ++inserted_;
}

LshMeta LshBuilder::persist(PageStore& store, std::uint32_t bucket_file,
                            std::uint32_t visual_file, std::uint32_t spatial_file) const {
    LshMeta meta;
    meta.bucket_file = bucket_file;
    meta.visual_file = visual_file;
    meta.spatial_file = spatial_file;
    meta.flavor = flavor_;
    std::uint32_t next_ordinal = 0;
    for (const auto& [tk, entries] : buckets_) {
        std::vector<std::byte> bytes;
        wire::put_u32(bytes, static_cast<std::uint32_t>(entries.size()));
        for (const auto& e : entries) {
            wire::put_u32(bytes, e.ordinal);
            wire::put_u32(bytes, e.visual.page);
            wire::put_u32(bytes, e.visual.offset);
            wire::put_u32(bytes, e.visual.length);
            if (flavor_ == BucketFlavor::with_spatial_ptr) {
                wire::put_u32(bytes, e.spatial.page);
                wire::put_u32(bytes, e.spatial.offset);
                wire::put_u32(bytes, e.spatial.length);
            } else if (flavor_ == BucketFlavor::with_point) {
                wire::put_f64(bytes, e.point.x);
                wire::put_f64(bytes, e.point.y);
            }
        }
        BucketRef ref;
        ref.ptr = store.append(bucket_file, bytes, Placement::page_aligned);
        ref.ordinal = next_ordinal++;
        ref.entries = static_cast<std::uint32_t>(entries.size());
        meta.directory.emplace(tk, ref);
    }
    return meta;
}

LshIndex::LshIndex(const PageStore* store, const HashFamily* family, LshMeta meta)
    : store_(store), family_(family), meta_(std::move(meta)) {}

std::vector<TableKey> LshIndex::probe_keys(std::span<const double> v) const {
    std::vector<TableKey> keys;
    keys.reserve(family_->tables());
    for (std::uint32_t t = 0; t < family_->tables(); ++t)
        keys.push_back(TableKey{t, family_->key(t, v)});
    return keys;
}

std::vector<std::uint32_t> LshIndex::bucket_ordinals(std::span<const double> v) const {
    std::vector<std::uint32_t> out(family_->tables(), UINT32_MAX);
    for (std::uint32_t t = 0; t < family_->tables(); ++t) {
        const auto it = meta_.directory.find(TableKey{t, family_->key(t, v)});
        if (it != meta_.directory.end()) out[t] = it->second.ordinal;
    }
    return out;
}

std::vector<BucketEntry> LshIndex::read_bucket(const TableKey& tk, QueryContext* ctx) const {
    const auto it = meta_.directory.find(tk);
    if (it == meta_.directory.end()) return {};
    const auto bytes = store_->read(it->second.ptr, ctx);
    wire::Reader r(bytes);
    const std::uint32_t count = r.u32();
    std::vector<BucketEntry> entries(count);
    for (auto& e : entries) {
        e.ordinal = r.u32();
        e.visual = {meta_.visual_file, r.u32(), r.u32(), r.u32()};
        if (meta_.flavor == BucketFlavor::with_spatial_ptr) {
            e.spatial = {meta_.spatial_file, r.u32(), r.u32(), r.u32()};
        } else if (meta_.flavor == BucketFlavor::with_point) {
            e.point.x = r.f64();
            e.point.y = r.f64();
        }
    }
    return entries;
}

std::vector<BucketEntry> LshIndex::candidate_set(
    std::span<const double> q, QueryContext* ctx,
    const std::vector<std::vector<double>>& extra_probes) const {
    // Collect the distinct keys probed per table; each bucket is read once.
    std::set<TableKey> keys;
    for (std::uint32_t t = 0; t < family_->tables(); ++t) {
        keys.insert(TableKey{t, family_->key(t, q)});
        for (const auto& p : extra_probes) keys.insert(TableKey{t, family_->key(t, p)});
    }
    std::vector<BucketEntry> out;
    std::set<std::uint32_t> seen;
    for (const auto& tk : keys) {
        for (const auto& e : read_bucket(tk, ctx))
            if (seen.insert(e.ordinal).second) out.push_back(e);
    }
    std::sort(out.begin(), out.end(),
              [](const BucketEntry& a, const BucketEntry& b) { return a.ordinal < b.ordinal; });
    return out;
}

std::vector<std::uint32_t> LshIndex::similarity_query(std::span<const double> q, double sigma,
                                                      QueryContext* ctx) const {
    if (sigma < 0.0) throw std::invalid_argument("lsh: sigma must be >= 0");
    std::vector<std::uint32_t> out;
    for (const auto& e : candidate_set(q, ctx)) {
        const auto vec = load_visual_vector(*store_, e.visual, ctx);
        if (euclidean_distance(vec, q) <= sigma) out.push_back(e.ordinal);
    }
    return out;  // candidate_set is ordinal-sorted already
}

std::vector<double> load_visual_vector(const PageStore& store, const RecordPointer& ptr,
                                       QueryContext* ctx) {
    return decode_visual_record(store.read(ptr, ctx)).vec;
}

Point2 load_spatial_point(const PageStore& store, const RecordPointer& ptr, QueryContext* ctx) {
    return decode_spatial_record(store.read(ptr, ctx)).point;
}

}  // namespace svx
