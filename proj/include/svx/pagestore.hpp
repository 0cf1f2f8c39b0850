// Simulated paged disk: append-only record files, fixed-size pages, and
// per-query accounting of the distinct pages each query touches. Every index
// structure reads records through this layer so that I/O cost is measurable.
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

namespace svx {

struct PageStoreConfig {
    std::uint32_t page_size = 4096;
    double t_disk = 0.001;  // simulated seconds per page access

    void validate() const;
};

/// What a record file holds; read accounting is routed by this.
enum class FileKind : std::uint8_t { rtree_nodes = 0, lsh_buckets = 1, data = 2 };

/// How appends are placed relative to page boundaries.
///  - packed: records fill pages contiguously; one that would cross a boundary
///    is moved to the next page start (it only spans pages when longer than one).
///  - page_aligned: every record starts on a fresh page.
///  - full_page: record is zero-padded to exactly one page (tree nodes).
enum class Placement : std::uint8_t { packed, page_aligned, full_page };

struct RecordPointer {
    std::uint32_t file = 0;
    std::uint32_t page = 0;
    std::uint32_t offset = 0;  // byte offset within the first page
    std::uint32_t length = 0;

    bool operator==(const RecordPointer&) const = default;
};

/// Distinct pages touched by one query, split by what the page holds.
class AccessLedger {
  public:
    void touch(FileKind kind, std::uint32_t file, std::uint32_t page);
    void reset();

    std::size_t pages_rtree() const { return rtree_.size(); }
    std::size_t pages_lsh() const { return lsh_.size(); }
    std::size_t pages_data() const { return data_.size(); }
    std::size_t pages_index() const { return rtree_.size() + lsh_.size(); }
    std::size_t total() const { return pages_index() + pages_data(); }

  private:
    std::set<std::uint64_t> rtree_;
    std::set<std::uint64_t> lsh_;
    std::set<std::uint64_t> data_;
};

/// Raw access events of one query, kept alongside the ledger so the analytic
/// cost model can be replayed independently of the ledger's bookkeeping.
struct AccessTrace {
    std::vector<RecordPointer> node_reads;
    std::vector<RecordPointer> bucket_reads;
    std::vector<RecordPointer> data_reads;

    void clear();
};

struct QueryContext {
    AccessLedger ledger;
    AccessTrace trace;
};

class PageStore {
  public:
    explicit PageStore(PageStoreConfig cfg = {});

    std::uint32_t create_file(const std::string& name, FileKind kind);

    RecordPointer append(std::uint32_t file, const std::vector<std::byte>& payload,
                         Placement placement);

    /// Returns the stored payload. When `ctx` is non-null every page overlapped
    /// by the record is added to the ledger (by file kind) and the read is
    /// traced. Open-time reads pass nullptr and cost nothing.
    std::vector<std::byte> read(const RecordPointer& ptr, QueryContext* ctx) const;

    std::size_t file_page_count(std::uint32_t file) const;
    std::size_t file_record_count(std::uint32_t file) const;
    FileKind file_kind(std::uint32_t file) const;
    const std::string& file_name(std::uint32_t file) const;
    std::size_t file_count() const { return files_.size(); }
    /// -1 if absent.
    int find_file(const std::string& name) const;

    const PageStoreConfig& config() const { return cfg_; }
    std::uint32_t page_size() const { return cfg_.page_size; }

    /// Flat binary image of one file: 16-byte header (magic, version,
    /// page_size, record count) followed by the pages.
    std::vector<std::byte> serialize_file(std::uint32_t file) const;

    void save(const std::filesystem::path& dir) const;
    static PageStore load(const std::filesystem::path& dir);

  private:
    struct File {
        std::string name;
        FileKind kind = FileKind::data;
        std::vector<std::byte> pages;   // always a whole number of pages
        std::uint32_t cursor_page = 0;  // next packed append position
        std::uint32_t cursor_offset = 0;
        std::uint32_t record_count = 0;
    };

    File& file_at(std::uint32_t id);
    const File& file_at(std::uint32_t id) const;
    void ensure_pages(File& f, std::size_t page_count);

    PageStoreConfig cfg_;
    std::vector<File> files_;
};

/// Eq-style query cost: t_disk x (index pages + data pages).
double query_cost(const AccessLedger& ledger, const PageStoreConfig& cfg);

}  // namespace svx
