#include "svx/pagestore.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace svx {

namespace {
constexpr std::uint32_t kMagic = 0x52585653;  // "SVXR" little-endian
constexpr std::uint32_t kVersion = 1;

void put_u32(std::vector<std::byte>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(const std::byte* p) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(std::to_integer<std::uint8_t>(p[i])) << (8 * i);
    return v;
}
}  // namespace

void PageStoreConfig::validate() const {
    if (page_size < 256) throw std::invalid_argument("pagestore: page_size must be >= 256 bytes");
    if (t_disk < 0.0) throw std::invalid_argument("pagestore: t_disk must be >= 0");
}

void AccessLedger::touch(FileKind kind, std::uint32_t file, std::uint32_t page) {
    const std::uint64_t key = (static_cast<std::uint64_t>(file) << 32) | page;
    switch (kind) {
        case FileKind::rtree_nodes: rtree_.insert(key); break;
        case FileKind::lsh_buckets: lsh_.insert(key); break;
        case FileKind::data: data_.insert(key); break;
    }
}

void AccessLedger::reset() {
    rtree_.clear();
    lsh_.clear();
    data_.clear();
}

void AccessTrace::clear() {
    node_reads.clear();
    bucket_reads.clear();
    data_reads.clear();
}

PageStore::PageStore(PageStoreConfig cfg) : cfg_(cfg) { cfg_.validate(); }

std::uint32_t PageStore::create_file(const std::string& name, FileKind kind) {
    for (const auto& f : files_)
        if (f.name == name) throw std::invalid_argument("pagestore: file already exists: " + name);
    files_.push_back(File{name, kind, {}, 0, 0, 0});
    return static_cast<std::uint32_t>(files_.size() - 1);
}

PageStore::File& PageStore::file_at(std::uint32_t id) {
    if (id >= files_.size()) throw std::out_of_range("pagestore: bad file id");
    return files_[id];
}

const PageStore::File& PageStore::file_at(std::uint32_t id) const {
    if (id >= files_.size()) throw std::out_of_range("pagestore: bad file id");
    return files_[id];
}

void PageStore::ensure_pages(File& f, std::size_t page_count) {
    const std::size_t want = page_count * cfg_.page_size;
    if (f.pages.size() < want) f.pages.resize(want, std::byte{0});
}

RecordPointer PageStore::append(std::uint32_t file, const std::vector<std::byte>& payload,
                                Placement placement) {
    if (payload.empty()) throw std::invalid_argument("pagestore: empty payload");
    File& f = file_at(file);
    const std::uint32_t P = cfg_.page_size;

    std::uint32_t page = f.cursor_page;
    std::uint32_t offset = f.cursor_offset;
    switch (placement) {
        case Placement::packed:
            // Move to the next page start rather than crossing a boundary,
            // unless the record is longer than a page anyway.
            if (offset > 0 && offset + payload.size() > P && payload.size() <= P) {
                ++page;
                offset = 0;
            }
            break;
        case Placement::page_aligned:
        case Placement::full_page:
            if (offset > 0) {
                ++page;
                offset = 0;
            }
            if (placement == Placement::full_page && payload.size() > P)
                throw std::invalid_argument("pagestore: record exceeds one page (" +
                                            std::to_string(payload.size()) + " > " +
                                            std::to_string(P) + ") in " + f.name);
            break;
    }

    const std::size_t begin = static_cast<std::size_t>(page) * P + offset;
    const std::size_t end = begin + payload.size();
    ensure_pages(f, (end + P - 1) / P);
    std::memcpy(f.pages.data() + begin, payload.data(), payload.size());

    RecordPointer ptr{file, page, offset,
                      static_cast<std::uint32_t>(placement == Placement::full_page
                                                     ? P
                                                     : payload.size())};

    std::size_t cursor = placement == Placement::full_page
                             ? (static_cast<std::size_t>(page) + 1) * P
                             : end;
    f.cursor_page = static_cast<std::uint32_t>(cursor / P);
    f.cursor_offset = static_cast<std::uint32_t>(cursor % P);
    f.record_count += 1;
    // Materialize the tail page so file size is a whole number of pages.
    ensure_pages(f, (cursor + P - 1) / P);
    return ptr;
}

std::vector<std::byte> PageStore::read(const RecordPointer& ptr, QueryContext* ctx) const {
    const File& f = file_at(ptr.file);
    const std::uint32_t P = cfg_.page_size;
    if (ptr.offset >= P) throw std::out_of_range("pagestore: pointer offset beyond page");
    const std::size_t begin = static_cast<std::size_t>(ptr.page) * P + ptr.offset;
    const std::size_t end = begin + ptr.length;
    if (ptr.length == 0 || end > f.pages.size())
        throw std::out_of_range("pagestore: dangling record pointer into " + f.name);

    if (ctx != nullptr) {
        const std::uint32_t first = ptr.page;
        const std::uint32_t last = static_cast<std::uint32_t>((end - 1) / P);
        for (std::uint32_t p = first; p <= last; ++p) ctx->ledger.touch(f.kind, ptr.file, p);
        switch (f.kind) {
            case FileKind::rtree_nodes: ctx->trace.node_reads.push_back(ptr); break;
            case FileKind::lsh_buckets: ctx->trace.bucket_reads.push_back(ptr); break;
            case FileKind::data: ctx->trace.data_reads.push_back(ptr); break;
        }
    }
    return std::vector<std::byte>(f.pages.begin() + static_cast<std::ptrdiff_t>(begin),
                                  f.pages.begin() + static_cast<std::ptrdiff_t>(end));
}

std::size_t PageStore::file_page_count(std::uint32_t file) const {
    return file_at(file).pages.size() / cfg_.page_size;
}

std::size_t PageStore::file_record_count(std::uint32_t file) const {
    return file_at(file).record_count;
}

FileKind PageStore::file_kind(std::uint32_t file) const { return file_at(file).kind; }

const std::string& PageStore::file_name(std::uint32_t file) const { return file_at(file).name; }

int PageStore::find_file(const std::string& name) const {
    for (std::size_t i = 0; i < files_.size(); ++i)
        if (files_[i].name == name) return static_cast<int>(i);
    return -1;
}

std::vector<std::byte> PageStore::serialize_file(std::uint32_t file) const {
    const File& f = file_at(file);
    std::vector<std::byte> out;
    out.reserve(16 + f.pages.size());
    put_u32(out, kMagic);
    put_u32(out, kVersion);
    put_u32(out, cfg_.page_size);
    put_u32(out, f.record_count);
    out.insert(out.end(), f.pages.begin(), f.pages.end());
    return out;
}

void PageStore::save(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    std::ofstream manifest(dir / "store.txt");
    if (!manifest) throw std::runtime_error("pagestore: cannot write store manifest");
    manifest << "svx-store,v1\n";
    manifest << "page_size=" << cfg_.page_size << "\n";
    manifest << "t_disk=" << cfg_.t_disk << "\n";
    for (const auto& f : files_) {
        manifest << "file=" << f.name << ",kind=" << static_cast<int>(f.kind)
                 << ",cursor_page=" << f.cursor_page << ",cursor_offset=" << f.cursor_offset
                 << "\n";
    }
    for (std::uint32_t i = 0; i < files_.size(); ++i) {
        const auto bytes = serialize_file(i);
        std::ofstream out(dir / (files_[i].name + ".bin"), std::ios::binary);
        if (!out) throw std::runtime_error("pagestore: cannot write " + files_[i].name);
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
    }
}

PageStore PageStore::load(const std::filesystem::path& dir) {
    std::ifstream manifest(dir / "store.txt");
    if (!manifest) throw std::runtime_error("pagestore: missing store manifest in " + dir.string());
    std::string line;
    std::getline(manifest, line);
    if (line != "svx-store,v1") throw std::runtime_error("pagestore: bad store manifest header");

    PageStoreConfig cfg;
    std::vector<std::tuple<std::string, FileKind, std::uint32_t, std::uint32_t>> entries;
    while (std::getline(manifest, line)) {
        if (line.rfind("page_size=", 0) == 0) {
            cfg.page_size = static_cast<std::uint32_t>(std::stoul(line.substr(10)));
        } else if (line.rfind("t_disk=", 0) == 0) {
            cfg.t_disk = std::stod(line.substr(7));
        } else if (line.rfind("file=", 0) == 0) {
            std::string name;
            int kind = 0;
            std::uint32_t cp = 0, co = 0;
            std::string rest = line.substr(5);
            auto next = [&rest]() {
                const auto pos = rest.find(',');
                std::string tok = rest.substr(0, pos);
                rest = pos == std::string::npos ? std::string() : rest.substr(pos + 1);
                return tok;
            };
            name = next();
            kind = std::stoi(next().substr(5));
            cp = static_cast<std::uint32_t>(std::stoul(next().substr(12)));
            co = static_cast<std::uint32_t>(std::stoul(next().substr(14)));
            entries.emplace_back(name, static_cast<FileKind>(kind), cp, co);
        }
    }

    PageStore store(cfg);
    for (const auto& [name, kind, cp, co] : entries) {
        std::ifstream in(dir / (name + ".bin"), std::ios::binary | std::ios::ate);
        if (!in) throw std::runtime_error("pagestore: missing record file " + name);
        const auto size = static_cast<std::size_t>(in.tellg());
        if (size < 16) throw std::runtime_error("pagestore: truncated record file " + name);
        in.seekg(0);
        std::vector<std::byte> bytes(size);
        in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size));

        if (get_u32(bytes.data()) != kMagic) throw std::runtime_error("pagestore: bad magic in " + name);
        if (get_u32(bytes.data() + 4) != kVersion)
            throw std::runtime_error("pagestore: unsupported version in " + name);
        if (get_u32(bytes.data() + 8) != cfg.page_size)
            throw std::runtime_error("pagestore: page size mismatch in " + name);

        const std::uint32_t id = store.create_file(name, kind);
        File& f = store.files_[id];
        f.pages.assign(bytes.begin() + 16, bytes.end());
        if (f.pages.size() % cfg.page_size != 0)
            throw std::runtime_error("pagestore: ragged page region in " + name);
        f.record_count = get_u32(bytes.data() + 12);
        f.cursor_page = cp;
        f.cursor_offset = co;
    }
    return store;
}

double query_cost(const AccessLedger& ledger, const PageStoreConfig& cfg) {
    return cfg.t_disk * static_cast<double>(ledger.total());
}

}  // namespace svx
