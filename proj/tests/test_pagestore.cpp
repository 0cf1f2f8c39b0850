#include <filesystem>

#include "doctest.h"
#include "svx/pagestore.hpp"

using namespace svx;

namespace {

std::vector<std::byte> payload_of(std::size_t n, unsigned salt = 0) {
    std::vector<std::byte> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = static_cast<std::byte>((i * 31 + salt * 7 + 5) & 0xFF);
    return out;
}

}  // namespace

TEST_CASE("config floor on page size") {
    PageStoreConfig bad;
    bad.page_size = 128;
    CHECK_THROWS_AS(PageStore{bad}, std::invalid_argument);
}

TEST_CASE("first record lands at page 0 offset 0") {
    PageStore store;
    const auto f = store.create_file("data", FileKind::data);
    const auto ptr = store.append(f, payload_of(100), Placement::packed);
    CHECK(ptr.page == 0);
    CHECK(ptr.offset == 0);
    CHECK(ptr.length == 100);
}

TEST_CASE("packed records do not straddle page boundaries") {
    PageStore store;  // 4096-byte pages
    const auto f = store.create_file("data", FileKind::data);
    store.append(f, payload_of(4000), Placement::packed);
    // 200 bytes would cross the boundary, so the record moves to page 1.
    const auto ptr = store.append(f, payload_of(200, 1), Placement::packed);
    CHECK(ptr.page == 1);
    CHECK(ptr.offset == 0);

    QueryContext ctx;
    CHECK(store.read(ptr, &ctx) == payload_of(200, 1));
    CHECK(ctx.ledger.pages_data() == 1);
}

TEST_CASE("records longer than a page span the arithmetic number of pages") {
    PageStore store;
    const auto f = store.create_file("data", FileKind::data);
    const auto ptr = store.append(f, payload_of(5000), Placement::packed);
    QueryContext ctx;
    CHECK(store.read(ptr, &ctx) == payload_of(5000));
    CHECK(ctx.ledger.pages_data() == 2);
}

TEST_CASE("distinct-page accounting ignores re-reads") {
    PageStore store;
    const auto f = store.create_file("data", FileKind::data);
    const auto a = store.append(f, payload_of(64), Placement::packed);
    const auto b = store.append(f, payload_of(64, 2), Placement::packed);
    QueryContext ctx;
    store.read(a, &ctx);
    store.read(a, &ctx);
    store.read(b, &ctx);  // same page as `a`
    CHECK(ctx.ledger.pages_data() == 1);
    CHECK(ctx.ledger.total() == 1);
}

TEST_CASE("ledger routes by file kind") {
    PageStore store;
    const auto nodes = store.create_file("nodes", FileKind::rtree_nodes);
    const auto buckets = store.create_file("buckets", FileKind::lsh_buckets);
    const auto data = store.create_file("data", FileKind::data);
    QueryContext ctx;
    store.read(store.append(nodes, payload_of(10), Placement::full_page), &ctx);
    store.read(store.append(buckets, payload_of(10), Placement::page_aligned), &ctx);
    store.read(store.append(data, payload_of(10), Placement::packed), &ctx);
    CHECK(ctx.ledger.pages_rtree() == 1);
    CHECK(ctx.ledger.pages_lsh() == 1);
    CHECK(ctx.ledger.pages_data() == 1);
    CHECK(ctx.ledger.pages_index() == 2);
    CHECK(ctx.trace.node_reads.size() == 1);
    CHECK(ctx.trace.bucket_reads.size() == 1);
    CHECK(ctx.trace.data_reads.size() == 1);
}

TEST_CASE("round trip for arbitrary payload sizes") {
    PageStoreConfig cfg;
    cfg.page_size = 512;
    PageStore store(cfg);
    const auto f = store.create_file("data", FileKind::data);
    std::vector<RecordPointer> ptrs;
    std::vector<std::size_t> sizes;
    std::uint64_t state = 99;
    for (int i = 0; i < 60; ++i) {
        state = state * 6364136223846793005ULL + 1442695040888963407ULL;
        const std::size_t n = 1 + state % (10 * cfg.page_size);
        sizes.push_back(n);
        ptrs.push_back(store.append(f, payload_of(n, static_cast<unsigned>(i)), Placement::packed));
    }
    for (int i = 0; i < 60; ++i) {
        CHECK(store.read(ptrs[static_cast<std::size_t>(i)], nullptr) ==
              payload_of(sizes[static_cast<std::size_t>(i)], static_cast<unsigned>(i)));
    }
}

TEST_CASE("file size is a whole number of pages covering every record") {
    PageStoreConfig cfg;
    cfg.page_size = 256;
    PageStore store(cfg);
    const auto f = store.create_file("data", FileKind::data);
    std::size_t expected_pages = 0;
    std::size_t cursor = 0;  // replay of the packed placement arithmetic
    for (std::size_t n : {100UL, 200UL, 90UL, 700UL, 30UL, 255UL, 256UL, 1UL}) {
        const std::size_t off = cursor % cfg.page_size;
        if (off > 0 && off + n > cfg.page_size && n <= cfg.page_size)
            cursor += cfg.page_size - off;
        cursor += n;
        store.append(f, payload_of(n), Placement::packed);
        expected_pages = (cursor + cfg.page_size - 1) / cfg.page_size;
        CHECK(store.file_page_count(f) == expected_pages);
    }
    CHECK(store.file_record_count(f) == 8);
}

TEST_CASE("full-page placement pads to exactly one page") {
    PageStore store;
    const auto f = store.create_file("nodes", FileKind::rtree_nodes);
    const auto a = store.append(f, payload_of(300), Placement::full_page);
    const auto b = store.append(f, payload_of(300, 1), Placement::full_page);
    CHECK(a.page == 0);
    CHECK(b.page == 1);
    CHECK(a.length == store.page_size());
    CHECK_THROWS_AS(store.append(f, payload_of(store.page_size() + 1), Placement::full_page),
                    std::invalid_argument);
}

TEST_CASE("dangling pointer is rejected") {
    PageStore store;
    const auto f = store.create_file("data", FileKind::data);
    store.append(f, payload_of(10), Placement::packed);
    RecordPointer bogus{f, 7, 0, 10};
    CHECK_THROWS(store.read(bogus, nullptr));
}

TEST_CASE("query cost multiplies pages by t_disk") {
    PageStoreConfig cfg;
    cfg.t_disk = 0.001;
    AccessLedger empty;
    CHECK(query_cost(empty, cfg) == 0.0);

    AccessLedger ledger;
    for (std::uint32_t p = 0; p < 10; ++p) ledger.touch(FileKind::rtree_nodes, 0, p);
    for (std::uint32_t p = 0; p < 5; ++p) ledger.touch(FileKind::data, 1, p);
    CHECK(query_cost(ledger, cfg) == doctest::Approx(0.015));
}

TEST_CASE("identical append sequences produce byte-identical files") {
    auto build = [] {
        PageStore store;
        const auto f = store.create_file("data", FileKind::data);
        for (int i = 0; i < 25; ++i)
            store.append(f, payload_of(37 * static_cast<std::size_t>(i) + 1,
                                       static_cast<unsigned>(i)),
                         Placement::packed);
        return store.serialize_file(f);
    };
    CHECK(build() == build());
}

TEST_CASE("save and load round-trips files bit-exactly") {
    const auto dir = std::filesystem::temp_directory_path() / "svx_store_test";
    std::filesystem::remove_all(dir);

    PageStore store;
    const auto nodes = store.create_file("nodes", FileKind::rtree_nodes);
    const auto data = store.create_file("data", FileKind::data);
    store.append(nodes, payload_of(500), Placement::full_page);
    const auto ptr = store.append(data, payload_of(123, 3), Placement::packed);
    store.save(dir);

    const PageStore loaded = PageStore::load(dir);
    CHECK(loaded.file_count() == 2);
    CHECK(loaded.file_kind(nodes) == FileKind::rtree_nodes);
    CHECK(loaded.read(ptr, nullptr) == payload_of(123, 3));
    CHECK(loaded.serialize_file(data) == store.serialize_file(data));
    std::filesystem::remove_all(dir);
}
