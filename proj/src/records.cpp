#include "svx/records.hpp"

#include "wire.hpp"

namespace svx {

std::vector<std::byte> encode_spatial_record(const SpatialRecord& r) {
    std::vector<std::byte> out;
    out.reserve(4 + 2 + r.id.size() + 16);
    wire::put_u32(out, r.ordinal);
    wire::put_u16(out, static_cast<std::uint16_t>(r.id.size()));
    for (char c : r.id) out.push_back(static_cast<std::byte>(c));
    wire::put_f64(out, r.point.x);
    wire::put_f64(out, r.point.y);
    return out;
}

SpatialRecord decode_spatial_record(const std::vector<std::byte>& bytes) {
    wire::Reader rd(bytes);
    SpatialRecord r;
    r.ordinal = rd.u32();
    r.id = rd.str(rd.u16());
    r.point.x = rd.f64();
    r.point.y = rd.f64();
    return r;
}

std::vector<std::byte> encode_visual_record(const VisualRecord& r) {
    std::vector<std::byte> out;
    out.reserve(4 + 2 + r.id.size() + 4 + 8 * r.vec.size());
    wire::put_u32(out, r.ordinal);
    wire::put_u16(out, static_cast<std::uint16_t>(r.id.size()));
    for (char c : r.id) out.push_back(static_cast<std::byte>(c));
    wire::put_u32(out, static_cast<std::uint32_t>(r.vec.size()));
    for (double v : r.vec) wire::put_f64(out, v);
    return out;
}

VisualRecord decode_visual_record(const std::vector<std::byte>& bytes) {
    wire::Reader rd(bytes);
    VisualRecord r;
    r.ordinal = rd.u32();
    r.id = rd.str(rd.u16());
    r.vec.resize(rd.u32());
    for (auto& v : r.vec) v = rd.f64();
    return r;
}

}  // namespace svx
