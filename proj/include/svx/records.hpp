// Wire format of the two data-record kinds stored in the page store: spatial
// records (id + location) and visual records (id + feature vector).
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "svx/core.hpp"

namespace svx {

struct SpatialRecord {
    std::uint32_t ordinal = 0;
    std::string id;
    Point2 point;
};

struct VisualRecord {
    std::uint32_t ordinal = 0;
    std::string id;
    std::vector<double> vec;
};

std::vector<std::byte> encode_spatial_record(const SpatialRecord& r);
SpatialRecord decode_spatial_record(const std::vector<std::byte>& bytes);

std::vector<std::byte> encode_visual_record(const VisualRecord& r);
VisualRecord decode_visual_record(const std::vector<std::byte>& bytes);

}  // namespace svx
