#pragma once

#include "idexp/model.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace idexp {

// Container layout (single file):
//   line 1   "IDEXP-CONTAINER\n"
//   line 2   compact JSON manifest terminated by '\n'
//   payload  blocks back to back in manifest order, each IEEE-754 binary64,
//            little-endian, column-major
//
// Manifest:
//   {"format_version":1, "kind":"model"|"shape", "name":..., "n":..,
//    "m":.., "k":.., "units":"mm",
//    "layout":{"encoding":"float64-le","order":"column-major"},
//    "blocks":[{"name":"mean","rows":n,"cols":1,"offset":0,
//               "bytes":8n,"crc32":"1a2b3c4d"}, ...]}
// Model blocks: mean, id_basis, exp_basis, id_stddev, exp_stddev. Shape files
// carry only mean (m = k = 0). Offsets are relative to the payload start.

inline constexpr int kContainerVersion = 1;
inline constexpr std::string_view kContainerMagic = "IDEXP-CONTAINER";

std::uint32_t crc32(std::span<const std::byte> bytes);

/// CRC-32 of the concatenated payload blocks of `model`.
std::uint32_t model_fingerprint(const ShapeModel& model);

std::string encode_model(const ShapeModel& model);
std::string encode_shape(const FaceShape& shape, std::string_view name = "shape");

/// Throws CorruptModel (bad magic, truncated block, checksum mismatch),
/// UnsupportedVersion, or MalformedManifest.
ShapeModel decode_model(std::string_view bytes);
FaceShape decode_shape(std::string_view bytes);

void save_model(const ShapeModel& model, const std::filesystem::path& path);
ShapeModel load_model(const std::filesystem::path& path);
void save_shape(const FaceShape& shape, const std::filesystem::path& path,
                std::string_view name = "shape");
FaceShape load_shape(const std::filesystem::path& path);

/// Write to a sibling temporary file, then rename over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace idexp
