#include "idexp/container.hpp"

#include "idexp/errors.hpp"

#include <nlohmann/json.hpp>
#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace idexp {
namespace {

struct BlockView {
  std::string name;
  const double* data;
  Index rows;
  Index cols;
};

void append_le(std::string& out, const double* data, Index count) {
  const auto old = out.size();
  out.resize(old + static_cast<std::size_t>(count) * 8);
  char* dst = out.data() + old;
  for (Index i = 0; i < count; ++i) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(data[i]);
    for (int b = 0; b < 8; ++b) *dst++ = static_cast<char>((bits >> (8 * b)) & 0xff);
  }
}

double read_le(const char* src) {
  std::uint64_t bits = 0;
  for (int b = 0; b < 8; ++b) bits |= std::uint64_t{static_cast<unsigned char>(src[b])} << (8 * b);
  return std::bit_cast<double>(bits);
}

std::uint32_t crc_of(std::string_view bytes) {
  return crc32(std::as_bytes(std::span<const char>(bytes.data(), bytes.size())));
}

std::string hex32(std::uint32_t v) {
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08x", v);
  return buf;
}

std::vector<BlockView> model_blocks(const ShapeModel& model) {
  return {{"mean", model.mean().data(), model.n(), 1},
          {"id_basis", model.id_basis().data(), model.n(), model.m()},
          {"exp_basis", model.exp_basis().data(), model.n(), model.k()},
          {"id_stddev", model.id_stddev().data(), model.m(), 1},
          {"exp_stddev", model.exp_stddev().data(), model.k(), 1}};
}

std::string encode(std::string_view kind, std::string_view name, Index n, Index m, Index k,
                   const std::vector<BlockView>& blocks) {
  std::string payload;
  nlohmann::ordered_json jblocks = nlohmann::ordered_json::array();
  for (const auto& b : blocks) {
    const auto offset = payload.size();
    append_le(payload, b.data, b.rows * b.cols);
    const std::string_view bytes(payload.data() + offset, payload.size() - offset);
    jblocks.push_back(nlohmann::ordered_json{{"name", b.name},
                       {"rows", b.rows},
                       {"cols", b.cols},
                       {"offset", offset},
                       {"bytes", bytes.size()},
                       {"crc32", hex32(crc_of(bytes))}});
  }
  nlohmann::ordered_json manifest;
  manifest["format_version"] = kContainerVersion;
  manifest["kind"] = std::string(kind);
  manifest["name"] = std::string(name);
  manifest["n"] = n;
  manifest["m"] = m;
  manifest["k"] = k;
  manifest["units"] = "mm";
  manifest["layout"] = {{"encoding", "float64-le"}, {"order", "column-major"}};
  manifest["blocks"] = jblocks;

  std::string out;
  out.append(kContainerMagic);
  out += '\n';
  out += manifest.dump();
  out += '\n';
  out += payload;
  return out;
}

struct Decoded {
  std::string kind;
  std::string name;
  Index n = 0, m = 0, k = 0;
  std::vector<std::pair<std::string, Eigen::MatrixXd>> blocks;

  const Eigen::MatrixXd& block(const std::string& want) const {
    for (const auto& [name, mat] : blocks)
      if (name == want) return mat;
    throw MalformedManifest("manifest has no '" + want + "' block");
  }
};

template <class T>
T manifest_field(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw MalformedManifest(std::string("manifest is missing '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw MalformedManifest(std::string("manifest field '") + key + "' has the wrong type");
  }
}

Decoded decode(std::string_view bytes) {
  const auto magic_end = bytes.find('\n');
  if (magic_end == std::string_view::npos || bytes.substr(0, magic_end) != kContainerMagic)
    throw CorruptModel("not an idexp container (bad magic line)");
  const auto manifest_end = bytes.find('\n', magic_end + 1);
  if (manifest_end == std::string_view::npos) throw CorruptModel("container manifest is not terminated");

  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(bytes.substr(magic_end + 1, manifest_end - magic_end - 1));
  } catch (const nlohmann::json::parse_error& e) {
    throw MalformedManifest(std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!manifest.is_object()) throw MalformedManifest("manifest must be a JSON object");

  const int version = manifest_field<int>(manifest, "format_version");
  if (version != kContainerVersion)
    throw UnsupportedVersion("container format_version " + std::to_string(version) + " is not supported (expected " +
                             std::to_string(kContainerVersion) + ")");

  Decoded d;
  d.kind = manifest_field<std::string>(manifest, "kind");
  d.name = manifest_field<std::string>(manifest, "name");
  d.n = manifest_field<Index>(manifest, "n");
  d.m = manifest_field<Index>(manifest, "m");
  d.k = manifest_field<Index>(manifest, "k");
  if (d.n < 0 || d.m < 0 || d.k < 0) throw MalformedManifest("negative dimension in manifest");
  if (manifest_field<std::string>(manifest, "units") != "mm") throw MalformedManifest("units must be \"mm\"");
  const auto layout = manifest_field<nlohmann::json>(manifest, "layout");
  if (!layout.is_object() || manifest_field<std::string>(layout, "encoding") != "float64-le" ||
      manifest_field<std::string>(layout, "order") != "column-major")
    throw MalformedManifest("unsupported payload layout");

  const std::string_view payload = bytes.substr(manifest_end + 1);
  const auto blocks = manifest_field<nlohmann::json>(manifest, "blocks");
  if (!blocks.is_array()) throw MalformedManifest("manifest 'blocks' must be an array");

  std::uint64_t expected_offset = 0;
  for (const auto& b : blocks) {
    const auto name = manifest_field<std::string>(b, "name");
    const auto rows = manifest_field<Index>(b, "rows");
    const auto cols = manifest_field<Index>(b, "cols");
    const auto offset = manifest_field<std::uint64_t>(b, "offset");
    const auto size = manifest_field<std::uint64_t>(b, "bytes");
    const auto crc_hex = manifest_field<std::string>(b, "crc32");
    if (rows < 0 || cols < 0) throw MalformedManifest("block '" + name + "' has a negative dimension");
    if (size != static_cast<std::uint64_t>(rows) * static_cast<std::uint64_t>(cols) * 8)
      throw MalformedManifest("block '" + name + "' byte length does not match rows x cols x 8");
    if (offset != expected_offset) throw MalformedManifest("block '" + name + "' is not at its declared position");
    expected_offset += size;

    if (offset + size > payload.size()) {
      std::ostringstream os;
      os << "payload truncated in block '" << name << "': needs " << size << " bytes at offset " << offset << ", only "
         << (payload.size() > offset ? payload.size() - offset : 0) << " available";
      throw CorruptModel(os.str());
    }
    const std::string_view raw = payload.substr(offset, size);
    if (hex32(crc_of(raw)) != crc_hex) throw CorruptModel("checksum mismatch in block '" + name + "'");

    Eigen::MatrixXd mat(rows, cols);
    for (Index i = 0; i < rows * cols; ++i) mat.data()[i] = read_le(raw.data() + 8 * i);
    d.blocks.emplace_back(name, std::move(mat));
  }
  if (expected_offset != payload.size()) throw CorruptModel("payload has trailing bytes after the last block");
  return d;
}

void expect_shape(const Eigen::MatrixXd& mat, Index rows, Index cols, const char* what) {
  if (mat.rows() != rows || mat.cols() != cols) {
    std::ostringstream os;
    os << "block '" << what << "' is " << mat.rows() << "x" << mat.cols() << ", manifest dimensions imply " << rows
       << "x" << cols;
    throw MalformedManifest(os.str());
  }
}

}  // namespace

std::uint32_t crc32(std::span<const std::byte> bytes) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  const auto* p = reinterpret_cast<const Bytef*>(bytes.data());
  std::size_t left = bytes.size();
  while (left > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(left, 1u << 30));
    crc = ::crc32(crc, p, chunk);
    p += chunk;
    left -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

std::uint32_t model_fingerprint(const ShapeModel& model) {
  std::string payload;
  for (const auto& b : model_blocks(model)) append_le(payload, b.data, b.rows * b.cols);
  return crc_of(payload);
}

std::string encode_model(const ShapeModel& model) {
  return encode("model", model.name(), model.n(), model.m(), model.k(), model_blocks(model));
}

std::string encode_shape(const FaceShape& shape, std::string_view name) {
  return encode("shape", name, shape.size(), 0, 0, {{"mean", shape.coords.data(), shape.size(), 1}});
}

ShapeModel decode_model(std::string_view bytes) {
  const Decoded d = decode(bytes);
  if (d.kind != "model") throw MalformedManifest("container kind is '" + d.kind + "', expected 'model'");
  const auto& mean = d.block("mean");
  const auto& id = d.block("id_basis");
  const auto& exp = d.block("exp_basis");
  const auto& id_sd = d.block("id_stddev");
  const auto& exp_sd = d.block("exp_stddev");
  expect_shape(mean, d.n, 1, "mean");
  expect_shape(id, d.n, d.m, "id_basis");
  expect_shape(exp, d.n, d.k, "exp_basis");
  expect_shape(id_sd, d.m, 1, "id_stddev");
  expect_shape(exp_sd, d.k, 1, "exp_stddev");
  try {
    return ShapeModel(d.name, mean.col(0), id, exp, id_sd.col(0), exp_sd.col(0));
  } catch (const DimensionError& e) {
    throw MalformedManifest(e.what());
  }
}

FaceShape decode_shape(std::string_view bytes) {
  const Decoded d = decode(bytes);
  if (d.kind != "shape") throw MalformedManifest("container kind is '" + d.kind + "', expected 'shape'");
  const auto& mean = d.block("mean");
  expect_shape(mean, d.n, 1, "mean");
  if (d.n % 3 != 0) throw MalformedManifest("shape length is not divisible by 3");
  if (!mean.allFinite()) throw InvalidValue("shape contains non-finite coordinates");
  return FaceShape{mean.col(0)};
}

void save_model(const ShapeModel& model, const std::filesystem::path& path) {
  write_file_atomic(path, encode_model(model));
}

ShapeModel load_model(const std::filesystem::path& path) { return decode_model(read_file(path)); }

void save_shape(const FaceShape& shape, const std::filesystem::path& path, std::string_view name) {
  write_file_atomic(path, encode_shape(shape, name));
}

FaceShape load_shape(const std::filesystem::path& path) { return decode_shape(read_file(path)); }

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw Error("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error("cannot move " + tmp.string() + " to " + path.string());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace idexp
