#include "idexp/container.hpp"
#include "idexp/errors.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <cstring>
#include <filesystem>
#include <limits>

namespace idexp {
namespace {

namespace fs = std::filesystem;

std::string golden_bytes() { return read_file(fs::path(IDEXP_FIXTURE_DIR) / "golden_model.idexp"); }

std::string::size_type payload_start(const std::string& bytes) {
  return bytes.find('\n', bytes.find('\n') + 1) + 1;
}

std::string manifest_of(const std::string& bytes) {
  const auto first = bytes.find('\n') + 1;
  return bytes.substr(first, payload_start(bytes) - 1 - first);
}

std::string with_manifest(const std::string& bytes, const std::string& manifest) {
  return bytes.substr(0, bytes.find('\n') + 1) + manifest + "\n" + bytes.substr(payload_start(bytes));
}

template <class Error>
std::string message_of(const std::string& bytes) {
  try {
    decode_model(bytes);
  } catch (const Error& e) {
    return e.what();
  }
  ADD_FAILURE() << "expected an exception";
  return {};
}

class TempDir : public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("idexp_container_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

TEST(Crc32, KnownAnswers) {
  const std::string check = "123456789";
  EXPECT_EQ(crc32(std::as_bytes(std::span<const char>(check.data(), check.size()))), 0xCBF43926u);
  EXPECT_EQ(crc32({}), 0u);
}

TEST(Container, GoldenFixtureDecodes) {
  const auto model = decode_model(golden_bytes());
  EXPECT_EQ(model.name(), "golden");
  ASSERT_EQ(model.n(), 6);
  ASSERT_EQ(model.m(), 1);
  ASSERT_EQ(model.k(), 1);
  Eigen::VectorXd mean(6);
  mean << 1.0, 2.0, 3.0, -1.5, 0.25, 10.0;
  EXPECT_EQ(model.mean(), mean);
  EXPECT_EQ(model.id_basis()(4, 0), 1.0);
  EXPECT_EQ(model.exp_basis()(5, 0), 2.0);
  EXPECT_EQ(model.id_stddev()(0), 3.0);
  EXPECT_EQ(model.exp_stddev()(0), 0.125);
}

TEST(Container, GoldenFixtureReencodesByteForByte) {
  const auto bytes = golden_bytes();
  EXPECT_EQ(encode_model(decode_model(bytes)), bytes);
}

TEST(Container, ModelRoundTripIsBitExact) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto model = testing::gaussian_model(30 + 3 * static_cast<Index>(seed), 4, 3, seed);
    const auto bytes = encode_model(model);
    const auto back = decode_model(bytes);
    EXPECT_TRUE(identical(model, back));
    EXPECT_EQ(model.name(), back.name());
    EXPECT_EQ(encode_model(back), bytes);
    EXPECT_EQ(model_fingerprint(model), model_fingerprint(back));
  }
}

TEST(Container, PreservesSpecialDoubles) {
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(3);
  mean << -0.0, std::numeric_limits<double>::denorm_min(), 1e308;
  const ShapeModel model("special", mean, Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(0, 1, 0),
                         Eigen::VectorXd::Constant(1, 1e-300), Eigen::VectorXd::Constant(1, 7.0));
  const auto back = decode_model(encode_model(model));
  EXPECT_TRUE(std::signbit(back.mean()(0)));
  EXPECT_EQ(std::memcmp(back.mean().data(), mean.data(), 3 * sizeof(double)), 0);
  EXPECT_EQ(back.id_stddev()(0), 1e-300);
}

TEST(Container, FingerprintTracksContents) {
  const auto a = testing::gaussian_model(12, 2, 2, 1);
  auto mean = a.mean();
  mean(0) = std::nextafter(mean(0), 1e9);
  const ShapeModel b(a.name(), mean, a.id_basis(), a.exp_basis(), a.id_stddev(), a.exp_stddev());
  EXPECT_NE(model_fingerprint(a), model_fingerprint(b));
}

TEST(Container, TruncatedPayloadNamesTheBlock) {
  auto bytes = golden_bytes();
  bytes.resize(bytes.size() - 4);
  const auto msg = message_of<CorruptModel>(bytes);
  EXPECT_NE(msg.find("exp_stddev"), std::string::npos) << msg;

  bytes = golden_bytes();
  bytes.resize(payload_start(bytes) + 50);
  const auto msg2 = message_of<CorruptModel>(bytes);
  EXPECT_NE(msg2.find("id_basis"), std::string::npos) << msg2;
}

TEST(Container, ChecksumMismatchIsCorrupt) {
  auto bytes = golden_bytes();
  bytes[payload_start(bytes) + 60] ^= 0x01;
  const auto msg = message_of<CorruptModel>(bytes);
  EXPECT_NE(msg.find("id_basis"), std::string::npos) << msg;
}

TEST(Container, BadMagicAndTrailingBytesAreCorrupt) {
  auto bytes = golden_bytes();
  bytes[0] = 'X';
  EXPECT_THROW(decode_model(bytes), CorruptModel);
  EXPECT_THROW(decode_model(golden_bytes() + "x"), CorruptModel);
  EXPECT_THROW(decode_model(""), CorruptModel);
  EXPECT_THROW(decode_model("IDEXP-CONTAINER\n{}"), CorruptModel);
}

TEST(Container, UnknownVersionIsRejected) {
  const auto bytes = golden_bytes();
  auto manifest = nlohmann::ordered_json::parse(manifest_of(bytes));
  manifest["format_version"] = 2;
  const auto msg = message_of<UnsupportedVersion>(with_manifest(bytes, manifest.dump()));
  EXPECT_NE(msg.find('2'), std::string::npos);
}

TEST(Container, MalformedManifestsAreRejected) {
  const auto bytes = golden_bytes();
  const auto base = nlohmann::ordered_json::parse(manifest_of(bytes));
  auto edit = [&](auto&& mutate) {
    auto j = base;
    mutate(j);
    return with_manifest(bytes, j.dump());
  };
  EXPECT_THROW(decode_model(with_manifest(bytes, "{not json")), MalformedManifest);
  EXPECT_THROW(decode_model(with_manifest(bytes, "[]")), MalformedManifest);
  EXPECT_THROW(decode_model(edit([](auto& j) { j.erase("units"); })), MalformedManifest);
  EXPECT_THROW(decode_model(edit([](auto& j) { j["units"] = "cm"; })), MalformedManifest);
  EXPECT_THROW(decode_model(edit([](auto& j) { j["layout"]["order"] = "row-major"; })), MalformedManifest);
  EXPECT_THROW(decode_model(edit([](auto& j) { j["n"] = "six"; })), MalformedManifest);
  EXPECT_THROW(decode_model(edit([](auto& j) { j["n"] = 9; })), MalformedManifest);
  EXPECT_THROW(decode_model(edit([](auto& j) { j["blocks"][1]["rows"] = 5; })), MalformedManifest);
  EXPECT_THROW(decode_model(edit([](auto& j) { j["blocks"][2]["offset"] = 0; })), MalformedManifest);
  EXPECT_THROW(decode_model(edit([](auto& j) { j["blocks"].erase(4); })), CorruptModel);
  EXPECT_THROW(decode_model(edit([](auto& j) { j["kind"] = "shape"; })), MalformedManifest);
}

TEST(Container, ShapeRoundTrip) {
  Eigen::VectorXd coords(6);
  coords << 0.5, -1, 2, 3, 4, 5;
  const auto bytes = encode_shape(FaceShape{coords}, "probe");
  EXPECT_EQ(decode_shape(bytes).coords, coords);
  EXPECT_THROW(decode_model(bytes), MalformedManifest);
  EXPECT_THROW(decode_shape(golden_bytes()), MalformedManifest);
}

TEST_F(TempDir, FilesRoundTripAndLeaveNoTemporaries) {
  const auto model = testing::gaussian_model(24, 3, 2, 9);
  const auto path = dir_ / "model.idexp";
  save_model(model, path);
  EXPECT_TRUE(identical(load_model(path), model));
  save_model(model, path);
  EXPECT_EQ(read_file(path), encode_model(model));

  const FaceShape shape{Eigen::VectorXd::LinSpaced(9, -4, 4)};
  save_shape(shape, dir_ / "shape.idexp");
  EXPECT_EQ(load_shape(dir_ / "shape.idexp").coords, shape.coords);

  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir_)) ++entries;
  EXPECT_EQ(entries, 2u);
}

TEST_F(TempDir, MissingFileIsAnError) {
  EXPECT_THROW(load_model(dir_ / "absent.idexp"), Error);
}

}  // namespace
}  // namespace idexp
