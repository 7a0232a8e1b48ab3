#include <gtest/gtest.h>

#include <unistd.h>

#include <bit>
#include <filesystem>
#include <fstream>

#include "clafr/error.hpp"
#include "clafr/io.hpp"
#include "oracles.hpp"

namespace clafr {
namespace {

namespace fs = std::filesystem;

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("clafr_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

using TensorIo = TempDir;

TEST(TensorFile, GoldenFixtureF64) {
  const Matrix m = io::read_matrix(fs::path(CLAFR_TEST_DATA) / "golden_2x3_f64.ctf");
  EXPECT_EQ(m, (Matrix{{1, 2, 3}, {4, 5, 6}}));
}

TEST(TensorFile, GoldenFixtureF32WidensExactly) {
  const Vector v = io::read_vector(fs::path(CLAFR_TEST_DATA) / "golden_vec3_f32.ctf");
  EXPECT_EQ(v, (Vector{1.5, -0.25, 8.0}));
}

TEST(TensorFile, MinimalFileLayout) {
  const auto bytes = io::encode_tensor(io::Tensor(Matrix{{42}}), io::DType::kF64);
  ASSERT_EQ(bytes.size(), 4u + 1 + 1 + 16 + 8);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "CTF1");
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes[5], 2);
  EXPECT_EQ(bytes[6], 1);   // dims[0] low byte
  EXPECT_EQ(bytes[14], 1);  // dims[1] low byte
  std::uint64_t payload = 0;
  for (int i = 0; i < 8; ++i) payload |= std::uint64_t{bytes[22 + i]} << (8 * i);
  EXPECT_EQ(std::bit_cast<double>(payload), 42.0);
}

TEST_F(TensorIo, RoundTripIsBitwise) {
  Rng rng(17);
  for (auto [r, c] : {std::pair{7, 5}, std::pair{3, 3}, std::pair{0, 4}}) {
    const Matrix m = oracle::random_matrix(rng, r, c);
    const fs::path p = dir_ / "m.ctf";
    io::write_tensor(io::Tensor(m), io::DType::kF64, p);
    const Matrix back = io::read_matrix(p);
    ASSERT_EQ(back.rows(), m.rows());
    ASSERT_EQ(back.cols(), m.cols());
    for (std::size_t i = 0; i < m.values().size(); ++i) {
      EXPECT_EQ(std::bit_cast<std::uint64_t>(back.values()[i]), std::bit_cast<std::uint64_t>(m.values()[i]));
    }
  }
  EXPECT_FALSE(fs::exists(dir_ / ("m.ctf.tmp." + std::to_string(::getpid()))));
}

TEST_F(TensorIo, F32NarrowsOnWrite) {
  const fs::path p = dir_ / "v.ctf";
  io::write_tensor(io::Tensor(Vector{0.1, 1.5}), io::DType::kF32, p);
  const Vector v = io::read_vector(p);
  EXPECT_EQ(v[0], static_cast<double>(0.1f));
  EXPECT_EQ(v[1], 1.5);
  EXPECT_EQ(fs::file_size(p), 6u + 8 + 8);
}

TEST(TensorFile, EmptyDimsRejected) {
  EXPECT_THROW(io::encode_tensor(std::span<const std::uint64_t>{}, std::span<const double>{}, io::DType::kF64),
               FormatError);
  const std::uint64_t three[3] = {1, 1, 1};
  const double one[1] = {0};
  EXPECT_THROW(io::encode_tensor(three, one, io::DType::kF64), FormatError);
}

TEST(TensorFile, DecodeErrorsCarryOffsets) {
  auto good = io::encode_tensor(io::Tensor(Matrix{{1, 2}}), io::DType::kF64);
  auto bad_magic = good;
  bad_magic[0] = 'X';
  try {
    io::decode_tensor(bad_magic);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 0u);
  }
  auto bad_dtype = good;
  bad_dtype[4] = 7;
  try {
    io::decode_tensor(bad_dtype);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 4u);
  }
  auto truncated = good;
  truncated.resize(truncated.size() - 3);
  try {
    io::decode_tensor(truncated);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), truncated.size());
  }
  auto rank0 = good;
  rank0[5] = 0;
  EXPECT_THROW(io::decode_tensor(rank0), FormatError);
}

TEST(TensorFile, MissingFileIsIoError) { EXPECT_THROW(io::read_tensor("/nonexistent/x.ctf"), IoError); }

TEST(TensorFile, RankMismatchRejected) {
  EXPECT_THROW(io::read_vector(fs::path(CLAFR_TEST_DATA) / "golden_2x3_f64.ctf"), FormatError);
  EXPECT_THROW(io::read_matrix(fs::path(CLAFR_TEST_DATA) / "golden_vec3_f32.ctf"), FormatError);
}

TEST(Csv, ParsesRectangularNumbers) {
  EXPECT_EQ(io::parse_csv_matrix("1,2\n3,4"), (Matrix{{1, 2}, {3, 4}}));
  EXPECT_EQ(io::parse_csv_matrix("1e-3,2.5\n"), (Matrix{{0.001, 2.5}}));
  EXPECT_EQ(io::parse_csv_matrix(" -1 , +2\r\n"), (Matrix{{-1, 2}}));
}

TEST(Csv, RaggedRowReportsRow) {
  try {
    io::parse_csv_matrix("1,2\n3");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.row(), 2u);
  }
}

TEST(Csv, NonNumericReportsCell) {
  try {
    io::parse_csv_matrix("1,2\n3,x");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.row(), 2u);
    EXPECT_EQ(e.col(), 2u);
  }
  EXPECT_THROW(io::parse_csv_matrix("1,,2"), ParseError);
  EXPECT_THROW(io::parse_csv_matrix("1,2;3"), ParseError);
}

TEST(Csv, ReadsFile) {
  EXPECT_EQ(io::read_csv_matrix(fs::path(CLAFR_TEST_DATA) / "small.csv"), (Matrix{{1, 2}, {3, 4}}));
}

TEST(Manifest, DefaultsApplied) {
  const auto m = io::parse_manifest(
      "# fixture\nweights = w.ctf\nid_features = id.ctf\nood.textures = t.ctf  # trailing comment\n", "/data");
  EXPECT_EQ(m.weights, fs::path("/data/w.ctf"));
  EXPECT_EQ(m.id_features, fs::path("/data/id.ctf"));
  ASSERT_EQ(m.ood_features.size(), 1u);
  EXPECT_EQ(m.ood_features[0].first, "textures");
  EXPECT_DOUBLE_EQ(m.alpha, 0.9);
  EXPECT_TRUE(m.normalize);
  EXPECT_FALSE(m.bank.has_value());
}

TEST(Manifest, OptionalKeys) {
  const auto m = io::parse_manifest(
      "weights = /abs/w.ctf\nid_features = id.ctf\nood.a = a.ctf\nood.b = b.ctf\n"
      "id_logits = il.ctf\nood_logits.b = bl.ctf\nbank = bank.ctf\nk = 5\nalpha = 0.8\nnormalize = false\n");
  EXPECT_EQ(m.weights, fs::path("/abs/w.ctf"));
  ASSERT_EQ(m.ood_features.size(), 2u);
  EXPECT_EQ(m.ood_features[1].first, "b");
  EXPECT_EQ(m.ood_logits.at("b"), fs::path("bl.ctf"));
  EXPECT_EQ(m.k, 5u);
  EXPECT_DOUBLE_EQ(m.alpha, 0.8);
  EXPECT_FALSE(m.normalize);
}

TEST(Manifest, ValidationErrors) {
  EXPECT_THROW(io::parse_manifest("weights = w\nid_features = i\nood.a = a\nalpha = 1.5\n"), ConfigError);
  EXPECT_THROW(io::parse_manifest("weights = w\nid_features = i\nood.a = a\nalpha = 0\n"), ConfigError);
  EXPECT_THROW(io::parse_manifest("id_features = i\nood.a = a\n"), ConfigError);
  EXPECT_THROW(io::parse_manifest("weights = w\nood.a = a\n"), ConfigError);
  EXPECT_THROW(io::parse_manifest("weights = w\nid_features = i\n"), ConfigError);
  EXPECT_THROW(io::parse_manifest("weights = w\nid_features = i\nood.a = a\ncolour = red\n"), ConfigError);
  EXPECT_THROW(io::parse_manifest("weights w\n"), ParseError);
}

TEST_F(TensorIo, DatasetDimensionCheckHappensAtLoad) {
  io::write_tensor(io::Tensor(Matrix::zeros(3, 2)), io::DType::kF64, dir_ / "w.ctf");
  io::write_tensor(io::Tensor(Matrix::zeros(4, 3)), io::DType::kF64, dir_ / "id.ctf");
  io::write_tensor(io::Tensor(Matrix::zeros(4, 5)), io::DType::kF64, dir_ / "ood.ctf");
  {
    std::ofstream(dir_ / "m.txt") << "weights = w.ctf\nid_features = id.ctf\nood.x = ood.ctf\n";
  }
  const auto manifest = io::load_manifest(dir_ / "m.txt");
  EXPECT_THROW(io::load_dataset(manifest), ShapeError);
  io::write_tensor(io::Tensor(Matrix::zeros(4, 3)), io::DType::kF64, dir_ / "ood.ctf");
  const auto tensors = io::load_dataset(manifest);
  EXPECT_EQ(tensors.ood_features.at(0).second.rows(), 4u);
}

TEST(FormatDouble, RoundTrips) {
  for (double x : {0.1, 1.0 / 3.0, 1e-300, 123456789.125}) {
    EXPECT_EQ(std::stod(io::format_double(x)), x);
  }
}

}  // namespace
}  // namespace clafr
