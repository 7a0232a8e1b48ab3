#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "clafr/tensor.hpp"

namespace clafr::io {

// TensorFile layout, all multi-byte fields little-endian:
//   "CTF1" | dtype u8 (0 = f32, 1 = f64) | rank u8 (1 or 2) | rank × u64 dims | payload
// The payload is row-major and holds product(dims) values of the dtype.

enum class DType : std::uint8_t { kF32 = 0, kF64 = 1 };

inline constexpr char kTensorMagic[4] = {'C', 'T', 'F', '1'};

using Tensor = std::variant<Matrix, Vector>;

/// Encodes raw dims + values into TensorFile bytes. Throws FormatError for
/// rank outside {1, 2} or a value count that disagrees with dims.
std::vector<std::uint8_t> encode_tensor(std::span<const std::uint64_t> dims,
                                        std::span<const double> values, DType dtype);
std::vector<std::uint8_t> encode_tensor(const Tensor& t, DType dtype);

/// Parses TensorFile bytes, widening f32 payloads to f64. Throws FormatError
/// with the offending byte offset.
Tensor decode_tensor(std::span<const std::uint8_t> bytes);

Tensor read_tensor(const std::filesystem::path& path);
/// Rank-2 tensor; a rank-1 file is rejected.
Matrix read_matrix(const std::filesystem::path& path);
/// Rank-1 tensor; a rank-2 file is rejected.
Vector read_vector(const std::filesystem::path& path);

void write_tensor(const Tensor& t, DType dtype, const std::filesystem::path& path);
void write_tensor(std::span<const std::uint64_t> dims, std::span<const double> values, DType dtype,
                  const std::filesystem::path& path);

/// Rectangular numeric CSV: ',' delimiter, '.' decimal point, no header.
/// Blank trailing lines are ignored. Throws ParseError with 1-based row/column.
Matrix parse_csv_matrix(const std::string& text);
Matrix read_csv_matrix(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
/// Writes to a sibling temporary file and renames it over `path`, so readers
/// never observe a partial file.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path, const std::string& text);

/// Ordered `key = value` pairs. Grammar: one pair per line, `#` starts a
/// comment, surrounding whitespace is trimmed, blank lines are skipped.
using KeyValues = std::vector<std::pair<std::string, std::string>>;
KeyValues parse_key_values(const std::string& text);
std::string render_key_values(const KeyValues& kv);

/// Inputs for a benchmark run, as listed in a manifest file.
///
/// Keys: `weights` and `id_features` (required), one or more
/// `ood.<name> = path` entries (required, order kept), optional
/// `id_logits` / `ood_logits.<name>`, optional `bank` plus `k` for KNN,
/// `alpha` (default 0.9) and `normalize` (default true). Relative paths are
/// resolved against the manifest's directory.
struct DatasetManifest {
  std::filesystem::path id_features;
  std::vector<std::pair<std::string, std::filesystem::path>> ood_features;
  std::filesystem::path weights;
  std::optional<std::filesystem::path> id_logits;
  std::map<std::string, std::filesystem::path> ood_logits;
  std::optional<std::filesystem::path> bank;
  std::size_t k = 10;
  double alpha = 0.9;
  bool normalize = true;
};

DatasetManifest parse_manifest(const std::string& text, const std::filesystem::path& base_dir = {});
DatasetManifest load_manifest(const std::filesystem::path& path);

/// Tensors referenced by a manifest, after the feature-dimension check.
struct DatasetTensors {
  Matrix weights;
  Matrix id_features;
  std::vector<std::pair<std::string, Matrix>> ood_features;
  std::optional<Matrix> id_logits;
  std::map<std::string, Matrix> ood_logits;
  std::optional<Matrix> bank;
};

/// Loads every tensor and checks that D agrees with the weights' row count
/// (and C with logits' column count). Throws ShapeError on disagreement.
DatasetTensors load_dataset(const DatasetManifest& m);

bool parse_bool(const std::string& s);
/// Shortest text that parses back to exactly `x`.
std::string format_double(double x);

}  // namespace clafr::io
