#include "clafr/io.hpp"

#include <unistd.h>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <system_error>

#include "clafr/error.hpp"

namespace clafr::io {

namespace fs = std::filesystem;

namespace {

constexpr std::size_t kHeaderFixed = 6;  // magic + dtype + rank

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_u64(std::span<const std::uint8_t> b, std::size_t at) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t{b[at + i]} << (8 * i);
  return v;
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t{b[at + i]} << (8 * i);
  return v;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

bool parse_number(std::string_view cell, double& out) {
  const std::string t = trim(cell);
  if (t.empty()) return false;
  const char* begin = t.data();
  const char* end = t.data() + t.size();
  if (*begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  if (path.is_relative() && !base.empty()) return base / path;
  return path;
}

}  // namespace

std::vector<std::uint8_t> encode_tensor(std::span<const std::uint64_t> dims,
                                        std::span<const double> values, DType dtype) {
  if (dims.empty() || dims.size() > 2) {
    throw FormatError("tensor rank must be 1 or 2, got " + std::to_string(dims.size()), 5);
  }
  std::uint64_t count = 1;
  for (auto d : dims) count *= d;
  if (count != values.size()) {
    throw FormatError("value count " + std::to_string(values.size()) +
                          " does not match dims product " + std::to_string(count),
                      kHeaderFixed);
  }
  std::vector<std::uint8_t> out;
  const std::size_t width = dtype == DType::kF64 ? 8 : 4;
  out.reserve(kHeaderFixed + 8 * dims.size() + width * values.size());
  out.insert(out.end(), std::begin(kTensorMagic), std::end(kTensorMagic));
  out.push_back(static_cast<std::uint8_t>(dtype));
  out.push_back(static_cast<std::uint8_t>(dims.size()));
  for (auto d : dims) put_u64(out, d);
  for (double v : values) {
    if (dtype == DType::kF64) {
      put_u64(out, std::bit_cast<std::uint64_t>(v));
    } else {
      put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    }
  }
  return out;
}

std::vector<std::uint8_t> encode_tensor(const Tensor& t, DType dtype) {
  return std::visit(
      [&](const auto& x) -> std::vector<std::uint8_t> {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Matrix>) {
          const std::uint64_t dims[2] = {x.rows(), x.cols()};
          return encode_tensor(dims, x.values(), dtype);
        } else {
          const std::uint64_t dims[1] = {x.size()};
          return encode_tensor(dims, x.values(), dtype);
        }
      },
      t);
}

Tensor decode_tensor(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw FormatError("truncated magic", bytes.size());
  if (std::memcmp(bytes.data(), kTensorMagic, 4) != 0) throw FormatError("bad magic, expected CTF1", 0);
  if (bytes.size() < kHeaderFixed) throw FormatError("truncated header", bytes.size());
  const std::uint8_t dtype_byte = bytes[4];
  if (dtype_byte > 1) throw FormatError("unsupported dtype " + std::to_string(dtype_byte), 4);
  const std::uint8_t rank = bytes[5];
  if (rank < 1 || rank > 2) throw FormatError("unsupported rank " + std::to_string(rank), 5);
  const std::size_t payload_at = kHeaderFixed + 8 * std::size_t{rank};
  if (bytes.size() < payload_at) throw FormatError("truncated dims", bytes.size());

  std::uint64_t dims[2] = {0, 0};
  std::uint64_t count = 1;
  for (std::size_t i = 0; i < rank; ++i) {
    dims[i] = get_u64(bytes, kHeaderFixed + 8 * i);
    if (dims[i] != 0 && count > (std::uint64_t{1} << 60) / dims[i]) {
      throw FormatError("dims product overflows", kHeaderFixed + 8 * i);
    }
    count *= dims[i];
  }
  const std::size_t width = dtype_byte == 1 ? 8 : 4;
  const std::uint64_t expected = payload_at + count * width;
  if (bytes.size() < expected) {
    throw FormatError("truncated payload: expected " + std::to_string(expected) + " bytes, got " +
                          std::to_string(bytes.size()),
                      bytes.size());
  }
  if (bytes.size() > expected) throw FormatError("trailing bytes after payload", expected);

  std::vector<double> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t at = payload_at + i * width;
    values[i] = width == 8 ? std::bit_cast<double>(get_u64(bytes, at))
                           : static_cast<double>(std::bit_cast<float>(get_u32(bytes, at)));
    if (!std::isfinite(values[i])) throw FormatError("non-finite value in payload", at);
  }
  if (rank == 1) return Vector(std::move(values));
  return Matrix(dims[0], dims[1], std::move(values));
}

Tensor read_tensor(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_tensor(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what(), e.offset());
  }
}

Matrix read_matrix(const fs::path& path) {
  Tensor t = read_tensor(path);
  if (auto* m = std::get_if<Matrix>(&t)) return std::move(*m);
  throw FormatError(path.string() + ": expected a rank-2 tensor", 5);
}

Vector read_vector(const fs::path& path) {
  Tensor t = read_tensor(path);
  if (auto* v = std::get_if<Vector>(&t)) return std::move(*v);
  throw FormatError(path.string() + ": expected a rank-1 tensor", 5);
}

void write_tensor(const Tensor& t, DType dtype, const fs::path& path) {
  write_file_atomic(path, encode_tensor(t, dtype));
}

void write_tensor(std::span<const std::uint64_t> dims, std::span<const double> values, DType dtype,
                  const fs::path& path) {
  write_file_atomic(path, encode_tensor(dims, values, dtype));
}

Matrix parse_csv_matrix(const std::string& text) {
  std::vector<std::string> lines;
  {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
  }
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();

  std::vector<double> data;
  std::size_t cols = 0;
  for (std::size_t r = 0; r < lines.size(); ++r) {
    std::size_t col = 0;
    std::string_view rest = lines[r];
    while (true) {
      const auto comma = rest.find(',');
      const std::string_view cell = rest.substr(0, comma);
      double v = 0.0;
      if (!parse_number(cell, v)) {
        throw ParseError("non-numeric cell '" + trim(cell) + "'", r + 1, col + 1);
      }
      data.push_back(v);
      ++col;
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (r == 0) {
      cols = col;
    } else if (col != cols) {
      throw ParseError("ragged row: expected " + std::to_string(cols) + " columns, got " +
                           std::to_string(col),
                       r + 1, 0);
    }
  }
  return Matrix(lines.size(), cols, std::move(data));
}

Matrix read_csv_matrix(const fs::path& path) { return parse_csv_matrix(read_text_file(path)); }

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const fs::path& path, std::span<const std::uint8_t> bytes) {
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw IoError("write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot rename onto " + path.string() + ": " + ec.message());
  }
}

void write_file_atomic(const fs::path& path, const std::string& text) {
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

KeyValues parse_key_values(const std::string& text) {
  KeyValues out;
  std::istringstream in(text);
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", row, 0);
    std::string key = trim(std::string_view(t).substr(0, eq));
    std::string value = trim(std::string_view(t).substr(eq + 1));
    if (key.empty()) throw ParseError("empty key", row, 1);
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

std::string render_key_values(const KeyValues& kv) {
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("expected a boolean, got '" + s + "'");
}

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

DatasetManifest parse_manifest(const std::string& text, const fs::path& base_dir) {
  DatasetManifest m;
  bool have_weights = false, have_id = false;
  for (const auto& [key, value] : parse_key_values(text)) {
    if (key == "weights") {
      m.weights = resolve(base_dir, value);
      have_weights = true;
    } else if (key == "id_features") {
      m.id_features = resolve(base_dir, value);
      have_id = true;
    } else if (key.starts_with("ood.")) {
      m.ood_features.emplace_back(key.substr(4), resolve(base_dir, value));
    } else if (key == "id_logits") {
      m.id_logits = resolve(base_dir, value);
    } else if (key.starts_with("ood_logits.")) {
      m.ood_logits[key.substr(11)] = resolve(base_dir, value);
    } else if (key == "bank") {
      m.bank = resolve(base_dir, value);
    } else if (key == "k") {
      double k = 0;
      if (!parse_number(value, k) || k < 1 || k != std::floor(k)) throw ConfigError("k must be a positive integer");
      m.k = static_cast<std::size_t>(k);
    } else if (key == "alpha") {
      double a = 0;
      if (!parse_number(value, a)) throw ConfigError("alpha is not a number: '" + value + "'");
      m.alpha = a;
    } else if (key == "normalize") {
      m.normalize = parse_bool(value);
    } else {
      throw ConfigError("unknown manifest key '" + key + "'");
    }
  }
  if (!have_weights) throw ConfigError("manifest is missing required key 'weights'");
  if (!have_id) throw ConfigError("manifest is missing required key 'id_features'");
  if (m.ood_features.empty()) throw ConfigError("manifest needs at least one 'ood.<name>' entry");
  if (!(m.alpha > 0.0 && m.alpha <= 1.0)) {
    throw ConfigError("alpha must lie in (0, 1], got " + format_double(m.alpha));
  }
  for (const auto& [name, _] : m.ood_logits) {
    const bool known = std::any_of(m.ood_features.begin(), m.ood_features.end(),
                                   [&](const auto& p) { return p.first == name; });
    if (!known) throw ConfigError("ood_logits." + name + " has no matching ood." + name);
  }
  return m;
}

DatasetManifest load_manifest(const fs::path& path) {
  return parse_manifest(read_text_file(path), path.parent_path());
}

DatasetTensors load_dataset(const DatasetManifest& m) {
  auto check_dim = [](const Matrix& x, std::size_t d, const fs::path& p) {
    if (x.cols() != d) {
      throw ShapeError(p.string() + ": feature dim " + std::to_string(x.cols()) +
                       " does not match weights D = " + std::to_string(d));
    }
  };
  auto check_classes = [](const Matrix& x, std::size_t c, const fs::path& p) {
    if (x.cols() != c) {
      throw ShapeError(p.string() + ": logit count " + std::to_string(x.cols()) +
                       " does not match weights C = " + std::to_string(c));
    }
  };
  DatasetTensors t{read_matrix(m.weights), read_matrix(m.id_features), {}, {}, {}, {}};
  const std::size_t d = t.weights.rows();
  const std::size_t c = t.weights.cols();
  check_dim(t.id_features, d, m.id_features);
  for (const auto& [name, path] : m.ood_features) {
    Matrix x = read_matrix(path);
    check_dim(x, d, path);
    t.ood_features.emplace_back(name, std::move(x));
  }
  if (m.id_logits) {
    t.id_logits = read_matrix(*m.id_logits);
    check_classes(*t.id_logits, c, *m.id_logits);
  }
  for (const auto& [name, path] : m.ood_logits) {
    Matrix x = read_matrix(path);
    check_classes(x, c, path);
    t.ood_logits.emplace(name, std::move(x));
  }
  if (m.bank) {
    t.bank = read_matrix(*m.bank);
    check_dim(*t.bank, d, *m.bank);
  }
  return t;
}

}  // namespace clafr::io
