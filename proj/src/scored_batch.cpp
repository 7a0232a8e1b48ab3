#include "clafr/scored_batch.hpp"

#include <charconv>
#include <cmath>

#include "clafr/error.hpp"

namespace clafr {

namespace {

std::uint64_t parse_hex(const std::string& s) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, 16);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ConfigError("bad hash '" + s + "'");
  return v;
}

std::size_t parse_count(const std::string& key, const std::string& s) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ConfigError(key + ": bad count '" + s + "'");
  return v;
}

double parse_real(const std::string& key, const std::string& s) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ConfigError(key + ": bad number '" + s + "'");
  }
  return v;
}

}  // namespace

io::KeyValues Fingerprint::to_key_values() const {
  io::KeyValues kv{{"method", method}};
  if (alpha) kv.emplace_back("alpha", io::format_double(*alpha));
  if (m) kv.emplace_back("m", std::to_string(*m));
  if (normalize) kv.emplace_back("normalize", *normalize ? "true" : "false");
  if (weight_hash) kv.emplace_back("weight_hash", hash_hex(*weight_hash));
  if (k) kv.emplace_back("k", std::to_string(*k));
  return kv;
}

std::string Fingerprint::canonical() const {
  std::string out;
  for (const auto& [key, value] : to_key_values()) {
    if (key == "method") {
      out += value;
    } else {
      out += " " + key + "=" + value;
    }
  }
  return out;
}

Fingerprint Fingerprint::from_key_values(const io::KeyValues& kv) {
  Fingerprint f;
  bool have_method = false;
  for (const auto& [key, value] : kv) {
    if (key == "method") {
      f.method = value;
      have_method = true;
    } else if (key == "alpha") {
      f.alpha = parse_real(key, value);
    } else if (key == "m") {
      f.m = parse_count(key, value);
    } else if (key == "normalize") {
      f.normalize = io::parse_bool(value);
    } else if (key == "weight_hash") {
      f.weight_hash = parse_hex(value);
    } else if (key == "k") {
      f.k = parse_count(key, value);
    }
  }
  if (!have_method) throw ConfigError("fingerprint is missing 'method'");
  return f;
}

}  // namespace clafr
