#include "mvlci/io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

namespace mvlci {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");
  return in;
}

// Next whitespace-delimited header token, skipping '#' comments.
std::string pgm_token(std::istream& in) {
  std::string token;
  int c = in.get();
  for (;;) {
    while (c != EOF && std::isspace(c)) c = in.get();
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
      continue;
    }
    break;
  }
  while (c != EOF && !std::isspace(c) && c != '#') {
    token.push_back(static_cast<char>(c));
    c = in.get();
  }
  if (token.empty()) throw Error("read_pgm: truncated header");
  // The single whitespace after the last header field is consumed above.
  if (c == '#') in.unget();
  return token;
}

unsigned long parse_unsigned(const std::string& s, const char* what) {
  unsigned long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(std::string(what) + ": invalid integer '" + s + "'");
  }
  return v;
}

double parse_double(const std::string& s, const char* what) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(std::string(what) + ": invalid number '" + s + "'");
  }
  return v;
}

void put_le(std::ostream& out, std::uint64_t bits, int bytes) {
  char buf[8];
  for (int i = 0; i < bytes; ++i) buf[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
  out.write(buf, bytes);
}

std::uint64_t get_le(std::istream& in, int bytes) {
  unsigned char buf[8];
  if (!in.read(reinterpret_cast<char*>(buf), bytes)) throw Error("read_mvm: truncated payload");
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw Error("format_double: conversion failed");
  return std::string(buf, ptr);
}

void write_pgm(std::ostream& out, const Image& image, unsigned maxval) {
  if (maxval != 255 && maxval != 65535) throw Error("write_pgm: maxval must be 255 or 65535");
  if (image.empty()) throw Error("write_pgm: empty image");
  out << "P5\n" << image.width() << ' ' << image.height() << '\n' << maxval << '\n';
  const bool wide = maxval > 255;
  std::vector<char> bytes;
  bytes.reserve(image.size() * (wide ? 2 : 1));
  for (double v : image.pixels()) {
    const double c = std::isfinite(v) ? std::clamp(v, 0.0, 1.0) : 0.0;
    const auto level = static_cast<unsigned>(std::lround(c * maxval));
    if (wide) bytes.push_back(static_cast<char>(level >> 8));
    bytes.push_back(static_cast<char>(level & 0xff));
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write_pgm: write failed");
}

void write_pgm(const std::filesystem::path& path, const Image& image, unsigned maxval) {
  auto out = open_out(path);
  write_pgm(out, image, maxval);
}

Image read_pgm(std::istream& in) {
  if (pgm_token(in) != "P5") throw Error("read_pgm: not a binary PGM (P5) file");
  const auto width = parse_unsigned(pgm_token(in), "read_pgm width");
  const auto height = parse_unsigned(pgm_token(in), "read_pgm height");
  const auto maxval = parse_unsigned(pgm_token(in), "read_pgm maxval");
  if (width == 0 || height == 0) throw Error("read_pgm: empty image");
  if (maxval == 0 || maxval > 65535) throw Error("read_pgm: maxval out of range");
  const bool wide = maxval > 255;
  std::vector<unsigned char> bytes(width * height * (wide ? 2 : 1));
  if (!in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()))) {
    throw Error("read_pgm: truncated pixel data");
  }
  Image image(width, height);
  auto px = image.pixels();
  const double scale = static_cast<double>(maxval);
  for (std::size_t i = 0; i < px.size(); ++i) {
    const unsigned level = wide ? (unsigned{bytes[2 * i]} << 8) | bytes[2 * i + 1] : bytes[i];
    if (level > maxval) throw Error("read_pgm: sample exceeds maxval");
    px[i] = static_cast<double>(level) / scale;
  }
  return image;
}

Image read_pgm(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_pgm(in);
}

void write_mvm(std::ostream& out, const MeasurementSet& set) {
  set.validate();
  out << "MVM1\n"
      << "order=" << set.spec.order << '\n'
      << "rate=" << format_double(set.spec.rate) << '\n'
      << "seed=" << set.spec.seed << '\n'
      << "rows=" << set.spec.rows.size() << '\n'
      << "sensors=" << set.z.size() << '\n'
      << "width=" << set.width << '\n'
      << "height=" << set.height << '\n'
      << "noise_sigma=" << format_double(set.noise_sigma) << '\n'
      << '\n';
  for (std::uint32_t r : set.spec.rows) put_le(out, r, 4);
  for (const auto& zk : set.z) {
    for (double v : zk) put_le(out, std::bit_cast<std::uint64_t>(v), 8);
  }
  if (!out) throw Error("write_mvm: write failed");
}

void write_mvm(const std::filesystem::path& path, const MeasurementSet& set) {
  auto out = open_out(path);
  write_mvm(out, set);
}

MeasurementSet read_mvm(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "MVM1") throw Error("read_mvm: missing MVM1 magic");
  std::map<std::string, std::string> fields;
  while (std::getline(in, line) && !line.empty()) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error("read_mvm: malformed header line '" + line + "'");
    fields[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto field = [&](const char* key) -> const std::string& {
    auto it = fields.find(key);
    if (it == fields.end()) throw Error(std::string("read_mvm: header lacks '") + key + "'");
    return it->second;
  };

  MeasurementSet set;
  set.spec.order = parse_unsigned(field("order"), "read_mvm order");
  set.spec.rate = parse_double(field("rate"), "read_mvm rate");
  {
    const std::string& s = field("seed");
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), set.spec.seed);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw Error("read_mvm seed: invalid integer '" + s + "'");
    }
  }
  const auto rows = parse_unsigned(field("rows"), "read_mvm rows");
  const auto sensors = parse_unsigned(field("sensors"), "read_mvm sensors");
  set.width = parse_unsigned(field("width"), "read_mvm width");
  set.height = parse_unsigned(field("height"), "read_mvm height");
  set.noise_sigma = parse_double(field("noise_sigma"), "read_mvm noise_sigma");
  set.spec.pixel_count = set.width * set.height;
  if (rows > set.spec.order || sensors == 0 || sensors > 64) {
    throw Error("read_mvm: implausible row or sensor count");
  }

  set.spec.rows.resize(rows);
  for (auto& r : set.spec.rows) r = static_cast<std::uint32_t>(get_le(in, 4));
  set.z.assign(sensors, std::vector<double>(rows));
  for (auto& zk : set.z) {
    for (double& v : zk) v = std::bit_cast<double>(get_le(in, 8));
  }
  set.validate();
  return set;
}

MeasurementSet read_mvm(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_mvm(in);
}

void write_manifest(const std::filesystem::path& path, const Manifest& manifest) {
  auto out = open_out(path);
  for (const auto& [key, value] : manifest) out << key << '=' << value << '\n';
  if (!out) throw Error("write_manifest: write failed");
}

Manifest read_manifest(const std::filesystem::path& path) {
  auto in = open_in(path);
  Manifest manifest;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    manifest.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }
  return manifest;
}

}  // namespace mvlci
