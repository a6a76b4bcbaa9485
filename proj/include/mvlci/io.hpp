#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "mvlci/image.hpp"
#include "mvlci/sensing.hpp"

namespace mvlci {

// Binary PGM (P5). Intensities map linearly [0, 1] <-> [0, maxval]; maxval
// 255 stores one byte per sample, 65535 two bytes, big-endian. Values are
// clamped and rounded to the nearest level on write.
void write_pgm(std::ostream& out, const Image& image, unsigned maxval = 255);
void write_pgm(const std::filesystem::path& path, const Image& image, unsigned maxval = 255);
Image read_pgm(std::istream& in);
Image read_pgm(const std::filesystem::path& path);

// MVM1 measurement files: a text header
//   MVM1 / order= / rate= / seed= / rows= / sensors= / width= / height= /
//   noise_sigma= / blank line
// followed by the row indices as little-endian u32 and, per sensor, the
// measurement vector as little-endian f64.
void write_mvm(std::ostream& out, const MeasurementSet& set);
void write_mvm(const std::filesystem::path& path, const MeasurementSet& set);
MeasurementSet read_mvm(std::istream& in);
MeasurementSet read_mvm(const std::filesystem::path& path);

/// Shortest decimal string that parses back to exactly `value`.
std::string format_double(double value);

using Manifest = std::vector<std::pair<std::string, std::string>>;

/// Flat `key=value` lines.
void write_manifest(const std::filesystem::path& path, const Manifest& manifest);
Manifest read_manifest(const std::filesystem::path& path);

}  // namespace mvlci
