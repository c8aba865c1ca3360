/// @file io.hpp
/// @brief Atomic file output, exact decimal formatting and field dumps.

#pragma once

#include "hsv/field.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace hsv {

/// Writes content to path via a sibling temp file and rename.
/// Throws std::runtime_error on I/O failure.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

/// Shortest-safe decimal with 17 significant digits; parses back bit-exactly.
std::string fmt17(double v);

/// Git-style blob hash: SHA-1 over "blob <len>\0" + content, lowercase hex.
std::string git_blob_hash(std::string_view content);

struct FieldDump {
    SpectralField field;
    PhysParams params;
    double t = 0.0;
};

/// CSV rows (xi1, xi2, component, z_index, re, im) plus a JSON sidecar with
/// grid and params at <csv stem>.json. Both written atomically.
void write_field_dump(const std::filesystem::path& csv_path, const SpectralField& f, const PhysParams& params,
                      double t);

/// Inverse of write_field_dump. Rebuilds the grid from the sidecar and checks
/// the stored nodes agree bit for bit. Throws std::runtime_error on malformed input.
FieldDump read_field_dump(const std::filesystem::path& csv_path);

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path);

}  // namespace hsv
