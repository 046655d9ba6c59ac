#ifndef STORMCLASS_IO_HPP
#define STORMCLASS_IO_HPP

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "stormclass/core.hpp"

namespace stormclass {

/// The exact pixel CSV header.
std::string_view pixel_csv_header();

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);
double parse_double(std::string_view text);

void write_pixels(std::ostream& out, std::span<const PixelRecord> pixels);
void write_pixels(const std::filesystem::path& path, std::span<const PixelRecord> pixels);
/// Throws Schema on a header mismatch and Parse (with the 1-based line number) on a bad row.
std::vector<PixelRecord> read_pixels(std::istream& in);
std::vector<PixelRecord> read_pixels(const std::filesystem::path& path);

/// Groups pixels by image id into grids; geometry is inferred from the max row/col.
std::vector<SceneGrid> to_scenes(std::span<const PixelRecord> pixels, Region region, double pixel_size_km);

std::string read_text(const std::filesystem::path& path);
/// Writes through a temporary file and renames it into place.
void write_text(const std::filesystem::path& path, std::string_view text);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace stormclass

#endif  // STORMCLASS_IO_HPP
