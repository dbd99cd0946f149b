#pragma once

// Small text/binary output helpers shared by the pipeline stages.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace uwbdfl {

/// Shortest decimal form that parses back to the same double; "-inf"/"inf"/"nan" for specials.
std::string format_number(double v);

std::vector<std::string> split_csv_line(std::string_view line);

/// Parses a CSV number; accepts "inf"/"-inf". Throws FormatError.
double parse_number(std::string_view field);

/// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// 8-bit binary PGM (P5), row 0 written first.
void write_pgm(const std::filesystem::path& path, int width, int height, const std::vector<unsigned char>& pixels);

void write_text_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace uwbdfl
