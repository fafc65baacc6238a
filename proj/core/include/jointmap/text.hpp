#pragma once

#include <string>
#include <string_view>
#include <vector>

// Small text helpers shared by the file readers.
namespace jointmap::text {

std::string_view trim(std::string_view s) noexcept;

std::vector<std::string_view> split(std::string_view s, char sep);

// Splits into lines, dropping a trailing '\r' from each.
std::vector<std::string_view> lines(std::string_view s);

// Shortest decimal that round-trips the double exactly.
std::string format_double(double value);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace jointmap::text
