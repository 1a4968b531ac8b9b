#pragma once

#include <string>
#include <vector>

namespace fastkan::csv {

// Shortest round-trip decimal representation (locale-free, '.' separator).
// Re-parsing the string recovers the exact double.
std::string format(double value);

std::string join_row(const std::vector<std::string>& fields);

// Minimal CSV reader for the files this project writes: comma-separated,
// no quoting, one header row expected by callers that want one.
std::vector<std::string> split_row(const std::string& line);
std::vector<std::vector<std::string>> read_file(const std::string& path);

double parse_double(const std::string& field);

} // namespace fastkan::csv
