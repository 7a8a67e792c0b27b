#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gsmd {

// Value parsing shared by presets and the config reader. All throw
// ValidationError naming `what` on malformed input.
double parse_double(const std::string& text, const std::string& what);
long long parse_int(const std::string& text, const std::string& what);
std::uint64_t parse_u64(const std::string& text, const std::string& what);
std::vector<double> parse_double_list(const std::string& text, const std::string& what);
std::vector<std::string> split_list(const std::string& text);
std::string trim(const std::string& s);

/// Shortest decimal form that reads back to the same double.
std::string format_double(double v);

}  // namespace gsmd
