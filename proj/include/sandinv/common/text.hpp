#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace sandinv::text {

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::vector<std::string> split_ws(std::string_view s);

/// Strict numeric parsing; throws InvalidArgument naming `what` on junk.
double parse_double(std::string_view s, std::string_view what);
long long parse_int(std::string_view s, std::string_view what);

/// Round-trippable shortest-ish formatting (%.17g).
std::string fmt_double(double v);
/// Compact formatting for human-facing files (%.9g).
std::string fmt_short(double v);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace sandinv::text
