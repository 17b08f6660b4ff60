#pragma once

#include <string>
#include <string_view>

namespace ulab {

// Shortest decimal form that parses back to the identical double.
// All serialized numbers (kernel files, reports) go through this so that
// load -> save -> load round-trips bit-exactly and reports are byte-stable.
std::string format_double(double x);

// Strict full-token parses; throw InputError naming `field` on any failure.
double parse_double(std::string_view token, const std::string& field);
long long parse_int(std::string_view token, const std::string& field);

}  // namespace ulab
