#include "ulab/numfmt.hpp"

#include <charconv>
#include <cmath>
#include <system_error>

#include "ulab/errors.hpp"

namespace ulab {

std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);  // shortest round-trip form
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view token, const std::string& field) {
    double out = 0.0;
    auto res = std::from_chars(token.data(), token.data() + token.size(), out);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size())
        throw InputError(field + ": cannot parse '" + std::string(token) + "' as a real number");
    return out;
}

long long parse_int(std::string_view token, const std::string& field) {
    long long out = 0;
    auto res = std::from_chars(token.data(), token.data() + token.size(), out);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size())
        throw InputError(field + ": cannot parse '" + std::string(token) + "' as an integer");
    return out;
}

}  // namespace ulab
