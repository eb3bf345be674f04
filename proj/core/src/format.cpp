#include "lago/format.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

namespace lago {

std::string format_shortest(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string format_sig4(std::optional<double> v) {
    if (!v || !std::isfinite(*v)) return "n/a";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", *v);
    return buf;
}

std::string format_sig4_list(std::span<const std::optional<double>> values) {
    std::string out = "[";
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ", ";
        out += format_sig4(values[i]);
    }
    return out + "]";
}

}  // namespace lago
