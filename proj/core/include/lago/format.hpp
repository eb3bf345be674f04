#pragma once

#include <optional>
#include <span>
#include <string>

namespace lago {

/// Shortest decimal that round-trips to the same double.
std::string format_shortest(double v);

/// Four significant digits, printf "%.4g" style ("n/a" for nullopt or non-finite).
std::string format_sig4(std::optional<double> v);

/// "[a, b, c]" with each element through format_sig4.
std::string format_sig4_list(std::span<const std::optional<double>> values);

}  // namespace lago
