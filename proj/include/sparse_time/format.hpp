#pragma once

#include <optional>
#include <string>

namespace sparsetime {

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double v);

/// As format_double, or "NA" when empty.
std::string format_double(const std::optional<double>& v);

} // namespace sparsetime
