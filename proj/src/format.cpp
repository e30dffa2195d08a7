#include "sparse_time/format.hpp"

#include <array>
#include <charconv>

namespace sparsetime {

std::string format_double(double v) {
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return ec == std::errc() ? std::string(buf.data(), ptr) : std::string("nan");
}

std::string format_double(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string("NA");
}

} // namespace sparsetime
