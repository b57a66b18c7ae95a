#include "mhc/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <ostream>

namespace mhc {

std::string format_double(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return {buf.data(), res.ptr};
}

void write_double(std::ostream& out, double v) { out << format_double(v); }

}  // namespace mhc
