#pragma once

#include <iosfwd>
#include <string>

namespace mhc {

// Shortest round-trip decimal form; "nan" and "inf"/"-inf" for non-finite values.
std::string format_double(double v);

void write_double(std::ostream& out, double v);

}  // namespace mhc
