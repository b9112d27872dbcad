#pragma once

#include <string>

namespace avp {

// "%.9g": the float format of every CSV the library writes.
std::string format_g9(double v);

// "%.17g": round-trips a double exactly.
std::string format_g17(double v);

}  // namespace avp
