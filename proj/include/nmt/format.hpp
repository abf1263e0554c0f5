#pragma once

#include <string>

namespace nmt {

/// Shortest decimal text that round-trips to the same double. Non-finite
/// values print as "nan", "inf" and "-inf".
std::string format_double(double value);

}  // namespace nmt
