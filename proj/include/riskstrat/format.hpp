#pragma once

#include <string>

namespace riskstrat {

// printf "%.<digits>g"; "nan", "inf" and "-inf" for non-finite values.
std::string format_sig(double value, int digits = 6);

}  // namespace riskstrat
