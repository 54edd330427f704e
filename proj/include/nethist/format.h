#ifndef NETHIST_FORMAT_H_
#define NETHIST_FORMAT_H_

#include <string>

namespace nethist {

// All numeric output is written with this many significant digits so that
// reruns produce byte-identical files.
inline constexpr int kOutputDigits = 10;

// Value rounded to kOutputDigits significant digits.
double round_sig(double value);

// "%.10g" rendering.
std::string format_number(double value);

}  // namespace nethist

#endif  // NETHIST_FORMAT_H_
