#ifndef FSHAWKES_MATH_UTIL_HPP
#define FSHAWKES_MATH_UTIL_HPP

#include <cstdint>
#include <string_view>

namespace fshawkes {

// Numerically stable logistic function 1 / (1 + exp(-x)).
double sigmoid(double x);

// log(sigmoid(x)) without overflow for large |x|.
double log_sigmoid(double x);

// log(2 cosh(x)), stable for large |x|.
double log_two_cosh(double x);

// Digamma function for x > 0: upward recurrence into the asymptotic
// regime, then the Bernoulli series. Absolute accuracy ~1e-12 for x >= 1.
double digamma(double x);

// 64-bit FNV-1a over a byte string; used for config fingerprints.
std::uint64_t fnv1a(std::string_view bytes);

}  // namespace fshawkes

#endif
