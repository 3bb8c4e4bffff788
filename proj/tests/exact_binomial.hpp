#pragma once

#include <boost/multiprecision/cpp_int.hpp>

// Binomial pmf at p = 2/3 computed in exact rational arithmetic:
// C(n, x) 2^x / 3^n, rounded to double only at the end.
inline double exact_binomial_two_thirds(unsigned x, unsigned n) {
  using boost::multiprecision::cpp_int;
  using boost::multiprecision::cpp_rational;
  cpp_int c = 1;
  for (unsigned k = 1; k <= x; ++k) c = c * (n - x + k) / k;
  const cpp_int num = c << x;
  cpp_int den = 1;
  for (unsigned k = 0; k < n; ++k) den *= 3;
  return static_cast<double>(cpp_rational(num, den));
}
