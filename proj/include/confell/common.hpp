#ifndef CONFELL_COMMON_HPP
#define CONFELL_COMMON_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace confell {

using rat = boost::multiprecision::cpp_rational;
using bigint = boost::multiprecision::cpp_int;

// Thrown on invalid inputs: malformed ring files, broken preconditions, bad CLI
// arguments.  Size guards throw infeasible_error instead so callers can map the
// two cases to distinct exit codes.
struct input_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct infeasible_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when a computed result contradicts an identity it must satisfy
// (negative dimension, failed deconvolution, rank-consensus breakdown).
struct verification_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::int64_t binomial(std::int64_t n, std::int64_t k) {
  if (k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  std::int64_t r = 1;
  for (std::int64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

inline std::int64_t factorial(int n) {
  std::int64_t r = 1;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

// (2q-1)!! = 1*3*5*...*(2q-1); the q = 0 case is the empty product.
inline std::int64_t double_factorial_odd(int q) {
  std::int64_t r = 1;
  for (int i = 3; i <= 2 * q - 1; i += 2) r *= i;
  return r;
}

}  // namespace confell

#endif
