#pragma once

// 50-digit evaluation of the algorithm constants, independent of the library code paths.

#include <cstdint>

#include <boost/multiprecision/cpp_dec_float.hpp>

namespace hp {

using Real = boost::multiprecision::cpp_dec_float_50;

inline Real e15() { return boost::multiprecision::exp(Real(3) / 2); }

inline std::uint64_t counting_pivot(Real eps) {
  const Real base = e15() * boost::multiprecision::pow(1 + 1 / eps, 2);
  return 2 * static_cast<std::uint64_t>(boost::multiprecision::ceil(base));
}

inline std::uint64_t iterations(Real delta) {
  const Real x = 35 * boost::multiprecision::log(3 / delta) / boost::multiprecision::log(Real(2));
  return static_cast<std::uint64_t>(boost::multiprecision::ceil(x));
}

inline Real tolerance(Real k) { return (1 + k) * (Real("2.36") + Real("0.51") / ((1 - k) * (1 - k))) - 1; }

/// Root of tolerance(kappa) = eps by 200 bisection steps in 50-digit arithmetic.
inline Real kappa(Real eps) {
  Real lo = 0, hi = 1;
  for (int i = 0; i < 200; ++i) {
    const Real mid = (lo + hi) / 2;
    (tolerance(mid) < eps ? lo : hi) = mid;
  }
  return (lo + hi) / 2;
}

inline std::uint64_t sampler_pivot(Real k) {
  return static_cast<std::uint64_t>(boost::multiprecision::ceil(e15() * boost::multiprecision::pow(1 + 1 / k, 2)));
}

inline std::uint64_t partitions(Real high, Real low) {
  const Real x = boost::multiprecision::log(high / low) / boost::multiprecision::log(Real(2));
  return static_cast<std::uint64_t>(boost::multiprecision::ceil(x)) + 1;
}

}  // namespace hp
