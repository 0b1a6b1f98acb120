#pragma once

#include <cmath>
#include <cstddef>
#include <cstring>

// Branch-free sine/cosine for the random-feature sums in the spectral
// environment sampler. Written as straight-line arithmetic so the compiler
// vectorizes the loops below without -ffast-math. Accurate to a few ulp for
// |a| < kFastTrigMaxArg; callers fall back to <cmath> beyond that.

namespace dpolymer::detail {

inline constexpr double kFastTrigMaxArg = 8.0e5;

template <class T>
struct SinCosT {
  T sin, cos;
};
using SinCos = SinCosT<double>;

// Works lane-wise for double and for GCC vector types of double.
template <class T>
inline SinCosT<T> fast_sincos_t(T a) noexcept {
  constexpr double two_over_pi = 0.636619772367581343076;
  // pi/2 split into a 33-bit head and its tail, so n * head is exact.
  constexpr double pio2_hi = 1.57079632673412561417e+00;
  constexpr double pio2_lo = 6.07710050650619224932e-11;
  constexpr double magic = 6755399441055744.0;  // 1.5 * 2^52

  const T n = (a * two_over_pi + magic) - magic;
  const T r = (a - n * pio2_hi) - n * pio2_lo;

  // Quadrant n mod 4, as exact small doubles.
  const T fl4 = ((n - 1.5) * 0.25 + magic) - magic;
  const T q = n - 4.0 * fl4;
  const T b1 = ((q - 1.5) * 0.5 + 0.5 + magic) - magic;
  const T b0 = q - 2.0 * b1;

  const T z = r * r;
  const T s =
      r + r * z *
              (-1.66666666666666324348e-01 +
               z * (8.33333333332248946124e-03 +
                    z * (-1.98412698298579493134e-04 +
                         z * (2.75573137070700676789e-06 +
                              z * (-2.50507602534068634195e-08 +
                                   z * 1.58969099521155010221e-10)))));
  const T c =
      1.0 - 0.5 * z +
      z * z *
          (4.16666666666666019037e-02 +
           z * (-1.38888888888741095749e-03 +
                z * (2.48015872894767294178e-05 +
                     z * (-2.75573143513906633035e-07 +
                          z * (2.08757232129817482790e-09 +
                               z * -1.13596475577881948265e-11)))));

  // b0 is exactly 0 or 1, so the blend selects without rounding and without
  // a branch the vectorizer would reject.
  const T sign = 1.0 - 2.0 * b1;
  const T even = 1.0 - b0;
  return {sign * (even * s + b0 * c), sign * (even * c - b0 * s)};
}

inline SinCos fast_sincos(double a) noexcept { return fast_sincos_t(a); }

/// out[k] = xi[k] * cos(phase[k]) + eta[k] * sin(phase[k]).
inline void feature_terms(const double* __restrict phase, const double* __restrict xi,
                          const double* __restrict eta, double* __restrict out,
                          std::size_t count) noexcept {
  int in_range = 1;
  for (std::size_t k = 0; k < count; ++k) {
    in_range &= static_cast<int>(std::fabs(phase[k]) < kFastTrigMaxArg);
  }
  if (in_range) {
    for (std::size_t k = 0; k < count; ++k) {
      const SinCos sc = fast_sincos(phase[k]);
      out[k] = xi[k] * sc.cos + eta[k] * sc.sin;
    }
  } else {
    for (std::size_t k = 0; k < count; ++k) {
      out[k] = xi[k] * std::cos(phase[k]) + eta[k] * std::sin(phase[k]);
    }
  }
}

/// sum_k xi[k] cos(<lam_k, x>) + eta[k] sin(<lam_k, x>) for a compile-time
/// dimension, with lam stored dimension-major (lam_t[c * count + k]). Lane
/// accumulators are combined in a fixed order, so the result does not depend
/// on the instruction set. Requires every |<lam_k, x>| < kFastTrigMaxArg.
template <std::size_t Dim>
inline double feature_sum(const double* __restrict lam_t, const double* __restrict x,
                          const double* __restrict xi, const double* __restrict eta,
                          std::size_t count) noexcept {
  typedef double Vec __attribute__((vector_size(64)));
  constexpr std::size_t kWidth = 8;
  auto load = [](const double* p) {
    Vec v;
    std::memcpy(&v, p, sizeof v);
    return v;
  };
  Vec acc0 = {};
  Vec acc1 = acc0;
  auto block = [&](std::size_t k) {
    Vec phase = load(lam_t + k) * x[0];
    if constexpr (Dim > 1) phase += load(lam_t + count + k) * x[1];
    if constexpr (Dim > 2) phase += load(lam_t + 2 * count + k) * x[2];
    const auto sc = fast_sincos_t(phase);
    return load(xi + k) * sc.cos + load(eta + k) * sc.sin;
  };
  std::size_t k = 0;
  for (; k + 2 * kWidth <= count; k += 2 * kWidth) {
    acc0 += block(k);
    acc1 += block(k + kWidth);
  }
  double acc[2 * kWidth];
  std::memcpy(acc, &acc0, sizeof acc0);
  std::memcpy(acc + kWidth, &acc1, sizeof acc1);
  for (; k < count; ++k) {
    double phase = lam_t[k] * x[0];
    if constexpr (Dim > 1) phase += lam_t[count + k] * x[1];
    if constexpr (Dim > 2) phase += lam_t[2 * count + k] * x[2];
    const SinCos sc = fast_sincos(phase);
    acc[k % (2 * kWidth)] += xi[k] * sc.cos + eta[k] * sc.sin;
  }
  double total = 0.0;
  for (double a : acc) total += a;
  return total;
}

}  // namespace dpolymer::detail
