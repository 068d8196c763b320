#include "pvsdm/lambert_w.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pvsdm/error.hpp"

namespace pvsdm {

namespace {

constexpr int kMaxHalley = 64;
constexpr double kTol = 1e-15;

double initial_w0(double x) {
  if (x < -0.32) {
    // Series about the branch point.
    const double p = std::sqrt(2.0 * (std::numbers::e * x + 1.0));
    return -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
  }
  // Winitzki's approximation, within a few percent everywhere else.
  const double l = std::log1p(x);
  return l * (1.0 - std::log1p(l) / (2.0 + l));
}

}  // namespace

double lambert_w0(double x) {
  constexpr double branch = -1.0 / std::numbers::e;
  if (std::isnan(x) || x < branch) {
    throw DomainError("lambert_w0: argument below -1/e");
  }
  if (x == 0.0) return 0.0;
  if (x == branch) return -1.0;
  if (std::isinf(x)) return x;

  double w = initial_w0(x);
  for (int it = 0; it < kMaxHalley; ++it) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    const double wp1 = w + 1.0;
    if (wp1 == 0.0) break;
    const double denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
    const double step = f / denom;
    w -= step;
    if (std::abs(step) <= kTol * std::abs(w)) break;
  }
  return w;
}

double lambert_w0_of_exp(double z) {
  if (std::isnan(z)) throw DomainError("lambert_w0_of_exp: NaN argument");
  if (z < 1.0) return lambert_w0(std::exp(z));

  // Solve f(w) = w + ln w - z = 0; W(e^z) >= 1 here.
  const double lz = std::log(z);
  double w = z - lz + lz / z;
  for (int it = 0; it < kMaxHalley; ++it) {
    const double f = w + std::log(w) - z;
    const double d1 = 1.0 + 1.0 / w;
    const double d2 = -1.0 / (w * w);
    const double step = f / (d1 - 0.5 * f * d2 / d1);
    w -= step;
    if (std::abs(step) <= kTol * w) break;
  }
  return w;
}

}  // namespace pvsdm
