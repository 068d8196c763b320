#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <string_view>

#include "pvsdm/model.hpp"

namespace pvsdm::test {

inline std::filesystem::path data_dir() { return PVSDM_TEST_DATA_DIR; }
inline std::filesystem::path data_file(std::string_view name) { return data_dir() / name; }

/// Published single-diode sets of the dP/dI closure, as vendored.
inline SingleDiodeParams rtc_proposed() { return {0.760810, 32.65e-8, 1.4830, 0.036234, 54.0092}; }
inline SingleDiodeParams pwp_proposed() { return {1.0324101, 4.58e-6, 1.3807, 1.200576, 1587.571}; }

inline Conditions rtc_conditions() { return {1, 306.0}; }
inline Conditions pwp_conditions() { return {36, 318.0}; }

inline DatasheetSpec rtc_spec() { return {0.7603, 0.5728, 0.6894, 0.4507, 0.3107, 1, 306.0}; }
inline DatasheetSpec pwp_spec() { return {1.03163, 16.7753, 0.9162, 12.6049, 11.55, 36, 318.0}; }

inline double rel_diff(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

/// Two solved currents agree to `rel`, with the solver's absolute floor
/// 1e-12 i_ph near open circuit where the current itself vanishes.
inline bool currents_agree(double a, double b, double i_ph, double rel = 1e-9) {
  return std::abs(a - b) <= std::max(rel * std::max(std::abs(a), std::abs(b)), 1e-12 * i_ph);
}

/// Log-uniform draw on [lo, hi].
inline double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(rng));
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Random cell-level parameter set over the ranges used by the property tests.
inline SingleDiodeParams random_params(std::mt19937_64& rng) {
  SingleDiodeParams p;
  p.i_ph = uniform(rng, 0.1, 10.0);
  p.i_s = log_uniform(rng, 1e-12, 1e-4);
  p.n = uniform(rng, 1.0, 2.0);
  p.r_s = log_uniform(rng, 1e-3, 2.0);
  p.r_sh = log_uniform(rng, 10.0, 1e4);
  return p;
}

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace pvsdm::test
