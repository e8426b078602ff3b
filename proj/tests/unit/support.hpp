#pragma once

#include "dlab/birefringent_model.hpp"

#include <cmath>
#include <numbers>

namespace dlab::test {

inline constexpr double pi = std::numbers::pi;
inline constexpr double deg = pi / 180.0;
inline constexpr double GHz = 2.0 * pi * 1e9;  // rad/s per GHz
inline constexpr double omega_m = 16.75 * GHz;

inline FrequencyGrid paper_band(std::size_t n = 8192) { return FrequencyGrid(13.0 * GHz, 20.0 * GHz, n); }

inline double rel_err(double a, double b) { return std::abs(a - b) / std::abs(b); }

} // namespace dlab::test
