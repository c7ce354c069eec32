#pragma once

#include <numbers>

// Time is in microseconds throughout. Frequencies quoted as "2pi x MHz" are
// converted once at the input boundary; everything inside the library is
// angular (rad/us).
namespace collrabi::units {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

constexpr double mhz_to_angular(double mhz) { return kTwoPi * mhz; }
constexpr double angular_to_mhz(double rad_per_us) { return rad_per_us / kTwoPi; }

// Inverse-variance coefficient alpha of a Gaussian shift distribution
// exp(-alpha Delta^2) with standard deviation sigma (rad/us).
constexpr double alpha_from_sigma(double sigma) { return 1.0 / (2.0 * sigma * sigma); }
double sigma_from_alpha(double alpha);

}  // namespace collrabi::units
