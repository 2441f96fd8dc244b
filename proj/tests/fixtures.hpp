#pragma once

// Reference values produced by tests/oracles/derive_fixtures.py (numpy, scipy
// and mpmath, sharing no code with the library). p = 3 throughout.

namespace fixtures {

// Zero-temperature ideal-step free energy at m = 0.8, s = 0.4, tau = 0.5.
inline constexpr double closed_step_08 = -0.604841115410472;

// Classical angle at s = tau = 0.5 (10^6-point grid + golden section in 40 digits).
inline constexpr double theta0_half = 0.7126853501385445;

// Critical endpoint of the classical manifold: e' = e'' = e''' = 0.
inline constexpr double endpoint_theta = 1.1502619915109316;
inline constexpr double endpoint_s = 0.5211163989216206;
inline constexpr double endpoint_tau = 0.21393876913398138;
inline constexpr double touching_exponent = 2.3659226408021516;

// Homogeneous transition at T = 0 (and unchanged at T = 0.01).
inline constexpr double homogeneous_s = 0.7698003589195009;
inline constexpr double homogeneous_delta_m = 0.8660254037844386;  // sqrt(3)/2; oracle 0.86602539

// The finite-temperature line at T = 0.01 crossing s = 0.6.
inline constexpr double t001_line_tau = 0.0922734871694281;
inline constexpr double t001_line_delta_m = 0.10934365217564096;

}  // namespace fixtures
