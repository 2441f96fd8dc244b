#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "pspin/special.hpp"

using namespace pspin;

namespace {

// e^{-z} I_n(z) = (1/pi) int_0^pi e^{z (cos t - 1)} cos(n t) dt; the
// trapezoid rule is spectrally accurate for this periodic integrand.
double scaled_bessel_trapezoid(double z, int n) {
  const int m = 20000;
  const double h = std::numbers::pi / m;
  double sum = 0.0;
  for (int k = 0; k <= m; ++k) {
    const double t = k * h;
    const double w = (k == 0 || k == m) ? 0.5 : 1.0;
    sum += w * std::exp(z * (std::cos(t) - 1.0)) * std::cos(n * t);
  }
  return sum * h / std::numbers::pi;
}

}  // namespace

TEST(LogCosh, NoOverflow) {
  EXPECT_DOUBLE_EQ(log2cosh(0.0), std::log(2.0));
  EXPECT_DOUBLE_EQ(log2cosh(1e4), 1e4);
  EXPECT_DOUBLE_EQ(log2cosh(-1e4), 1e4);
  EXPECT_NEAR(log2cosh(1.3), std::log(2.0 * std::cosh(1.3)), 1e-15);
}

TEST(ThermalAmplitude, ZeroTemperatureIsExact) {
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_EQ(thermal_amplitude(0.37, inf), 0.37);
  EXPECT_EQ(thermal_polarization(0.37, inf), 1.0);
  EXPECT_EQ(thermal_polarization(0.0, inf), 0.0);
  EXPECT_NEAR(thermal_amplitude(0.5, 1e3), 0.5, 1e-300 + 1e-15);
  EXPECT_NEAR(thermal_amplitude(0.0, 1e3), std::log(2.0) / 1e3, 1e-18);
}

TEST(Bessel, MatchesIntegralDefinition) {
  for (double z = 0.0; z <= 700.0; z += (z < 40.0 ? 0.25 : 7.0)) {
    for (int n : {0, 1}) {
      const double ref = scaled_bessel_trapezoid(z, n);
      const double got = n == 0 ? bessel_i0_scaled(z) : bessel_i1_scaled(z);
      // Relative to the I0 scale: I1 vanishes at z = 0.
      EXPECT_NEAR(got, ref, 1e-12 * scaled_bessel_trapezoid(z, 0)) << "z=" << z << " n=" << n;
    }
  }
}

TEST(Bessel, ContinuousAcrossTheSwitch) {
  const double z = detail::bessel_switch;
  for (int n : {0, 1}) {
    const double below = detail::bessel_series(z, n);
    const double above = detail::bessel_asymptotic(z, n);
    EXPECT_NEAR(below, above, 1e-14 * below);
  }
}

TEST(Rotor, LargeArgumentIsStable) {
  const double r = 0.8;
  for (double beta : {1.0, 10.0, 1e3, 1e6}) {
    const double a = rotor_amplitude(r, beta);
    EXPECT_TRUE(std::isfinite(a));
    // ln(2 pi I0(z)) = z + ln(2 pi) + ln(e^{-z} I0(z)).
    EXPECT_NEAR(a, r + (std::log(2.0 * std::numbers::pi) + std::log(bessel_i0_scaled(beta * r))) / beta, 1e-14);
  }
  EXPECT_NEAR(rotor_polarization(0.8, 1e6), 1.0, 1e-6);
  EXPECT_EQ(rotor_polarization(0.0, 10.0), 0.0);
}
