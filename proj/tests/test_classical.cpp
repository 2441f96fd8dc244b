#include <gtest/gtest.h>

#include <boost/math/special_functions/bessel.hpp>
#include <cmath>
#include <numbers>

#include "pspin/classical.hpp"

using namespace pspin;

namespace {

SASpec sa(double beta0, double tau, DisorderSpec d = {}) { return SASpec{3, beta0, tau, d}; }

std::vector<double> unit_grid(int n) {
  std::vector<double> g;
  for (int k = 0; k < n; ++k) g.push_back(double(k) / (n - 1));
  return g;
}

}  // namespace

TEST(SA, ZeroMagnetization) {
  const DisorderSpec bim{disorder::Bimodal{0.5}};
  EXPECT_NEAR(sa_free_energy(0.0, sa(2.0, 0.4, bim)), -0.4 * log2cosh(1.0), 1e-15);
  EXPECT_EQ(sa_free_energy(0.0, sa(2.0, 0.0)), 0.0);
  EXPECT_TRUE(std::isinf(sa_free_energy(0.1, sa(2.0, 0.0))));
  EXPECT_THROW(sa_free_energy(0.0, sa(0.0, 0.5)), domain_error);
}

TEST(SA, FirstOrderJumpSurvivesRandomFields) {
  for (double h0 : {0.5, 1.0}) {
    const auto c = sa_order_parameter_curve(sa(2.0, 0.0, DisorderSpec{disorder::Bimodal{h0}}), unit_grid(101));
    ASSERT_FALSE(c.transitions.empty()) << h0;
    const auto& tp = c.transitions.front();
    EXPECT_GT(tp.location.tau, 0.0);
    EXPECT_LT(tp.location.tau, 1.0);
    EXPECT_GT(tp.delta_m, 1e-3);
  }
}

TEST(SA, HotTargetStaysParamagnetic) {
  const auto c = sa_order_parameter_curve(sa(0.1, 0.0, DisorderSpec{disorder::Bimodal{0.5}}), unit_grid(101));
  EXPECT_TRUE(c.transitions.empty());
}

TEST(SA, MinimaAreFixedPoints) {
  for (double beta0 : {0.5, 2.0, 4.0})
    for (double tau : {0.2, 0.6, 1.0})
      for (const DisorderSpec& d : {DisorderSpec{}, DisorderSpec{disorder::Bimodal{0.5}},
                                    DisorderSpec{disorder::Gaussian{0.4}}}) {
        const auto spec = sa(beta0, tau, d);
        const auto l = scan_landscape(SAFreeEnergy(spec));
        for (const auto& mn : l.minima) {
          if (mn.m >= tau * beta0 * (1 - 1e-9)) continue;  // the reachable boundary
          EXPECT_LE(std::fabs(sa_stationarity_residual(mn.m, spec)), 1e-8) << beta0 << " " << tau;
        }
      }
}

TEST(SVMC, ZeroMagnetizationHomogeneous) {
  for (double s : {0.0, 0.3, 0.8})
    for (double T : {0.05, 0.5, 2.0}) {
      const double beta = 1.0 / T;
      const double z = beta * (1.0 - s);
      const double ref = -std::log(2.0 * std::numbers::pi * boost::math::cyl_bessel_i(0, z)) / beta;
      EXPECT_NEAR(svmc_free_energy(0.0, make_model(3, s, 0.0, T), FieldSchedule{schedule::Homogeneous{}}), ref,
                  1e-12 * std::max(1.0, std::fabs(ref)));
    }
}

TEST(SVMC, ZeroTemperatureDelegates) {
  const auto spec = make_model(3, 0.6, 0.3);
  for (double m : {0.0, 0.5, 1.0})
    EXPECT_EQ(svmc_free_energy(m, spec, FieldSchedule{schedule::StepIdeal{}}),
              FreeEnergy(spec, FieldSchedule{schedule::StepIdeal{}}).value(m));
}

TEST(SVMC, ApproachesQuantumAsTemperatureFalls) {
  // The rotor entropy decays like ln(beta)/beta, so the gap shrinks monotonically.
  const FieldSchedule step = schedule::StepIdeal{};
  double prev = 1e9;
  for (double beta : {1e2, 1e3, 1e4, 1e5, 1e6, 1e7}) {
    double worst = 0.0;
    for (double m : {0.1, 0.5, 0.9})
      for (double s : {0.3, 0.7})
        for (double tau : {0.0, 0.4}) {
          const double q = FreeEnergy(make_model(3, s, tau), step).value(m);
          const double c = svmc_free_energy(m, make_model(3, s, tau, 1.0 / beta), step);
          worst = std::max(worst, std::fabs(q - c));
        }
    EXPECT_LT(worst, prev) << beta;
    prev = worst;
  }
  EXPECT_LE(prev, 1e-5);
}

TEST(SVMC, ClassicalTargetLimit) {
  // Gamma = 0 everywhere (tau = 1 step): pure classical p-spin once beta is large.
  const double beta = 1e7;
  for (double m : {0.3, 0.6, 0.95}) {
    const double s = 0.8;
    const double ref = s * 2 * std::pow(m, 3) - s * 3 * m * m;
    const double got = svmc_free_energy(m, make_model(3, s, 1.0, 1.0 / beta), FieldSchedule{schedule::StepIdeal{}});
    EXPECT_NEAR(got, ref, 1e-5);
  }
}
