#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "pspin/model.hpp"

using namespace pspin;

TEST(ModelSpec, Validation) {
  EXPECT_NO_THROW(make_model(3, 0.5, 0.5, 0.0));
  EXPECT_THROW(make_model(2, 0.5, 0.5), domain_error);
  EXPECT_THROW(make_model(3, 1.1, 0.5), domain_error);
  EXPECT_THROW(make_model(3, 0.5, -0.1), domain_error);
  EXPECT_THROW(make_model(3, 0.5, 0.5, -1.0), domain_error);
  EXPECT_THROW(make_model(3, 0.5, 0.5, std::numeric_limits<double>::infinity()), domain_error);
  EXPECT_TRUE(make_model(3, 0.5, 0.5).zero_temperature());
  EXPECT_TRUE(std::isinf(make_model(3, 0.5, 0.5).beta()));
  EXPECT_DOUBLE_EQ(make_model(3, 0.5, 0.5, 0.25).beta(), 4.0);
}

TEST(GammaAt, StepIdeal) {
  EXPECT_EQ(gamma_at(schedule::StepIdeal{}, 0.3, 0.5), 1.0);
  EXPECT_EQ(gamma_at(schedule::StepIdeal{}, 0.7, 0.5), 0.0);
  EXPECT_EQ(gamma_at(schedule::StepIdeal{}, 0.5, 0.5), 1.0);  // the boundary site keeps its field
}

TEST(GammaAt, ResidualStep) {
  EXPECT_DOUBLE_EQ(gamma_at(schedule::ResidualStep{0.2}, 0.9, 0.5), 0.2);
  EXPECT_DOUBLE_EQ(gamma_at(schedule::ResidualStep{0.2}, 0.1, 0.5), 1.0);
}

TEST(GammaAt, FiniteSlopeUnitLimitIsHomogeneous) {
  for (double tau : {0.0, 0.3, 0.8, 1.0})
    for (double x : {0.0, 0.25, 0.5, 1.0}) EXPECT_NEAR(gamma_at(schedule::FiniteSlope{1.0}, x, tau), 1.0 - tau, 1e-15);
}

TEST(GammaAt, Homogeneous) { EXPECT_DOUBLE_EQ(gamma_at(schedule::Homogeneous{}, 0.4, 0.0, 0.3), 0.7); }

TEST(GammaAt, StepDiagonalFractionalSite) {
  // N = 10, tau = 0.25: N(1 - tau) = 7.5, so site 8 carries 0.5.
  const schedule::StepDiagonal sd{10};
  EXPECT_EQ(site_gamma(sd, 7, 10, 0.25, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(site_gamma(sd, 8, 10, 0.25, 0.0), 0.5);
  EXPECT_EQ(site_gamma(sd, 9, 10, 0.25, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(gamma_at(sd, 0.8, 0.25), 0.5);  // round(0.8 * 10) = 8
  // An integer edge leaves no fractional site.
  EXPECT_EQ(site_gamma(sd, 7, 10, 0.3, 0.0), 1.0);
  EXPECT_EQ(site_gamma(sd, 8, 10, 0.3, 0.0), 0.0);
}

TEST(GammaAt, OutOfRangeThrows) {
  EXPECT_THROW(gamma_at(schedule::StepIdeal{}, 1.2, 0.5), domain_error);
  EXPECT_THROW(gamma_at(schedule::StepIdeal{}, -0.1, 0.5), domain_error);
  EXPECT_THROW(gamma_at(schedule::StepIdeal{}, 0.5, 1.5), domain_error);
  EXPECT_THROW(validate(FieldSchedule{schedule::ResidualStep{1.0}}), domain_error);
  EXPECT_THROW(validate(FieldSchedule{schedule::FiniteSlope{0.5}}), domain_error);
  EXPECT_THROW(validate(FieldSchedule{schedule::StepDiagonal{0}}), domain_error);
}

TEST(FieldProfile, WeightsCoverTheUnitInterval) {
  const FieldSchedule all[] = {schedule::Homogeneous{}, schedule::StepIdeal{}, schedule::StepDiagonal{7},
                               schedule::ResidualStep{0.3}, schedule::FiniteSlope{2.5}};
  for (const auto& sched : all)
    for (double tau : {0.0, 0.2, 0.55, 1.0}) {
      const auto prof = field_profile(sched, tau, 0.4);
      double w = 0.0;
      for (const auto& pl : prof.plateaus) w += pl.weight;
      if (prof.ramp) w += prof.ramp->x1 - prof.ramp->x0;
      EXPECT_NEAR(w, 1.0, 1e-14);
    }
}

TEST(Breakpoints, IncludeTheStep) {
  const auto b = breakpoints(schedule::StepIdeal{}, 0.3);
  EXPECT_EQ(b.front(), 0.0);
  EXPECT_EQ(b.back(), 1.0);
  EXPECT_NE(std::find_if(b.begin(), b.end(), [](double x) { return std::fabs(x - 0.7) < 1e-15; }), b.end());
}

TEST(Paths, EndpointsAndShape) {
  const PathSpec paths[] = {path::TauEqualsS{}, path::TauPower{2.366}, path::Ramp{0.4},
                            path::Waypoints{{{0.0, 0.0}, {0.5, 0.1}, {1.0, 1.0}}}};
  for (const auto& ps : paths) {
    EXPECT_EQ(tau_on_path(ps, 0.0), 0.0);
    EXPECT_DOUBLE_EQ(tau_on_path(ps, 1.0), 1.0);
  }
  EXPECT_EQ(tau_on_path(path::HomogeneousAxis{}, 1.0), 0.0);
  EXPECT_EQ(tau_on_path(path::Ramp{0.4}, 0.3), 0.0);
  EXPECT_DOUBLE_EQ(tau_on_path(path::Ramp{0.4}, 0.7), 0.5);
  EXPECT_DOUBLE_EQ(tau_on_path(path::Waypoints{{{0.0, 0.0}, {0.5, 0.1}, {1.0, 1.0}}}, 0.25), 0.05);
  EXPECT_THROW(validate(PathSpec{path::Ramp{1.0}}), domain_error);
  EXPECT_THROW(validate(PathSpec{path::TauPower{0.0}}), domain_error);
  EXPECT_THROW(validate(PathSpec{path::Waypoints{{{0.0, 0.0}, {0.5, 0.6}, {0.7, 0.5}, {1.0, 1.0}}}}), domain_error);
}

TEST(Disorder, Examples) {
  DisorderSpec bim{disorder::Bimodal{0.5}};
  EXPECT_EQ(disorder_average(bim, [](double h) { return h; }), 0.0);
  EXPECT_DOUBLE_EQ(disorder_average(bim, [](double h) { return h * h; }), 0.25);

  DisorderSpec gauss{disorder::Gaussian{1.0}};
  EXPECT_NEAR(disorder_average(gauss, [](double h) { return h * h; }), 1.0, 1e-10);

  DisorderSpec delta{disorder::Gaussian{0.0}};
  EXPECT_EQ(disorder_average(delta, [](double h) { return std::cos(h) + 3.0; }), 4.0);
  EXPECT_EQ(disorder_average(DisorderSpec{}, [](double h) { return h + 2.0; }), 2.0);
}

TEST(Disorder, NonFiniteIntegrandThrows) {
  DisorderSpec gauss{disorder::Gaussian{1.0}};
  EXPECT_THROW(disorder_average(gauss, [](double h) { return h > 0 ? std::nan("") : 0.0; }), numerical_error);
  EXPECT_THROW(validate(DisorderSpec{disorder::Bimodal{-1.0}}), domain_error);
  DisorderSpec bad{disorder::Gaussian{1.0}};
  bad.quadrature_order = 0;
  EXPECT_THROW(validate(bad), domain_error);
}

TEST(Disorder, WeightsSumToOne) {
  for (int order : {1, 2, 5, 16, 64, 128}) {
    const auto& r = gauss_hermite(order);
    double w = 0.0;
    for (double x : r.weights) w += x;
    EXPECT_NEAR(w, 1.0, 1e-12) << order;
  }
}

TEST(Disorder, KinkedAverageMatchesClosedForm) {
  // E|h + c| for h ~ N(0, sigma^2).
  const double sigma = 0.7;
  for (double c : {0.0, 0.3, -1.1, 4.0}) {
    const double exact = sigma * std::sqrt(2.0 / M_PI) * std::exp(-c * c / (2 * sigma * sigma)) +
                         c * std::erf(c / (sigma * std::sqrt(2.0)));
    const double got = gaussian_average_split(sigma, [c](double h) { return std::fabs(h + c); }, -c);
    EXPECT_NEAR(got, exact, 1e-13) << c;
  }
}

TEST(Disorder, ScaledSpec) {
  const DisorderSpec d = scaled(DisorderSpec{disorder::Gaussian{0.5}}, 0.4);
  EXPECT_DOUBLE_EQ(std::get<disorder::Gaussian>(d.kind).sigma, 0.2);
  const DisorderSpec b = scaled(DisorderSpec{disorder::Bimodal{1.0}}, 0.0);
  EXPECT_EQ(std::get<disorder::Bimodal>(b.kind).h0, 0.0);
}
