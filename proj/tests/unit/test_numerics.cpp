#include "dlab/numerics.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace dlab;
using dlab::test::pi;

namespace {

// PV of 1 / (W^2 - w^2) over [lo, hi].
double log_kernel(double lo, double hi, double w) {
  return std::log(std::abs((hi - w) * (lo + w) / ((hi + w) * (lo - w)))) / (2.0 * w);
}

// PV of 1 / ((W^2 + a^2)(W^2 - w^2)) over [lo, hi], by partial fractions.
double lorentz_kernel(double lo, double hi, double a, double w) {
  return (log_kernel(lo, hi, w) - (std::atan(hi / a) - std::atan(lo / a)) / a) / (w * w + a * a);
}

RealSeries sample(const FrequencyGrid& g, auto f) {
  std::vector<double> v(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) v[k] = f(g[k]);
  return RealSeries(g, std::move(v));
}

} // namespace

TEST_CASE("frequency grid validation and layout") {
  CHECK_THROWS_AS(FrequencyGrid(0.0, 1.0, 32), ConfigError);
  CHECK_THROWS_AS(FrequencyGrid(2.0, 1.0, 32), ConfigError);
  CHECK_THROWS_AS(FrequencyGrid(1.0, 2.0, 15), ConfigError);
  CHECK_THROWS_AS(FrequencyGrid(1.0, std::nan(""), 32), ConfigError);

  const FrequencyGrid g(1.0, 4.0, 31);
  CHECK(g.spacing() == doctest::Approx(0.1));
  CHECK(g[0] == 1.0);
  CHECK(g[30] == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(g.samples().size() == 31);

  const FrequencyGrid s = g.slice(5, 25);
  CHECK(s.size() == 21);
  CHECK(s[0] == doctest::Approx(g[5]));
  CHECK(s.spacing() == doctest::Approx(g.spacing()));
  CHECK_THROWS(g.slice(20, 25));  // fewer than min_count samples
}

TEST_CASE("real series rejects mismatched or non-finite data") {
  const FrequencyGrid g(1.0, 2.0, 16);
  CHECK_THROWS_AS(RealSeries(g, std::vector<double>(15, 0.0)), DomainError);
  std::vector<double> bad(16, 0.0);
  bad[3] = std::nan("");
  CHECK_THROWS_AS(RealSeries(g, bad), DomainError);
}

TEST_CASE("principal value of a constant and of W^2 is exact") {
  const FrequencyGrid g(1.0, 10.0, 901);
  const RealSeries one = sample(g, [](double) { return 1.0; });
  const RealSeries sq = sample(g, [](double w) { return w * w; });
  for (double w : {1.5, 3.3, 5.0, 8.77}) {
    CAPTURE(w);
    CHECK(pv_kernel_integral(one, w) == doctest::Approx(log_kernel(1.0, 10.0, w)).epsilon(1e-12));
    CHECK(pv_kernel_integral(sq, w) ==
          doctest::Approx(9.0 + w * w * log_kernel(1.0, 10.0, w)).epsilon(1e-12));
  }
}

TEST_CASE("principal value of a Lorentzian converges at second order") {
  const double a = 2.0;
  auto f = [a](double w) { return 1.0 / (w * w + a * a); };
  double previous = 0.0;
  for (std::size_t n : {1025u, 2049u, 4097u}) {
    const FrequencyGrid g(1.0, 10.0, n);
    const RealSeries s = sample(g, f);
    double worst = 0.0;
    for (double w : {2.0, 3.3, 5.0, 7.25}) {
      worst = std::max(worst, std::abs(pv_kernel_integral(s, w) - lorentz_kernel(1.0, 10.0, a, w)));
    }
    if (previous > 0.0) CHECK(previous / worst > 3.0);
    previous = worst;
  }
  CHECK(previous < 1e-6);
}

TEST_CASE("node evaluation matches off-node evaluation at the node") {
  const FrequencyGrid g(1.0, 10.0, 513);
  const RealSeries s = sample(g, [](double w) { return std::sin(w) / w; });
  for (std::size_t k : {1u, 2u, 100u, 256u, 510u, 511u}) {
    CAPTURE(k);
    CHECK(pv_kernel_integral_at(s, k) == doctest::Approx(pv_kernel_integral(s, g[k])).epsilon(1e-10));
  }
}

TEST_CASE("principal value rejects points outside or at the band edge") {
  const FrequencyGrid g(1.0, 10.0, 101);
  const RealSeries s = sample(g, [](double) { return 1.0; });
  CHECK_FALSE(pv_evaluable(g, 0.5));
  CHECK_FALSE(pv_evaluable(g, 1.0));
  CHECK_FALSE(pv_evaluable(g, 1.0 + 0.5 * g.spacing()));
  CHECK(pv_evaluable(g, g[1]));
  CHECK(pv_evaluable(g, 5.0));
  CHECK_THROWS_AS(pv_kernel_integral(s, 10.0), DomainError);
  CHECK_THROWS_AS(pv_kernel_integral(s, 11.0), DomainError);
}

TEST_CASE("unwrap recovers a steep ramp and is idempotent") {
  std::vector<double> ramp(400), wrapped(400);
  for (std::size_t k = 0; k < ramp.size(); ++k) {
    ramp[k] = -0.1 + 2.9 * static_cast<double>(k);
    wrapped[k] = std::remainder(ramp[k], 2.0 * pi);
  }
  const auto un = unwrap_phase(wrapped);
  for (std::size_t k = 0; k < ramp.size(); ++k) CHECK(un[k] == doctest::Approx(ramp[k]).epsilon(1e-12));
  const auto again = unwrap_phase(un);
  CHECK(again == un);
}

TEST_CASE("line fit keeps the intercept for badly scaled abscissae") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(8e10, 1.3e11);
  std::vector<double> x(200), y(200);
  for (std::size_t k = 0; k < x.size(); ++k) {
    x[k] = u(rng);
    y[k] = 9.1e-10 * x[k] - 77.2;
  }
  const LineFit fit = fit_line(x, y);
  CHECK(fit.slope == doctest::Approx(9.1e-10).epsilon(1e-10));
  CHECK(fit.intercept == doctest::Approx(-77.2).epsilon(1e-6));
  CHECK_THROWS(fit_line(std::vector<double>{1.0}, std::vector<double>{2.0}));
}
