#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "skewflow/basespace.hpp"
#include "skewflow/errors.hpp"

using namespace skewflow;

namespace {

// Composite Simpson, kept apart from the library quadrature on purpose.
template <class F>
double simpson(F f, double a, double b, int n = 20000) {
  const double h = (b - a) / n;
  double acc = f(a) + f(b);
  for (int i = 1; i < n; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

}  // namespace

TEST_CASE("trajectory values") {
  const auto g = TrajectorySpec::exp_decay(1.0, 1.0);
  CHECK(g.value(0.0) == doctest::Approx(2.0));
  CHECK(g.limit() == doctest::Approx(1.0));
  CHECK(trajectory_eval(BasePoint::limit_of(g), 3.0) == doctest::Approx(1.0));
  CHECK(trajectory_eval(BasePoint::at(g, 2.0), 1.0) == doctest::Approx(1.0 + std::exp(-3.0)));

  const auto x1 = TrajectorySpec::interval_decay(1);
  CHECK(x1.value(0.0) == doctest::Approx(1.0 / 3.0 + 1.0 / 12.0).epsilon(1e-12));
  CHECK(x1.value(0.0) == doctest::Approx(0.416667).epsilon(1e-6));
  CHECK(x1.limit() == doctest::Approx(1.0 / 3.0));

  CHECK(TrajectorySpec::constant(2.0).value(17.0) == 2.0);
}

TEST_CASE("interval decay stays inside (1/(2n+1), 1/(2n)]") {
  for (int n : {1, 2, 5, 10, 100}) {
    const auto g = TrajectorySpec::interval_decay(n);
    const double lo = 1.0 / (2 * n + 1), hi = 1.0 / (2 * n);
    for (double u : {0.0, 0.1, 1.0, 5.0, 30.0}) {
      CHECK(g.value(u) > lo);
      CHECK(g.value(u) <= hi + 1e-15);
    }
  }
}

TEST_CASE("invalid trajectories are rejected") {
  CHECK_THROWS_AS(TrajectorySpec::interval_decay(0).validate(), ParamError);
  CHECK_THROWS_AS(TrajectorySpec::exp_decay(0.0, 1.0).validate(), ParamError);
}

TEST_CASE("closed-form log growth") {
  const auto c = TrajectorySpec::constant(1.0);
  CHECK(closed_form_log_growth(c, 0.0, 0.0, 2.0) == doctest::Approx(2.0));

  const auto g = TrajectorySpec::exp_decay(1.0, 1.0);
  CHECK(closed_form_log_growth(g, 0.0, 0.0, 1.0) == doctest::Approx(1.632121).epsilon(1e-6));

  const auto x1 = TrajectorySpec::interval_decay(1);
  // 1 + (1 - e^-3) / 12 = 1.0791844...
  CHECK(closed_form_log_growth(x1, 0.0, 0.0, 3.0) == doctest::Approx(1.0 + (1.0 - std::exp(-3.0)) / 12.0).epsilon(1e-14));

  // Limit points integrate the constant limit.
  CHECK(closed_form_log_growth(BasePoint::limit_of(g), 1.0, 4.0) == doctest::Approx(3.0));
}

TEST_CASE("closed-form growth matches an independent Simpson rule") {
  for (const auto& g : {TrajectorySpec::exp_decay(0.5, 2.0), TrajectorySpec::interval_decay(3),
                        TrajectorySpec::constant(0.7)}) {
    for (double shift : {0.0, 1.5}) {
      const double s = 0.25, t = 6.0;
      const auto x = BasePoint::at(g, shift);
      // The cocycle exponent integrates x(tau - s) over [s, t].
      const double ref = simpson([&](double tau) { return trajectory_eval(x, tau - s); }, s, t);
      CHECK(closed_form_log_growth(x, s, t) == doctest::Approx(ref).epsilon(1e-10));
    }
  }
}

TEST_CASE("labels") {
  const auto g = TrajectorySpec::exp_decay(1.0, 1.0);
  CHECK(BasePoint::limit_of(g).label() == "limit");
  CHECK(BasePoint::at(g, 0.5).label().rfind("shift=", 0) == 0);
}

TEST_CASE("metric properties") {
  const auto g = TrajectorySpec::exp_decay(1.0, 1.0);
  const auto a = BasePoint::at(g, 0.0);
  const auto b = BasePoint::at(g, 1.0);
  const auto lim = BasePoint::limit_of(g);

  CHECK(metric_d(a, a).value == 0.0);
  CHECK(metric_d(a, b).value == doctest::Approx(metric_d(b, a).value));
  CHECK(metric_d(a, b).value > 0.0);
  CHECK(metric_d(a, lim).value <= metric_d(a, b).value + metric_d(b, lim).value + 1e-12);
  CHECK(metric_d(a, b).bound == doctest::Approx(std::ldexp(1.0, -20)));
}

TEST_CASE("metric agrees with a much finer sup grid") {
  // d = sum_k 2^-k s_k / (1 + s_k), s_k the sup of |x - y| over the part
  // of [-k, k] where both shifted trajectories are defined.
  const auto g = TrajectorySpec::exp_decay(1.0, 1.0);
  const auto x = BasePoint::at(g, 0.3);
  const auto y = BasePoint::at(g, 2.0);
  double ref = 0.0;
  for (int k = 1; k <= 20; ++k) {
    double sup = 0.0;
    const double lo = std::max(-static_cast<double>(k), -0.3);
    const int steps = 4000 * k;
    for (int i = 0; i <= steps; ++i) {
      const double tau = lo + (k - lo) * i / steps;
      sup = std::max(sup, std::abs(x(tau) - y(tau)));
    }
    ref += std::ldexp(1.0, -k) * sup / (1.0 + sup);
  }
  CHECK(std::abs(metric_d(x, y).value - ref) < 1e-4);
}
