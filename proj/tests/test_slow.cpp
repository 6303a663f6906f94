#include <doctest.h>

#include <cmath>

#include "abering/analysis.hpp"
#include "abering/dtmc.hpp"
#include "abering/experiment.hpp"
#include "abering/sim.hpp"

using namespace abering;

namespace {

constexpr int kThreads = 2;

SimConfig lockstep(int n, double a0) {
  SimConfig cfg;
  cfg.n = n;
  cfg.a0 = a0;
  cfg.delay = DelayModel::deterministic(1.0);
  cfg.clock = ClockModel::unit();
  return cfg;
}

}  // namespace

TEST_CASE("exact n=6 chain pins the lockstep Monte Carlo mean within 2%") {
  const double a0 = 0.0545;
  DtmcOptions opts;
  opts.max_states = 5'000'000;  // n=6 stays far below this
  const DtmcModel model = build_dtmc(6, a0, opts);
  const double exact = expected_rounds(model);

  const BatchStats stats = run_batch(lockstep(6, a0), 100000, 606060, kThreads);
  REQUIRE(stats.ok());
  const double rel = std::abs(stats.time.mean - exact) / exact;
  MESSAGE("exact=", exact, " sim=", stats.time.mean, " rel=", rel);
  CHECK(rel < 0.02);
}

TEST_CASE("messages per node stay flat from n=50 to n=200") {
  SimConfig base;
  base.delay = DelayModel::exponential(1.0);
  const auto points = scaling_study(base, {50, 100, 200}, 5000, 42024, kThreads);
  double lo = 1e300, hi = 0.0;
  for (const auto& p : points) {
    REQUIRE(p.stats.ok());
    const double per_node = p.stats.messages.mean / p.n;
    lo = std::min(lo, per_node);
    hi = std::max(hi, per_node);
  }
  MESSAGE("messages-per-node range [", lo, ", ", hi, "]");
  CHECK(hi / lo <= 1.25);
}

TEST_CASE("the n=100 sweep bottoms out at the analytic activation value") {
  SimConfig base;
  base.n = 100;
  base.a0 = 0.0002;
  base.delay = DelayModel::exponential(1.0);
  // Log-spaced grid bracketing the analytic optimum by two steps either way.
  const auto grid = parse_grid("log:5e-5:8e-4:7");
  const auto points = sweep_activation(base, grid, 5000, 321321, kThreads);
  std::size_t argmin = 0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    REQUIRE(points[i].stats.ok());
    if (points[i].stats.time.mean < points[argmin].stats.time.mean) argmin = i;
  }
  MESSAGE("minimizer a0=", points[argmin].a0);
  // Within one grid position of 2e-4 (the grid's middle point).
  const double step = std::log(8e-4 / 5e-5) / 6.0;
  CHECK(std::abs(std::log(points[argmin].a0 / 2e-4)) <= step + 1e-9);
}

TEST_CASE("wakeup counts stay within the renewal budget") {
  // Mean wakeups cannot outrun elapsed time divided by the fastest expected
  // first-wakeup interval.
  SimConfig base;
  base.delay = DelayModel::exponential(1.0);
  const auto points = scaling_study(base, {5, 10, 20}, 2000, 88, kThreads);
  for (const auto& p : points) {
    REQUIRE(p.stats.ok());
    ComplexityParams params{p.n, p.a0, 1.0, 1.0, 1.0};
    const double f_low = first_wakeup_time_bounds(params).lower;
    CHECK(p.stats.wakeups.mean <= p.stats.time.mean / f_low * 1.15);
  }
}
