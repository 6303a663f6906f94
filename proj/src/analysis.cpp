#include "abering/analysis.hpp"

#include <cmath>

namespace abering {

namespace {

// alpha^k as exp(k * log1p(-a0)), stable for tiny a0 and huge k.
double alpha_pow(double a0, double exponent) {
  return std::exp(exponent * std::log1p(-a0));
}

// 1 - alpha^k without cancellation.
double one_minus_alpha_pow(double a0, double exponent) {
  return -std::expm1(exponent * std::log1p(-a0));
}

}  // namespace

void ComplexityParams::validate() const {
  if (n < 2) throw std::invalid_argument("complexity params: n must be >= 2");
  if (!(a0 > 0.0 && a0 < 1.0)) {
    throw std::invalid_argument("complexity params: a0 must be in (0,1)");
  }
  if (!(delta > 0.0)) {
    throw std::invalid_argument("complexity params: delta must be > 0");
  }
  if (!(s_low > 0.0) || s_high < s_low) {
    throw std::invalid_argument("complexity params: need 0 < s_low <= s_high");
  }
}

WakeupBounds first_wakeup_time_bounds(const ComplexityParams& p) {
  p.validate();
  const double wake_any = one_minus_alpha_pow(p.a0, p.n);
  return WakeupBounds{1.0 / (p.s_low * wake_any), 1.0 / (p.s_high * wake_any)};
}

double round_trip_time(const ComplexityParams& p) {
  p.validate();
  return static_cast<double>(p.n) * p.delta;
}

double interference_probability(const ComplexityParams& p) {
  p.validate();
  const double exponent = static_cast<double>(p.n) * round_trip_time(p) * p.s_high;
  return one_minus_alpha_pow(p.a0, exponent);
}

double interference_probability_simplified(int n) {
  if (n < 2) throw std::invalid_argument("n must be >= 2");
  const double q = 2.0 / (static_cast<double>(n) + 1.0);
  return -std::expm1(static_cast<double>(n) * std::log1p(-q));
}

double expected_termination_upper_bound(const ComplexityParams& p) {
  p.validate();
  const double w = interference_probability(p);
  if (!(w < 1.0)) {
    throw std::invalid_argument("expected_termination_upper_bound: W = 1 diverges");
  }
  const double r = round_trip_time(p);
  const double alpha_n = alpha_pow(p.a0, p.n);
  return (1.0 + r * p.s_low - alpha_n * r * p.s_low) /
         ((1.0 - alpha_n) * (1.0 - w) * p.s_low);
}

double round_trip_success_probability(int n, double a0) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (!(a0 > 0.0 && a0 < 1.0)) throw std::invalid_argument("a0 must be in (0,1)");
  const double exponent = 0.5 * static_cast<double>(n) * (n - 1.0);
  return alpha_pow(a0, exponent);  // n = 1: empty product, exactly 1
}

double round_trip_success_probability_general(const ComplexityParams& p) {
  p.validate();
  const double exponent =
      p.delta * p.s_high * 0.5 * static_cast<double>(p.n) * (p.n - 1.0);
  return alpha_pow(p.a0, exponent);
}

double round_trip_success_worst_case(const ComplexityParams& p) {
  p.validate();
  const double exponent =
      static_cast<double>(p.n) * static_cast<double>(p.n) * p.delta * p.s_high;
  return alpha_pow(p.a0, exponent);
}

double average_election_time(int n, double a0) {
  if (n < 2) throw std::invalid_argument("n must be >= 2");
  const double beta = round_trip_success_probability(n, a0);
  const double wake_any = one_minus_alpha_pow(a0, n);
  return 1.0 / (beta * wake_any);
}

double average_election_time_general(const ComplexityParams& p) {
  const WakeupBounds f = first_wakeup_time_bounds(p);
  return f.upper / round_trip_success_probability_general(p);
}

double compute_optimal_activation(int n) {
  if (n < 2) throw std::invalid_argument("n must be >= 2");
  // 1 - ((n-1)/(n+1))^(1/n), via exp/log so large n keeps full precision.
  const double log_ratio = std::log((n - 1.0) / (n + 1.0));
  return -std::expm1(log_ratio / static_cast<double>(n));
}

double optimal_activation_asymptote(int n) {
  if (n < 2) throw std::invalid_argument("n must be >= 2");
  return -std::expm1(-2.0 / (static_cast<double>(n) * n));
}

}  // namespace abering
