#pragma once

#include <stdexcept>

namespace abering {

// Parameter bundle for the closed-form complexity expressions. All powers of
// alpha = 1 - a0 with large exponents are evaluated in the log domain;
// exponents grow like n^2 and would underflow a direct pow.
struct ComplexityParams {
  int n = 2;
  double a0 = 0.5;
  double delta = 1.0;
  double s_low = 1.0;
  double s_high = 1.0;

  double alpha() const { return 1.0 - a0; }
  void validate() const;
};

struct WakeupBounds {
  double upper = 0.0;  // F: pessimistic clocks (s_low)
  double lower = 0.0;  // F_low: optimistic clocks (s_high)
};

// Bounds on the expected time until the first node wakes:
// F = 1/(s_low (1 - alpha^n)), F_low = 1/(s_high (1 - alpha^n)).
WakeupBounds first_wakeup_time_bounds(const ComplexityParams& p);

// Expected time for a message to travel once around the ring: R = n * delta.
double round_trip_time(const ComplexityParams& p);

// Probability that any node wakes up while a message makes a round trip:
// W = 1 - alpha^(n * R * s_high).
double interference_probability(const ComplexityParams& p);

// Simplified form 1 - (1 - 2/(n+1))^n used for the large-n limit; tends to
// 1 - e^-2.
double interference_probability_simplified(int n);

// Closed-form upper bound on the expected termination time,
// (1 + R s_low - alpha^n R s_low) / ((1 - alpha^n)(1 - W) s_low),
// which equals (F + R) / (1 - W). Rejects W = 1.
double expected_termination_upper_bound(const ComplexityParams& p);

// Probability beta that the first waker's message survives its round trip,
// averaged over a fresh ring: alpha^(n(n-1)/2).
double round_trip_success_probability(int n, double a0);

// Generalized beta with real parameters: alpha^(delta * s_high * n(n-1)/2).
// Collapses to the plain form when delta = s_high = 1.
double round_trip_success_probability_general(const ComplexityParams& p);

// Pessimistic round-trip survival used by the worst-case time bound:
// alpha^(n^2 * delta * s_high).
double round_trip_success_worst_case(const ComplexityParams& p);

// Average number of gamble-rounds to elect a leader under unit delay and
// unit clock speed: 1 / (beta (1 - alpha^n)). Unimodal in a0.
double average_election_time(int n, double a0);

// Worst-case-parameter variant: F / beta_general. Equals the plain form at
// delta = s_low = s_high = 1.
double average_election_time_general(const ComplexityParams& p);

// Activation parameter minimizing the average election time:
// a0 = 1 - ((n-1)/(n+1))^(1/n). With this choice 1 - (1-a0)^n = 2/(n+1).
double compute_optimal_activation(int n);

// Large-n limit of the optimal activation parameter: 1 - exp(-2/n^2).
double optimal_activation_asymptote(int n);

}  // namespace abering
