#pragma once

#include <string>
#include <vector>

#include "abering/random.hpp"

namespace abering {

// Message-delay distribution with a finite, analytically known mean. Every
// sample is strictly positive; delays are unbounded for the probabilistic
// variants, which is exactly what the bounded-expected-delay setting allows.
//
// Retransmission models a lossy channel where each attempt succeeds with
// probability p and one attempt costs `unit` time, so the delay is
// (number of attempts) * unit with geometric attempts and mean unit/p.
struct DelayModel {
  enum class Kind { Deterministic, Exponential, UniformRange, Retransmission };
  Kind kind = Kind::Exponential;
  double a = 1.0;  // Deterministic: d; Exponential: mean; UniformRange: lo; Retransmission: p
  double b = 0.0;  // UniformRange: hi; Retransmission: unit time

  static DelayModel deterministic(double d);
  static DelayModel exponential(double mean);
  static DelayModel uniform_range(double lo, double hi);
  static DelayModel retransmission(double p, double unit = 1.0);

  // Textual form used by CLI flags, config files and CSV echoes:
  // "det:D", "exp:MEAN", "uniform:LO:HI", "retrans:P:UNIT".
  static DelayModel parse(const std::string& text);
  std::string format() const;
};

// Exact analytic mean of the model.
double mean_delay(const DelayModel& model);

// One delay draw; strictly positive. The empirical mean over many draws
// converges to mean_delay(model).
double sample_delay(const DelayModel& model, RandomStream& rng);

// Lower bound max(0, 1 - delta/t) on the probability that a message with
// expected delay at most delta is delivered within time t.
double delivery_probability_lower_bound(double delta, double t);

// Local clocks tick once per local time unit; a clock with speed s ticks at
// global times k/s. Realized speeds always lie in [s_low, s_high].
struct ClockModel {
  enum class Assignment { Constant, UniformPerNode };
  double s_low = 1.0;
  double s_high = 1.0;
  Assignment assignment = Assignment::Constant;
  double constant_speed = 1.0;  // used by Assignment::Constant

  static ClockModel unit();
  static ClockModel constant(double s);
  static ClockModel uniform_per_node(double s_low, double s_high);

  void validate() const;
  // Draws the speed for one node; UniformPerNode consumes one uniform.
  double realize_speed(RandomStream& rng) const;

  static ClockModel parse(const std::string& text);  // "constant:S" | "uniform:LO:HI"
  std::string format() const;
};

// Tick instants k/node_speed for k = 1, 2, ... up to and including horizon.
std::vector<double> tick_times(const ClockModel& clock, double node_speed,
                               double horizon);

// Expected local-event processing time; 0 means local events are
// instantaneous. Realized as a fixed latency added to every send's delivery
// time, the simplest realization consistent with a known expected value.
struct ProcessingModel {
  double gamma = 0.0;

  void validate() const;
};

}  // namespace abering
