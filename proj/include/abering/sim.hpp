#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "abering/monitor.hpp"
#include "abering/protocol.hpp"
#include "abering/ring.hpp"
#include "abering/timing.hpp"

namespace abering {

// Full description of one simulated election. A (config, seed) pair pins the
// run bit-for-bit: the event order, every sample drawn, and the resulting
// statistics.
struct SimConfig {
  int n = 2;                     // ring size, >= 2
  double a0 = 0.5;               // resolved activation parameter in (0,1)
  double delta = 1.0;            // known bound on the expected message delay
  DelayModel delay = DelayModel::exponential(1.0);
  ClockModel clock = ClockModel::unit();
  ProcessingModel processing{};  // per-event processing latency gamma
  std::uint64_t seed = 1;
  double max_global_time = 0.0;  // <= 0 selects the default horizon

  // Deliberate defect injection, used only to mutation-test the checkers.
  struct Faults {
    ForwardingRule forwarding = ForwardingRule::DeadPlusOne;
    bool scramble_event_ties = false;  // destroys tie-break determinism
  } faults{};

  // Default safety horizon: 1e6 * n * delta. Hitting it indicates a bug (or
  // an astronomically unlucky run), never a normal outcome.
  double horizon() const;
  void validate() const;
};

struct RunStats {
  bool elected = false;
  int leader_id = -1;
  double time_to_election = 0.0;  // horizon when the run timed out
  std::uint64_t messages_sent = 0;  // wake sends plus forwards
  std::uint64_t message_hops = 0;   // link traversals (= deliveries)
  std::uint64_t wakeups = 0;
  std::uint64_t ticks = 0;
  std::uint64_t bits = 0;        // message_hops * ceil(log2(n+1))
  std::uint64_t overtakes = 0;   // deliveries that passed an earlier send on
                                 // the same link (non-FIFO in action)
  std::uint64_t trace_hash = 0;  // FNV-1a over (time, seq, kind, node, hop)
};

struct RunResult {
  RunStats stats;
  std::vector<Violation> violations;
  bool timed_out = false;
  std::uint64_t seed = 0;

  bool ok() const {
    return stats.elected && violations.empty() && !timed_out;
  }
};

// Per-event record for trace dumps and test instrumentation.
struct TraceEvent {
  double time = 0.0;
  std::uint64_t seq = 0;
  char kind = 'T';  // 'T' tick, 'D' deliver
  int node = -1;
  int hop = 0;      // 0 for ticks
  std::uint64_t msg_id = 0;
  bool changed = false;
  NodeState state_before = NodeState::Idle;
  NodeState state_after = NodeState::Idle;
  bool sent = false;
  Message sent_msg{};
};
using EventObserver = std::function<void(const TraceEvent&)>;

// Runs one seeded election to termination (or timeout). Events are processed
// in (time, kind, seq) order with deliveries before ticks at equal times,
// which keeps the unit-delay instantiation step-aligned with the synchronous
// chain semantics. Randomness: one clock-speed draw per node at start-up
// (UniformPerNode only), one uniform per idle tick, one delay sample per
// send, all from a single mt19937_64 stream consumed in event order.
//
// When `monitors` is non-null the invariant monitor observes every
// configuration-changing event; the first violation aborts the run with
// diagnostics. Monitors never mutate the run: for a fixed seed, RunStats is
// identical with monitors on or off.
RunResult run(const SimConfig& config, const MonitorConfig* monitors = nullptr,
              const EventObserver* observer = nullptr);

struct Aggregate {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation
  double ci95 = 0.0;    // half-width of the normal 95% interval
};
Aggregate aggregate(const std::vector<double>& xs);

struct BatchStats {
  std::uint64_t runs = 0;
  std::uint64_t elected = 0;
  Aggregate time, messages, hops, wakeups;
  std::vector<RunStats> per_run;
  std::vector<std::pair<std::uint64_t, std::string>> failures;  // (seed, what)

  bool ok() const { return failures.empty() && elected == runs; }
};

// Independent runs with seed = base_seed + run index, optionally spread over
// worker threads. Results are merged by run index, so the outcome does not
// depend on thread scheduling.
BatchStats run_batch(const SimConfig& config, std::uint64_t num_runs,
                     std::uint64_t base_seed, int threads = 1,
                     const MonitorConfig* monitors = nullptr);

}  // namespace abering
