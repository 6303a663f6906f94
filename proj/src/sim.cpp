#include "abering/sim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <optional>
#include <queue>
#include <sstream>
#include <thread>

namespace abering {

namespace {

constexpr int kDeliver = 0;  // at equal times deliveries precede ticks
constexpr int kTick = 1;

struct Event {
  double time = 0.0;
  int kind = kTick;
  std::uint64_t seq = 0;
  int node = -1;
  Message msg{};
};

struct LaterEvent {
  bool operator()(const Event& a, const Event& b) const {
    if (a.time != b.time) return a.time > b.time;
    if (a.kind != b.kind) return a.kind > b.kind;
    return a.seq > b.seq;
  }
};

class Fnv1a {
 public:
  void mix_bytes(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      hash_ ^= p[i];
      hash_ *= 1099511628211ull;
    }
  }
  template <typename T>
  void mix(const T& value) {
    static_assert(std::is_trivially_copyable_v<T>);
    mix_bytes(&value, sizeof(value));
  }
  std::uint64_t value() const { return hash_; }

 private:
  std::uint64_t hash_ = 14695981039346656037ull;
};

int bits_per_message(int n) {
  // ceil(log2(n+1)): enough bits to carry a hop counter in 1..n.
  return std::bit_width(static_cast<unsigned>(n));
}

}  // namespace

double SimConfig::horizon() const {
  if (max_global_time > 0.0) return max_global_time;
  return 1e6 * static_cast<double>(n) * delta;
}

void SimConfig::validate() const {
  if (n < 2) {
    throw std::invalid_argument(
        "ring size must be >= 2 (a single node trivially self-elects)");
  }
  if (!(a0 > 0.0 && a0 < 1.0)) {
    throw std::invalid_argument("a0 must be in (0,1)");
  }
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be > 0");
  processing.validate();
  clock.validate();
  // The configured delta is the *known bound*; the actual model must honor it.
  const double mean = mean_delay(delay);
  if (mean > delta * (1.0 + 1e-12)) {
    throw std::invalid_argument("mean_delay(delay_model) exceeds delta");
  }
}

RunResult run(const SimConfig& config, const MonitorConfig* monitors,
              const EventObserver* observer) {
  config.validate();
  const int n = config.n;
  const double horizon = config.horizon();

  RandomStream rng(config.seed);
  RingConfiguration ring(n);

  std::vector<double> speed(n);
  for (int i = 0; i < n; ++i) speed[i] = config.clock.realize_speed(rng);

  RunResult result;
  result.seed = config.seed;
  RunStats& stats = result.stats;

  std::priority_queue<Event, std::vector<Event>, LaterEvent> queue;
  std::uint64_t seq_counter = 0;
  std::optional<std::random_device> entropy;  // only the tie-scrambling fault
  if (config.faults.scramble_event_ties) entropy.emplace();
  auto next_seq = [&]() -> std::uint64_t {
    if (entropy) {
      return (static_cast<std::uint64_t>((*entropy)()) << 32) ^ (*entropy)();
    }
    return seq_counter++;
  };

  // The gamble probability depends only on the dead counter; precompute the
  // table once instead of exponentiating on every idle tick.
  std::vector<double> wake_p(n + 1, 0.0);
  for (int dead = 1; dead <= n; ++dead) {
    wake_p[dead] = wake_probability(dead, config.a0);
  }

  std::uint64_t next_msg_id = 1;
  Fnv1a trace;

  std::optional<InvariantMonitor> monitor;
  if (monitors != nullptr && monitors->any()) {
    monitor.emplace(*monitors);
    monitor->on_init(ring);
  }

  const auto send = [&](int from, const Message& msg, double now) {
    const double at =
        now + config.processing.gamma + sample_delay(config.delay, rng);
    const std::uint64_t sseq = next_seq();
    ring.links[from].push_back(InFlightMessage{msg, sseq, at});
    queue.push(Event{at, kDeliver, sseq, ring.successor(from), msg});
    stats.messages_sent += 1;
  };

  for (int i = 0; i < n; ++i) {
    queue.push(Event{1.0 / speed[i], kTick, next_seq(), i, {}});
  }

  bool aborted = false;
  while (!queue.empty() && !aborted) {
    const Event e = queue.top();
    queue.pop();
    if (e.time > horizon) {
      result.timed_out = true;
      stats.time_to_election = horizon;
      break;
    }

    TraceEvent te;
    te.time = e.time;
    te.seq = e.seq;
    te.node = e.node;

    if (e.kind == kTick) {
      stats.ticks += 1;
      te.kind = 'T';
      const Node& node = ring.nodes[e.node];
      te.state_before = te.state_after = node.state;
      if (node.state == NodeState::Idle) {
        const bool woke = rng.uniform01() < wake_p[node.dead];
        if (woke) {
          const StepResult sr = on_tick(node, true, next_msg_id++);
          ring.nodes[e.node] = sr.node;
          stats.wakeups += 1;
          send(e.node, sr.action.message, e.time);
          te.changed = true;
          te.state_after = sr.node.state;
          te.sent = true;
          te.sent_msg = sr.action.message;
        }
      }
      queue.push(
          Event{e.time + 1.0 / speed[e.node], kTick, next_seq(), e.node, {}});

      trace.mix(e.time);
      trace.mix(e.seq);
      trace.mix(te.kind);
      trace.mix(e.node);
      trace.mix(te.hop);
      if (observer) (*observer)(te);
      if (monitor && te.changed) {
        monitor->after_wake(ring, e.node, e.seq);
        if (!monitor->ok()) aborted = true;
      }
      continue;
    }

    // Delivery. Take the message off its link; anything still pending there
    // with a smaller send sequence has just been overtaken.
    stats.message_hops += 1;
    const int link = ring.predecessor(e.node);
    auto& pending = ring.links[link];
    bool removed = false;
    for (std::size_t i = 0; i < pending.size(); ++i) {
      if (pending[i].send_seq == e.seq) {
        pending[i] = pending.back();
        pending.pop_back();
        removed = true;
        break;
      }
    }
    if (!removed) {
      throw std::logic_error("delivered message missing from its link");
    }
    for (const auto& other : pending) {
      if (other.send_seq < e.seq) stats.overtakes += 1;
    }

    te.kind = 'D';
    te.hop = e.msg.hop;
    te.msg_id = e.msg.msg_id;
    te.changed = true;
    const Node before = ring.nodes[e.node];
    te.state_before = before.state;

    StepResult sr;
    try {
      sr = on_receive(before, e.msg, n, config.faults.forwarding);
    } catch (const ProtocolViolation& pv) {
      result.violations.push_back(
          Violation{"PROTO", e.seq,
                    std::string(pv.what()) + " | " + format_ring(ring)});
      break;
    }
    if (monitor && before.state == NodeState::Active) {
      monitor->on_delivery_to_active(ring, e.node, sr.node.state, e.seq);
    }
    ring.nodes[e.node] = sr.node;
    te.state_after = sr.node.state;

    switch (sr.action.kind) {
      case NodeAction::Kind::Send:
        send(e.node, sr.action.message, e.time);
        te.sent = true;
        te.sent_msg = sr.action.message;
        break;
      case NodeAction::Kind::BecomeLeader:
        stats.elected = true;
        stats.leader_id = e.node;
        stats.time_to_election = e.time;
        break;
      case NodeAction::Kind::Purge:
      case NodeAction::Kind::None:
        break;
    }

    trace.mix(e.time);
    trace.mix(e.seq);
    trace.mix(te.kind);
    trace.mix(e.node);
    trace.mix(te.hop);
    if (observer) (*observer)(te);
    if (monitor) {
      monitor->after_receive(ring, e.node, e.seq);
      if (!monitor->ok()) aborted = true;
    }

    if (stats.elected) {
      // Structural termination check, always on: one leader, everyone else
      // passive, nothing in flight.
      if (ring.messages_in_flight() != 0 ||
          ring.count_state(NodeState::Leader) != 1 ||
          ring.count_state(NodeState::Passive) != n - 1) {
        result.violations.push_back(Violation{
            "POST", e.seq,
            "termination structure broken | " + format_ring(ring)});
      }
      break;
    }
  }

  if (monitor) {
    const auto& v = monitor->violations();
    result.violations.insert(result.violations.end(), v.begin(), v.end());
  }
  stats.bits = stats.message_hops * static_cast<std::uint64_t>(bits_per_message(n));
  stats.trace_hash = trace.value();
  return result;
}

Aggregate aggregate(const std::vector<double>& xs) {
  Aggregate a;
  if (xs.empty()) return a;
  double sum = 0.0;
  for (double x : xs) sum += x;
  a.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - a.mean) * (x - a.mean);
    a.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    a.ci95 = 1.959963984540054 * a.stddev /
             std::sqrt(static_cast<double>(xs.size()));
  }
  return a;
}

BatchStats run_batch(const SimConfig& config, std::uint64_t num_runs,
                     std::uint64_t base_seed, int threads,
                     const MonitorConfig* monitors) {
  if (num_runs < 1) throw std::invalid_argument("run_batch: num_runs >= 1");
  config.validate();

  BatchStats out;
  out.runs = num_runs;
  out.per_run.resize(num_runs);
  std::vector<std::string> failure(num_runs);

  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(num_runs)));
  auto work = [&](int offset) {
    for (std::uint64_t i = offset; i < num_runs; i += workers) {
      SimConfig cfg = config;
      cfg.seed = base_seed + i;
      const RunResult r = run(cfg, monitors);
      out.per_run[i] = r.stats;
      if (!r.ok()) {
        std::ostringstream what;
        if (r.timed_out) what << "timeout; ";
        if (!r.stats.elected && !r.timed_out) what << "no election; ";
        for (const auto& v : r.violations) {
          what << v.check << "@" << v.event_seq << ": " << v.detail << "; ";
        }
        failure[i] = what.str();
      }
    }
  };

  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }

  std::vector<double> time, messages, hops, wakes;
  time.reserve(num_runs);
  messages.reserve(num_runs);
  hops.reserve(num_runs);
  wakes.reserve(num_runs);
  for (std::uint64_t i = 0; i < num_runs; ++i) {
    const RunStats& s = out.per_run[i];
    out.elected += s.elected ? 1 : 0;
    time.push_back(s.time_to_election);
    messages.push_back(static_cast<double>(s.messages_sent));
    hops.push_back(static_cast<double>(s.message_hops));
    wakes.push_back(static_cast<double>(s.wakeups));
    if (!failure[i].empty()) out.failures.emplace_back(base_seed + i, failure[i]);
  }
  out.time = aggregate(time);
  out.messages = aggregate(messages);
  out.hops = aggregate(hops);
  out.wakeups = aggregate(wakes);
  return out;
}

}  // namespace abering
