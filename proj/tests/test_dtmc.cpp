#include <doctest.h>

#include <cmath>
#include <random>

#include "abering/analysis.hpp"
#include "abering/dtmc.hpp"
#include "abering/random.hpp"
#include "abering/sim.hpp"

using namespace abering;

namespace {

// Independent synchronous stepper for trajectory sampling. Reimplements the
// step semantics directly on top of the protocol functions; it shares no
// code with the transition-matrix construction or the solvers it is used to
// cross-check.
struct Trajectory {
  int n;
  std::vector<Node> nodes;
  std::vector<int> link_hop;       // 0 = empty
  std::vector<char> link_knockout;

  explicit Trajectory(int n_)
      : n(n_), nodes(n_), link_hop(n_, 0), link_knockout(n_, 0) {
    for (int i = 0; i < n; ++i) nodes[i].id = i;
  }

  bool has_leader() const {
    for (const auto& node : nodes) {
      if (node.state == NodeState::Leader) return true;
    }
    return false;
  }

  void step(double a0, RandomStream& rng) {
    // Deliveries first.
    const std::vector<int> hops = link_hop;
    const std::vector<char> kos = link_knockout;
    std::fill(link_hop.begin(), link_hop.end(), 0);
    std::fill(link_knockout.begin(), link_knockout.end(), 0);
    for (int link = 0; link < n; ++link) {
      if (hops[link] == 0) continue;
      const int target = (link + 1) % n;
      const auto [node, action] =
          on_receive(nodes[target], Message{hops[link], kos[link] != 0, 0}, n);
      nodes[target] = node;
      if (action.kind == NodeAction::Kind::Send) {
        link_hop[target] = action.message.hop;
        link_knockout[target] = action.message.knockout ? 1 : 0;
      }
    }
    // Then every idle node gambles.
    for (int i = 0; i < n; ++i) {
      if (nodes[i].state != NodeState::Idle) continue;
      if (rng.uniform01() < wake_probability(nodes[i].dead, a0)) {
        const auto [node, action] = on_tick(nodes[i], true, 0);
        nodes[i] = node;
        link_hop[i] = action.message.hop;
        link_knockout[i] = 0;
      }
    }
  }

  GlobalState snapshot() const {
    GlobalState s(n);
    for (int i = 0; i < n; ++i) {
      s.state[i] = nodes[i].state;
      s.dead[i] = nodes[i].dead;
      s.rel_wake[i] = static_cast<int>(nodes[i].wake_count);
      s.link_hop[i] = link_hop[i];
      s.link_knockout[i] = link_knockout[i];
    }
    return s;
  }
};

}  // namespace

TEST_CASE("initial gambles of the two-node chain are two fair coins") {
  const DtmcModel m = build_dtmc(2, 0.5);
  const auto& row = m.rows[m.initial];
  REQUIRE(row.size() == 4);
  for (const auto& [target, p] : row) {
    CHECK(p == doctest::Approx(0.25).epsilon(1e-15));
  }
  m.validate();
}

TEST_CASE("rows are stochastic and leader states absorb") {
  for (double a0 : {0.1, 0.37, 0.8}) {
    const DtmcModel m = build_dtmc(3, a0);
    CHECK_NOTHROW(m.validate());
    bool saw_absorbing = false;
    for (std::size_t i = 0; i < m.state_count(); ++i) {
      if (m.absorbing[i]) {
        saw_absorbing = true;
        CHECK(m.decode(i).has_leader());
      }
    }
    CHECK(saw_absorbing);
  }
}

TEST_CASE("a tampered leader row is rejected as invalid input") {
  DtmcModel m = build_dtmc(3, 0.5);
  std::size_t leader_state = 0;
  for (std::size_t i = 0; i < m.state_count(); ++i) {
    if (m.absorbing[i]) leader_state = i;
  }
  m.rows[leader_state] = {{m.initial, 1.0}};  // leak probability back out
  CHECK_THROWS_AS(termination_probability(m), std::invalid_argument);
}

TEST_CASE("termination probability is one across the activation grid") {
  for (int n : {3, 4}) {
    for (double a0 : {0.1, 0.5, 0.9}) {
      const DtmcModel m = build_dtmc(n, a0);
      CHECK(termination_probability(m) >= 1.0 - 1e-9);
    }
  }
}

TEST_CASE("expected rounds match a million independent trajectories at n=2") {
  const DtmcModel m = build_dtmc(2, 0.5);
  const double exact = expected_rounds(m);

  RandomStream rng(424242);
  const int trajectories = 1'000'000;
  double total_steps = 0.0;
  for (int t = 0; t < trajectories; ++t) {
    Trajectory traj(2);
    int steps = 0;
    while (!traj.has_leader()) {
      traj.step(0.5, rng);
      ++steps;
    }
    total_steps += steps;
  }
  const double sampled = total_steps / trajectories;
  CHECK(sampled == doctest::Approx(exact).epsilon(0.01));
}

TEST_CASE("transient distribution matches sampled occupancy after 3 steps") {
  const int n = 3;
  const double a0 = 0.3;
  DtmcOptions opts;
  opts.track_knockout = true;
  opts.track_relative_wakes = true;
  const DtmcModel m = build_dtmc(n, a0, opts);
  const auto dist = transient_distribution(m, 3);

  RandomStream rng(77);
  const int trajectories = 1'000'000;
  std::vector<std::uint64_t> hits(m.state_count(), 0);
  for (int t = 0; t < trajectories; ++t) {
    Trajectory traj(n);
    for (int s = 0; s < 3; ++s) traj.step(a0, rng);
    const auto idx = m.find(traj.snapshot());
    REQUIRE(idx.has_value());
    hits[*idx] += 1;
  }

  double coverage = 0.0;
  for (std::size_t i = 0; i < m.state_count(); ++i) {
    const double expected = dist[i] * trajectories;
    if (expected < 20.0) continue;  // too rare for a per-state normal bound
    coverage += dist[i];
    const double sigma = std::sqrt(trajectories * dist[i] * (1.0 - dist[i]));
    CHECK(std::abs(hits[i] - expected) <= 3.0 * sigma);
  }
  CHECK(coverage > 0.99);
}

TEST_CASE("expected rounds curve over a0 is unimodal with interior minimum") {
  std::vector<double> curve;
  std::vector<double> grid;
  for (double a0 = 0.05; a0 <= 0.951; a0 += 0.05) grid.push_back(a0);
  for (double a0 : grid) curve.push_back(expected_rounds(build_dtmc(3, a0)));
  std::size_t argmin = 0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    if (curve[i] < curve[argmin]) argmin = i;
  }
  CHECK(argmin > 0);
  CHECK(argmin + 1 < curve.size());
  for (std::size_t i = 0; i + 1 < argmin; ++i) CHECK(curve[i] > curve[i + 1]);
  for (std::size_t i = argmin; i + 1 < curve.size(); ++i) {
    CHECK(curve[i] < curve[i + 1]);
  }
}

TEST_CASE("chain and simulator agree under the lockstep configuration") {
  for (int n : {2, 3, 4}) {
    const double a0 = 0.3;
    const double exact = expected_rounds(build_dtmc(n, a0));
    SimConfig cfg;
    cfg.n = n;
    cfg.a0 = a0;
    cfg.delay = DelayModel::deterministic(1.0);
    cfg.clock = ClockModel::unit();
    const BatchStats stats = run_batch(cfg, 5000, 5150, 2);
    REQUIRE(stats.ok());
    // Normal 99% band around the Monte Carlo mean.
    const double se = stats.time.stddev / std::sqrt(5000.0);
    CHECK(std::abs(stats.time.mean - exact) <= 2.58 * se + 1e-9);
  }
}

TEST_CASE("rotation quotient shrinks the space but keeps the answers") {
  const DtmcModel plain = build_dtmc(3, 0.3);
  DtmcOptions rotated_opts;
  rotated_opts.rotation_canonicalization = true;
  const DtmcModel rotated = build_dtmc(3, 0.3, rotated_opts);
  CHECK(rotated.state_count() < plain.state_count());
  CHECK(termination_probability(rotated) ==
        doctest::Approx(termination_probability(plain)).epsilon(1e-9));
  CHECK(expected_rounds(rotated) ==
        doctest::Approx(expected_rounds(plain)).epsilon(1e-9));
}

TEST_CASE("every reachable state passes the invariant suite") {
  for (int n : {2, 3, 4}) {
    DtmcOptions opts;
    opts.track_knockout = true;
    opts.track_relative_wakes = true;
    const DtmcModel m = build_dtmc(n, 0.3, opts);
    MonitorConfig cfg = MonitorConfig::all();
    cfg.naive_crosscheck = true;
    const ExhaustiveReport report = exhaustive_invariant_check(m, cfg);
    CHECK(report.states_checked == m.state_count());
    CHECK(report.violations.empty());
  }
  // The exhaustive checker refuses models without knockout bookkeeping.
  CHECK_THROWS_AS(exhaustive_invariant_check(build_dtmc(3, 0.3)),
                  std::invalid_argument);
}

TEST_CASE("lockstep delivery hides the hop+1 mutation") {
  // Without overtaking a receiver's counter never exceeds the incoming hop,
  // so dead+1 and hop+1 coincide; the mutant only shows under asynchrony.
  for (int n : {3, 4}) {
    DtmcOptions mutant_opts;
    mutant_opts.rule = ForwardingRule::HopPlusOne;
    const DtmcModel mutant = build_dtmc(n, 0.5, mutant_opts);
    const DtmcModel correct = build_dtmc(n, 0.5);
    CHECK(mutant.state_count() == correct.state_count());
    CHECK(expected_rounds(mutant) ==
          doctest::Approx(expected_rounds(correct)).epsilon(1e-12));
  }
}

TEST_CASE("solver regression pins") {
  // Values locked in after cross-validation against trajectory sampling and
  // the simulator; guards the builder and solver against silent drift.
  CHECK(expected_rounds(build_dtmc(3, 0.5)) ==
        doctest::Approx(7.712643678098832).epsilon(1e-9));
  CHECK(expected_rounds(build_dtmc(5, 0.5)) ==
        doctest::Approx(34.21073758499665).epsilon(1e-9));
  CHECK(build_dtmc(4, 0.5).state_count() == 328);
}

TEST_CASE("state-space guard and parameter validation") {
  DtmcOptions tiny;
  tiny.max_states = 10;
  CHECK_THROWS_AS(build_dtmc(4, 0.5, tiny), std::runtime_error);
  CHECK_THROWS_AS(build_dtmc(1, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(build_dtmc(8, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(build_dtmc(3, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(build_dtmc(3, 1.0), std::invalid_argument);
}

TEST_CASE("decode and find are inverse on the reachable set") {
  DtmcOptions opts;
  opts.track_knockout = true;
  opts.track_relative_wakes = true;
  const DtmcModel m = build_dtmc(4, 0.4, opts);
  for (std::size_t i = 0; i < m.state_count(); i += 7) {
    const auto idx = m.find(m.decode(i));
    REQUIRE(idx.has_value());
    CHECK(*idx == i);
  }
}
