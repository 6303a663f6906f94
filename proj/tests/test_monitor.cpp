#include <doctest.h>

#include <random>

#include "abering/monitor.hpp"
#include "abering/sim.hpp"

using namespace abering;

namespace {

RingConfiguration make_ring(int n) { return RingConfiguration(n); }

void put_message(RingConfiguration& ring, int link, int hop, bool knockout,
                 std::uint64_t id) {
  ring.links[link].push_back(InFlightMessage{Message{hop, knockout, id}, id, 0.0});
}

std::vector<std::string> check_ids(const std::vector<Violation>& vs) {
  std::vector<std::string> ids;
  for (const auto& v : vs) ids.push_back(v.check);
  return ids;
}

}  // namespace

TEST_CASE("initial configuration satisfies every check") {
  for (int n : {2, 3, 5, 9}) {
    const auto ring = make_ring(n);
    CHECK(check_all(ring).empty());
    CHECK(check_segments(ring).empty());
    CHECK(check_segments_naive(ring).empty());
  }
}

TEST_CASE("a leader beside a non-passive node violates L2") {
  auto ring = make_ring(3);
  ring.nodes[0].state = NodeState::Leader;
  ring.nodes[0].dead = 3;
  ring.nodes[1].state = NodeState::Passive;
  ring.nodes[2].state = NodeState::Idle;
  MonitorConfig only_l2 = MonitorConfig::none();
  only_l2.l2 = true;
  const auto violations = check_all(ring, only_l2);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].check == "L2");
}

TEST_CASE("message/active mismatch violates L3") {
  auto ring = make_ring(3);
  ring.nodes[0].state = NodeState::Active;
  ring.nodes[0].wake_count = 1;
  MonitorConfig only_l3 = MonitorConfig::none();
  only_l3.l3 = true;
  CHECK(check_ids(check_all(ring, only_l3)) == std::vector<std::string>{"L3"});
  put_message(ring, 0, 1, false, 1);
  CHECK(check_all(ring, only_l3).empty());
}

TEST_CASE("an all-passive ring violates L4") {
  auto ring = make_ring(3);
  for (auto& node : ring.nodes) node.state = NodeState::Passive;
  MonitorConfig only_l4 = MonitorConfig::none();
  only_l4.l4 = true;
  CHECK(check_ids(check_all(ring, only_l4)) == std::vector<std::string>{"L4"});
}

TEST_CASE("hop outside 1..n violates HOPCAP") {
  auto ring = make_ring(3);
  ring.nodes[0].state = NodeState::Active;
  ring.nodes[0].wake_count = 1;
  put_message(ring, 0, 4, false, 1);
  MonitorConfig only_hopcap = MonitorConfig::none();
  only_hopcap.hopcap = true;
  CHECK(check_ids(check_all(ring, only_hopcap)) ==
        std::vector<std::string>{"HOPCAP"});
}

TEST_CASE("a non-passive predecessor inside the dead window violates L1") {
  auto ring = make_ring(4);
  ring.nodes[2].dead = 3;  // predecessors 1 and 0 must be passive
  ring.nodes[1].state = NodeState::Passive;
  ring.nodes[0].state = NodeState::Idle;
  MonitorConfig only_l1 = MonitorConfig::none();
  only_l1.l1 = true;
  CHECK(check_ids(check_all(ring, only_l1)) == std::vector<std::string>{"L1"});
  ring.nodes[0].state = NodeState::Passive;
  CHECK(check_all(ring, only_l1).empty());
}

TEST_CASE("segment message counting follows the wake-count ledger") {
  // One active node that has woken once, message in flight to its successor.
  auto ring = make_ring(4);
  ring.nodes[0].state = NodeState::Active;
  ring.nodes[0].wake_count = 1;
  put_message(ring, 0, 1, false, 1);
  CHECK(check_segments(ring).empty());
  CHECK(check_segments_naive(ring).empty());

  // Losing the message breaks L5 on the segment into node 0 and out of it.
  ring.links[0].clear();
  MonitorConfig only_l5 = MonitorConfig::none();
  only_l5.l5 = true;
  const auto violations = check_segments(ring, only_l5);
  CHECK(!violations.empty());
  for (const auto& v : violations) CHECK(v.check == "L5");
}

TEST_CASE("knockout-free segments pin dead to the passive-run length") {
  auto ring = make_ring(5);
  // Nodes 1,2 passive; node 3 idle with dead = 3 (two passive predecessors).
  ring.nodes[0].state = NodeState::Active;
  ring.nodes[0].wake_count = 1;
  ring.nodes[1].state = NodeState::Passive;
  ring.nodes[1].dead = 1;
  ring.nodes[2].state = NodeState::Passive;
  ring.nodes[2].dead = 2;
  ring.nodes[3].dead = 3;
  put_message(ring, 0, 1, false, 1);
  CHECK(check_segments(ring).empty());

  MonitorConfig seg = MonitorConfig::none();
  seg.l6 = true;
  // Understating dead breaks L6 while the segment stays knockout-free.
  ring.nodes[3].dead = 2;
  CHECK(check_ids(check_segments(ring, seg)) == std::vector<std::string>{"L6"});
  // A knockout message on the segment makes the check vacuous again.
  put_message(ring, 1, 2, true, 2);
  ring.nodes[1].wake_count = 0;
  MonitorConfig l6_only = seg;
  CHECK(check_segments(ring, l6_only).empty());
}

TEST_CASE("with no knockout in flight the non-passive dead counters sum to n") {
  auto ring = make_ring(3);
  ring.nodes[1].dead = 2;  // sum = 4 != 3 on an all-idle ring
  MonitorConfig cor = MonitorConfig::none();
  cor.cor = true;
  CHECK(check_ids(check_segments(ring, cor)) == std::vector<std::string>{"COR"});
  // Any knockout message in flight suspends the check.
  ring.nodes[0].state = NodeState::Active;
  ring.nodes[0].wake_count = 1;
  put_message(ring, 0, 2, true, 1);
  CHECK(check_segments(ring, cor).empty());
}

TEST_CASE("single-pass and quadratic segment checks agree on random rings") {
  std::mt19937_64 gen(2025);
  for (int trial = 0; trial < 3000; ++trial) {
    const int n = 2 + static_cast<int>(gen() % 6);
    auto ring = make_ring(n);
    for (int i = 0; i < n; ++i) {
      ring.nodes[i].state = static_cast<NodeState>(gen() % 4);
      ring.nodes[i].dead = 1 + static_cast<int>(gen() % n);
      ring.nodes[i].wake_count = gen() % 4;
      if (gen() % 3 == 0) {
        put_message(ring, i, 1 + static_cast<int>(gen() % n), gen() % 2 == 0,
                    trial * 100 + i);
      }
    }
    const auto fast = check_segments(ring);
    const auto naive = check_segments_naive(ring);
    REQUIRE(fast.size() == naive.size());
    for (std::size_t i = 0; i < fast.size(); ++i) {
      CHECK(fast[i].check == naive[i].check);
    }
  }
}

TEST_CASE("strict-max wake count must come out of a delivery as leader") {
  auto ring = make_ring(2);
  ring.nodes[0].state = NodeState::Active;
  ring.nodes[0].wake_count = 2;
  ring.nodes[1].state = NodeState::Passive;
  ring.nodes[1].wake_count = 0;

  CHECK_FALSE(check_max_wake_elected(ring, 0, NodeState::Leader).has_value());
  const auto violation = check_max_wake_elected(ring, 0, NodeState::Idle);
  REQUIRE(violation.has_value());
  CHECK(violation->check == "LIDLE");

  // Tie in wake counts: the check is vacuous.
  ring.nodes[1].wake_count = 2;
  CHECK_FALSE(check_max_wake_elected(ring, 0, NodeState::Idle).has_value());
}

TEST_CASE("full monitoring over live runs stays quiet") {
  MonitorConfig monitors = MonitorConfig::all();
  monitors.naive_crosscheck = true;
  const SimConfig base = [] {
    SimConfig cfg;
    cfg.n = 5;
    cfg.a0 = 0.3;
    cfg.delay = DelayModel::exponential(1.0);
    return cfg;
  }();
  const BatchStats stats = run_batch(base, 5000, 3000, 2, &monitors);
  CHECK(stats.failures.empty());
  CHECK(stats.elected == stats.runs);
}

TEST_CASE("high activation churn stays clean under monitoring") {
  // Nearly every tick wakes somebody; elections happen through attrition
  // with constant purging, which exercises the active-collision paths.
  MonitorConfig monitors = MonitorConfig::all();
  SimConfig cfg;
  cfg.n = 5;
  cfg.a0 = 0.8;
  cfg.delay = DelayModel::exponential(1.0);
  const BatchStats stats = run_batch(cfg, 1000, 7777, 2, &monitors);
  CHECK(stats.failures.empty());
  CHECK(stats.elected == stats.runs);
}

TEST_CASE("the broken forwarding rule is caught in flight") {
  // Overtaking plus hop+1 forwarding understates dead; the dead-counter sum
  // check is the one that notices first on this seed.
  MonitorConfig monitors = MonitorConfig::all();
  SimConfig cfg;
  cfg.n = 5;
  cfg.a0 = 0.35;
  cfg.delay = DelayModel::exponential(1.0);
  cfg.faults.forwarding = ForwardingRule::HopPlusOne;
  cfg.seed = 110;
  const RunResult r = run(cfg, &monitors);
  REQUIRE(!r.violations.empty());
  CHECK(r.violations.front().check == "COR");

  // Robustness beyond the pinned seed: some seed in a modest scan trips a
  // dead-counter check.
  bool found = false;
  for (std::uint64_t seed = 0; seed < 1000 && !found; ++seed) {
    cfg.seed = seed;
    const RunResult scan = run(cfg, &monitors);
    for (const auto& v : scan.violations) {
      if (v.check == "COR" || v.check == "L6") found = true;
    }
  }
  CHECK(found);
}
