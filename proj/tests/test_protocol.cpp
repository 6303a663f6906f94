#include <doctest.h>

#include <cmath>
#include <random>

#include "abering/protocol.hpp"

using namespace abering;

TEST_CASE("wake probability matches the closed form") {
  CHECK(wake_probability(1, 0.3) == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(wake_probability(2, 0.5) == doctest::Approx(0.75).epsilon(1e-14));
  // a0 chosen so that 1 - (1-a0)^3 = 2/4.
  const double a0 = 1.0 - std::pow(0.5, 1.0 / 3.0);
  CHECK(wake_probability(3, a0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("wake probability rejects bad arguments") {
  CHECK_THROWS_AS(wake_probability(0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(wake_probability(-3, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(wake_probability(1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(wake_probability(1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(wake_probability(1, -0.2), std::invalid_argument);
}

TEST_CASE("wake probability is strictly increasing in dead and a0") {
  std::mt19937_64 gen(7);
  int strict_checked = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    const int dead = 1 + static_cast<int>(gen() % 50);
    const double a0 = 1e-6 + (gen() % 100000) / 100001.0 * 0.999;
    const double p = wake_probability(dead, a0);
    CHECK(p > 0.0);
    CHECK(p <= 1.0);
    // Strict growth is only observable below double saturation.
    if (wake_probability(dead + 1, a0) < 1.0 - 1e-12) {
      CHECK(wake_probability(dead + 1, a0) > p);
      const double bigger_a0 = a0 + (1.0 - a0) * 0.1;
      CHECK(wake_probability(dead, bigger_a0) > p);
      ++strict_checked;
    }
  }
  CHECK(strict_checked > 500);
}

TEST_CASE("idle tick with a won gamble wakes the node") {
  Node node{0, NodeState::Idle, 1, 0};
  const auto [after, action] = on_tick(node, true, 77);
  CHECK(after.state == NodeState::Active);
  CHECK(after.wake_count == 1);
  CHECK(after.dead == 1);
  CHECK(action.kind == NodeAction::Kind::Send);
  CHECK(action.message.hop == 1);
  CHECK(action.message.knockout == false);
  CHECK(action.message.msg_id == 77);
}

TEST_CASE("failed gamble and non-idle ticks do nothing") {
  Node idle{0, NodeState::Idle, 4, 2};
  const auto [same, none] = on_tick(idle, false, 1);
  CHECK(same.state == NodeState::Idle);
  CHECK(same.wake_count == 2);
  CHECK(none.kind == NodeAction::Kind::None);

  for (NodeState s : {NodeState::Passive, NodeState::Active, NodeState::Leader}) {
    Node node{1, s, 2, 1};
    const auto [after, action] = on_tick(node, true, 9);
    CHECK(after.state == s);
    CHECK(after.wake_count == 1);
    CHECK(action.kind == NodeAction::Kind::None);
  }
}

TEST_CASE("idle receiver turns passive and forwards dead+1 as knockout") {
  Node node{0, NodeState::Idle, 1, 0};
  const auto [after, action] = on_receive(node, Message{2, false, 5}, 5);
  CHECK(after.state == NodeState::Passive);
  CHECK(after.dead == 2);
  CHECK(action.kind == NodeAction::Kind::Send);
  CHECK(action.message.hop == 3);
  CHECK(action.message.knockout == true);
  CHECK(action.message.msg_id == 5);
}

TEST_CASE("active receiver with hop = n becomes leader") {
  Node node{2, NodeState::Active, 3, 1};
  const auto [after, action] = on_receive(node, Message{5, true, 8}, 5);
  CHECK(after.state == NodeState::Leader);
  CHECK(after.dead == 5);
  CHECK(action.kind == NodeAction::Kind::BecomeLeader);
}

TEST_CASE("active receiver with hop < n goes back to idle and purges") {
  Node node{1, NodeState::Active, 2, 1};
  const auto [after, action] = on_receive(node, Message{3, true, 4}, 5);
  CHECK(after.state == NodeState::Idle);
  CHECK(after.dead == 3);
  CHECK(action.kind == NodeAction::Kind::Purge);
}

TEST_CASE("passive forward uses dead+1, not hop+1") {
  Node node{3, NodeState::Passive, 5, 0};
  const auto [after, action] = on_receive(node, Message{2, false, 11}, 8);
  CHECK(after.state == NodeState::Passive);
  CHECK(after.dead == 5);  // max(5, 2)
  CHECK(action.kind == NodeAction::Kind::Send);
  CHECK(action.message.hop == 6);
  CHECK(action.message.knockout == false);  // staying passive knocks nobody out
  CHECK(action.message.msg_id == 11);
}

TEST_CASE("the broken forwarding variant really forwards hop+1") {
  Node node{3, NodeState::Passive, 5, 0};
  const auto [after, action] =
      on_receive(node, Message{2, false, 11}, 8, ForwardingRule::HopPlusOne);
  CHECK(after.dead == 5);
  CHECK(action.message.hop == 3);
}

TEST_CASE("receive rejects out-of-range hops and degenerate rings") {
  Node node{0, NodeState::Idle, 1, 0};
  CHECK_THROWS_AS(on_receive(node, Message{0, false, 1}, 5), std::invalid_argument);
  CHECK_THROWS_AS(on_receive(node, Message{6, false, 1}, 5), std::invalid_argument);
  CHECK_THROWS_AS(on_receive(node, Message{1, false, 1}, 1), std::invalid_argument);
}

TEST_CASE("delivery to a leader is a protocol violation") {
  Node node{0, NodeState::Leader, 5, 1};
  CHECK_THROWS_AS(on_receive(node, Message{1, false, 1}, 5), ProtocolViolation);
}

TEST_CASE("a forward that would exceed the ring size is a protocol violation") {
  Node node{0, NodeState::Passive, 5, 0};  // dead = n, forward would be n+1
  CHECK_THROWS_AS(on_receive(node, Message{2, false, 1}, 5), ProtocolViolation);
}

TEST_CASE("random event sequences keep dead monotone and forwards at dead+1") {
  std::mt19937_64 gen(123);
  const int n = 8;
  for (int trial = 0; trial < 500; ++trial) {
    Node node{0, NodeState::Idle, 1, 0};
    int prev_dead = node.dead;
    std::uint64_t prev_wakes = 0;
    for (int step = 0; step < 60; ++step) {
      if (gen() % 2 == 0) {
        const auto [after, action] = on_tick(node, gen() % 2 == 0, step + 1);
        if (after.wake_count > prev_wakes) {
          CHECK(node.state == NodeState::Idle);
          CHECK(after.state == NodeState::Active);
          CHECK(action.kind == NodeAction::Kind::Send);
        }
        prev_wakes = after.wake_count;
        node = after;
      } else {
        // Hop capped at n-1 so the run exercises forwarding, not elections.
        const Message msg{1 + static_cast<int>(gen() % (n - 1)),
                          gen() % 2 == 0, step + 1000u};
        if (node.state == NodeState::Leader) break;
        StepResult r;
        try {
          r = on_receive(node, msg, n);
        } catch (const ProtocolViolation&) {
          break;  // random sequences may push dead to n and overflow a forward
        }
        if (r.action.kind == NodeAction::Kind::Send) {
          CHECK(r.action.message.hop == r.node.dead + 1);
          CHECK(r.action.message.hop <= n);
          CHECK(r.action.message.msg_id == msg.msg_id);
          // Knockout is monotone across a forward.
          if (msg.knockout) CHECK(r.action.message.knockout);
        }
        node = r.node;
      }
      CHECK(node.dead >= prev_dead);
      CHECK(node.dead <= n);
      prev_dead = node.dead;
    }
  }
}

TEST_CASE("protocol steps are pure functions of their inputs") {
  const Node node{2, NodeState::Idle, 3, 1};
  const Message msg{2, true, 9};
  const auto a = on_receive(node, msg, 6);
  const auto b = on_receive(node, msg, 6);
  CHECK(a.node.state == b.node.state);
  CHECK(a.node.dead == b.node.dead);
  CHECK(a.action.message.hop == b.action.message.hop);
  const auto c = on_tick(node, true, 4);
  const auto d = on_tick(node, true, 4);
  CHECK(c.node.wake_count == d.node.wake_count);
  CHECK(c.action.message.msg_id == d.action.message.msg_id);
}
