#include "abering/protocol.hpp"

#include <cmath>

namespace abering {

const char* to_string(NodeState s) {
  switch (s) {
    case NodeState::Idle:
      return "idle";
    case NodeState::Active:
      return "active";
    case NodeState::Passive:
      return "passive";
    case NodeState::Leader:
      return "leader";
  }
  return "?";
}

double wake_probability(int dead, double a0) {
  if (dead < 1) {
    throw std::invalid_argument("wake_probability: dead must be >= 1");
  }
  if (!(a0 > 0.0 && a0 < 1.0)) {
    throw std::invalid_argument("wake_probability: a0 must be in (0,1)");
  }
  // 1 - (1-a0)^dead, evaluated in the log domain so tiny a0 with large dead
  // does not lose precision.
  return -std::expm1(static_cast<double>(dead) * std::log1p(-a0));
}

StepResult on_tick(const Node& node, bool gamble_outcome,
                   std::uint64_t fresh_msg_id) {
  StepResult r{node, {}};
  if (node.state != NodeState::Idle || !gamble_outcome) {
    return r;  // only idle nodes gamble
  }
  r.node.state = NodeState::Active;
  r.node.wake_count += 1;
  r.action.kind = NodeAction::Kind::Send;
  r.action.message = Message{1, false, fresh_msg_id};
  return r;
}

StepResult on_receive(const Node& node, const Message& msg, int ring_size,
                      ForwardingRule rule) {
  if (ring_size < 2) {
    throw std::invalid_argument("on_receive: ring size must be >= 2");
  }
  if (msg.hop < 1 || msg.hop > ring_size) {
    throw std::invalid_argument("on_receive: hop out of range 1..n");
  }
  if (node.state == NodeState::Leader) {
    // After an election no messages remain in the ring, so a delivery here
    // means the simulation itself is broken.
    throw ProtocolViolation("message delivered to a leader node");
  }

  StepResult r{node, {}};
  // The counter update precedes both the state dispatch and the computation
  // of the forwarded hop.
  r.node.dead = std::max(node.dead, msg.hop);

  const auto forward = [&](bool knockout) {
    const int hop = (rule == ForwardingRule::DeadPlusOne) ? r.node.dead + 1
                                                          : msg.hop + 1;
    if (hop > ring_size) {
      throw ProtocolViolation("forwarded hop " + std::to_string(hop) +
                              " exceeds ring size " +
                              std::to_string(ring_size));
    }
    r.action.kind = NodeAction::Kind::Send;
    r.action.message = Message{hop, knockout, msg.msg_id};
  };

  switch (node.state) {
    case NodeState::Idle:
      r.node.state = NodeState::Passive;
      forward(true);  // the message just knocked out an idle node
      break;
    case NodeState::Passive:
      forward(msg.knockout);
      break;
    case NodeState::Active:
      if (msg.hop == ring_size) {
        r.node.state = NodeState::Leader;
        r.action.kind = NodeAction::Kind::BecomeLeader;
      } else {
        r.node.state = NodeState::Idle;
        r.action.kind = NodeAction::Kind::Purge;
      }
      break;
    case NodeState::Leader:
      break;  // unreachable, handled above
  }
  return r;
}

}  // namespace abering
