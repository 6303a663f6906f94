#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace abering {

// Per-node state machine of the election protocol on an anonymous,
// unidirectional ring. Passive and Leader are absorbing; Active is entered
// only from Idle and Leader only from Active.
enum class NodeState : std::uint8_t { Idle, Active, Passive, Leader };

const char* to_string(NodeState s);

// Ring message. The protocol itself carries only the hop counter; the
// knockout flag and msg_id are analysis metadata invisible to the nodes.
// A message is a knockout message once it has turned some idle node passive
// at any point during its lifetime; forwarding preserves msg_id, so the flag
// survives across hops.
struct Message {
  int hop = 1;                // in 1..n
  bool knockout = false;      // analysis metadata, monotone under forwarding
  std::uint64_t msg_id = 0;   // analysis metadata, stable across forwards
};

struct Node {
  int id = 0;                 // ring position, instrumentation only
  NodeState state = NodeState::Idle;
  int dead = 1;               // highest received hop count, >= 1, <= n
  std::uint64_t wake_count = 0;  // number of Idle -> Active transitions
};

// Exactly one action is produced per protocol event.
struct NodeAction {
  enum class Kind : std::uint8_t { None, Send, Purge, BecomeLeader };
  Kind kind = Kind::None;
  Message message{};          // meaningful only when kind == Send
};

// Forwarding rule selector. HopPlusOne is the known-broken variant (forward
// <hop+1> instead of <dead+1>); it exists solely so the invariant checks can
// be mutation-tested against a protocol that undercounts passive predecessors
// under message overtaking.
enum class ForwardingRule : std::uint8_t { DeadPlusOne, HopPlusOne };

// Raised when a run reaches a configuration the protocol's invariants rule
// out (e.g. a delivery to a Leader, or a forward whose hop would exceed n).
// Indicates a simulator bug or a deliberately mutated protocol, never a
// legal execution.
class ProtocolViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Probability that an idle node with counter `dead` wakes on one tick:
// 1 - (1 - a0)^dead. Strictly increasing in both arguments.
double wake_probability(int dead, double a0);

struct StepResult {
  Node node;
  NodeAction action;
};

// Clock tick at `node`. Only idle nodes gamble; `gamble_outcome` must have
// been drawn by the caller with wake_probability(node.dead, a0), so this
// function is a pure function of its inputs. On a successful gamble the node
// becomes active and emits <1> carrying `fresh_msg_id`.
StepResult on_tick(const Node& node, bool gamble_outcome,
                   std::uint64_t fresh_msg_id);

// Delivery of `msg` at `node` in a ring of `ring_size` nodes. Applies
// dead = max(dead, hop) first, then dispatches on the current state:
// idle nodes turn passive and forward, passive nodes forward, active nodes
// purge (or become leader when hop == ring_size). Forwards carry
// hop = dead + 1 under the standard rule.
StepResult on_receive(const Node& node, const Message& msg, int ring_size,
                      ForwardingRule rule = ForwardingRule::DeadPlusOne);

}  // namespace abering
