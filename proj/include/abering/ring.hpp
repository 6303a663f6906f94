#pragma once

#include <cstdint>
#include <vector>

#include "abering/protocol.hpp"

namespace abering {

// A message sitting on a link, waiting for delivery. send_seq is the global
// scheduling sequence number of the send; links are non-FIFO, so delivery
// order on a link need not follow send_seq order.
struct InFlightMessage {
  Message msg;
  std::uint64_t send_seq = 0;
  double delivery_time = 0.0;
};

// Snapshot of the global ring state between atomic events. Link i carries
// messages from node i to node (i+1) mod n; the ring is unidirectional, so
// that is the only place a message sent by node i can sit.
struct RingConfiguration {
  std::vector<Node> nodes;
  std::vector<std::vector<InFlightMessage>> links;

  explicit RingConfiguration(int n = 0) : nodes(n), links(n) {
    for (int i = 0; i < n; ++i) nodes[i].id = i;
  }

  int size() const { return static_cast<int>(nodes.size()); }
  int successor(int i) const { return (i + 1) % size(); }
  int predecessor(int i) const { return (i + size() - 1) % size(); }

  std::size_t messages_in_flight() const {
    std::size_t total = 0;
    for (const auto& link : links) total += link.size();
    return total;
  }

  int count_state(NodeState s) const {
    int c = 0;
    for (const auto& node : nodes) c += (node.state == s) ? 1 : 0;
    return c;
  }

  bool has_knockout_in_flight() const {
    for (const auto& link : links) {
      for (const auto& m : link) {
        if (m.msg.knockout) return true;
      }
    }
    return false;
  }
};

}  // namespace abering
