#include "abering/monitor.hpp"

#include <algorithm>
#include <cstdint>
#include <sstream>

namespace abering {

namespace {

std::int64_t signed_wake(const Node& node) {
  return static_cast<std::int64_t>(node.wake_count);
}

void add(std::vector<Violation>& out, const RingConfiguration& ring,
         const char* check, const std::string& what) {
  out.push_back(Violation{check, 0, what + " | " + format_ring(ring)});
}

// L1 for a single node: its dead-1 immediate predecessors must be passive.
void check_l1_node(const RingConfiguration& ring, int i,
                   std::vector<Violation>& out) {
  const Node& node = ring.nodes[i];
  int p = i;
  for (int j = 1; j < node.dead; ++j) {
    p = ring.predecessor(p);
    if (ring.nodes[p].state != NodeState::Passive) {
      std::ostringstream what;
      what << "node " << i << " has dead=" << node.dead << " but predecessor "
           << p << " is " << to_string(ring.nodes[p].state);
      add(out, ring, "L1", what.str());
      return;
    }
  }
}

struct SegmentFacts {
  int a = 0;                 // segment start (non-passive)
  int b = 0;                 // first non-passive successor (may equal a)
  int between = 0;           // nodes strictly between a and b
  std::size_t messages = 0;  // in flight on links a .. b-1
  bool knockout = false;     // any knockout message on those links
};

void check_segment(const RingConfiguration& ring, const SegmentFacts& seg,
                   const MonitorConfig& cfg, std::vector<Violation>& out) {
  const Node& a = ring.nodes[seg.a];
  const Node& b = ring.nodes[seg.b];
  if (cfg.l5) {
    const std::int64_t expected = signed_wake(a) - signed_wake(b) +
                                  (b.state == NodeState::Active ? 1 : 0);
    if (static_cast<std::int64_t>(seg.messages) != expected) {
      std::ostringstream what;
      what << "segment " << seg.a << "->" << seg.b << " carries "
           << seg.messages << " messages, expected " << expected;
      add(out, ring, "L5", what.str());
    }
  }
  if (cfg.l6 && !seg.knockout) {
    if (seg.between != b.dead - 1) {
      std::ostringstream what;
      what << "knockout-free segment " << seg.a << "->" << seg.b << " has "
           << seg.between << " nodes between, but dead(" << seg.b
           << ")=" << b.dead;
      add(out, ring, "L6", what.str());
    }
  }
}

void check_cor(const RingConfiguration& ring, std::vector<Violation>& out) {
  if (ring.has_knockout_in_flight()) return;
  std::int64_t sum = 0;
  for (const auto& node : ring.nodes) {
    if (node.state != NodeState::Passive) sum += node.dead;
  }
  if (sum != ring.size()) {
    std::ostringstream what;
    what << "no knockout in flight but non-passive dead counters sum to "
         << sum << " (ring size " << ring.size() << ")";
    add(out, ring, "COR", what.str());
  }
}

}  // namespace

std::string format_ring(const RingConfiguration& ring) {
  std::ostringstream out;
  out << "nodes[";
  for (int i = 0; i < ring.size(); ++i) {
    const Node& node = ring.nodes[i];
    if (i) out << ' ';
    out << i << ':' << to_string(node.state) << ":d" << node.dead << ":w"
        << node.wake_count;
  }
  out << "] links[";
  bool first = true;
  for (int i = 0; i < ring.size(); ++i) {
    for (const auto& m : ring.links[i]) {
      if (!first) out << ' ';
      first = false;
      out << i << ":h" << m.msg.hop << (m.msg.knockout ? ":ko" : "") << ":id"
          << m.msg.msg_id;
    }
  }
  out << ']';
  return out.str();
}

std::vector<Violation> check_all(const RingConfiguration& ring,
                                 const MonitorConfig& cfg) {
  std::vector<Violation> out;
  const int n = ring.size();

  if (cfg.l1) {
    for (int i = 0; i < n; ++i) check_l1_node(ring, i, out);
  }

  if (cfg.l2) {
    for (int i = 0; i < n; ++i) {
      if (ring.nodes[i].state != NodeState::Leader) continue;
      for (int j = 0; j < n; ++j) {
        if (j != i && ring.nodes[j].state != NodeState::Passive) {
          std::ostringstream what;
          what << "leader " << i << " coexists with non-passive node " << j;
          add(out, ring, "L2", what.str());
        }
      }
      if (ring.messages_in_flight() != 0) {
        add(out, ring, "L2", "leader elected with messages still in flight");
      }
    }
  }

  if (cfg.l3) {
    const auto active = static_cast<std::size_t>(ring.count_state(NodeState::Active));
    if (ring.messages_in_flight() != active) {
      std::ostringstream what;
      what << ring.messages_in_flight() << " messages in flight but " << active
           << " active nodes";
      add(out, ring, "L3", what.str());
    }
  }

  if (cfg.l4 && ring.count_state(NodeState::Passive) == n) {
    add(out, ring, "L4", "all nodes passive");
  }

  if (cfg.hopcap) {
    for (int i = 0; i < n; ++i) {
      for (const auto& m : ring.links[i]) {
        if (m.msg.hop < 1 || m.msg.hop > n) {
          std::ostringstream what;
          what << "message on link " << i << " carries hop " << m.msg.hop;
          add(out, ring, "HOPCAP", what.str());
        }
      }
    }
  }

  return out;
}

std::vector<Violation> check_segments(const RingConfiguration& ring,
                                      const MonitorConfig& cfg) {
  std::vector<Violation> out;
  if (!cfg.l5 && !cfg.l6 && !cfg.cor) return out;
  const int n = ring.size();

  std::vector<int> non_passive;
  non_passive.reserve(n);
  for (int i = 0; i < n; ++i) {
    if (ring.nodes[i].state != NodeState::Passive) non_passive.push_back(i);
  }
  if (cfg.cor) check_cor(ring, out);
  if (non_passive.empty()) return out;  // L4 territory; segments are undefined

  std::vector<std::size_t> link_count(n, 0);
  std::vector<char> link_knockout(n, 0);
  for (int i = 0; i < n; ++i) {
    link_count[i] = ring.links[i].size();
    for (const auto& m : ring.links[i]) {
      if (m.msg.knockout) link_knockout[i] = 1;
    }
  }

  const auto k = non_passive.size();
  for (std::size_t j = 0; j < k; ++j) {
    SegmentFacts seg;
    seg.a = non_passive[j];
    seg.b = non_passive[(j + 1) % k];
    const int span = (k == 1) ? n : (seg.b - seg.a + n) % n;
    seg.between = span - 1;
    for (int step = 0; step < span; ++step) {
      const int link = (seg.a + step) % n;
      seg.messages += link_count[link];
      seg.knockout = seg.knockout || link_knockout[link];
    }
    check_segment(ring, seg, cfg, out);
  }
  return out;
}

std::vector<Violation> check_segments_naive(const RingConfiguration& ring,
                                            const MonitorConfig& cfg) {
  std::vector<Violation> out;
  if (!cfg.l5 && !cfg.l6 && !cfg.cor) return out;
  const int n = ring.size();
  if (cfg.cor) check_cor(ring, out);

  for (int a = 0; a < n; ++a) {
    if (ring.nodes[a].state == NodeState::Passive) continue;
    // Walk forward until the first non-passive node, counting as we go.
    SegmentFacts seg;
    seg.a = a;
    int pos = a;
    for (int step = 0; step < n; ++step) {
      for (const auto& m : ring.links[pos]) {
        seg.messages += 1;
        seg.knockout = seg.knockout || m.msg.knockout;
      }
      pos = ring.successor(pos);
      if (ring.nodes[pos].state != NodeState::Passive) break;
      seg.between += 1;
    }
    seg.b = pos;
    check_segment(ring, seg, cfg, out);
  }
  return out;
}

std::optional<Violation> check_max_wake_elected(const RingConfiguration& before,
                                                int receiver,
                                                NodeState post_state) {
  const Node& node = before.nodes[receiver];
  if (node.state != NodeState::Active) return std::nullopt;
  for (int i = 0; i < before.size(); ++i) {
    if (i == receiver) continue;
    if (before.nodes[i].wake_count >= node.wake_count) {
      return std::nullopt;  // not a strict maximum; check is vacuous
    }
  }
  if (post_state == NodeState::Leader) return std::nullopt;
  std::ostringstream what;
  what << "node " << receiver << " holds the strict max wake count "
       << node.wake_count << " and received a message, but came out "
       << to_string(post_state) << " | " << format_ring(before);
  return Violation{"LIDLE", 0, what.str()};
}

InvariantMonitor::InvariantMonitor(const MonitorConfig& cfg) : cfg_(cfg) {}

void InvariantMonitor::on_init(const RingConfiguration& ring) {
  run_checks(ring, 0, kL1AllNodes);
}

void InvariantMonitor::after_wake(const RingConfiguration& ring, int node,
                                  std::uint64_t seq) {
  // A wake leaves every dead counter alone and turns nobody passive, so no
  // new L1 violation is possible anywhere.
  (void)node;
  run_checks(ring, seq, kL1Skip);
}

void InvariantMonitor::after_receive(const RingConfiguration& ring,
                                     int receiver, std::uint64_t seq) {
  run_checks(ring, seq, receiver);
}

void InvariantMonitor::on_delivery_to_active(const RingConfiguration& before,
                                             int receiver, NodeState post_state,
                                             std::uint64_t seq) {
  if (!cfg_.lidle) return;
  if (auto v = check_max_wake_elected(before, receiver, post_state)) {
    v->event_seq = seq;
    violations_.push_back(std::move(*v));
  }
}

void InvariantMonitor::run_checks(const RingConfiguration& ring,
                                  std::uint64_t seq, int l1_scope) {
  std::vector<Violation> found;

  MonitorConfig global = cfg_;
  global.l1 = false;  // handled incrementally below
  auto base = check_all(ring, global);
  found.insert(found.end(), base.begin(), base.end());

  if (cfg_.l1 && l1_scope != kL1Skip) {
    if (l1_scope == kL1AllNodes) {
      for (int i = 0; i < ring.size(); ++i) check_l1_node(ring, i, found);
    } else {
      check_l1_node(ring, l1_scope, found);
    }
  }

  auto segs = check_segments(ring, cfg_);
  if (cfg_.naive_crosscheck) {
    auto naive = check_segments_naive(ring, cfg_);
    if (naive.size() != segs.size()) {
      std::ostringstream what;
      what << "single-pass segment check found " << segs.size()
           << " violations, quadratic recomputation found " << naive.size();
      found.push_back(
          Violation{"XCHK", seq, what.str() + " | " + format_ring(ring)});
    }
  }
  found.insert(found.end(), segs.begin(), segs.end());

  for (auto& v : found) {
    v.event_seq = seq;
    violations_.push_back(std::move(v));
  }
}

}  // namespace abering
