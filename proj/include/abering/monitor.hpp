#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "abering/ring.hpp"

namespace abering {

// One failed check, with enough context to reproduce and debug the run.
struct Violation {
  std::string check;       // "L1".."L6", "COR", "LIDLE", "HOPCAP"
  std::uint64_t event_seq = 0;
  std::string detail;      // human-readable diagnostic + ring snapshot
};

// Which checks are active. Monitors are pure observers over the ring
// configuration; enabling or disabling them never changes a run's outcome.
//
//   L1      every node's dead-1 immediate predecessors are passive
//   L2      a leader implies all other nodes passive and no messages
//   L3      as many in-flight messages as active nodes
//   L4      at least one node is not passive
//   L5      per segment between consecutive non-passive nodes A,B:
//           messages on the segment = wake(A) - wake(B) + [B active]
//   L6      per knockout-free segment: nodes strictly between A and B
//           (n-1 when A=B) = dead(B) - 1
//   COR     with no knockout message in flight anywhere, the dead counters
//           of the non-passive nodes sum to exactly n
//   LIDLE   an active node with the strictly largest wake count that
//           receives a message must come out of the delivery as leader
//   HOPCAP  every in-flight hop lies in 1..n
struct MonitorConfig {
  bool l1 = true, l2 = true, l3 = true, l4 = true;
  bool l5 = true, l6 = true, cor = true;
  bool lidle = true, hopcap = true;
  // Re-derives the segment checks with an independent quadratic scan and
  // reports any disagreement with the single-pass version. Small rings only.
  bool naive_crosscheck = false;

  static MonitorConfig all() { return MonitorConfig{}; }
  static MonitorConfig none() {
    MonitorConfig c;
    c.l1 = c.l2 = c.l3 = c.l4 = c.l5 = c.l6 = c.cor = c.lidle = c.hopcap = false;
    return c;
  }
  bool any() const {
    return l1 || l2 || l3 || l4 || l5 || l6 || cor || lidle || hopcap;
  }
};

std::string format_ring(const RingConfiguration& ring);

// Global checks L1-L4 and HOPCAP on a configuration between atomic events.
std::vector<Violation> check_all(const RingConfiguration& ring,
                                 const MonitorConfig& cfg = MonitorConfig::all());

// Segment checks L5, L6 and COR in one O(n + messages) ring walk. Segments
// run from each non-passive node A to its first non-passive successor B
// (A = B spans the whole ring when A is the only non-passive node).
std::vector<Violation> check_segments(const RingConfiguration& ring,
                                      const MonitorConfig& cfg = MonitorConfig::all());

// Independent quadratic recomputation of the segment checks, kept as a
// cross-check oracle for the single-pass version at small n.
std::vector<Violation> check_segments_naive(const RingConfiguration& ring,
                                            const MonitorConfig& cfg = MonitorConfig::all());

// LIDLE: called for a delivery to an active node, with the configuration
// before the delivery and the receiver's post-delivery state.
std::optional<Violation> check_max_wake_elected(const RingConfiguration& before,
                                                int receiver,
                                                NodeState post_state);

// Inline observer driven by the event loop of one run. Checks fire only on
// events that changed the configuration (a failed gamble changes nothing and
// leaves the already-checked configuration in place). The L1 scan is limited
// to the node the event touched; state transitions never turn a passive
// predecessor back, so no other node's L1 status can flip.
class InvariantMonitor {
 public:
  explicit InvariantMonitor(const MonitorConfig& cfg);

  void on_init(const RingConfiguration& ring);
  void after_wake(const RingConfiguration& ring, int node, std::uint64_t seq);
  void after_receive(const RingConfiguration& ring, int receiver,
                     std::uint64_t seq);
  void on_delivery_to_active(const RingConfiguration& before, int receiver,
                             NodeState post_state, std::uint64_t seq);

  const std::vector<Violation>& violations() const { return violations_; }
  bool ok() const { return violations_.empty(); }

 private:
  static constexpr int kL1AllNodes = -1;
  static constexpr int kL1Skip = -2;
  void run_checks(const RingConfiguration& ring, std::uint64_t seq,
                  int l1_scope);

  MonitorConfig cfg_;
  std::vector<Violation> violations_;
};

}  // namespace abering
