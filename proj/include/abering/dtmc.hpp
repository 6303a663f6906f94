#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "abering/monitor.hpp"
#include "abering/protocol.hpp"
#include "abering/ring.hpp"

namespace abering {

// Exact analysis of the synchronous unit-delay instantiation: every global
// step first advances each in-flight message one link (deliveries processed
// by the protocol state machine), then lets every idle node gamble
// independently. All randomness comes from the gambles, so the system is a
// discrete-time Markov chain. States containing a leader are absorbing.
//
// Under these semantics each link holds at most one message at step
// boundaries: a link's occupant always departs during the message phase, and
// the only node that can place a message on link i afterwards is node i
// itself, at most once per step.

// Decoded global configuration. rel_wake stores wake counts shifted so the
// smallest non-passive count is zero; only differences between non-passive
// nodes are observable (segment counting), and those differences are bounded
// by the ring size, which keeps the augmented state space finite. link_hop 0
// means the link is empty.
struct GlobalState {
  std::vector<NodeState> state;
  std::vector<int> dead;
  std::vector<int> rel_wake;
  std::vector<int> link_hop;
  std::vector<char> link_knockout;

  explicit GlobalState(int n = 0)
      : state(n, NodeState::Idle),
        dead(n, 1),
        rel_wake(n, 0),
        link_hop(n, 0),
        link_knockout(n, 0) {}

  int size() const { return static_cast<int>(state.size()); }
  bool has_leader() const {
    for (auto s : state) {
      if (s == NodeState::Leader) return true;
    }
    return false;
  }
};

struct DtmcOptions {
  // Carry knockout flags in the state (needed by the L6/COR checks).
  bool track_knockout = false;
  // Carry bounded relative wake counts (needed by the L5 check).
  bool track_relative_wakes = false;
  // Quotient by ring rotation. Off by default: the checker tells nodes apart
  // even though the protocol cannot.
  bool rotation_canonicalization = false;
  std::size_t max_states = 2'000'000;
  ForwardingRule rule = ForwardingRule::DeadPlusOne;
};

struct DtmcModel {
  int n = 0;
  double a0 = 0.0;
  DtmcOptions opts;

  struct Key {
    std::uint64_t lo = 0, hi = 0;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      std::uint64_t h = k.lo * 0x9e3779b97f4a7c15ull;
      h ^= (k.hi + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2));
      return static_cast<std::size_t>(h);
    }
  };

  std::vector<Key> states;  // index -> packed state
  std::vector<std::vector<std::pair<std::uint32_t, double>>> rows;
  std::vector<char> absorbing;
  std::uint32_t initial = 0;
  std::unordered_map<Key, std::uint32_t, KeyHash> index;

  std::size_t state_count() const { return states.size(); }
  GlobalState decode(std::size_t i) const;
  // Canonicalizes (wake shift, rotation if enabled) and looks the state up.
  std::optional<std::uint32_t> find(const GlobalState& s) const;
  // View a state as a ring configuration so the run-time invariant checks
  // apply unchanged. Message ids are synthesized; they carry no information
  // at the state level.
  RingConfiguration materialize(std::size_t i) const;

  // Row stochasticity, the absorbing flags, and single self-loops on every
  // leader state. Throws std::invalid_argument on tampered models.
  void validate() const;

  std::string describe_state(std::size_t i) const;
};

// Explores all configurations reachable from the all-idle initial state.
// Requires 2 <= n (and practically n <= 7 for the packed encoding); throws
// when the reachable set exceeds opts.max_states.
DtmcModel build_dtmc(int n, double a0, const DtmcOptions& opts = {});

// Probability of eventually reaching a leader state from the initial state,
// by Gauss-Seidel iteration of the absorption system to residual < 1e-12.
double termination_probability(const DtmcModel& model);

// Expected number of global steps until absorption, by Gauss-Seidel
// iteration of the first-passage system to residual < 1e-10. Requires
// termination probability 1 up to tolerance.
double expected_rounds(const DtmcModel& model);

// Distribution over states after `steps` global steps (matrix powering).
std::vector<double> transient_distribution(const DtmcModel& model, int steps);

struct ExhaustiveReport {
  std::size_t states_checked = 0;
  std::vector<std::pair<std::uint32_t, Violation>> violations;
  bool ok() const { return violations.empty(); }
};

// Evaluates the configuration-level invariant checks on every reachable
// state. Needs track_knockout (the L6/COR side conditions read the flags);
// L5 additionally needs track_relative_wakes and is skipped without it.
// The event-scoped LIDLE check has no state-level meaning and is ignored.
ExhaustiveReport exhaustive_invariant_check(
    const DtmcModel& model, const MonitorConfig& cfg = MonitorConfig::all());

}  // namespace abering
