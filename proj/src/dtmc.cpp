#include "abering/dtmc.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>
#include <stdexcept>

namespace abering {

namespace {

constexpr int kNodeBits = 9;  // state(2) | dead-1(3) | rel_wake(4)
constexpr int kLinkBits = 4;  // hop(3), 0 = empty | knockout(1)
constexpr int kMaxN = 7;
constexpr int kMaxRelWake = 15;

using Key = DtmcModel::Key;

Key encode(const GlobalState& s) {
  Key k;
  const int n = s.size();
  for (int i = 0; i < n; ++i) {
    const std::uint64_t node = static_cast<std::uint64_t>(s.state[i]) |
                               (static_cast<std::uint64_t>(s.dead[i] - 1) << 2) |
                               (static_cast<std::uint64_t>(s.rel_wake[i]) << 5);
    k.lo |= node << (kNodeBits * i);
    const std::uint64_t link = static_cast<std::uint64_t>(s.link_hop[i]) |
                               (static_cast<std::uint64_t>(s.link_knockout[i]) << 3);
    k.hi |= link << (kLinkBits * i);
  }
  return k;
}

GlobalState decode_key(Key k, int n) {
  GlobalState s(n);
  for (int i = 0; i < n; ++i) {
    const std::uint64_t node = (k.lo >> (kNodeBits * i)) & 0x1ff;
    s.state[i] = static_cast<NodeState>(node & 0x3);
    s.dead[i] = static_cast<int>((node >> 2) & 0x7) + 1;
    s.rel_wake[i] = static_cast<int>((node >> 5) & 0xf);
    const std::uint64_t link = (k.hi >> (kLinkBits * i)) & 0xf;
    s.link_hop[i] = static_cast<int>(link & 0x7);
    s.link_knockout[i] = static_cast<char>((link >> 3) & 0x1);
  }
  return s;
}

GlobalState rotate(const GlobalState& s, int r) {
  const int n = s.size();
  GlobalState out(n);
  for (int i = 0; i < n; ++i) {
    const int j = (i + r) % n;
    out.state[i] = s.state[j];
    out.dead[i] = s.dead[j];
    out.rel_wake[i] = s.rel_wake[j];
    out.link_hop[i] = s.link_hop[j];
    out.link_knockout[i] = s.link_knockout[j];
  }
  return out;
}

bool key_less(const Key& a, const Key& b) {
  return a.hi != b.hi ? a.hi < b.hi : a.lo < b.lo;
}

// Erase unobservable detail: drop untracked fields, zero wake counts on
// passive nodes and shift the rest so the smallest non-passive count is 0.
void normalize(GlobalState& s, const DtmcOptions& opts) {
  const int n = s.size();
  if (!opts.track_knockout) {
    std::fill(s.link_knockout.begin(), s.link_knockout.end(), 0);
  }
  if (!opts.track_relative_wakes) {
    std::fill(s.rel_wake.begin(), s.rel_wake.end(), 0);
    return;
  }
  int min_wake = -1;
  for (int i = 0; i < n; ++i) {
    if (s.state[i] == NodeState::Passive) {
      s.rel_wake[i] = 0;
    } else if (min_wake < 0 || s.rel_wake[i] < min_wake) {
      min_wake = s.rel_wake[i];
    }
  }
  if (min_wake > 0) {
    for (int i = 0; i < n; ++i) {
      if (s.state[i] != NodeState::Passive) s.rel_wake[i] -= min_wake;
    }
  }
  for (int i = 0; i < n; ++i) {
    if (s.rel_wake[i] > kMaxRelWake) {
      throw std::logic_error("relative wake count exceeds encoding bound");
    }
  }
}

Key canonical_key(GlobalState s, const DtmcOptions& opts) {
  normalize(s, opts);
  Key best = encode(s);
  if (opts.rotation_canonicalization) {
    for (int r = 1; r < s.size(); ++r) {
      const Key k = encode(rotate(s, r));
      if (key_less(k, best)) best = k;
    }
  }
  return best;
}

// Message phase: every in-flight message advances one link and is processed
// by its receiver. Receivers place forwards on their own outgoing links,
// which are guaranteed free for the rest of the step.
GlobalState advance_messages(const GlobalState& s, ForwardingRule rule) {
  const int n = s.size();
  GlobalState out = s;
  std::fill(out.link_hop.begin(), out.link_hop.end(), 0);
  std::fill(out.link_knockout.begin(), out.link_knockout.end(), 0);

  for (int link = 0; link < n; ++link) {
    if (s.link_hop[link] == 0) continue;
    const int target = (link + 1) % n;
    Node node;
    node.id = target;
    node.state = out.state[target];
    node.dead = out.dead[target];
    const Message msg{s.link_hop[link], s.link_knockout[link] != 0, 0};
    const StepResult r = on_receive(node, msg, n, rule);
    out.state[target] = r.node.state;
    out.dead[target] = r.node.dead;
    if (r.action.kind == NodeAction::Kind::Send) {
      if (out.link_hop[target] != 0) {
        throw std::logic_error("two messages landed on one link in one step");
      }
      out.link_hop[target] = r.action.message.hop;
      out.link_knockout[target] = r.action.message.knockout ? 1 : 0;
    }
  }
  return out;
}

}  // namespace

GlobalState DtmcModel::decode(std::size_t i) const {
  return decode_key(states.at(i), n);
}

std::optional<std::uint32_t> DtmcModel::find(const GlobalState& s) const {
  const auto it = index.find(canonical_key(s, opts));
  if (it == index.end()) return std::nullopt;
  return it->second;
}

RingConfiguration DtmcModel::materialize(std::size_t i) const {
  const GlobalState s = decode(i);
  RingConfiguration ring(n);
  for (int j = 0; j < n; ++j) {
    ring.nodes[j].state = s.state[j];
    ring.nodes[j].dead = s.dead[j];
    ring.nodes[j].wake_count = static_cast<std::uint64_t>(s.rel_wake[j]);
    if (s.link_hop[j] != 0) {
      ring.links[j].push_back(InFlightMessage{
          Message{s.link_hop[j], s.link_knockout[j] != 0,
                  static_cast<std::uint64_t>(j) + 1},
          0, 0.0});
    }
  }
  return ring;
}

void DtmcModel::validate() const {
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto& row = rows[i];
    double sum = 0.0;
    for (const auto& [target, p] : row) {
      if (target >= states.size() || !(p >= 0.0)) {
        throw std::invalid_argument("dtmc: malformed transition row");
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      throw std::invalid_argument("dtmc: row " + std::to_string(i) +
                                  " sums to " + std::to_string(sum));
    }
    const bool leader = decode(i).has_leader();
    if (leader != static_cast<bool>(absorbing[i])) {
      throw std::invalid_argument("dtmc: absorbing flag disagrees with state");
    }
    if (leader) {
      if (row.size() != 1 || row[0].first != i || row[0].second != 1.0) {
        throw std::invalid_argument(
            "dtmc: leader state " + std::to_string(i) +
            " must carry a single self-loop");
      }
    }
  }
}

std::string DtmcModel::describe_state(std::size_t i) const {
  return format_ring(materialize(i));
}

DtmcModel build_dtmc(int n, double a0, const DtmcOptions& opts) {
  if (n < 2 || n > kMaxN) {
    throw std::invalid_argument("build_dtmc: ring size must be in 2..7");
  }
  if (!(a0 > 0.0 && a0 < 1.0)) {
    throw std::invalid_argument("build_dtmc: a0 must be in (0,1)");
  }

  DtmcModel m;
  m.n = n;
  m.a0 = a0;
  m.opts = opts;

  const auto intern = [&](const Key& key) -> std::uint32_t {
    const auto it = m.index.find(key);
    if (it != m.index.end()) return it->second;
    if (m.states.size() >= opts.max_states) {
      throw std::runtime_error(
          "build_dtmc: state space exceeds max_states = " +
          std::to_string(opts.max_states) + " (n = " + std::to_string(n) + ")");
    }
    const auto idx = static_cast<std::uint32_t>(m.states.size());
    m.states.push_back(key);
    m.index.emplace(key, idx);
    return idx;
  };

  m.initial = intern(canonical_key(GlobalState(n), opts));

  std::deque<std::uint32_t> frontier{m.initial};
  std::vector<char> expanded;

  while (!frontier.empty()) {
    const std::uint32_t idx = frontier.front();
    frontier.pop_front();
    if (idx < expanded.size() && expanded[idx]) continue;
    if (expanded.size() <= idx) expanded.resize(idx + 1, 0);
    expanded[idx] = 1;
    if (m.rows.size() <= idx) m.rows.resize(idx + 1);
    if (m.absorbing.size() <= idx) m.absorbing.resize(idx + 1, 0);

    const GlobalState s = decode_key(m.states[idx], n);
    if (s.has_leader()) {
      m.absorbing[idx] = 1;
      m.rows[idx] = {{idx, 1.0}};
      continue;
    }

    const GlobalState after_messages = advance_messages(s, opts.rule);

    std::vector<int> idle;
    std::vector<double> wake_p;
    for (int i = 0; i < n; ++i) {
      if (after_messages.state[i] == NodeState::Idle) {
        idle.push_back(i);
        wake_p.push_back(wake_probability(after_messages.dead[i], a0));
      }
    }

    std::vector<std::pair<std::uint32_t, double>> row;
    const std::uint32_t outcomes = 1u << idle.size();
    for (std::uint32_t mask = 0; mask < outcomes; ++mask) {
      GlobalState t = after_messages;
      double p = 1.0;
      for (std::size_t b = 0; b < idle.size(); ++b) {
        const int node_id = idle[b];
        if (mask & (1u << b)) {
          p *= wake_p[b];
          t.state[node_id] = NodeState::Active;
          t.rel_wake[node_id] += 1;
          if (t.link_hop[node_id] != 0) {
            throw std::logic_error("wake onto an occupied link");
          }
          t.link_hop[node_id] = 1;
          t.link_knockout[node_id] = 0;
        } else {
          p *= 1.0 - wake_p[b];
        }
      }
      const std::uint32_t target = intern(canonical_key(std::move(t), opts));
      bool merged = false;
      for (auto& [existing, prob] : row) {
        if (existing == target) {
          prob += p;
          merged = true;
          break;
        }
      }
      if (!merged) row.emplace_back(target, p);
      if (target >= expanded.size() || !expanded[target]) {
        frontier.push_back(target);
      }
    }
    std::sort(row.begin(), row.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    m.rows[idx] = std::move(row);
  }

  m.rows.resize(m.states.size());
  m.absorbing.resize(m.states.size(), 0);
  for (std::size_t i = 0; i < m.states.size(); ++i) {
    if (m.rows[i].empty()) {
      // Discovered but never expanded states cannot exist after the loop.
      throw std::logic_error("build_dtmc: unexpanded state survived");
    }
  }
  return m;
}

namespace {

// Gauss-Seidel sweeps in reverse discovery order, which points roughly from
// the absorbing frontier back toward the initial state.
template <typename PerState>
double solve_fixed_point(const DtmcModel& m, std::vector<double>& x,
                         double tol, const char* what, PerState rhs) {
  const std::size_t count = m.state_count();
  const int max_sweeps = 200000;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double residual = 0.0;
    for (std::size_t ii = count; ii-- > 0;) {
      if (m.absorbing[ii]) continue;
      const double updated = rhs(ii, x);
      residual = std::max(residual, std::abs(updated - x[ii]));
      x[ii] = updated;
    }
    if (residual < tol) return residual;
  }
  throw std::runtime_error(std::string(what) +
                           ": iteration did not converge to tolerance");
}

}  // namespace

double termination_probability(const DtmcModel& model) {
  model.validate();
  std::vector<double> p(model.state_count(), 0.0);
  for (std::size_t i = 0; i < model.state_count(); ++i) {
    if (model.absorbing[i]) p[i] = 1.0;
  }
  solve_fixed_point(model, p, 1e-12, "termination_probability",
                    [&](std::size_t i, const std::vector<double>& x) {
                      double acc = 0.0;
                      for (const auto& [t, pr] : model.rows[i]) acc += pr * x[t];
                      return acc;
                    });
  return p[model.initial];
}

double expected_rounds(const DtmcModel& model) {
  const double tp = termination_probability(model);
  if (tp < 1.0 - 1e-6) {
    throw std::invalid_argument(
        "expected_rounds: termination probability " + std::to_string(tp) +
        " is not 1; expected rounds diverges");
  }
  std::vector<double> h(model.state_count(), 0.0);
  solve_fixed_point(model, h, 1e-10, "expected_rounds",
                    [&](std::size_t i, const std::vector<double>& x) {
                      double acc = 1.0;
                      for (const auto& [t, pr] : model.rows[i]) {
                        if (!model.absorbing[t]) acc += pr * x[t];
                      }
                      return acc;
                    });
  return h[model.initial];
}

std::vector<double> transient_distribution(const DtmcModel& model, int steps) {
  if (steps < 0) throw std::invalid_argument("steps must be >= 0");
  std::vector<double> d(model.state_count(), 0.0);
  d[model.initial] = 1.0;
  std::vector<double> next(model.state_count(), 0.0);
  for (int k = 0; k < steps; ++k) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < model.state_count(); ++i) {
      if (d[i] == 0.0) continue;
      for (const auto& [t, pr] : model.rows[i]) next[t] += d[i] * pr;
    }
    d.swap(next);
  }
  return d;
}

ExhaustiveReport exhaustive_invariant_check(const DtmcModel& model,
                                            const MonitorConfig& cfg) {
  if (!model.opts.track_knockout) {
    throw std::invalid_argument(
        "exhaustive_invariant_check: model must be built with track_knockout");
  }
  MonitorConfig effective = cfg;
  effective.lidle = false;  // event-scoped, not a property of a state
  if (!model.opts.track_relative_wakes) effective.l5 = false;

  ExhaustiveReport report;
  for (std::size_t i = 0; i < model.state_count(); ++i) {
    const RingConfiguration ring = model.materialize(i);
    auto violations = check_all(ring, effective);
    auto segs = check_segments(ring, effective);
    violations.insert(violations.end(), segs.begin(), segs.end());
    if (effective.naive_crosscheck) {
      const auto naive = check_segments_naive(ring, effective);
      if (naive.size() != segs.size()) {
        violations.push_back(Violation{
            "XCHK", 0, "segment check disagreement | " + format_ring(ring)});
      }
    }
    for (auto& v : violations) {
      report.violations.emplace_back(static_cast<std::uint32_t>(i), std::move(v));
    }
    report.states_checked += 1;
  }
  return report;
}

}  // namespace abering
