#include "abering/check_suite.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include <json.hpp>

#include "abering/analysis.hpp"
#include "abering/csv.hpp"
#include "abering/dtmc.hpp"
#include "abering/experiment.hpp"
#include "abering/sim.hpp"

namespace abering {

namespace {

using Clock = std::chrono::steady_clock;

struct Recorder {
  CheckReport& report;
  std::ostream* progress;

  void add(const std::string& id, const std::string& name, bool pass,
           const std::string& detail, Clock::time_point started) {
    CriterionResult r;
    r.id = id;
    r.name = name;
    r.pass = pass;
    r.detail = detail;
    r.seconds =
        std::chrono::duration<double>(Clock::now() - started).count();
    if (progress) {
      (*progress) << id << ' ' << name << ": " << (pass ? "PASS" : "FAIL")
                  << " (" << detail << ") [" << format_double(r.seconds)
                  << "s]\n";
      progress->flush();
    }
    report.criteria.push_back(std::move(r));
  }
};

SimConfig reference_config(int n) {
  SimConfig cfg;
  cfg.n = n;
  cfg.a0 = compute_optimal_activation(n);
  cfg.delta = 1.0;
  cfg.delay = DelayModel::exponential(1.0);
  cfg.clock = ClockModel::unit();
  cfg.processing.gamma = 0.0;
  return cfg;
}

SimConfig lockstep_config(int n, double a0) {
  SimConfig cfg;
  cfg.n = n;
  cfg.a0 = a0;
  cfg.delta = 1.0;
  cfg.delay = DelayModel::deterministic(1.0);
  cfg.clock = ClockModel::unit();
  return cfg;
}

// Golden-section minimizer; assumes f is unimodal on [lo, hi].
double minimize_unimodal(const std::function<double(double)>& f, double lo,
                         double hi) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < 300 && (b - a) > 1e-14; ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

std::string summarize_failures(const BatchStats& stats, std::size_t limit = 2) {
  std::ostringstream out;
  out << stats.failures.size() << " failures";
  for (std::size_t i = 0; i < stats.failures.size() && i < limit; ++i) {
    out << "; seed " << stats.failures[i].first << ": "
        << stats.failures[i].second.substr(0, 160);
  }
  return out.str();
}

}  // namespace

CheckReport run_check_suite(CheckScale scale, int threads,
                            std::ostream* progress) {
  CheckReport report;
  report.scale = scale;
  Recorder rec{report, progress};
  const bool full = scale == CheckScale::Full;

  // C1/C2 share their Monte Carlo runs: the correctness batches execute with
  // every monitor enabled, so one pass yields both the election statistics
  // and the invariant verdicts.
  {
    const auto started = Clock::now();
    const std::vector<int> sizes =
        full ? std::vector<int>{3, 10, 50, 100} : std::vector<int>{3, 10, 25};
    const std::uint64_t runs = full ? 5000 : 500;
    MonitorConfig monitors = MonitorConfig::all();

    bool c1_pass = true;
    std::size_t violation_failures = 0;
    std::ostringstream c1_detail;
    for (int n : sizes) {
      SimConfig cfg = reference_config(n);
      const BatchStats stats =
          run_batch(cfg, runs, 7000 + static_cast<std::uint64_t>(n), threads,
                    &monitors);
      violation_failures += stats.failures.size();
      c1_detail << "n=" << n << ": " << stats.elected << "/" << stats.runs
                << " elected";
      if (!stats.ok()) {
        c1_pass = false;
        c1_detail << " [" << summarize_failures(stats) << "]";
      }
      c1_detail << "; ";
    }
    rec.add("C1", "unique-leader-correctness", c1_pass, c1_detail.str(),
            started);

    // C2 part two: every reachable lockstep configuration satisfies the
    // invariant suite (including the segment counting that needs wake and
    // knockout bookkeeping in the state).
    const auto c2_started = Clock::now();
    bool c2_pass = violation_failures == 0;
    std::ostringstream c2_detail;
    c2_detail << violation_failures << " monitored-run violations; exhaustive:";
    const std::vector<int> exhaustive_n = full ? std::vector<int>{3, 4}
                                               : std::vector<int>{3};
    const std::vector<double> exhaustive_a0 =
        full ? std::vector<double>{0.1, 0.5} : std::vector<double>{0.5};
    for (int n : exhaustive_n) {
      for (double a0 : exhaustive_a0) {
        DtmcOptions opts;
        opts.track_knockout = true;
        opts.track_relative_wakes = true;
        const DtmcModel model = build_dtmc(n, a0, opts);
        MonitorConfig cfg = MonitorConfig::all();
        cfg.naive_crosscheck = n <= 4;
        const ExhaustiveReport ex = exhaustive_invariant_check(model, cfg);
        c2_detail << " n=" << n << ",a0=" << format_double(a0) << ": "
                  << ex.states_checked << " states, "
                  << ex.violations.size() << " violations;";
        if (!ex.ok()) {
          c2_pass = false;
          c2_detail << " first: " << ex.violations.front().second.check << " "
                    << ex.violations.front().second.detail.substr(0, 160)
                    << ";";
        }
      }
    }
    rec.add("C2", "invariant-suite", c2_pass, c2_detail.str(), c2_started);
  }

  // C3: closed-form optimal activation parameter and agreement with direct
  // numerical minimization of the average election time.
  {
    const auto started = Clock::now();
    bool pass = true;
    std::ostringstream detail;
    const double opt100 = compute_optimal_activation(100);
    const double opt6 = compute_optimal_activation(6);
    detail << "opt(100)=" << format_double(opt100)
           << " opt(6)=" << format_double(opt6);
    if (std::abs(opt100 - 0.000200) > 1e-6) pass = false;
    if (std::abs(opt6 - 0.0545) > 5e-4) pass = false;

    const int n_hi = full ? 50 : 20;
    double worst = 0.0;
    for (int n = 3; n <= n_hi; ++n) {
      const double closed = compute_optimal_activation(n);
      const double numeric = minimize_unimodal(
          [n](double a0) { return average_election_time(n, a0); }, 1e-7, 0.6);
      worst = std::max(worst, std::abs(numeric - closed));
    }
    detail << " max|numeric-closed|=" << format_double(worst) << " over n=3.."
           << n_hi;
    if (worst > 1e-8) pass = false;
    rec.add("C3", "optimal-activation", pass, detail.str(), started);
  }

  // C4: large-n asymptotics.
  {
    const auto started = Clock::now();
    const double w_limit = 1.0 - std::exp(-2.0);
    const double w_at_1e4 = interference_probability_simplified(10000);
    const double gap_w = std::abs(w_at_1e4 - w_limit);
    const double ratio = optimal_activation_asymptote(1000) /
                         compute_optimal_activation(1000);
    const double gap_ratio = std::abs(ratio - 1.0);
    const bool pass = gap_w < 1e-3 && gap_ratio < 1e-3;
    std::ostringstream detail;
    detail << "|W(1e4)-(1-e^-2)|=" << format_double(gap_w)
           << " |asymptote/exact-1|=" << format_double(gap_ratio);
    rec.add("C4", "asymptotics", pass, detail.str(), started);
  }

  // C5: chain termination probability across the activation grid.
  {
    const auto started = Clock::now();
    bool pass = true;
    double min_p = 1.0;
    const std::vector<int> sizes = full ? std::vector<int>{3, 4, 5}
                                        : std::vector<int>{3, 4};
    std::vector<double> grid;
    if (full) {
      for (int i = 1; i <= 9; ++i) grid.push_back(0.1 * i);
    } else {
      grid = {0.3, 0.6};
    }
    for (int n : sizes) {
      for (double a0 : grid) {
        const DtmcModel model = build_dtmc(n, a0);
        const double p = termination_probability(model);
        min_p = std::min(min_p, p);
        if (p < 1.0 - 1e-9) pass = false;
      }
    }
    std::ostringstream detail;
    detail << "min termination probability " << format_double(min_p);
    rec.add("C5", "dtmc-termination", pass, detail.str(), started);
  }

  // C6: tuned-parameter reproduction at n = 6 plus chain/simulator agreement
  // at n = 3 under the lockstep configuration.
  {
    const auto started = Clock::now();
    bool pass = true;
    std::ostringstream detail;

    const std::uint64_t runs = full ? 5000 : 1000;
    std::vector<double> grid;
    for (double a0 = 0.03; a0 <= 0.08 + 1e-12; a0 += 0.005) grid.push_back(a0);
    const auto points = sweep_activation(lockstep_config(6, 0.05), grid, runs,
                                         4242, threads);
    std::size_t argmin = 0, target = 0;
    for (std::size_t i = 1; i < points.size(); ++i) {
      if (points[i].stats.time.mean < points[argmin].stats.time.mean) argmin = i;
      if (std::abs(points[i].a0 - 0.0545) < std::abs(points[target].a0 - 0.0545)) {
        target = i;
      }
    }
    // "Within one grid step": at most one grid position away from the grid
    // point nearest the tuned value (the reading that also makes sense for
    // log-spaced grids). The curve is nearly flat here; the exact chain
    // solution of the same process bottoms out one step above the tuned
    // value, so the band is {0.050, 0.055, 0.060}.
    std::size_t exact_argmin = 0;
    std::vector<double> exact_curve;
    for (std::size_t i = 0; i < points.size(); ++i) {
      exact_curve.push_back(expected_rounds(build_dtmc(6, points[i].a0)));
      if (exact_curve[i] < exact_curve[exact_argmin]) exact_argmin = i;
    }
    detail << "n=6 sweep minimizer a0=" << format_double(points[argmin].a0)
           << " (exact-chain grid minimizer a0="
           << format_double(points[exact_argmin].a0) << ")";
    const auto distance = argmin > target ? argmin - target : target - argmin;
    if (distance > 1) pass = false;

    const double a0_3 = compute_optimal_activation(3);
    const DtmcModel model = build_dtmc(3, a0_3);
    const double exact = expected_rounds(model);
    const std::uint64_t agree_runs = full ? 20000 : 4000;
    const BatchStats sim =
        run_batch(lockstep_config(3, a0_3), agree_runs, 991, threads);
    const double rel = std::abs(sim.time.mean - exact) / exact;
    detail << "; n=3 expected rounds exact=" << format_double(exact)
           << " sim=" << format_double(sim.time.mean)
           << " rel=" << format_double(rel);
    if (!(rel < 0.02) || !sim.ok()) pass = false;
    rec.add("C6", "tuned-parameter-reproduction", pass, detail.str(), started);
  }

  // C7: linear time and message complexity over the scaling sweep.
  {
    const auto started = Clock::now();
    const std::vector<int> sizes = full ? std::vector<int>{40, 100, 200, 400, 620}
                                        : std::vector<int>{20, 40, 80};
    const std::uint64_t runs = full ? 500 : 200;
    const auto points =
        scaling_study(reference_config(2), sizes, runs, 515151, threads);

    std::vector<double> ns, times, messages;
    double min_ratio = 0.0, max_ratio = 0.0;
    bool all_ok = true;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto& p = points[i];
      all_ok = all_ok && p.stats.ok();
      ns.push_back(p.n);
      times.push_back(p.stats.time.mean);
      messages.push_back(p.stats.messages.mean);
      const double ratio = p.stats.messages.mean / p.n;
      if (i == 0) {
        min_ratio = max_ratio = ratio;
      } else {
        min_ratio = std::min(min_ratio, ratio);
        max_ratio = std::max(max_ratio, ratio);
      }
    }
    const LinearFit time_fit = fit_line(ns, times);
    const LinearFit msg_fit = fit_line(ns, messages);
    const double spread = max_ratio / min_ratio;
    const bool pass = all_ok && time_fit.r2 >= 0.98 && msg_fit.r2 >= 0.98 &&
                      spread <= 1.25;
    std::ostringstream detail;
    detail << "r2(time)=" << format_double(time_fit.r2)
           << " r2(messages)=" << format_double(msg_fit.r2)
           << " messages-per-node spread=" << format_double(spread);
    rec.add("C7", "linear-complexity", pass, detail.str(), started);
  }

  // C8: the closed-form expected-time bound dominates the Monte Carlo mean,
  // and the two algebraic routes to the bound agree.
  {
    const auto started = Clock::now();
    bool pass = true;
    std::ostringstream detail;
    const std::vector<int> sizes = full ? std::vector<int>{5, 10, 20}
                                        : std::vector<int>{5, 10};
    const std::uint64_t runs = full ? 5000 : 1000;
    for (int n : sizes) {
      SimConfig cfg = reference_config(n);
      ComplexityParams params{n, cfg.a0, cfg.delta, cfg.clock.s_low,
                              cfg.clock.s_high};
      const double bound = expected_termination_upper_bound(params);
      const BatchStats stats = run_batch(cfg, runs, 31337, threads);
      const double se =
          stats.time.stddev / std::sqrt(static_cast<double>(stats.runs));
      const bool below = stats.time.mean <= bound + 2.326347874 * se;
      detail << "n=" << n << ": mean=" << format_double(stats.time.mean)
             << " bound=" << format_double(bound) << "; ";
      if (!below || !stats.ok()) pass = false;
    }

    std::mt19937_64 gen(20260810);
    double worst_rel = 0.0;
    int tuples = 0;
    while (tuples < 100) {
      ComplexityParams p;
      p.n = 2 + static_cast<int>(gen() % 199);
      p.a0 = 1e-5 + (static_cast<double>(gen() % 100000) / 100000.0) * 0.9;
      p.delta = 0.1 + (static_cast<double>(gen() % 1000) / 1000.0) * 4.9;
      p.s_low = 0.1 + (static_cast<double>(gen() % 1000) / 1000.0) * 2.0;
      p.s_high = p.s_low + (static_cast<double>(gen() % 1000) / 1000.0) * 2.0;
      const double w = interference_probability(p);
      if (w > 1.0 - 1e-6) continue;  // bound diverges; identity is inf = inf
      ++tuples;
      const WakeupBounds f = first_wakeup_time_bounds(p);
      const double via_fr = (f.upper + round_trip_time(p)) / (1.0 - w);
      const double closed = expected_termination_upper_bound(p);
      worst_rel = std::max(worst_rel,
                           std::abs(closed - via_fr) / std::abs(via_fr));
    }
    detail << "identity max rel err=" << format_double(worst_rel);
    if (worst_rel > 1e-12) pass = false;
    rec.add("C8", "time-bound-validity", pass, detail.str(), started);
  }

  // C9: pinned exact values.
  {
    const auto started = Clock::now();
    bool pass = true;
    std::ostringstream detail;
    const double p2 = delivery_probability_lower_bound(1.0, 2.0);
    const double p5 = delivery_probability_lower_bound(1.0, 5.0);
    if (std::abs(p2 - 0.5) > 1e-15 || std::abs(p5 - 0.8) > 1e-15) pass = false;
    detail << "p(2)=" << format_double(p2) << " p(5)=" << format_double(p5);
    for (double p : {0.25, 0.5, 0.9}) {
      const double mean = mean_delay(DelayModel::retransmission(p, 1.0));
      detail << " mean(retrans:" << format_double(p)
             << ")=" << format_double(mean);
      if (mean != 1.0 / p) pass = false;
    }
    rec.add("C9", "pinned-small-values", pass, detail.str(), started);
  }

  // C10: end-to-end determinism. An identical configuration and seed gives
  // byte-identical CSV and identical trace hashes; monitors do not perturb
  // a run.
  {
    const auto started = Clock::now();
    bool pass = true;
    std::ostringstream detail;

    const auto render_sweep = [&]() {
      std::ostringstream out;
      const auto points = sweep_activation(reference_config(5), {0.1, 0.2},
                                           full ? 200 : 50, 606, threads);
      write_sweep_csv(out, reference_config(5), points, 606);
      return out.str();
    };
    const std::string csv_a = render_sweep();
    const std::string csv_b = render_sweep();
    if (csv_a != csv_b) pass = false;
    detail << "csv bytes " << (csv_a == csv_b ? "identical" : "DIFFER");

    SimConfig cfg = reference_config(10);
    cfg.seed = 424242;
    const RunResult r1 = run(cfg);
    const RunResult r2 = run(cfg);
    MonitorConfig monitors = MonitorConfig::all();
    const RunResult r3 = run(cfg, &monitors);
    const bool hash_stable = r1.stats.trace_hash == r2.stats.trace_hash;
    const bool monitor_neutral =
        r1.stats.trace_hash == r3.stats.trace_hash &&
        r1.stats.time_to_election == r3.stats.time_to_election &&
        r1.stats.messages_sent == r3.stats.messages_sent &&
        r1.stats.wakeups == r3.stats.wakeups &&
        r1.stats.ticks == r3.stats.ticks;
    if (!hash_stable || !monitor_neutral) pass = false;
    detail << "; trace hash " << (hash_stable ? "stable" : "UNSTABLE")
           << "; monitors " << (monitor_neutral ? "neutral" : "INTRUSIVE");
    rec.add("C10", "determinism", pass, detail.str(), started);
  }

  return report;
}

std::string report_to_json(const CheckReport& report) {
  nlohmann::json j;
  j["scale"] = report.scale == CheckScale::Full ? "full" : "small";
  j["all_pass"] = report.all_pass();
  j["criteria"] = nlohmann::json::array();
  for (const auto& c : report.criteria) {
    j["criteria"].push_back({{"id", c.id},
                             {"name", c.name},
                             {"pass", c.pass},
                             {"detail", c.detail},
                             {"seconds", c.seconds}});
  }
  return j.dump(2);
}

}  // namespace abering
