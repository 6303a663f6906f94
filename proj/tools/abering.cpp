// Command-line front end: single runs, batch experiments, activation-parameter
// sweeps, scaling studies, analytic tables, chain analyses and the acceptance
// check suite. Every subcommand emits reproducible CSV: identical flags and
// seeds produce identical bytes.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <thread>
#include <vector>

#include "abering/analysis.hpp"
#include "abering/check_suite.hpp"
#include "abering/csv.hpp"
#include "abering/dtmc.hpp"
#include "abering/experiment.hpp"
#include "abering/sim.hpp"

namespace {

using namespace abering;

struct OutputFile {
  std::ofstream file;
  std::ostream* stream = &std::cout;

  void open(const std::string& path) {
    if (path.empty() || path == "-") return;
    file.open(path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot open output file: " + path);
    stream = &file;
  }
};

int default_threads() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Shared --n/--a0/... option block. Precedence: built-in defaults, then the
// config file, then explicit command-line flags.
struct SimOptions {
  std::string config_path;
  int n = 2;
  double a0 = 0.5;
  bool optimal = false;
  double delta = 1.0;
  std::string delay_model = "exp:1";
  double s_low = 1.0;
  double s_high = 1.0;
  double gamma = 0.0;
  std::uint64_t seed = 1;
  double max_time = 0.0;

  CLI::Option* n_opt = nullptr;
  CLI::Option* a0_opt = nullptr;
  CLI::Option* delta_opt = nullptr;
  CLI::Option* delay_opt = nullptr;
  CLI::Option* s_low_opt = nullptr;
  CLI::Option* s_high_opt = nullptr;
  CLI::Option* gamma_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* max_time_opt = nullptr;

  void attach(CLI::App* cmd, bool with_seed = true) {
    cmd->add_option("--config", config_path,
                    "config file with key = value lines");
    n_opt = cmd->add_option("--n", n, "ring size (>= 2)");
    a0_opt = cmd->add_option("--a0", a0, "activation parameter in (0,1)");
    cmd->add_flag("--optimal", optimal,
                  "use the analytically optimal activation for n");
    delta_opt = cmd->add_option("--delta", delta,
                                "known bound on the expected message delay");
    delay_opt = cmd->add_option(
        "--delay-model", delay_model,
        "det:D | exp:MEAN | uniform:LO:HI | retrans:P[:UNIT]");
    s_low_opt = cmd->add_option("--s-low", s_low, "lower clock-speed bound");
    s_high_opt = cmd->add_option("--s-high", s_high, "upper clock-speed bound");
    gamma_opt = cmd->add_option("--gamma", gamma,
                                "per-event processing latency (>= 0)");
    if (with_seed) cmd->add_option("--seed", seed, "run seed");
    max_time_opt =
        cmd->add_option("--max-time", max_time, "safety horizon override");
    seed_opt = with_seed ? cmd->get_option("--seed") : nullptr;
  }

  SimConfig resolve() const {
    SimConfig cfg;
    if (!config_path.empty()) {
      apply_config_entries(parse_config_file(config_path), cfg);
    }
    if (n_opt->count()) cfg.n = n;
    if (a0_opt->count()) cfg.a0 = a0;
    if (delay_opt->count()) cfg.delay = DelayModel::parse(delay_model);
    if (delta_opt->count()) {
      cfg.delta = delta;
    } else if (delay_opt->count() && config_path.empty()) {
      cfg.delta = mean_delay(cfg.delay);  // the model's own mean is the bound
    }
    if (s_low_opt->count() || s_high_opt->count()) {
      const double lo = s_low_opt->count() ? s_low : cfg.clock.s_low;
      const double hi = s_high_opt->count() ? s_high : cfg.clock.s_high;
      cfg.clock = (lo == hi) ? ClockModel::constant(lo)
                             : ClockModel::uniform_per_node(lo, hi);
    }
    if (gamma_opt->count()) cfg.processing.gamma = gamma;
    if (seed_opt && seed_opt->count()) cfg.seed = seed;
    if (max_time_opt->count()) cfg.max_global_time = max_time;
    if (optimal) cfg.a0 = compute_optimal_activation(cfg.n);
    cfg.validate();
    return cfg;
  }
};

void print_violations(const std::vector<Violation>& violations) {
  for (const auto& v : violations) {
    std::cerr << "violation " << v.check << " at event " << v.event_seq << ": "
              << v.detail << "\n";
  }
}

int cmd_simulate(const SimOptions& opts, const std::string& output,
                 const std::string& trace_path, bool monitors_on) {
  const SimConfig cfg = opts.resolve();

  std::unique_ptr<std::ofstream> trace_file;
  EventObserver observer;
  if (!trace_path.empty()) {
    trace_file = std::make_unique<std::ofstream>(trace_path, std::ios::binary);
    if (!*trace_file) {
      throw std::runtime_error("cannot open trace file: " + trace_path);
    }
    (*trace_file) << "time,seq,kind,node,hop\n";
    observer = [&](const TraceEvent& e) {
      (*trace_file) << format_double(e.time) << ',' << e.seq << ',' << e.kind
                    << ',' << e.node << ',' << e.hop << '\n';
    };
  }

  const MonitorConfig monitors = MonitorConfig::all();
  const RunResult result =
      run(cfg, monitors_on ? &monitors : nullptr,
          observer ? &observer : nullptr);

  OutputFile out;
  out.open(output);
  write_config_echo(*out.stream, cfg);
  write_run_header(*out.stream);
  write_run_row(*out.stream, 0, cfg, cfg.seed, result.stats);

  print_violations(result.violations);
  if (result.timed_out) {
    std::cerr << "run timed out at horizon " << format_double(cfg.horizon())
              << " (seed " << cfg.seed << ")\n";
  }
  return result.ok() ? 0 : 1;
}

int cmd_batch(const SimOptions& opts, std::uint64_t runs,
              std::uint64_t base_seed, int threads, const std::string& output,
              const std::string& per_run_path, bool monitors_on) {
  const SimConfig cfg = opts.resolve();
  const MonitorConfig monitors = MonitorConfig::all();
  const BatchStats stats = run_batch(cfg, runs, base_seed, threads,
                                     monitors_on ? &monitors : nullptr);

  OutputFile out;
  out.open(output);
  write_config_echo(*out.stream, cfg);
  write_aggregate_header(*out.stream);
  write_aggregate_row(*out.stream, cfg, base_seed, stats);

  if (!per_run_path.empty()) {
    std::ofstream per_run(per_run_path, std::ios::binary);
    if (!per_run) {
      throw std::runtime_error("cannot open per-run file: " + per_run_path);
    }
    write_config_echo(per_run, cfg);
    write_run_header(per_run);
    for (std::uint64_t i = 0; i < stats.per_run.size(); ++i) {
      write_run_row(per_run, i, cfg, base_seed + i, stats.per_run[i]);
    }
  }

  for (const auto& [seed, what] : stats.failures) {
    std::cerr << "seed " << seed << ": " << what << "\n";
  }
  return stats.ok() ? 0 : 1;
}

int cmd_sweep(const SimOptions& opts, const std::string& grid_text,
              std::uint64_t runs, std::uint64_t base_seed, int threads,
              const std::string& output) {
  const SimConfig cfg = opts.resolve();
  const auto grid = parse_grid(grid_text);
  const auto points = sweep_activation(cfg, grid, runs, base_seed, threads);
  OutputFile out;
  out.open(output);
  write_sweep_csv(*out.stream, cfg, points, base_seed);
  bool ok = true;
  for (const auto& p : points) {
    for (const auto& [seed, what] : p.stats.failures) {
      std::cerr << "a0 " << format_double(p.a0) << " seed " << seed << ": "
                << what << "\n";
      ok = false;
    }
  }
  return ok ? 0 : 1;
}

int cmd_scaling(const SimOptions& opts, const std::string& sizes_text,
                std::uint64_t runs, std::uint64_t base_seed, int threads,
                const std::string& output) {
  const SimConfig cfg = opts.resolve();
  const auto sizes = parse_int_list(sizes_text);
  const auto points = scaling_study(cfg, sizes, runs, base_seed, threads);
  OutputFile out;
  out.open(output);
  write_scaling_csv(*out.stream, cfg, points, base_seed);
  bool ok = true;
  for (const auto& p : points) {
    for (const auto& [seed, what] : p.stats.failures) {
      std::cerr << "n " << p.n << " seed " << seed << ": " << what << "\n";
      ok = false;
    }
  }
  return ok ? 0 : 1;
}

int cmd_formulas(const std::string& range_text, double delta, double s_low,
                 double s_high, bool general, const std::string& output) {
  std::vector<int> sizes;
  if (range_text.find(',') != std::string::npos) {
    sizes = parse_int_list(range_text);
  } else if (range_text.find(':') != std::string::npos) {
    const auto lo_hi = parse_int_list(
        range_text.substr(0, range_text.find(':')) + "," +
        range_text.substr(range_text.find(':') + 1));
    for (int n = lo_hi[0]; n <= lo_hi[1]; ++n) sizes.push_back(n);
  } else {
    sizes = parse_int_list(range_text);
  }

  OutputFile out;
  out.open(output);
  (*out.stream) << "# delta = " << format_double(delta) << "\n"
                << "# s_low = " << format_double(s_low) << "\n"
                << "# s_high = " << format_double(s_high) << "\n"
                << "# average_election_time = "
                << (general ? "general (s_low for wakeups, s_high and delta "
                              "for the round trip)"
                            : "unit-parameter gamble-rounds")
                << "\n";
  (*out.stream) << "n,optimal_a0,F,R,W,eq1_bound,average_election_time\n";
  for (int n : sizes) {
    const double a0 = compute_optimal_activation(n);
    ComplexityParams p{n, a0, delta, s_low, s_high};
    const WakeupBounds f = first_wakeup_time_bounds(p);
    const double w = interference_probability(p);
    const double bound =
        w < 1.0 ? expected_termination_upper_bound(p)
                : std::numeric_limits<double>::infinity();
    const double avg = general ? average_election_time_general(p)
                               : average_election_time(n, a0);
    (*out.stream) << n << ',' << format_double(a0) << ','
                  << format_double(f.upper) << ','
                  << format_double(round_trip_time(p)) << ','
                  << format_double(w) << ',' << format_double(bound) << ','
                  << format_double(avg) << '\n';
  }
  return 0;
}

int cmd_dtmc(int n, double a0, const std::string& sweep_text, bool knockout,
             bool wakes, bool rotation, bool check_invariants,
             std::size_t max_states, const std::string& dump_path,
             const std::string& output) {
  DtmcOptions opts;
  opts.track_knockout = knockout || check_invariants;
  opts.track_relative_wakes = wakes || check_invariants;
  opts.rotation_canonicalization = rotation;
  if (max_states > 0) opts.max_states = max_states;

  std::vector<double> grid;
  if (!sweep_text.empty()) {
    grid = parse_grid(sweep_text);
  } else {
    grid.push_back(a0);
  }

  OutputFile out;
  out.open(output);
  (*out.stream) << "n,a0,states,termination_probability,expected_rounds\n";
  bool ok = true;
  for (double point : grid) {
    const DtmcModel model = build_dtmc(n, point, opts);
    const double tp = termination_probability(model);
    const double rounds = expected_rounds(model);
    (*out.stream) << n << ',' << format_double(point) << ','
                  << model.state_count() << ',' << format_double(tp) << ','
                  << format_double(rounds) << '\n';

    if (check_invariants) {
      const ExhaustiveReport report = exhaustive_invariant_check(model);
      if (!report.ok()) {
        ok = false;
        std::cerr << "n=" << n << " a0=" << format_double(point) << ": "
                  << report.violations.size()
                  << " invariant violations over reachable states\n";
        const auto& [state, v] = report.violations.front();
        std::cerr << "  first: state " << state << " " << v.check << " "
                  << v.detail << "\n";
      } else {
        std::cerr << "n=" << n << " a0=" << format_double(point) << ": "
                  << report.states_checked
                  << " reachable states, no invariant violations\n";
      }
    }
    if (!dump_path.empty()) {
      std::ofstream dump(dump_path, std::ios::binary);
      if (!dump) throw std::runtime_error("cannot open dump file: " + dump_path);
      for (std::size_t i = 0; i < model.state_count(); ++i) {
        dump << i << (model.absorbing[i] ? " absorbing " : " ")
             << model.describe_state(i) << "\n";
      }
    }
  }
  return ok ? 0 : 1;
}

int cmd_check(const std::string& scale_text, int threads,
              const std::string& json_path) {
  const CheckScale scale =
      scale_text == "full" ? CheckScale::Full : CheckScale::Small;
  const CheckReport report = run_check_suite(scale, threads, &std::cout);
  if (!json_path.empty()) {
    std::ofstream json(json_path, std::ios::binary);
    if (!json) throw std::runtime_error("cannot open report file: " + json_path);
    json << report_to_json(report) << "\n";
  }
  std::cout << (report.all_pass() ? "ALL CHECKS PASSED" : "CHECKS FAILED")
            << "\n";
  return report.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Election on anonymous unidirectional rings under bounded expected "
      "delay: simulator, invariant checker and analytic toolkit"};
  app.require_subcommand(1);

  int threads = default_threads();
  app.add_option("--threads", threads, "worker threads for batches and sweeps");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "run one seeded election");
  SimOptions sim_opts;
  sim_opts.attach(simulate);
  std::string sim_output, sim_trace;
  bool sim_no_monitors = false;
  simulate->add_option("--output", sim_output, "CSV output path (default stdout)");
  simulate->add_option("--trace", sim_trace, "write the full event trace here");
  simulate->add_flag("--no-monitors", sim_no_monitors,
                     "disable the invariant monitors");

  // batch
  auto* batch = app.add_subcommand("batch", "independent runs, aggregated");
  SimOptions batch_opts;
  batch_opts.attach(batch, false);
  std::uint64_t batch_runs = 5000, batch_base_seed = 1;
  std::string batch_output, batch_per_run;
  bool batch_no_monitors = false;
  batch->add_option("--runs", batch_runs, "number of runs");
  batch->add_option("--base-seed", batch_base_seed, "seed of run 0");
  batch->add_option("--output", batch_output, "CSV output path");
  batch->add_option("--per-run", batch_per_run, "also write per-run rows here");
  batch->add_flag("--no-monitors", batch_no_monitors,
                  "disable the invariant monitors");

  // sweep-activation
  auto* sweep = app.add_subcommand("sweep-activation",
                                   "batches over an activation-parameter grid");
  SimOptions sweep_opts;
  sweep_opts.attach(sweep, false);
  std::string sweep_grid = "0.03:0.08:0.005", sweep_output;
  std::uint64_t sweep_runs = 5000, sweep_base_seed = 1;
  sweep->add_option("--grid", sweep_grid,
                    "a0 grid: list, LO:HI:STEP or log:LO:HI:COUNT");
  sweep->add_option("--runs", sweep_runs, "runs per grid point");
  sweep->add_option("--base-seed", sweep_base_seed, "seed of run 0");
  sweep->add_option("--output", sweep_output, "CSV output path");

  // scaling
  auto* scaling = app.add_subcommand(
      "scaling", "batches over ring sizes at the optimal activation");
  SimOptions scaling_opts;
  scaling_opts.attach(scaling, false);
  std::string scaling_sizes = "40,100,200,400,620", scaling_output;
  std::uint64_t scaling_runs = 500, scaling_base_seed = 1;
  scaling->add_option("--sizes", scaling_sizes, "comma list of ring sizes");
  scaling->add_option("--runs", scaling_runs, "runs per size");
  scaling->add_option("--base-seed", scaling_base_seed, "seed of run 0");
  scaling->add_option("--output", scaling_output, "CSV output path");

  // formulas
  auto* formulas =
      app.add_subcommand("formulas", "closed-form analytics per ring size");
  std::string formulas_range = "2:50", formulas_output;
  double formulas_delta = 1.0, formulas_s_low = 1.0, formulas_s_high = 1.0;
  bool formulas_general = false;
  formulas->add_option("--n-range", formulas_range, "LO:HI or comma list");
  formulas->add_option("--delta", formulas_delta, "expected-delay bound");
  formulas->add_option("--s-low", formulas_s_low, "lower clock-speed bound");
  formulas->add_option("--s-high", formulas_s_high, "upper clock-speed bound");
  formulas->add_flag("--general", formulas_general,
                     "average time optimized for worst-case parameters");
  formulas->add_option("--output", formulas_output, "CSV output path");

  // dtmc
  auto* dtmc = app.add_subcommand(
      "dtmc", "exact chain analysis of the synchronous unit-delay instance");
  int dtmc_n = 3;
  double dtmc_a0 = 0.5;
  std::string dtmc_sweep, dtmc_dump, dtmc_output;
  bool dtmc_knockout = false, dtmc_wakes = false, dtmc_rotation = false;
  bool dtmc_check = false;
  std::size_t dtmc_max_states = 0;
  dtmc->add_option("--n", dtmc_n, "ring size (2..7)");
  dtmc->add_option("--a0", dtmc_a0, "activation parameter");
  dtmc->add_option("--sweep", dtmc_sweep, "a0 grid instead of a single value");
  dtmc->add_flag("--track-knockout", dtmc_knockout,
                 "carry knockout flags in the state");
  dtmc->add_flag("--track-wakes", dtmc_wakes,
                 "carry relative wake counts in the state");
  dtmc->add_flag("--rotate", dtmc_rotation, "quotient by ring rotation");
  dtmc->add_flag("--check-invariants", dtmc_check,
                 "run the invariant suite on every reachable state");
  dtmc->add_option("--max-states", dtmc_max_states, "state-space guard");
  dtmc->add_option("--dump-states", dtmc_dump, "write the state space here");
  dtmc->add_option("--output", dtmc_output, "CSV output path");

  // check
  auto* check = app.add_subcommand("check", "acceptance check suite");
  std::string check_scale = "small", check_json;
  check->add_option("--scale", check_scale, "small | full")
      ->check(CLI::IsMember({"small", "full"}));
  check->add_option("--json", check_json, "machine-readable report path");

  for (auto* sub : {simulate, batch, sweep, scaling, formulas, dtmc, check}) {
    sub->fallthrough();  // lets --threads appear after the subcommand
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      return cmd_simulate(sim_opts, sim_output, sim_trace, !sim_no_monitors);
    }
    if (batch->parsed()) {
      return cmd_batch(batch_opts, batch_runs, batch_base_seed, threads,
                       batch_output, batch_per_run, !batch_no_monitors);
    }
    if (sweep->parsed()) {
      return cmd_sweep(sweep_opts, sweep_grid, sweep_runs, sweep_base_seed,
                       threads, sweep_output);
    }
    if (scaling->parsed()) {
      return cmd_scaling(scaling_opts, scaling_sizes, scaling_runs,
                         scaling_base_seed, threads, scaling_output);
    }
    if (formulas->parsed()) {
      return cmd_formulas(formulas_range, formulas_delta, formulas_s_low,
                          formulas_s_high, formulas_general, formulas_output);
    }
    if (dtmc->parsed()) {
      return cmd_dtmc(dtmc_n, dtmc_a0, dtmc_sweep, dtmc_knockout, dtmc_wakes,
                      dtmc_rotation, dtmc_check, dtmc_max_states, dtmc_dump,
                      dtmc_output);
    }
    if (check->parsed()) {
      return cmd_check(check_scale, threads, check_json);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
