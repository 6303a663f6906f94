#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "abering/sim.hpp"

namespace abering {

// Grid syntax accepted by the CLI:
//   "0.1,0.2,0.5"        explicit comma list
//   "0.03:0.08:0.005"    lo:hi:step, inclusive of hi up to rounding
//   "log:1e-5:1e-2:13"   log-spaced, count points from lo to hi
std::vector<double> parse_grid(const std::string& text);
std::vector<int> parse_int_list(const std::string& text);

struct SweepPoint {
  double a0 = 0.0;
  BatchStats stats;
};

// One aggregated row per grid value of the activation parameter, rows sorted
// by a0. Each point reuses the same base seed, so points differ only in a0.
std::vector<SweepPoint> sweep_activation(const SimConfig& base,
                                         std::vector<double> grid,
                                         std::uint64_t runs_per_point,
                                         std::uint64_t base_seed, int threads,
                                         const MonitorConfig* monitors = nullptr);

struct ScalingPoint {
  int n = 0;
  double a0 = 0.0;  // optimal activation for this n
  BatchStats stats;
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;  // NaN with fewer than two points
};
LinearFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys);

// Per-size aggregates at the analytically optimal activation parameter.
std::vector<ScalingPoint> scaling_study(const SimConfig& base,
                                        const std::vector<int>& sizes,
                                        std::uint64_t runs_per_point,
                                        std::uint64_t base_seed, int threads);

void write_sweep_csv(std::ostream& out, const SimConfig& base,
                     const std::vector<SweepPoint>& points,
                     std::uint64_t base_seed);
// Scaling CSV ends with trailer comment records carrying the least-squares
// fits of mean time and mean messages against n.
void write_scaling_csv(std::ostream& out, const SimConfig& base,
                       const std::vector<ScalingPoint>& points,
                       std::uint64_t base_seed);

// Plain "key = value" configuration file ('#' starts a comment). Returned
// map preserves only the last assignment per key.
std::map<std::string, std::string> parse_config_file(const std::string& path);

// Applies recognized keys onto a SimConfig; unknown keys raise. "a0" accepts
// a number or the word "optimal".
void apply_config_entries(const std::map<std::string, std::string>& entries,
                          SimConfig& config);

}  // namespace abering
