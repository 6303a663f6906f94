#include "abering/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "abering/analysis.hpp"
#include "abering/csv.hpp"

namespace abering {

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) parts.push_back(item);
  return parts;
}

double to_double(const std::string& s) {
  std::size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size()) throw std::invalid_argument("bad number '" + s + "'");
  return v;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

std::vector<double> parse_grid(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("empty grid");
  std::vector<double> grid;
  if (text.find(',') != std::string::npos) {
    for (const auto& part : split(text, ',')) grid.push_back(to_double(part));
  } else if (text.rfind("log:", 0) == 0) {
    const auto parts = split(text, ':');
    if (parts.size() != 4) {
      throw std::invalid_argument("log grid needs log:LO:HI:COUNT");
    }
    const double lo = to_double(parts[1]);
    const double hi = to_double(parts[2]);
    const int count = static_cast<int>(to_double(parts[3]));
    if (!(lo > 0.0) || hi < lo || count < 1) {
      throw std::invalid_argument("log grid needs 0 < lo <= hi, count >= 1");
    }
    for (int i = 0; i < count; ++i) {
      const double f = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
      grid.push_back(std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo))));
    }
  } else if (text.find(':') != std::string::npos) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) throw std::invalid_argument("grid needs LO:HI:STEP");
    const double lo = to_double(parts[0]);
    const double hi = to_double(parts[1]);
    const double step = to_double(parts[2]);
    if (!(step > 0.0) || hi < lo) {
      throw std::invalid_argument("grid needs lo <= hi and step > 0");
    }
    for (double v = lo; v <= hi + step * 1e-9; v += step) grid.push_back(v);
  } else {
    grid.push_back(to_double(text));
  }
  return grid;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> values;
  for (const auto& part : split(text, ',')) {
    values.push_back(static_cast<int>(to_double(part)));
  }
  if (values.empty()) throw std::invalid_argument("empty list");
  return values;
}

std::vector<SweepPoint> sweep_activation(const SimConfig& base,
                                         std::vector<double> grid,
                                         std::uint64_t runs_per_point,
                                         std::uint64_t base_seed, int threads,
                                         const MonitorConfig* monitors) {
  for (double a0 : grid) {
    if (!(a0 > 0.0 && a0 < 1.0)) {
      throw std::invalid_argument("sweep grid values must be in (0,1)");
    }
  }
  std::sort(grid.begin(), grid.end());
  std::vector<SweepPoint> points;
  points.reserve(grid.size());
  for (double a0 : grid) {
    SimConfig cfg = base;
    cfg.a0 = a0;
    SweepPoint point;
    point.a0 = a0;
    point.stats = run_batch(cfg, runs_per_point, base_seed, threads, monitors);
    points.push_back(std::move(point));
  }
  return points;
}

LinearFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
  LinearFit fit;
  const std::size_t m = xs.size();
  if (m != ys.size()) throw std::invalid_argument("fit_line: size mismatch");
  if (m < 2) {
    fit.slope = fit.intercept = fit.r2 = std::numeric_limits<double>::quiet_NaN();
    return fit;
  }
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ss_res += r * r;
  }
  fit.r2 = syy == 0.0 ? 1.0 : 1.0 - ss_res / syy;
  return fit;
}

std::vector<ScalingPoint> scaling_study(const SimConfig& base,
                                        const std::vector<int>& sizes,
                                        std::uint64_t runs_per_point,
                                        std::uint64_t base_seed, int threads) {
  std::vector<ScalingPoint> points;
  points.reserve(sizes.size());
  for (int n : sizes) {
    SimConfig cfg = base;
    cfg.n = n;
    cfg.a0 = compute_optimal_activation(n);
    ScalingPoint point;
    point.n = n;
    point.a0 = cfg.a0;
    point.stats = run_batch(cfg, runs_per_point, base_seed, threads);
    points.push_back(std::move(point));
  }
  return points;
}

void write_sweep_csv(std::ostream& out, const SimConfig& base,
                     const std::vector<SweepPoint>& points,
                     std::uint64_t base_seed) {
  write_config_echo(out, base);
  out << "# sweep = activation\n";
  write_aggregate_header(out);
  for (const auto& point : points) {
    SimConfig cfg = base;
    cfg.a0 = point.a0;
    write_aggregate_row(out, cfg, base_seed, point.stats);
  }
}

void write_scaling_csv(std::ostream& out, const SimConfig& base,
                       const std::vector<ScalingPoint>& points,
                       std::uint64_t base_seed) {
  write_config_echo(out, base);
  out << "# sweep = scaling (a0 = optimal per n)\n";
  write_aggregate_header(out);
  std::vector<double> ns, times, messages;
  for (const auto& point : points) {
    SimConfig cfg = base;
    cfg.n = point.n;
    cfg.a0 = point.a0;
    write_aggregate_row(out, cfg, base_seed, point.stats);
    ns.push_back(point.n);
    times.push_back(point.stats.time.mean);
    messages.push_back(point.stats.messages.mean);
  }
  const LinearFit time_fit = fit_line(ns, times);
  const LinearFit msg_fit = fit_line(ns, messages);
  out << "# fit_time slope=" << format_double(time_fit.slope)
      << " intercept=" << format_double(time_fit.intercept)
      << " r2=" << format_double(time_fit.r2) << "\n";
  out << "# fit_messages slope=" << format_double(msg_fit.slope)
      << " intercept=" << format_double(msg_fit.intercept)
      << " r2=" << format_double(msg_fit.r2) << "\n";
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::map<std::string, std::string> entries;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string text = trim(line);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected key = value");
    }
    entries[trim(text.substr(0, eq))] = trim(text.substr(eq + 1));
  }
  return entries;
}

void apply_config_entries(const std::map<std::string, std::string>& entries,
                          SimConfig& config) {
  for (const auto& [key, value] : entries) {
    if (key == "n") {
      config.n = static_cast<int>(to_double(value));
    } else if (key == "a0") {
      // "optimal" is resolved against n after every entry is applied.
      if (value != "optimal") config.a0 = to_double(value);
    } else if (key == "delta") {
      config.delta = to_double(value);
    } else if (key == "delay_model") {
      config.delay = DelayModel::parse(value);
    } else if (key == "clock") {
      config.clock = ClockModel::parse(value);
    } else if (key == "gamma") {
      config.processing.gamma = to_double(value);
    } else if (key == "seed") {
      config.seed = static_cast<std::uint64_t>(std::stoull(value));
    } else if (key == "max_global_time") {
      config.max_global_time = to_double(value);
    } else {
      throw std::invalid_argument("unknown config key '" + key + "'");
    }
  }
  const auto a0 = entries.find("a0");
  if (a0 != entries.end() && a0->second == "optimal") {
    config.a0 = compute_optimal_activation(config.n);
  }
}

}  // namespace abering
