#include "abering/timing.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace abering {

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) parts.push_back(item);
  return parts;
}

double parse_double(const std::string& s, const char* what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument(std::string("bad number for ") + what + ": '" +
                                s + "'");
  }
}

std::string format_double(double v) {
  std::ostringstream out;
  out << v;
  return out.str();
}

}  // namespace

DelayModel DelayModel::deterministic(double d) {
  if (!(d > 0.0)) throw std::invalid_argument("deterministic delay must be > 0");
  return {Kind::Deterministic, d, 0.0};
}

DelayModel DelayModel::exponential(double mean) {
  if (!(mean > 0.0)) throw std::invalid_argument("exponential mean must be > 0");
  return {Kind::Exponential, mean, 0.0};
}

DelayModel DelayModel::uniform_range(double lo, double hi) {
  if (!(lo > 0.0) || hi < lo) {
    throw std::invalid_argument("uniform range requires 0 < lo <= hi");
  }
  return {Kind::UniformRange, lo, hi};
}

DelayModel DelayModel::retransmission(double p, double unit) {
  if (!(p > 0.0 && p <= 1.0)) {
    throw std::invalid_argument("retransmission success probability must be in (0,1]");
  }
  if (!(unit > 0.0)) throw std::invalid_argument("retransmission unit time must be > 0");
  return {Kind::Retransmission, p, unit};
}

DelayModel DelayModel::parse(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.empty()) throw std::invalid_argument("empty delay model");
  const std::string& name = parts[0];
  const auto arity = parts.size() - 1;
  if (name == "det" && arity == 1) {
    return deterministic(parse_double(parts[1], "det"));
  }
  if (name == "exp" && arity == 1) {
    return exponential(parse_double(parts[1], "exp"));
  }
  if (name == "uniform" && arity == 2) {
    return uniform_range(parse_double(parts[1], "uniform lo"),
                         parse_double(parts[2], "uniform hi"));
  }
  if (name == "retrans" && (arity == 1 || arity == 2)) {
    const double unit = arity == 2 ? parse_double(parts[2], "retrans unit") : 1.0;
    return retransmission(parse_double(parts[1], "retrans p"), unit);
  }
  throw std::invalid_argument(
      "unknown delay model '" + text +
      "' (expected det:D, exp:MEAN, uniform:LO:HI or retrans:P[:UNIT])");
}

std::string DelayModel::format() const {
  switch (kind) {
    case Kind::Deterministic:
      return "det:" + format_double(a);
    case Kind::Exponential:
      return "exp:" + format_double(a);
    case Kind::UniformRange:
      return "uniform:" + format_double(a) + ":" + format_double(b);
    case Kind::Retransmission:
      return "retrans:" + format_double(a) + ":" + format_double(b);
  }
  return "?";
}

double mean_delay(const DelayModel& model) {
  switch (model.kind) {
    case DelayModel::Kind::Deterministic:
      return model.a;
    case DelayModel::Kind::Exponential:
      return model.a;
    case DelayModel::Kind::UniformRange:
      return 0.5 * (model.a + model.b);
    case DelayModel::Kind::Retransmission:
      // sum_k (k+1)(1-p)^k p attempts, one unit each: unit / p.
      return model.b / model.a;
  }
  throw std::logic_error("mean_delay: bad model");
}

double sample_delay(const DelayModel& model, RandomStream& rng) {
  switch (model.kind) {
    case DelayModel::Kind::Deterministic:
      return model.a;
    case DelayModel::Kind::Exponential:
      return -model.a * std::log(rng.uniform01());
    case DelayModel::Kind::UniformRange:
      return rng.uniform(model.a, model.b);
    case DelayModel::Kind::Retransmission: {
      const double p = model.a;
      if (p >= 1.0) return model.b;  // every attempt succeeds
      // Inverse-CDF geometric: attempts = floor(ln(u)/ln(1-p)) + 1 >= 1.
      const double u = rng.uniform01();
      const double attempts = std::floor(std::log(u) / std::log1p(-p)) + 1.0;
      return attempts * model.b;
    }
  }
  throw std::logic_error("sample_delay: bad model");
}

double delivery_probability_lower_bound(double delta, double t) {
  if (!(delta > 0.0) || !(t > 0.0)) {
    throw std::invalid_argument("delivery_probability_lower_bound: delta and t must be > 0");
  }
  return std::max(0.0, 1.0 - delta / t);
}

ClockModel ClockModel::unit() { return constant(1.0); }

ClockModel ClockModel::constant(double s) {
  ClockModel m;
  m.s_low = m.s_high = m.constant_speed = s;
  m.assignment = Assignment::Constant;
  m.validate();
  return m;
}

ClockModel ClockModel::uniform_per_node(double s_low, double s_high) {
  ClockModel m;
  m.s_low = s_low;
  m.s_high = s_high;
  m.assignment = Assignment::UniformPerNode;
  m.constant_speed = s_low;
  m.validate();
  return m;
}

void ClockModel::validate() const {
  if (!(s_low > 0.0) || s_high < s_low) {
    throw std::invalid_argument("clock model requires 0 < s_low <= s_high");
  }
  if (assignment == Assignment::Constant &&
      (constant_speed < s_low || constant_speed > s_high)) {
    throw std::invalid_argument("constant clock speed outside [s_low, s_high]");
  }
}

double ClockModel::realize_speed(RandomStream& rng) const {
  if (assignment == Assignment::Constant) return constant_speed;
  return rng.uniform(s_low, s_high);
}

ClockModel ClockModel::parse(const std::string& text) {
  const auto parts = split(text, ':');
  if (!parts.empty() && parts[0] == "constant" && parts.size() == 2) {
    return constant(parse_double(parts[1], "constant speed"));
  }
  if (!parts.empty() && parts[0] == "uniform" && parts.size() == 3) {
    return uniform_per_node(parse_double(parts[1], "clock s_low"),
                            parse_double(parts[2], "clock s_high"));
  }
  throw std::invalid_argument("unknown clock model '" + text +
                              "' (expected constant:S or uniform:LO:HI)");
}

std::string ClockModel::format() const {
  if (assignment == Assignment::Constant) {
    return "constant:" + format_double(constant_speed);
  }
  return "uniform:" + format_double(s_low) + ":" + format_double(s_high);
}

void ProcessingModel::validate() const {
  if (gamma < 0.0) {
    throw std::invalid_argument("processing model requires gamma >= 0");
  }
}

std::vector<double> tick_times(const ClockModel& clock, double node_speed,
                               double horizon) {
  clock.validate();
  if (node_speed < clock.s_low || node_speed > clock.s_high) {
    throw std::invalid_argument("tick_times: speed outside [s_low, s_high]");
  }
  std::vector<double> times;
  for (std::uint64_t k = 1;; ++k) {
    const double t = static_cast<double>(k) / node_speed;
    if (t > horizon) break;
    times.push_back(t);
  }
  return times;
}

}  // namespace abering
