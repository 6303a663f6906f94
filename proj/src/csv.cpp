#include "abering/csv.hpp"

#include <charconv>

namespace abering {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_config_echo(std::ostream& out, const SimConfig& config) {
  out << "# n = " << config.n << "\n";
  out << "# a0 = " << format_double(config.a0) << "\n";
  out << "# delta = " << format_double(config.delta) << "\n";
  out << "# delay_model = " << config.delay.format() << "\n";
  out << "# clock = " << config.clock.format() << "\n";
  out << "# s_low = " << format_double(config.clock.s_low) << "\n";
  out << "# s_high = " << format_double(config.clock.s_high) << "\n";
  out << "# gamma = " << format_double(config.processing.gamma) << "\n";
  out << "# max_global_time = " << format_double(config.horizon()) << "\n";
}

void write_run_header(std::ostream& out) {
  out << "# schema = run-v1\n";
  out << "run_id,n,a0,delta,s_low,s_high,delay_model,gamma,seed,elected,time,"
         "messages,hops,wakeups,ticks,bits\n";
}

void write_run_row(std::ostream& out, std::uint64_t run_id,
                   const SimConfig& config, std::uint64_t seed,
                   const RunStats& stats) {
  out << run_id << ',' << config.n << ',' << format_double(config.a0) << ','
      << format_double(config.delta) << ','
      << format_double(config.clock.s_low) << ','
      << format_double(config.clock.s_high) << ',' << config.delay.format()
      << ',' << format_double(config.processing.gamma) << ',' << seed << ','
      << (stats.elected ? 1 : 0) << ',' << format_double(stats.time_to_election)
      << ',' << stats.messages_sent << ',' << stats.message_hops << ','
      << stats.wakeups << ',' << stats.ticks << ',' << stats.bits << '\n';
}

namespace {

void write_aggregate_triplet(std::ostream& out, const Aggregate& a) {
  out << ',' << format_double(a.mean) << ',' << format_double(a.stddev) << ','
      << format_double(a.ci95);
}

}  // namespace

void write_aggregate_header(std::ostream& out) {
  out << "# schema = aggregate-v1\n";
  out << "n,a0,delta,s_low,s_high,delay_model,gamma,base_seed,runs,elected"
         ",mean_time,std_time,ci95_time"
         ",mean_messages,std_messages,ci95_messages"
         ",mean_hops,std_hops,ci95_hops"
         ",mean_wakeups,std_wakeups,ci95_wakeups\n";
}

void write_aggregate_row(std::ostream& out, const SimConfig& config,
                         std::uint64_t base_seed, const BatchStats& stats) {
  out << config.n << ',' << format_double(config.a0) << ','
      << format_double(config.delta) << ','
      << format_double(config.clock.s_low) << ','
      << format_double(config.clock.s_high) << ',' << config.delay.format()
      << ',' << format_double(config.processing.gamma) << ',' << base_seed << ','
      << stats.runs << ',' << stats.elected;
  write_aggregate_triplet(out, stats.time);
  write_aggregate_triplet(out, stats.messages);
  write_aggregate_triplet(out, stats.hops);
  write_aggregate_triplet(out, stats.wakeups);
  out << '\n';
}

}  // namespace abering
