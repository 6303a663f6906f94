#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "abering/sim.hpp"

namespace abering {

// Shortest round-trip decimal form of a double; stable across runs, so
// identical results serialize to identical bytes.
std::string format_double(double v);

// Resolved-configuration echo written as '#'-prefixed comment lines at the
// top of every CSV so each output file records how it was produced.
void write_config_echo(std::ostream& out, const SimConfig& config);

// Run-level schema:
// run_id,n,a0,delta,s_low,s_high,delay_model,gamma,seed,elected,time,
// messages,hops,wakeups,ticks,bits
void write_run_header(std::ostream& out);
void write_run_row(std::ostream& out, std::uint64_t run_id,
                   const SimConfig& config, std::uint64_t seed,
                   const RunStats& stats);

// Aggregate schema: the shared configuration columns followed by
// runs,elected and mean/std/ci95 for time, messages, hops and wakeups.
void write_aggregate_header(std::ostream& out);
void write_aggregate_row(std::ostream& out, const SimConfig& config,
                         std::uint64_t base_seed, const BatchStats& stats);

}  // namespace abering
