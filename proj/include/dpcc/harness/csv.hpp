#pragma once

// Locale-independent number formatting and the episode CSV schema.

#include "dpcc/runtime.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

namespace dpcc::harness {

/// Shortest decimal that round-trips to the same double ("NaN"/"inf" spelled out).
std::string format_double(double v);
/// Strict parse of a whole token; throws std::invalid_argument.
double parse_double(std::string_view text);
std::int64_t parse_int(std::string_view text);
std::uint64_t parse_uint(std::string_view text);

inline constexpr std::string_view kEpisodeHeader = "step,t,y,u,tau,t_delay,mode,flags";

void write_episode_csv(std::ostream& out, const EpisodeLog& log);
std::string episode_csv(const EpisodeLog& log);
/// Inverse of write_episode_csv (audit-only fields of EpisodeLog stay empty).
EpisodeLog read_episode_csv(std::istream& in);

}  // namespace dpcc::harness
