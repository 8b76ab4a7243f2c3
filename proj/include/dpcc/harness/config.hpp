#pragma once

// Scenario configuration: a flat `key = value` text format with `#`
// comments. Resolution order is built-in defaults, scenario preset, delay
// profile, file values, then command-line overrides.

#include "dpcc/runtime.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace dpcc::harness {

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

enum class Scenario { Pid, DdpcNoComp, DdpcComp, DdpcRefChange, DelayProbe };

const char* to_string(Scenario s);
Scenario parse_scenario(std::string_view name);
/// "pid, ddpc-nocomp, ..." for diagnostics.
std::string scenario_names();

enum class ProbeTransport { Simulated, Udp };

struct ScenarioConfig {
    Scenario scenario = Scenario::DdpcComp;
    std::uint64_t seed = 1;
    RuntimeConfig runtime;
    /// Named measured-delay row ("none" when the channel keys are set directly).
    std::string delay_profile = "none";
    std::int64_t probe_count = 10000;
    ProbeTransport probe_transport = ProbeTransport::Simulated;
    std::uint16_t probe_port = 47000;

    void validate() const;
};

/// One row of the Internet delay measurements (seconds).
struct DelayProfile {
    const char* name;
    const char* region;
    const char* window;
    double max, min, mean;
};

const std::array<DelayProfile, 8>& delay_profiles();
const DelayProfile& find_delay_profile(std::string_view name);
/// Shifted exponential: min + Exp(mean - min); the configured mean is exact.
transport::ChannelModel channel_for(const DelayProfile& p, double loss_prob);

using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Parses the flat format; throws ConfigError with the line number.
KeyValues parse_config_text(std::string_view text);
KeyValues read_config_file(const std::string& path);
/// "key=value"; throws ConfigError when malformed.
std::pair<std::string, std::string> parse_override(std::string_view text);

/// Applies entries in order on top of `base`; unknown keys and bad values throw.
ScenarioConfig apply_entries(ScenarioConfig base, const KeyValues& entries);

/// Defaults plus the scenario's preset; `scenario` entries in the file select it.
ScenarioConfig resolve(Scenario scenario, const KeyValues& file, const KeyValues& overrides);

/// Complete key list; reading it back via resolve() reproduces the config.
std::string to_config_text(const ScenarioConfig& cfg);

std::vector<std::string> known_keys();

}  // namespace dpcc::harness
