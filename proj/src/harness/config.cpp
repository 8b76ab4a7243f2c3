#include "dpcc/harness/config.hpp"

#include "dpcc/harness/csv.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>

namespace dpcc::harness {

namespace {

constexpr std::pair<Scenario, const char*> kScenarioNames[] = {
    {Scenario::Pid, "pid"},
    {Scenario::DdpcNoComp, "ddpc-nocomp"},
    {Scenario::DdpcComp, "ddpc-comp"},
    {Scenario::DdpcRefChange, "ddpc-refchange"},
    {Scenario::DelayProbe, "delay-probe"},
};

const std::array<DelayProfile, 8> kProfiles{{
    {"bj-0800", "Beijing", "8:00-10:00", 0.0255, 0.0055, 0.0062},
    {"gz-0800", "Guangzhou", "8:00-10:00", 0.0235, 0.0185, 0.0218},
    {"bj-1100", "Beijing", "11:00-13:00", 0.0235, 0.0075, 0.0149},
    {"gz-1100", "Guangzhou", "11:00-13:00", 0.0255, 0.0190, 0.0234},
    {"bj-1400", "Beijing", "14:00-16:00", 0.0460, 0.0025, 0.0054},
    {"gz-1400", "Guangzhou", "14:00-16:00", 0.0375, 0.0185, 0.0209},
    {"bj-1700", "Beijing", "17:00-19:00", 0.0620, 0.0025, 0.0211},
    {"gz-1700", "Guangzhou", "17:00-19:00", 0.0700, 0.0175, 0.0225},
}};

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

bool parse_bool(const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw std::invalid_argument("expected a boolean, got '" + v + "'");
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

struct Key {
    const char* name;
    std::function<void(ScenarioConfig&, const std::string&)> set;
    std::function<std::string(const ScenarioConfig&)> get;
};

template <typename Member>
Key real(const char* name, Member member) {
    return {name, [member](ScenarioConfig& c, const std::string& v) { member(c) = parse_double(v); },
            [member](const ScenarioConfig& c) { return format_double(member(c)); }};
}

// Channel keys fan out to both directions.
template <typename Field>
Key channel(const char* name, Field field) {
    return {name,
            [field](ScenarioConfig& c, const std::string& v) {
                field(c.runtime.uplink) = parse_double(v);
                field(c.runtime.downlink) = parse_double(v);
            },
            [field](const ScenarioConfig& c) {
                return format_double(field(c.runtime.uplink));
            }};
}

const std::vector<Key>& keys() {
    static const std::vector<Key> k = [] {
        std::vector<Key> v;
        v.push_back({"scenario", [](ScenarioConfig& c, const std::string& s) { c.scenario = parse_scenario(s); },
                     [](const ScenarioConfig& c) { return std::string(to_string(c.scenario)); }});
        v.push_back({"seed", [](ScenarioConfig& c, const std::string& s) { c.seed = parse_uint(s); },
                     [](const ScenarioConfig& c) { return std::to_string(c.seed); }});
        v.push_back(real("ts", [](auto& c) -> auto& { return c.runtime.ts; }));
        v.push_back({"n",
                     [](ScenarioConfig& c, const std::string& s) { c.runtime.shape.horizon = parse_int(s); },
                     [](const ScenarioConfig& c) { return std::to_string(c.runtime.shape.horizon); }});
        v.push_back({"j",
                     [](ScenarioConfig& c, const std::string& s) { c.runtime.shape.columns = parse_int(s); },
                     [](const ScenarioConfig& c) { return std::to_string(c.runtime.shape.columns); }});
        v.push_back(real("lambda", [](auto& c) -> auto& { return c.runtime.lambda; }));
        v.push_back(real("ridge", [](auto& c) -> auto& { return c.runtime.ridge; }));
        v.push_back(real("reference", [](auto& c) -> auto& { return c.runtime.reference; }));
        v.push_back({"reference2",
                     [](ScenarioConfig& c, const std::string& s) {
                         if (s == "none")
                             c.runtime.reference2.reset();
                         else
                             c.runtime.reference2 = parse_double(s);
                     },
                     [](const ScenarioConfig& c) {
                         return c.runtime.reference2 ? format_double(*c.runtime.reference2) : std::string("none");
                     }});
        v.push_back({"ddpc_enabled",
                     [](ScenarioConfig& c, const std::string& s) { c.runtime.ddpc_enabled = parse_bool(s); },
                     [](const ScenarioConfig& c) { return bool_text(c.runtime.ddpc_enabled); }});
        v.push_back({"compensate",
                     [](ScenarioConfig& c, const std::string& s) { c.runtime.compensate = parse_bool(s); },
                     [](const ScenarioConfig& c) { return bool_text(c.runtime.compensate); }});
        v.push_back(real("kp", [](auto& c) -> auto& { return c.runtime.pid_gains.kp; }));
        v.push_back(real("ki", [](auto& c) -> auto& { return c.runtime.pid_gains.ki; }));
        v.push_back(real("kd", [](auto& c) -> auto& { return c.runtime.pid_gains.kd; }));
        v.push_back(real("u_min", [](auto& c) -> auto& { return c.runtime.u_min; }));
        v.push_back(real("u_max", [](auto& c) -> auto& { return c.runtime.u_max; }));
        v.push_back(real("pid_direction", [](auto& c) -> auto& { return c.runtime.pid_direction; }));
        v.push_back(real("dither", [](auto& c) -> auto& { return c.runtime.dither; }));
        v.push_back(real("ddpc_dither", [](auto& c) -> auto& { return c.runtime.ddpc_dither; }));
        v.push_back({"actuator",
                     [](ScenarioConfig& c, const std::string& s) {
                         if (s == "servo")
                             c.runtime.plant.actuator = Actuator::Servo;
                         else if (s == "double_integrator")
                             c.runtime.plant.actuator = Actuator::DoubleIntegrator;
                         else
                             throw std::invalid_argument("actuator must be servo or double_integrator");
                     },
                     [](const ScenarioConfig& c) {
                         return std::string(c.runtime.plant.actuator == Actuator::Servo ? "servo"
                                                                                        : "double_integrator");
                     }});
        v.push_back(real("servo_wn", [](auto& c) -> auto& { return c.runtime.plant.servo_wn; }));
        v.push_back(real("servo_zeta", [](auto& c) -> auto& { return c.runtime.plant.servo_zeta; }));
        v.push_back(real("beam_angle_limit",
                         [](auto& c) -> auto& { return c.runtime.plant.beam_angle_limit; }));
        v.push_back({"substeps",
                     [](ScenarioConfig& c, const std::string& s) {
                         c.runtime.plant.substeps = static_cast<int>(parse_int(s));
                     },
                     [](const ScenarioConfig& c) { return std::to_string(c.runtime.plant.substeps); }});
        v.push_back(real("beam_length", [](auto& c) -> auto& { return c.runtime.plant.params.beam_length; }));
        v.push_back(real("gear_radius", [](auto& c) -> auto& { return c.runtime.plant.params.gear_radius; }));
        v.push_back(real("ball_radius", [](auto& c) -> auto& { return c.runtime.plant.params.ball_radius; }));
        v.push_back(real("ball_inertia", [](auto& c) -> auto& { return c.runtime.plant.params.ball_inertia; }));
        v.push_back(real("ball_mass", [](auto& c) -> auto& { return c.runtime.plant.params.ball_mass; }));
        v.push_back(real("gravity", [](auto& c) -> auto& { return c.runtime.plant.params.gravity; }));
        v.push_back({"plant_model",
                     [](ScenarioConfig& c, const std::string& s) {
                         if (s == "nonlinear")
                             c.runtime.plant_model = PlantModel::Nonlinear;
                         else if (s == "linear")
                             c.runtime.plant_model = PlantModel::Linear;
                         else
                             throw std::invalid_argument("plant_model must be nonlinear or linear");
                     },
                     [](const ScenarioConfig& c) { return std::string(to_string(c.runtime.plant_model)); }});
        v.push_back(real("gamma0", [](auto& c) -> auto& { return c.runtime.gamma0; }));
        v.push_back(real("noise_std", [](auto& c) -> auto& { return c.runtime.noise_std; }));
        v.push_back({"delay_profile",
                     [](ScenarioConfig& c, const std::string& s) {
                         c.delay_profile = s;
                         if (s == "none")
                             return;
                         const DelayProfile& p = find_delay_profile(s);
                         const auto seed_up = c.runtime.uplink.seed;
                         const auto seed_down = c.runtime.downlink.seed;
                         c.runtime.uplink = channel_for(p, c.runtime.uplink.loss_prob);
                         c.runtime.downlink = channel_for(p, c.runtime.downlink.loss_prob);
                         c.runtime.uplink.seed = seed_up;
                         c.runtime.downlink.seed = seed_down;
                     },
                     [](const ScenarioConfig& c) { return c.delay_profile; }});
        v.push_back(channel("base_delay", [](auto& m) -> auto& { return m.base_delay; }));
        v.push_back({"jitter_kind",
                     [](ScenarioConfig& c, const std::string& s) {
                         c.runtime.uplink.jitter_kind = transport::parse_jitter_kind(s);
                         c.runtime.downlink.jitter_kind = c.runtime.uplink.jitter_kind;
                     },
                     [](const ScenarioConfig& c) { return std::string(transport::to_string(c.runtime.uplink.jitter_kind)); }});
        v.push_back(channel("jitter", [](auto& m) -> auto& { return m.jitter; }));
        v.push_back(channel("loss_prob", [](auto& m) -> auto& { return m.loss_prob; }));
        v.push_back(real("duration", [](auto& c) -> auto& { return c.runtime.duration; }));
        v.push_back({"cloud",
                     [](ScenarioConfig& c, const std::string& s) { c.runtime.cloud = transport::NetworkTuple::parse(s); },
                     [](const ScenarioConfig& c) { return c.runtime.cloud.to_string(); }});
        v.push_back({"edge",
                     [](ScenarioConfig& c, const std::string& s) { c.runtime.edge = transport::NetworkTuple::parse(s); },
                     [](const ScenarioConfig& c) { return c.runtime.edge.to_string(); }});
        v.push_back({"session_id",
                     [](ScenarioConfig& c, const std::string& s) { c.runtime.session_id = parse_uint(s); },
                     [](const ScenarioConfig& c) { return std::to_string(c.runtime.session_id); }});
        v.push_back({"max_fit_failures",
                     [](ScenarioConfig& c, const std::string& s) {
                         c.runtime.max_fit_failures = static_cast<int>(parse_int(s));
                     },
                     [](const ScenarioConfig& c) { return std::to_string(c.runtime.max_fit_failures); }});
        v.push_back(real("bind_retry", [](auto& c) -> auto& { return c.runtime.bind_retry; }));
        v.push_back({"probe_count", [](ScenarioConfig& c, const std::string& s) { c.probe_count = parse_int(s); },
                     [](const ScenarioConfig& c) { return std::to_string(c.probe_count); }});
        v.push_back({"probe_transport",
                     [](ScenarioConfig& c, const std::string& s) {
                         if (s == "simulated")
                             c.probe_transport = ProbeTransport::Simulated;
                         else if (s == "udp")
                             c.probe_transport = ProbeTransport::Udp;
                         else
                             throw std::invalid_argument("probe_transport must be simulated or udp");
                     },
                     [](const ScenarioConfig& c) {
                         return std::string(c.probe_transport == ProbeTransport::Udp ? "udp" : "simulated");
                     }});
        v.push_back({"probe_port",
                     [](ScenarioConfig& c, const std::string& s) {
                         const auto p = parse_uint(s);
                         if (p > 65535)
                             throw std::invalid_argument("probe_port out of range");
                         c.probe_port = static_cast<std::uint16_t>(p);
                     },
                     [](const ScenarioConfig& c) { return std::to_string(c.probe_port); }});
        return v;
    }();
    return k;
}

const Key& find_key(const std::string& name) {
    for (const Key& k : keys())
        if (name == k.name)
            return k;
    throw ConfigError("unknown config key '" + name + "'");
}

void apply_one(ScenarioConfig& cfg, const std::string& key, const std::string& value) {
    try {
        find_key(key).set(cfg, value);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError("invalid value for '" + key + "': " + e.what());
    }
}

ScenarioConfig preset(Scenario s) {
    ScenarioConfig cfg;
    cfg.scenario = s;
    switch (s) {
    case Scenario::Pid:
        cfg.runtime.ddpc_enabled = false;
        cfg.runtime.dither = 0;
        break;
    case Scenario::DdpcNoComp:
        cfg.runtime.compensate = false;
        break;
    case Scenario::DdpcComp:
        break;
    case Scenario::DdpcRefChange:
        cfg.runtime.reference = 0.15;
        cfg.runtime.reference2 = 0.25;
        break;
    case Scenario::DelayProbe:
        cfg.runtime.ddpc_enabled = false;
        break;
    }
    return cfg;
}

}  // namespace

const char* to_string(Scenario s) {
    for (const auto& [v, name] : kScenarioNames)
        if (v == s)
            return name;
    return "?";
}

Scenario parse_scenario(std::string_view name) {
    for (const auto& [v, n] : kScenarioNames)
        if (name == n)
            return v;
    throw ConfigError("unknown scenario '" + std::string(name) + "' (valid: " + scenario_names() + ")");
}

std::string scenario_names() {
    std::string out;
    for (const auto& [v, name] : kScenarioNames) {
        if (!out.empty())
            out += ", ";
        out += name;
    }
    return out;
}

void ScenarioConfig::validate() const {
    runtime.validate();
    if (probe_count < 1)
        throw ConfigError("probe_count must be >= 1");
    if (delay_profile != "none")
        find_delay_profile(delay_profile);
}

const std::array<DelayProfile, 8>& delay_profiles() { return kProfiles; }

const DelayProfile& find_delay_profile(std::string_view name) {
    for (const DelayProfile& p : kProfiles)
        if (name == p.name)
            return p;
    std::string valid;
    for (const DelayProfile& p : kProfiles)
        valid += std::string(valid.empty() ? "" : ", ") + p.name;
    throw ConfigError("unknown delay profile '" + std::string(name) + "' (valid: none, " + valid + ")");
}

transport::ChannelModel channel_for(const DelayProfile& p, double loss_prob) {
    transport::ChannelModel m;
    m.base_delay = p.min;
    m.jitter_kind = transport::JitterKind::Exponential;
    m.jitter = p.mean - p.min;
    m.loss_prob = loss_prob;
    return m;
}

KeyValues parse_config_text(std::string_view text) {
    KeyValues out;
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        const std::string stripped = trim(line);
        if (stripped.empty())
            continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        std::string key = trim(std::string_view(stripped).substr(0, eq));
        std::string value = trim(std::string_view(stripped).substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("line " + std::to_string(line_no) + ": empty key or value");
        find_key(key);
        out.emplace_back(std::move(key), std::move(value));
    }
    return out;
}

KeyValues read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

std::pair<std::string, std::string> parse_override(std::string_view text) {
    const auto eq = text.find('=');
    if (eq == std::string_view::npos)
        throw ConfigError("override '" + std::string(text) + "' is not key=value");
    std::string key = trim(text.substr(0, eq));
    std::string value = trim(text.substr(eq + 1));
    if (key.empty() || value.empty())
        throw ConfigError("override '" + std::string(text) + "' has an empty key or value");
    find_key(key);
    return {std::move(key), std::move(value)};
}

ScenarioConfig apply_entries(ScenarioConfig cfg, const KeyValues& entries) {
    // A delay profile seeds the channel keys, so explicit channel entries win.
    for (const auto& [k, v] : entries)
        if (k == "delay_profile")
            apply_one(cfg, k, v);
    for (const auto& [k, v] : entries)
        if (k != "delay_profile")
            apply_one(cfg, k, v);
    return cfg;
}

ScenarioConfig resolve(Scenario scenario, const KeyValues& file, const KeyValues& overrides) {
    KeyValues all;
    for (const auto& kv : file)
        if (kv.first != "scenario")
            all.push_back(kv);
    for (const auto& kv : overrides)
        if (kv.first != "scenario")
            all.push_back(kv);
    ScenarioConfig cfg = apply_entries(preset(scenario), all);
    cfg.validate();
    return cfg;
}

std::string to_config_text(const ScenarioConfig& cfg) {
    std::string out = "# resolved configuration\n";
    for (const Key& k : keys())
        out += std::string(k.name) + " = " + k.get(cfg) + "\n";
    return out;
}

std::vector<std::string> known_keys() {
    std::vector<std::string> out;
    for (const Key& k : keys())
        out.emplace_back(k.name);
    return out;
}

}  // namespace dpcc::harness
