#pragma once

// Cloud-server and edge-client sessions of the control loop, and the
// single-threaded co-simulation that runs them over simulated channels on one
// logical clock.

#include "dpcc/compensator.hpp"
#include "dpcc/pid.hpp"
#include "dpcc/plant.hpp"
#include "dpcc/predictor.hpp"
#include "dpcc/random.hpp"
#include "dpcc/transport/bind.hpp"
#include "dpcc/transport/channel.hpp"

#include <atomic>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dpcc {

enum class PlantModel { Nonlinear, Linear };

const char* to_string(PlantModel model);

struct RuntimeConfig {
    double ts = 0.02;
    HankelShape shape{30, 200};
    double lambda = 2e-4;
    double ridge = 1e-8;
    double reference = 0.2;
    /// Target from the switch instant on (reference change scenario).
    std::optional<double> reference2;
    bool ddpc_enabled = true;
    bool compensate = true;

    PidGains pid_gains;
    double u_min = -1.0;
    double u_max = 1.0;
    /// Sign applied to the PID command; the beam gain is negative, so -1.
    double pid_direction = -1.0;
    /// Half-width of the zero-mean uniform dither added during bootstrap.
    double dither = 0.05;
    /// Same, added to every data-driven sequence (0 disables).
    double ddpc_dither = 0.0;

    PlantConfig plant;
    PlantModel plant_model = PlantModel::Nonlinear;
    double gamma0 = 0.1;
    double noise_std = 0.0;

    transport::ChannelModel uplink;    // edge -> cloud
    transport::ChannelModel downlink;  // cloud -> edge

    double duration = 30.0;
    transport::NetworkTuple cloud = transport::NetworkTuple::parse("10.0.0.1:9000");
    transport::NetworkTuple edge = transport::NetworkTuple::parse("192.168.0.10:40000");
    std::uint64_t session_id = 0x44504343;
    int max_fit_failures = 5;
    /// Edge re-sends BIND_REQ after this long without an ack.
    double bind_retry = 0.5;

    std::int64_t ts_us() const;
    std::int64_t steps() const;
    void validate() const;
};

enum class ControlMode { Bootstrap, Ddpc };

const char* to_string(ControlMode mode);

struct EpisodeFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace flags {
inline constexpr unsigned Loss = 1u << 0;        // no new sequence this period
inline constexpr unsigned Clamp = 1u << 1;       // tau clamped to N-1
inline constexpr unsigned Switch = 1u << 2;      // bootstrap -> data-driven this period
inline constexpr unsigned Unbound = 1u << 3;     // edge had no live bind
inline constexpr unsigned FitFailure = 1u << 4;  // cloud reused old coefficients
inline constexpr unsigned Cold = 1u << 5;        // no sequence ever received
}  // namespace flags

std::string flags_to_string(unsigned f);
unsigned flags_from_string(std::string_view text);

struct EpisodeRecord {
    std::int64_t step = 0;
    double t = 0;
    double y = 0;
    double u = 0;
    std::int64_t tau = 0;
    double t_delay = 0;  // age of the sequence in use, s
    ControlMode mode = ControlMode::Bootstrap;
    unsigned flags = 0;
};

struct EpisodeLog {
    std::vector<EpisodeRecord> records;
    /// Pairs the cloud pushed into its window, in order (for audits).
    std::vector<std::pair<double, double>> cloud_window_pairs;
    std::uint64_t uplink_sent = 0, uplink_dropped = 0;
    std::uint64_t downlink_sent = 0, downlink_dropped = 0;
};

class CloudSession {
public:
    explicit CloudSession(const RuntimeConfig& config, std::uint64_t seed);

    /// Handles one datagram; returns the reply, if any.
    std::optional<transport::WireMessage> on_datagram(const transport::Datagram& d, std::int64_t now_us);

    /// MEASUREMENT already verified: update window, compute, emit CONTROL_SEQ.
    transport::WireMessage on_measurement(const transport::WireMessage& msg, std::int64_t now_us);

    ControlMode mode() const { return mode_; }
    std::int64_t received() const { return received_; }
    std::optional<std::int64_t> switch_step() const { return switch_step_; }
    const DataWindow<double>& window() const { return window_; }
    const Vector<double>& rf() const { return rf_; }
    const std::optional<PredictorCoefficients<double>>& coefficients() const { return coeffs_; }
    const transport::BindState& bind() const { return bind_; }
    int fit_failures_total() const { return fit_failures_total_; }
    bool last_fit_failed() const { return last_fit_failed_; }
    std::uint64_t rejected() const { return rejected_; }

private:
    RuntimeConfig config_;
    Rng rng_;
    DataWindow<double> window_;
    std::optional<PredictorCoefficients<double>> coeffs_;
    Vector<double> rf_;
    transport::BindState bind_;
    transport::FreshnessFilter freshness_;
    ControlMode mode_ = ControlMode::Bootstrap;
    PidState pid_;
    std::int64_t received_ = 0;
    std::optional<std::int64_t> switch_step_;
    std::uint64_t seq_no_ = 0;
    int consecutive_fit_failures_ = 0;
    int fit_failures_total_ = 0;
    bool last_fit_failed_ = false;
    std::uint64_t rejected_ = 0;
};

struct EdgeTick {
    double u = 0;
    double y = 0;
    std::int64_t tau = 0;
    double t_delay = 0;
    unsigned flags = 0;
    std::vector<transport::WireMessage> outgoing;
};

class EdgeSession {
public:
    explicit EdgeSession(const RuntimeConfig& config, std::uint64_t seed);

    /// Bind traffic is handled immediately; a fresh CONTROL_SEQ is stashed
    /// for the next tick.
    void on_datagram(const transport::Datagram& d, std::int64_t now_us);

    /// One control period: bind upkeep, input selection, plant step,
    /// MEASUREMENT [u, y] where y was sampled before u was applied.
    EdgeTick tick(std::int64_t now_us);

    const PlantState& plant_state() const { return plant_; }
    const transport::BindState& bind() const { return bind_; }
    const CompensatorState& compensator() const { return comp_; }
    double last_applied_u() const { return last_u_; }
    std::uint64_t rejected() const { return rejected_; }

private:
    double select(std::int64_t now_us, EdgeTick& out);
    PlantState step_plant(double u) const;

    RuntimeConfig config_;
    Rng noise_;
    CompensatorState comp_;
    PlantState plant_;
    LinearModel<double> linear_;
    transport::BindState bind_;
    transport::FreshnessFilter freshness_;
    std::optional<ControlSequence<double>> pending_;
    double last_u_ = 0;
    std::uint64_t seq_no_ = 0;
    std::uint64_t rejected_ = 0;
};

/// Deterministic in (config, seed); throws EpisodeFailure when the cloud
/// exhausts its fit-failure budget or the plant state stops being finite.
EpisodeLog run_episode(const RuntimeConfig& config, std::uint64_t seed);

/// Wall-clock drivers for separate cloud and edge processes over any link.
struct RealtimeOptions {
    std::function<std::int64_t()> clock;
    std::function<void(std::int64_t)> sleep_until;  // absolute clock() time
    const std::atomic<bool>* stop = nullptr;
    /// Cloud polling interval, us.
    std::int64_t poll_us = 1000;
};

/// Serves until `stop` is set or config.duration plus a grace period elapses
/// after the first accepted datagram; returns the number of sequences sent.
std::uint64_t serve_cloud(const RuntimeConfig& config, std::uint64_t seed, transport::DatagramLink& link,
                          const RealtimeOptions& options);

/// One period per Ts on the wall clock for config.duration.
EpisodeLog run_edge(const RuntimeConfig& config, std::uint64_t seed, transport::DatagramLink& link,
                    const RealtimeOptions& options);

/// Channel seeds per direction derived from the run seed.
std::uint64_t uplink_seed(std::uint64_t seed);
std::uint64_t downlink_seed(std::uint64_t seed);

}  // namespace dpcc
