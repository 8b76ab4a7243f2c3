#include "dpcc/transport/channel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dpcc::transport {

const char* to_string(JitterKind kind) {
    switch (kind) {
    case JitterKind::None: return "none";
    case JitterKind::Uniform: return "uniform";
    case JitterKind::Exponential: return "exponential";
    }
    return "?";
}

JitterKind parse_jitter_kind(std::string_view text) {
    if (text == "none") return JitterKind::None;
    if (text == "uniform") return JitterKind::Uniform;
    if (text == "exponential") return JitterKind::Exponential;
    throw std::invalid_argument("unknown jitter kind '" + std::string(text) +
                                "' (expected none, uniform or exponential)");
}

void ChannelModel::validate() const {
    if (!(base_delay >= 0))
        throw std::invalid_argument("channel base_delay must be >= 0");
    if (!(jitter >= 0))
        throw std::invalid_argument("channel jitter must be >= 0");
    if (!(loss_prob >= 0 && loss_prob <= 1))
        throw std::invalid_argument("channel loss_prob must lie in [0, 1]");
}

double ChannelModel::nominal_mean() const {
    return base_delay + (jitter_kind == JitterKind::Exponential ? jitter : 0.0);
}

SimulatedChannel::SimulatedChannel(const ChannelModel& model) : model_(model), rng_(model.seed) {
    model_.validate();
}

std::int64_t SimulatedChannel::sample_delay_us() {
    double delay = model_.base_delay;
    switch (model_.jitter_kind) {
    case JitterKind::None:
        break;
    case JitterKind::Uniform:
        delay += rng_.uniform(-model_.jitter, model_.jitter);
        break;
    case JitterKind::Exponential:
        delay += rng_.exponential(model_.jitter);
        break;
    }
    return std::llround(std::max(0.0, delay) * 1e6);
}

SendOutcome SimulatedChannel::send(Bytes bytes, const NetworkTuple& source, std::int64_t now_us) {
    const std::uint64_t order = sent_++;
    if (model_.loss_prob > 0 && rng_.uniform01() < model_.loss_prob) {
        ++dropped_;
        return {true, 0};
    }
    const std::int64_t delivery = now_us + sample_delay_us();
    queue_.push(Pending{delivery, order, Datagram{std::move(bytes), source, now_us, delivery}});
    return {false, delivery};
}

std::vector<Datagram> SimulatedChannel::deliver(std::int64_t now_us) {
    std::vector<Datagram> out;
    while (!queue_.empty() && queue_.top().delivery_us <= now_us) {
        out.push_back(queue_.top().datagram);
        queue_.pop();
    }
    return out;
}

}  // namespace dpcc::transport
