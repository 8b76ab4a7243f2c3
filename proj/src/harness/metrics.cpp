#include "dpcc/harness/metrics.hpp"

#include "dpcc/harness/csv.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace dpcc::harness {

Metrics compute_metrics(const EpisodeLog& log, const ReferenceTrajectory& ref, double band) {
    const auto& rec = log.records;
    if (rec.empty())
        throw std::invalid_argument("compute_metrics: empty log");
    Metrics m;
    m.steps = static_cast<std::int64_t>(rec.size());

    std::size_t start = 0;
    for (std::size_t i = 0; i < rec.size(); ++i)
        if (rec[i].flags & flags::Switch) {
            start = i;
            m.switch_time = rec[i].t;
            break;
        }
    const double r = m.switch_time ? ref.after : ref.before;
    const double tolerance = band * std::abs(r);

    double sum_sq = 0;
    std::optional<std::size_t> last_outside;
    const double direction = r >= rec[start].y ? 1.0 : -1.0;
    for (std::size_t i = start; i < rec.size(); ++i) {
        const double e = rec[i].y - r;
        sum_sq += e * e;
        if (std::abs(e) > tolerance)
            last_outside = i;
        m.overshoot = std::max(m.overshoot, direction * e);
    }
    m.rms_error = std::sqrt(sum_sq / static_cast<double>(rec.size() - start));
    if (!last_outside)
        m.settle_time = 0.0;
    else if (*last_outside + 1 < rec.size())
        m.settle_time = rec[*last_outside + 1].t - rec[start].t;

    double delay_sum = 0;
    std::int64_t delay_n = 0;
    for (const EpisodeRecord& x : rec) {
        m.clamp_count += (x.flags & flags::Clamp) ? 1 : 0;
        m.loss_count += (x.flags & flags::Loss) ? 1 : 0;
        m.fit_failure_count += (x.flags & flags::FitFailure) ? 1 : 0;
        m.unbound_count += (x.flags & flags::Unbound) ? 1 : 0;
        if (x.flags & flags::Loss)
            continue;
        delay_sum += x.t_delay;
        ++delay_n;
        m.delay_max = std::max(m.delay_max.value_or(x.t_delay), x.t_delay);
        m.delay_min = std::min(m.delay_min.value_or(x.t_delay), x.t_delay);
    }
    if (delay_n > 0)
        m.delay_mean = delay_sum / static_cast<double>(delay_n);
    return m;
}

void write_metrics_csv(std::ostream& out, const Metrics& m) {
    const auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string("NA"); };
    out << "steps,switch_time,rms_error,settle_time,overshoot,clamp_count,loss_count,"
           "fit_failure_count,unbound_count,delay_mean,delay_max,delay_min\n";
    out << m.steps << ',' << opt(m.switch_time) << ',' << format_double(m.rms_error) << ','
        << opt(m.settle_time) << ',' << format_double(m.overshoot) << ',' << m.clamp_count << ','
        << m.loss_count << ',' << m.fit_failure_count << ',' << m.unbound_count << ','
        << opt(m.delay_mean) << ',' << opt(m.delay_max) << ',' << opt(m.delay_min) << '\n';
}

}  // namespace dpcc::harness
