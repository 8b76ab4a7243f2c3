#include "dpcc/harness/csv.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace dpcc::harness {

std::string format_double(double v) {
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

template <typename T>
T parse_number(std::string_view text, const char* what) {
    T value{};
    const auto* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, value);
    if (text.empty() || res.ec != std::errc{} || res.ptr != end)
        throw std::invalid_argument(std::string("expected ") + what + ", got '" + std::string(text) + "'");
    return value;
}

}  // namespace

double parse_double(std::string_view text) {
    if (text == "nan") return std::nan("");
    if (text == "inf") return INFINITY;
    if (text == "-inf") return -INFINITY;
    // from_chars rejects a leading '+'.
    if (!text.empty() && text.front() == '+')
        text.remove_prefix(1);
    return parse_number<double>(text, "a number");
}

std::int64_t parse_int(std::string_view text) { return parse_number<std::int64_t>(text, "an integer"); }

std::uint64_t parse_uint(std::string_view text) {
    if (text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) {
        std::uint64_t value = 0;
        const auto* end = text.data() + text.size();
        const auto res = std::from_chars(text.data() + 2, end, value, 16);
        if (res.ec != std::errc{} || res.ptr != end)
            throw std::invalid_argument("expected a hex integer, got '" + std::string(text) + "'");
        return value;
    }
    return parse_number<std::uint64_t>(text, "a nonnegative integer");
}

void write_episode_csv(std::ostream& out, const EpisodeLog& log) {
    out << kEpisodeHeader << '\n';
    for (const EpisodeRecord& r : log.records)
        out << r.step << ',' << format_double(r.t) << ',' << format_double(r.y) << ','
            << format_double(r.u) << ',' << r.tau << ',' << format_double(r.t_delay) << ','
            << to_string(r.mode) << ',' << flags_to_string(r.flags) << '\n';
}

std::string episode_csv(const EpisodeLog& log) {
    std::ostringstream out;
    write_episode_csv(out, log);
    return out.str();
}

EpisodeLog read_episode_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kEpisodeHeader)
        throw std::invalid_argument("episode CSV: missing or unexpected header");
    EpisodeLog log;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::vector<std::string_view> f;
        std::string_view rest = line;
        for (;;) {
            const auto comma = rest.find(',');
            f.push_back(rest.substr(0, comma));
            if (comma == std::string_view::npos)
                break;
            rest.remove_prefix(comma + 1);
        }
        if (f.size() != 8)
            throw std::invalid_argument("episode CSV: expected 8 fields in '" + line + "'");
        EpisodeRecord r;
        r.step = parse_int(f[0]);
        r.t = parse_double(f[1]);
        r.y = parse_double(f[2]);
        r.u = parse_double(f[3]);
        r.tau = parse_int(f[4]);
        r.t_delay = parse_double(f[5]);
        if (f[6] == "ddpc")
            r.mode = ControlMode::Ddpc;
        else if (f[6] == "bootstrap")
            r.mode = ControlMode::Bootstrap;
        else
            throw std::invalid_argument("episode CSV: unknown mode '" + std::string(f[6]) + "'");
        r.flags = flags_from_string(f[7]);
        log.records.push_back(r);
    }
    return log;
}

}  // namespace dpcc::harness
