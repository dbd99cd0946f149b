#include "uwbdfl/presence_detector.hpp"

#include "uwbdfl/errors.hpp"
#include "uwbdfl/output.hpp"

#include <cmath>
#include <numeric>
#include <ostream>

namespace uwbdfl {

namespace {

template <typename Buffer>
double mean_of(const Buffer& b)
{
    return std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(b.size());
}

template <typename Buffer, typename T>
void push_bounded(Buffer& b, T value, std::size_t cap)
{
    b.push_back(value);
    while (b.size() > cap) b.pop_front();
}

}  // namespace

void DetectorConfig::validate() const
{
    if (!(tau > 0.0 && tau < 1.0)) throw InvalidParameter("detector tau must be in (0, 1)");
    if (short_len == 0 || !(short_len < long_len)) throw InvalidParameter("detector needs 0 < short_len < long_len");
    if (event_window == 0) throw InvalidParameter("detector event_window must be > 0");
    if (event_count_threshold == 0 || event_count_threshold > event_window)
        throw InvalidParameter("detector needs 0 < event_count_threshold <= event_window");
}

DetectorOutput detector_update(DetectorState state, const DetectorConfig& cfg, double e_db)
{
    if (!std::isfinite(e_db)) throw InvalidParameter("detector input must be finite");

    push_bounded(state.short_buffer, e_db, cfg.short_len);

    DetectorOutput out;
    if (state.long_buffer.size() < cfg.long_len) {
        // Warm-up: learn the static level, never flag.
        state.long_buffer.push_back(e_db);
        push_bounded(state.event_buffer, 0, cfg.event_window);
        state.presence = false;
        out.state = std::move(state);
        return out;
    }

    const double long_mean = mean_of(state.long_buffer);
    const double short_mean = mean_of(state.short_buffer);
    const double rel = long_mean != 0.0 ? std::abs(short_mean - long_mean) / std::abs(long_mean)
                                        : (short_mean != 0.0 ? INFINITY : 0.0);
    out.event = rel > cfg.tau;

    push_bounded(state.event_buffer, out.event ? 1 : 0, cfg.event_window);
    const auto count = static_cast<std::size_t>(std::accumulate(state.event_buffer.begin(), state.event_buffer.end(), 0));
    out.presence = count >= cfg.event_count_threshold;
    state.presence = out.presence;

    if (!out.event && !out.presence) push_bounded(state.long_buffer, e_db, cfg.long_len);

    out.state = std::move(state);
    return out;
}

std::vector<Interval> episodes(const std::vector<TimedFlag>& flags, double gap)
{
    std::vector<Interval> runs;
    bool in_run = false;
    for (std::size_t i = 0; i < flags.size(); ++i) {
        if (i > 0 && !(flags[i].time > flags[i - 1].time)) throw InvalidParameter("flag timestamps must increase");
        if (flags[i].flag) {
            if (!in_run) runs.push_back({flags[i].time, flags[i].time});
            runs.back().end = flags[i].time;
            in_run = true;
        } else {
            in_run = false;
        }
    }

    std::vector<Interval> merged;
    for (const Interval& r : runs) {
        if (!merged.empty() && r.start - merged.back().end < gap)
            merged.back().end = r.end;
        else
            merged.push_back(r);
    }
    return merged;
}

EpisodeScore score_episodes(const std::vector<Interval>& detected, const std::vector<Interval>& truth)
{
    EpisodeScore s;
    s.truths = truth.size();
    for (const Interval& t : truth) {
        bool hit = false;
        for (const Interval& d : detected) hit = hit || d.overlaps(t);
        if (hit) ++s.hits;
    }
    s.misses = s.truths - s.hits;
    for (const Interval& d : detected) {
        bool matched = false;
        for (const Interval& t : truth) matched = matched || d.overlaps(t);
        if (!matched) ++s.false_alarms;
    }
    return s;
}

void write_detection_log(std::ostream& out, const std::vector<DetectionLogRow>& rows)
{
    out << kDetectionLogHeader << '\n';
    for (const auto& r : rows)
        out << format_number(r.time) << ',' << format_number(r.e_db) << ',' << (r.event ? 1 : 0) << ','
            << (r.presence ? 1 : 0) << '\n';
}

}  // namespace uwbdfl
