#pragma once

// Moving-average link-line presence detector over early-energy samples (dB),
// plus episode extraction and scoring against ground-truth intervals.

#include <deque>
#include <iosfwd>
#include <vector>

namespace uwbdfl {

struct DetectorConfig {
    double tau = 0.016;
    std::size_t short_len = 6;
    std::size_t long_len = 30;
    std::size_t event_window = 10;
    std::size_t event_count_threshold = 3;

    /// Throws InvalidParameter when an invariant is violated.
    void validate() const;
};

struct DetectorState {
    std::deque<double> long_buffer;
    std::deque<double> short_buffer;
    std::deque<int> event_buffer;
    bool presence = false;
};

struct DetectorOutput {
    DetectorState state;
    bool event = false;
    bool presence = false;
};

/// One detector step. The long buffer only absorbs samples while neither an
/// event nor a presence is active, so it keeps tracking the static link.
DetectorOutput detector_update(DetectorState state, const DetectorConfig& cfg, double e_db);

struct TimedFlag {
    double time = 0.0;
    bool flag = false;
};

struct Interval {
    double start = 0.0;
    double end = 0.0;

    bool overlaps(const Interval& other) const { return start <= other.end && other.start <= end; }
};

/// Maximal runs of true flags; runs separated by less than `gap` seconds are merged.
std::vector<Interval> episodes(const std::vector<TimedFlag>& flags, double gap);

struct EpisodeScore {
    std::size_t truths = 0;
    std::size_t hits = 0;          // truth intervals overlapped by at least one episode
    std::size_t misses = 0;
    std::size_t false_alarms = 0;  // episodes overlapping no truth interval
};

EpisodeScore score_episodes(const std::vector<Interval>& detected, const std::vector<Interval>& truth);

struct DetectionLogRow {
    double time = 0.0;
    double e_db = 0.0;
    bool event = false;
    bool presence = false;
};

inline constexpr const char* kDetectionLogHeader = "timestamp,E_dB,event_flag,presence_flag";

void write_detection_log(std::ostream& out, const std::vector<DetectionLogRow>& rows);

}  // namespace uwbdfl
