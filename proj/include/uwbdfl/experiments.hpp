#pragma once

// End-to-end experiment drivers: capture simulation with receiver clock
// jitter, noise and interference bursts, followed by the feature, detection
// and imaging stages, and the artifact files each run emits.

#include "uwbdfl/channel_sim.hpp"
#include "uwbdfl/cir_processing.hpp"
#include "uwbdfl/config.hpp"
#include "uwbdfl/mobile_assoc.hpp"
#include "uwbdfl/presence_detector.hpp"
#include "uwbdfl/rti.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace uwbdfl {

/// Independent child seed for (root, stream, index); splitmix64 mixing.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream, std::uint64_t index = 0);

class CaptureSimulator {
public:
    explicit CaptureSimulator(const ExperimentConfig& cfg);

    const Pulse& pulse() const { return pulse_; }
    const SceneLayout& layout() const { return layout_; }
    double duration() const { return capture_.window; }

    struct Detail {
        SampledWaveform waveform;
        double first_path_delay = 0.0;  // s after the window opens
        bool interfered = false;
    };

    /// One received capture. The capture window opens `pretrigger` (plus
    /// uniform clock jitter) before the direct path arrives.
    SampledWaveform capture(const Point2& tx, const Point2& rx, const std::optional<PersonState>& person,
                            double time, std::uint64_t seed) const;
    /// As capture() but also reports the ground truth behind the waveform.
    Detail capture_detail(const Point2& tx, const Point2& rx, const std::optional<PersonState>& person, double time,
                          std::uint64_t seed) const;

private:
    SceneLayout layout_;
    Pulse pulse_;
    CaptureConfig capture_;
    PathSearchOptions search_;
};

/// Quality gate plus early-energy extraction for one link.
class LinkFeatureExtractor {
public:
    explicit LinkFeatureExtractor(const CaptureConfig& cfg);

    /// Early energy in dB for a kept capture, nullopt for a discarded one.
    std::optional<double> process(const SampledWaveform& h, const Pulse& tmpl);
    /// As process() but also returns the aligned waveform.
    std::optional<AlignedWaveform> process_aligned(const SampledWaveform& h, const Pulse& tmpl);

private:
    QualityGateConfig gate_;
    QualityGateState state_;
    double early_window_;
};

struct EnergyGapRow {
    double displacement = 0.0;  // m from the sweep start
    double e_empty_db = 0.0;
    double e_presence_db = 0.0;
    double late_empty_db = 0.0;  // late-window energy, dB
    double late_presence_db = 0.0;
};

struct EnergyGapResult {
    std::vector<EnergyGapRow> rows;
    double min_gap_db = 0.0;      // min over rows of e_empty - e_presence
    double early_range_db = 0.0;  // max - min of e_empty over the sweep
    double late_range_db = 0.0;   // max - min of late_empty over the sweep
};

struct PresenceVariantResult {
    std::string name;
    double displacement = 0.0;
    std::size_t captures = 0;
    std::size_t kept = 0;
    std::vector<Interval> truth;
    std::vector<Interval> detected;
    EpisodeScore score;
    std::vector<DetectionLogRow> log;
};

struct LocalizationResult {
    std::vector<LocalizationRow> rows;
    double mean_error = 0.0;
    std::size_t references = 0;
    std::size_t links = 0;
    std::size_t captures = 0;
    std::size_t kept = 0;      // summed over all sessions
    std::size_t binned = 0;    // records landing in a link bin, all sessions
    std::size_t dropped = 0;   // records beyond the association cutoff, all sessions
    std::size_t unlogged = 0;  // kept captures outside their position log
    std::vector<double> peaks;  // image peak value per standing position
};

struct RunReport {
    ExperimentKind kind = ExperimentKind::energy_gap;
    std::string command;
    std::uint64_t seed = 0;
    std::vector<std::string> overrides;
    std::optional<EnergyGapResult> energy_gap;
    std::vector<PresenceVariantResult> presence;
    std::optional<LocalizationResult> localization;
    std::vector<std::filesystem::path> artifacts;  // relative to the output directory
};

/// Walks the scheduled crossings: at rest until the first approach, then for
/// each crossing a straight oblique pass through the link line at walk speed,
/// alternating sides, and a parallel walk at the approach offset in between.
NodeTrajectory build_person_trajectory(const PresenceConfig& cfg, const PresenceVariant& variant);

/// Receiver moving back and forth along the swing direction, centred on
/// rx_center, total excursion = displacement.
NodeTrajectory build_swing_trajectory(const PresenceConfig& cfg, const PresenceVariant& variant);

/// Intervals during which the person is within `margin` of the segment a-b,
/// evaluated on a grid of `step` seconds.
std::vector<Interval> truth_intervals(const NodeTrajectory& person, const Point2& a, const Point2& b, double margin,
                                      double step = 0.01);

/// Reference receivers of every configured track, concatenated in track order.
RefSetPtr build_reference_set(const ExperimentConfig& cfg);

struct SessionOutcome {
    LinkStats stats;
    std::vector<FeatureRecord> features;
    std::vector<PositionLog> logs;  // one per traversal
    std::vector<std::string> log_names;
    std::size_t captures = 0;
    std::size_t kept = 0;
    std::size_t unlogged = 0;  // kept = stats.total_count() + stats.dropped_by_cutoff + unlogged
};

/// One mobile-receiver session over every transmitter slot and track.
/// Session 0 is the calibration pass; each session index draws its own
/// capture and log phases.
SessionOutcome run_localization_session(const ExperimentConfig& cfg, const CaptureSimulator& sim, const RefSetPtr& refs,
                                        std::size_t session, const std::optional<Point2>& person);

/// Runs the experiment selected by cfg.kind. When out_dir is empty nothing is
/// written; otherwise every artifact, a resolved config, report.json and a
/// manifest with SHA-256 hashes are written there.
RunReport run_energy_gap(const ExperimentConfig& cfg, const std::filesystem::path& out_dir = {});
RunReport run_presence(const ExperimentConfig& cfg, const std::filesystem::path& out_dir = {});
RunReport run_localization(const ExperimentConfig& cfg, const std::filesystem::path& out_dir = {});
RunReport run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir = {});

/// Writes the raw captures of the configured experiment as a binary trace
/// file, reads it back, and emits the per-capture feature CSV.
RunReport run_simulate(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

std::string report_json(const RunReport& report);

}  // namespace uwbdfl
