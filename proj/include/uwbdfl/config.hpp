#pragma once

// Experiment configuration: YAML text with nested sections, defaults for each
// experiment kind, dotted-key overrides, and exhaustive semantic validation.

#include "uwbdfl/channel_sim.hpp"
#include "uwbdfl/presence_detector.hpp"
#include "uwbdfl/rti.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace uwbdfl {

enum class ExperimentKind { energy_gap, presence, localization };

std::string to_string(ExperimentKind kind);
std::optional<ExperimentKind> parse_kind(const std::string& text);

struct ConfigIssue {
    std::string field;  // dotted path, e.g. "presence.capture_period_s"
    int line = 0;       // 1-based, 0 when unknown
    std::string message;
};

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<ConfigIssue> issues);
    const std::vector<ConfigIssue>& issues() const { return issues_; }

private:
    std::vector<ConfigIssue> issues_;
};

struct PulseConfig {
    double center_freq = 4.5e9;
    double bandwidth = 3.0e9;
    double sample_period = 15.89e-12;
};

struct CaptureConfig {
    double window = 60e-9;
    double pretrigger = 5e-9;
    double clock_jitter = 1e-9;
    double noise_fraction = 0.01;  // of the unobstructed direct-path peak
    int max_order = 3;
    double rho = 0.75;
    double early_window = 3e-9;
    double gate_energy_ratio = 10.0;
    int gate_history = 20;
    double interference_rate = 0.01;
};

struct PersonConfig {
    double radius = 0.15;
    double shadow_loss_db = 10.0;
};

struct SceneConfig {
    Bounds bounds;
    std::vector<Wall> walls;
};

struct EnergyGapConfig {
    Point2 tx = Point2::Zero();
    Point2 rx_start = Point2::Zero();
    Point2 rx_direction = Point2(0.0, 1.0);
    double step = 0.02;
    int positions = 10;
    Point2 person = Point2::Zero();
    double pdp_bin = 100e-12;
    double late_start = 10e-9;
    double late_end = 20e-9;
};

struct Crossing {
    double time = 0.0;           // s, person on the link line
    double link_fraction = 0.5;  // along tx -> rx
    double angle_deg = 45.0;     // walking direction vs the link line
    double dwell = 0.0;          // s spent standing on the line
};

struct PresenceVariant {
    std::string name;
    double displacement = 0.10;
    double duration = 150.0;
    std::vector<Crossing> crossings;
};

struct PresenceConfig {
    Point2 tx = Point2::Zero();
    Point2 rx_center = Point2::Zero();
    Point2 swing_direction = Point2(0.0, 1.0);
    double swing_half_period = 2.0;
    double capture_period = 1.0 / 3.0;
    double walk_speed = 0.46;
    double approach_offset = 0.6;
    Point2 rest_position = Point2::Zero();
    double truth_margin = 0.5;
    double episode_gap = 1.0;
    DetectorConfig detector;
    std::vector<PresenceVariant> variants;
};

struct TrackConfig {
    std::string name;
    Point2 from = Point2::Zero();
    Point2 to = Point2::Zero();
};

struct LocalizationConfig {
    std::vector<Point2> transmitters;
    std::vector<TrackConfig> tracks;
    double speed = 0.08;
    double capture_period = 0.1;
    double position_log_period = 0.3;
    double position_noise = 0.005;
    double max_spacing = 0.12;
    double association_cutoff = 0.10;
    Bounds monitored_area;
    std::vector<Point2> standing_positions;
    RTIParams rti;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::energy_gap;
    std::uint64_t seed = 1;
    std::filesystem::path source;  // empty for built-in defaults
    std::filesystem::path scene_file;
    PulseConfig pulse;
    CaptureConfig capture;
    PersonConfig person;
    SceneConfig scene;
    EnergyGapConfig energy_gap;
    PresenceConfig presence;
    LocalizationConfig localization;
    std::vector<std::string> overrides;  // "key=value" as applied

    SceneLayout layout() const { return SceneLayout(scene.walls, scene.bounds); }
};

/// Built-in scene and parameters for each experiment kind.
ExperimentConfig default_config(ExperimentKind kind);

/// Parses YAML text; `origin` is used for relative scene_file paths and messages.
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& origin = {},
                              const std::vector<std::string>& overrides = {});

/// Reads and validates a config file. Throws ConfigError listing every problem.
ExperimentConfig validate_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

/// Semantic checks on an already-built config; returns all violations.
std::vector<ConfigIssue> check_config(const ExperimentConfig& cfg);

/// Fully resolved config as YAML (all defaults spelled out).
std::string dump_config(const ExperimentConfig& cfg);

std::size_t edit_distance(const std::string& a, const std::string& b);

}  // namespace uwbdfl
