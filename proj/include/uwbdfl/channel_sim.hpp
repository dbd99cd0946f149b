#pragma once

// Deterministic 2-D multipath simulator: image-method ray paths through a
// wall layout, disc shadowing by a person, and band-limited CIR synthesis.

#include "uwbdfl/geometry.hpp"

#include <cstdint>
#include <vector>

namespace uwbdfl {

struct Wall {
    Segment segment;
    double loss_db = 0.0;     // per traversal
    double reflection = 0.0;  // amplitude coefficient in [0, 1]
};

struct Bounds {
    double xmin = 0.0, ymin = 0.0, xmax = 0.0, ymax = 0.0;

    double width() const { return xmax - xmin; }
    double height() const { return ymax - ymin; }
    bool contains(const Point2& p) const
    {
        return p.x() >= xmin && p.x() <= xmax && p.y() >= ymin && p.y() <= ymax;
    }
};

class SceneLayout {
public:
    SceneLayout(std::vector<Wall> walls, Bounds bounds);

    const std::vector<Wall>& walls() const { return walls_; }
    const Bounds& bounds() const { return bounds_; }

private:
    std::vector<Wall> walls_;
    Bounds bounds_;
};

struct PersonState {
    Point2 position = Point2::Zero();
    double radius = 0.15;
    double shadow_loss_db = 10.0;
    bool present = false;
};

struct PathComponent {
    double amplitude = 0.0;  // signed, unitless
    double delay = 0.0;      // s
    int order = 0;           // reflection count
    std::vector<Point2> polyline;

    double length() const;
    /// Unit vector pointing from the receiver back along the last leg.
    Point2 arrival_direction() const;
};

struct Pulse {
    std::vector<double> samples;
    double sample_period = 0.0;  // s
    double f_lo = 0.0;           // Hz
    double f_hi = 0.0;           // Hz

    double duration() const { return sample_period * static_cast<double>(samples.size()); }
    double energy() const;  // sum of s^2 * T_s
    /// Offset of the envelope peak from the first sample.
    double peak_offset() const;
};

struct Waypoint {
    double time = 0.0;  // s
    Point2 position = Point2::Zero();
};

class NodeTrajectory {
public:
    explicit NodeTrajectory(std::vector<Waypoint> waypoints);

    const std::vector<Waypoint>& waypoints() const { return waypoints_; }
    double start_time() const { return waypoints_.front().time; }
    double end_time() const { return waypoints_.back().time; }
    double path_length() const;
    /// Path length divided by elapsed time.
    double nominal_speed() const;

private:
    std::vector<Waypoint> waypoints_;
};

/// Gaussian-enveloped band-pass pulse, zero-mean, peak |s| = 1.
///
/// The envelope width is chosen so that 99% of the spectral energy sits in
/// [center - bandwidth/2, center + bandwidth/2]. The first sample is the pulse
/// time origin, so a path of delay tau starts at tau.
Pulse gaussian_monocycle(double center_freq, double bandwidth, double sample_period);

struct PathSearchOptions {
    int max_order = 3;
    /// Paths longer than direct + this excess (m) are skipped; <= 0 keeps all.
    double max_excess_length = 0.0;
};

/// Image-method enumeration of specular paths, sorted by delay. The direct path
/// is always first.
std::vector<PathComponent> enumerate_paths(const SceneLayout& layout, const Point2& tx,
                                           const Point2& rx, int max_order);
std::vector<PathComponent> enumerate_paths(const SceneLayout& layout, const Point2& tx,
                                           const Point2& rx, const PathSearchOptions& opts);

std::vector<PathComponent> apply_person_shadowing(std::vector<PathComponent> paths,
                                                  const PersonState& person);

struct SampledWaveform {
    std::vector<double> samples;
    double sample_period = 0.0;  // s
    double capture_time = 0.0;   // s
    Point2 tx = Point2::Zero();
    Point2 rx = Point2::Zero();

    double energy() const;  // sum of h^2 * T_s
};

/// h[k] = sum_j a_j s(k T_s - tau_j) + w[k], with fractional delays realized by
/// windowed-sinc interpolation of the pulse samples.
SampledWaveform synthesize_cir(const std::vector<PathComponent>& paths, const Pulse& pulse,
                               double duration, double noise_std, std::uint64_t seed);

Point2 sample_trajectory(const NodeTrajectory& traj, double t);

/// Shift all delays by -offset and drop paths that no longer fit in
/// the capture window accepted by synthesize_cir. Models a receiver capture window opened
/// `offset` seconds after transmission.
std::vector<PathComponent> window_paths(std::vector<PathComponent> paths, double offset,
                                        double window, const Pulse& pulse);

}  // namespace uwbdfl
