#pragma once

// CIR post-processing: threshold-based first-path alignment, power-delay
// profiles, the early-energy feature, and the capture quality gate.

#include "uwbdfl/channel_sim.hpp"

#include <deque>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

namespace uwbdfl {

inline constexpr double kDefaultRho = 0.75;
inline constexpr double kDefaultEarlyWindow = 3e-9;  // s

struct AlignedWaveform {
    std::vector<double> samples;  // starts at the detected first path
    double sample_period = 0.0;
    std::size_t alignment_lag = 0;
    double peak_correlation = 0.0;

    double energy() const;
};

struct PowerDelayProfile {
    double bin_width = 0.0;
    std::vector<double> bins;

    double total() const;
};

struct EarlyEnergy {
    double value_db = 0.0;
    double window = kDefaultEarlyWindow;

    bool valid() const;
};

/// Normalized cross-correlation coefficient of the template against the
/// template-length window of h starting at `lag`.
double correlation_coefficient(const std::vector<double>& h, const std::vector<double>& tmpl, std::size_t lag);

/// Earliest lag whose coefficient exceeds rho; nullopt when none does.
std::optional<AlignedWaveform> try_time_align(const SampledWaveform& h, const Pulse& tmpl, double rho = kDefaultRho);
/// As try_time_align but throws NoAlignment.
AlignedWaveform time_align(const SampledWaveform& h, const Pulse& tmpl, double rho = kDefaultRho);

PowerDelayProfile compute_pdp(const AlignedWaveform& a, double bin_width);

/// 10 log10 of the energy in the first `window` seconds; -inf for an all-zero window.
EarlyEnergy early_energy(const AlignedWaveform& a, double window = kDefaultEarlyWindow);

/// Energy in [start, end) seconds after the alignment instant.
double window_energy(const AlignedWaveform& a, double start, double end);

struct QualityGateConfig {
    double rho = kDefaultRho;
    double energy_ratio = 10.0;
    std::size_t history = 20;
};

/// Running record of recently kept capture energies on one link.
struct QualityGateState {
    std::deque<double> recent_energy;

    double median() const;
};

enum class GateDecision { keep, discard };

struct GateResult {
    GateDecision decision = GateDecision::discard;
    QualityGateState state;
    std::optional<AlignedWaveform> aligned;
};

GateResult quality_gate(const SampledWaveform& h, const Pulse& tmpl, QualityGateState state,
                        const QualityGateConfig& cfg = {});

struct FeatureRecord {
    double capture_time = 0.0;
    int tx_slot = 0;
    Point2 rx = Point2::Zero();
    double e_db = 0.0;
    bool kept = false;
};

inline constexpr const char* kFeatureCsvHeader = "capture_time,tx_slot,rx_x,rx_y,E_dB,kept_flag";

void write_feature_csv(std::ostream& out, const std::vector<FeatureRecord>& records);
std::vector<FeatureRecord> read_feature_csv(std::istream& in);

}  // namespace uwbdfl
