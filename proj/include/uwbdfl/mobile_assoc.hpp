#pragma once

// Association of mobile-receiver measurements to a fixed set of reference
// receivers, per-link median aggregation, and calibration differencing.

#include "uwbdfl/channel_sim.hpp"

#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

namespace uwbdfl {

struct PositionFix {
    double time = 0.0;
    Point2 position = Point2::Zero();
};

class PositionLog {
public:
    explicit PositionLog(std::vector<PositionFix> entries, double cadence = 0.0);

    const std::vector<PositionFix>& entries() const { return entries_; }
    double cadence() const { return cadence_; }
    bool covers(double t) const;

private:
    std::vector<PositionFix> entries_;
    double cadence_;
};

struct MeasurementRecord {
    double capture_time = 0.0;
    int tx_slot = 1;  // 1-based
    Point2 mobile = Point2::Zero();
    double energy_db = 0.0;
};

/// Immutable reference-receiver layout. Link statistics hold a shared pointer
/// to the set they were built over so that differencing can check identity.
class ReferenceReceiverSet {
public:
    ReferenceReceiverSet(std::vector<Point2> coords, double max_spacing);

    const std::vector<Point2>& coords() const { return coords_; }
    std::size_t size() const { return coords_.size(); }
    double max_spacing() const { return max_spacing_; }

    /// Concatenates sets (e.g. one per wall); spacing is checked within each part.
    static ReferenceReceiverSet concat(const std::vector<ReferenceReceiverSet>& parts);

private:
    ReferenceReceiverSet() = default;
    std::vector<Point2> coords_;
    double max_spacing_ = 0.0;
};

using RefSetPtr = std::shared_ptr<const ReferenceReceiverSet>;

struct LinkStat {
    int tx_slot = 1;
    std::size_t ref_index = 0;
    std::vector<double> energies;
    double median_db = 0.0;  // meaningful only when count > 0
    std::size_t count = 0;
};

struct LinkStats {
    RefSetPtr refs;
    int tx_slots = 0;
    std::vector<LinkStat> links;  // index = (tx_slot - 1) * refs->size() + ref_index
    std::size_t dropped_by_cutoff = 0;

    std::size_t link_index(int tx_slot, std::size_t ref_index) const;
    std::size_t total_count() const;
};

Point2 interpolate_position(const PositionLog& log, double t);
/// Non-throwing variant; nullopt when t falls outside the log.
std::optional<Point2> try_interpolate_position(const PositionLog& log, double t);

/// Evenly spaced points along the polyline with spacing strictly below
/// max_spacing, endpoints included.
ReferenceReceiverSet generate_reference_receivers(const NodeTrajectory& track, double max_spacing);

/// Nearest reference (Euclidean), lowest index on ties.
std::size_t assign_reference(const Point2& z_mc, const ReferenceReceiverSet& refs);

struct AssociationOptions {
    /// Records farther than this from their nearest reference are dropped; <= 0 disables.
    double cutoff = 0.10;
};

LinkStats bin_and_median(const std::vector<MeasurementRecord>& records, const RefSetPtr& refs, int tx_slots,
                         const AssociationOptions& opts = {});

/// Exact median; mean of the two middle values for even counts.
double median_of(std::vector<double> values);

/// y_l = max(M_cal - M_occ, 0), zero where either link has no data.
/// Throws InvalidParameter unless both were built over the same reference set.
std::vector<double> delta_median(const LinkStats& cal, const LinkStats& occ);

inline constexpr const char* kLinkStatsHeader = "tx_slot,ref_index,ref_x,ref_y,count,median_dB";
inline constexpr const char* kPositionLogHeader = "timestamp,x,y";

void write_link_stats_csv(std::ostream& out, const LinkStats& stats);
void write_y_vector_csv(std::ostream& out, const LinkStats& stats, const std::vector<double>& y);
void write_position_log_csv(std::ostream& out, const PositionLog& log);
PositionLog read_position_log_csv(std::istream& in);

}  // namespace uwbdfl
