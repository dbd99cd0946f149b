#include "uwbdfl/mobile_assoc.hpp"

#include "uwbdfl/errors.hpp"
#include "uwbdfl/output.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

namespace uwbdfl {

PositionLog::PositionLog(std::vector<PositionFix> entries, double cadence)
    : entries_(std::move(entries)), cadence_(cadence)
{
    for (std::size_t i = 1; i < entries_.size(); ++i)
        if (!(entries_[i].time > entries_[i - 1].time))
            throw InvalidParameter("position log timestamps must be strictly increasing");
}

bool PositionLog::covers(double t) const
{
    return !entries_.empty() && t >= entries_.front().time && t <= entries_.back().time;
}

ReferenceReceiverSet::ReferenceReceiverSet(std::vector<Point2> coords, double max_spacing)
    : coords_(std::move(coords)), max_spacing_(max_spacing)
{
    if (!(max_spacing_ > 0.0)) throw InvalidParameter("max_spacing must be > 0");
    for (std::size_t i = 1; i < coords_.size(); ++i)
        if (!((coords_[i] - coords_[i - 1]).norm() < max_spacing_))
            throw InvalidParameter("reference receivers " + std::to_string(i - 1) + " and " + std::to_string(i) +
                                   " are not closer than max_spacing");
}

ReferenceReceiverSet ReferenceReceiverSet::concat(const std::vector<ReferenceReceiverSet>& parts)
{
    ReferenceReceiverSet out;
    for (const auto& p : parts) {
        out.coords_.insert(out.coords_.end(), p.coords_.begin(), p.coords_.end());
        out.max_spacing_ = std::max(out.max_spacing_, p.max_spacing_);
    }
    return out;
}

std::size_t LinkStats::link_index(int tx_slot, std::size_t ref_index) const
{
    return static_cast<std::size_t>(tx_slot - 1) * refs->size() + ref_index;
}

std::size_t LinkStats::total_count() const
{
    std::size_t n = 0;
    for (const auto& l : links) n += l.count;
    return n;
}

std::optional<Point2> try_interpolate_position(const PositionLog& log, double t)
{
    if (!log.covers(t)) return std::nullopt;
    const auto& e = log.entries();
    const auto upper = std::upper_bound(e.begin(), e.end(), t, [](double v, const PositionFix& f) { return v < f.time; });
    if (upper == e.end()) return e.back().position;
    const PositionFix& b = *upper;
    const PositionFix& a = *(upper - 1);
    const double s = (t - a.time) / (b.time - a.time);
    return Point2(a.position + s * (b.position - a.position));
}

Point2 interpolate_position(const PositionLog& log, double t)
{
    auto p = try_interpolate_position(log, t);
    if (!p) throw OutOfRange("time " + std::to_string(t) + " s outside position log");
    return *p;
}

ReferenceReceiverSet generate_reference_receivers(const NodeTrajectory& track, double max_spacing)
{
    if (!(max_spacing > 0.0)) throw InvalidParameter("max_spacing must be > 0");
    const auto& wp = track.waypoints();
    const double length = track.path_length();
    if (length == 0.0) return ReferenceReceiverSet({wp.front().position}, max_spacing);

    // Smallest gap count whose spacing is strictly below max_spacing.
    auto gaps = static_cast<std::size_t>(std::ceil(length / max_spacing));
    while (length / static_cast<double>(gaps) >= max_spacing) ++gaps;
    const double step = length / static_cast<double>(gaps);

    std::vector<Point2> coords;
    coords.reserve(gaps + 1);
    std::size_t seg = 0;
    double seg_start = 0.0;
    for (std::size_t i = 0; i <= gaps; ++i) {
        const double s = i == gaps ? length : step * static_cast<double>(i);
        while (seg + 2 < wp.size() && s > seg_start + (wp[seg + 1].position - wp[seg].position).norm()) {
            seg_start += (wp[seg + 1].position - wp[seg].position).norm();
            ++seg;
        }
        const Point2& a = wp[seg].position;
        const Point2& b = wp[seg + 1].position;
        const double seg_len = (b - a).norm();
        const double f = seg_len > 0.0 ? std::clamp((s - seg_start) / seg_len, 0.0, 1.0) : 0.0;
        coords.push_back(a + f * (b - a));
    }
    return ReferenceReceiverSet(std::move(coords), max_spacing);
}

std::size_t assign_reference(const Point2& z_mc, const ReferenceReceiverSet& refs)
{
    if (refs.size() == 0) throw InvalidParameter("reference set is empty");
    std::size_t best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < refs.size(); ++r) {
        const double d2 = (z_mc - refs.coords()[r]).squaredNorm();
        if (d2 < best_d2) {
            best_d2 = d2;
            best = r;
        }
    }
    return best;
}

double median_of(std::vector<double> values)
{
    if (values.empty()) throw InvalidParameter("median of an empty set");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

LinkStats bin_and_median(const std::vector<MeasurementRecord>& records, const RefSetPtr& refs, int tx_slots,
                         const AssociationOptions& opts)
{
    if (!refs || refs->size() == 0) throw InvalidParameter("reference set is empty");
    if (tx_slots <= 0) throw InvalidParameter("tx_slots must be > 0");

    LinkStats stats;
    stats.refs = refs;
    stats.tx_slots = tx_slots;
    stats.links.resize(static_cast<std::size_t>(tx_slots) * refs->size());
    for (int s = 1; s <= tx_slots; ++s)
        for (std::size_t r = 0; r < refs->size(); ++r) {
            auto& l = stats.links[stats.link_index(s, r)];
            l.tx_slot = s;
            l.ref_index = r;
        }

    for (const auto& rec : records) {
        if (rec.tx_slot < 1 || rec.tx_slot > tx_slots) throw InvalidParameter("record has invalid tx_slot");
        if (!std::isfinite(rec.energy_db)) throw InvalidParameter("record energy must be finite");
        const std::size_t r = assign_reference(rec.mobile, *refs);
        if (opts.cutoff > 0.0 && (rec.mobile - refs->coords()[r]).norm() > opts.cutoff) {
            ++stats.dropped_by_cutoff;
            continue;
        }
        stats.links[stats.link_index(rec.tx_slot, r)].energies.push_back(rec.energy_db);
    }

    for (auto& l : stats.links) {
        l.count = l.energies.size();
        if (l.count > 0) l.median_db = median_of(l.energies);
    }
    return stats;
}

std::vector<double> delta_median(const LinkStats& cal, const LinkStats& occ)
{
    if (!cal.refs || cal.refs != occ.refs)
        throw InvalidParameter("calibration and occupied statistics use different reference receiver sets");
    if (cal.tx_slots != occ.tx_slots || cal.links.size() != occ.links.size())
        throw InvalidParameter("calibration and occupied statistics cover different links");

    std::vector<double> y(cal.links.size(), 0.0);
    for (std::size_t l = 0; l < y.size(); ++l) {
        if (cal.links[l].count == 0 || occ.links[l].count == 0) continue;
        y[l] = std::max(cal.links[l].median_db - occ.links[l].median_db, 0.0);
    }
    return y;
}

void write_link_stats_csv(std::ostream& out, const LinkStats& stats)
{
    out << kLinkStatsHeader << '\n';
    for (const auto& l : stats.links) {
        const Point2& c = stats.refs->coords()[l.ref_index];
        out << l.tx_slot << ',' << l.ref_index << ',' << format_number(c.x()) << ',' << format_number(c.y()) << ','
            << l.count << ',' << (l.count > 0 ? format_number(l.median_db) : std::string("nan")) << '\n';
    }
}

void write_y_vector_csv(std::ostream& out, const LinkStats& stats, const std::vector<double>& y)
{
    out << "link,tx_slot,ref_index,y_dB\n";
    for (std::size_t i = 0; i < y.size(); ++i)
        out << i << ',' << stats.links[i].tx_slot << ',' << stats.links[i].ref_index << ',' << format_number(y[i]) << '\n';
}

void write_position_log_csv(std::ostream& out, const PositionLog& log)
{
    out << kPositionLogHeader << '\n';
    for (const auto& e : log.entries())
        out << format_number(e.time) << ',' << format_number(e.position.x()) << ',' << format_number(e.position.y()) << '\n';
}

PositionLog read_position_log_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line)) throw FormatError("empty position log");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kPositionLogHeader) throw FormatError("unexpected position log header: " + line);
    std::vector<PositionFix> entries;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 3) throw FormatError("position log line " + std::to_string(line_no) + ": expected 3 fields");
        entries.push_back({parse_number(f[0]), Point2(parse_number(f[1]), parse_number(f[2]))});
    }
    return PositionLog(std::move(entries));
}

}  // namespace uwbdfl
