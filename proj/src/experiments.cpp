#include "uwbdfl/experiments.hpp"

#include "uwbdfl/errors.hpp"
#include "uwbdfl/output.hpp"
#include "uwbdfl/trace_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

namespace uwbdfl {

namespace {

enum Stream : std::uint64_t {
    kEnergyGapStream = 1,
    kPresenceStream = 2,
    kLocalizationStream = 3,
};

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double to_db(double energy) { return energy > 0.0 ? 10.0 * std::log10(energy) : -INFINITY; }

struct CaptureJob {
    double time = 0.0;
    int tx_slot = 1;
    Point2 tx = Point2::Zero();
    Point2 rx = Point2::Zero();
    std::optional<PersonState> person;
    std::uint64_t seed = 0;
};

PersonState person_at(const ExperimentConfig& cfg, const Point2& p)
{
    return PersonState{p, cfg.person.radius, cfg.person.shadow_loss_db, true};
}

// Collects artifacts under one directory; a no-op sink when dir is empty.
class Sink {
public:
    explicit Sink(std::filesystem::path dir) : dir_(std::move(dir))
    {
        if (!dir_.empty()) std::filesystem::create_directories(dir_);
    }

    bool active() const { return !dir_.empty(); }

    void text(const std::filesystem::path& rel, const std::string& contents)
    {
        if (!active()) return;
        prepare(rel);
        write_text_file(dir_ / rel, contents);
        files_.push_back(rel);
    }

    template <typename Fn>
    void csv(const std::filesystem::path& rel, Fn&& fn)
    {
        if (!active()) return;
        std::ostringstream os;
        fn(os);
        text(rel, os.str());
    }

    void image_pgm(const std::filesystem::path& rel, const ImageVector& image)
    {
        if (!active()) return;
        prepare(rel);
        write_image_pgm(dir_ / rel, image);
        files_.push_back(rel);
    }

    void traces(const std::filesystem::path& rel, const std::vector<SampledWaveform>& records)
    {
        prepare(rel);
        write_trace_file(dir_ / rel, records);
        files_.push_back(rel);
    }

    const std::filesystem::path& dir() const { return dir_; }
    const std::vector<std::filesystem::path>& files() const { return files_; }

private:
    void prepare(const std::filesystem::path& rel)
    {
        if (rel.has_parent_path()) std::filesystem::create_directories(dir_ / rel.parent_path());
    }

    std::filesystem::path dir_;
    std::vector<std::filesystem::path> files_;
};

void finalize(RunReport& report, const ExperimentConfig& cfg, Sink& sink)
{
    report.seed = cfg.seed;
    report.overrides = cfg.overrides;
    if (!sink.active()) return;
    sink.text("config_resolved.yaml", dump_config(cfg));
    report.artifacts = sink.files();
    report.artifacts.emplace_back("report.json");
    write_text_file(sink.dir() / "report.json", report_json(report));

    std::ostringstream manifest;
    for (const auto& rel : report.artifacts)
        manifest << sha256_file(sink.dir() / rel) << "  " << rel.generic_string() << '\n';
    write_text_file(sink.dir() / "manifest.txt", manifest.str());
    report.artifacts.emplace_back("manifest.txt");
}

// ---------------------------------------------------------------------------
// Capture plans.

std::vector<CaptureJob> energy_gap_jobs(const ExperimentConfig& cfg, bool with_person, int attempt)
{
    const auto& e = cfg.energy_gap;
    const Point2 dir = e.rx_direction.normalized();
    const std::uint64_t stream = derive_seed(cfg.seed, kEnergyGapStream, with_person ? 2 : 1);
    std::vector<CaptureJob> jobs;
    for (int i = 0; i < e.positions; ++i) {
        CaptureJob j;
        j.time = static_cast<double>(i);
        j.tx = e.tx;
        j.rx = e.rx_start + (i * e.step) * dir;
        if (with_person) j.person = person_at(cfg, e.person);
        j.seed = derive_seed(stream, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(attempt));
        jobs.push_back(j);
    }
    return jobs;
}

std::vector<CaptureJob> presence_jobs(const ExperimentConfig& cfg, std::size_t variant_index)
{
    const auto& p = cfg.presence;
    const auto& v = p.variants.at(variant_index);
    const NodeTrajectory person = build_person_trajectory(p, v);
    const NodeTrajectory swing = build_swing_trajectory(p, v);
    const std::uint64_t stream = derive_seed(cfg.seed, kPresenceStream, variant_index);
    std::vector<CaptureJob> jobs;
    const auto n = static_cast<std::size_t>(std::floor(v.duration / p.capture_period + 1e-9));
    for (std::size_t k = 0; k <= n; ++k) {
        CaptureJob j;
        j.time = static_cast<double>(k) * p.capture_period;
        j.tx = p.tx;
        j.rx = sample_trajectory(swing, j.time);
        j.person = person_at(cfg, sample_trajectory(person, j.time));
        j.seed = derive_seed(stream, k);
        jobs.push_back(j);
    }
    return jobs;
}

struct Traversal {
    int tx_slot = 1;
    std::size_t track = 0;
    PositionLog log;
    std::vector<CaptureJob> jobs;
};

// One session: every transmitter slot, every receiver track, traversed in
// order on a shared clock. Capture phase and log phase are random per
// traversal, so mobile coordinates differ from session to session.
std::vector<Traversal> localization_session(const ExperimentConfig& cfg, std::size_t session,
                                            const std::optional<Point2>& person)
{
    const auto& l = cfg.localization;
    constexpr double lead = 0.5;  // s of motion before and after each track
    std::vector<Traversal> out;
    double base = 0.0;
    std::size_t index = 0;
    for (std::size_t s = 0; s < l.transmitters.size(); ++s) {
        for (std::size_t k = 0; k < l.tracks.size(); ++k, ++index) {
            const auto& track = l.tracks[k];
            const std::uint64_t seed = derive_seed(cfg.seed, kLocalizationStream, session * 1000 + index);
            std::mt19937_64 rng(seed);
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            std::normal_distribution<double> noise(0.0, 1.0);

            const double length = (track.to - track.from).norm();
            const Point2 u = (track.to - track.from) / length;
            const double span = length / l.speed;
            const NodeTrajectory truth({{base - lead, track.from - (l.speed * lead) * u},
                                        {base + span + lead, track.to + (l.speed * lead) * u}});

            std::vector<PositionFix> fixes;
            for (double t = base - lead + unit(rng) * l.position_log_period; t <= base + span + lead;
                 t += l.position_log_period) {
                const Point2 p = sample_trajectory(truth, t);
                fixes.push_back({t, p + l.position_noise * Point2(noise(rng), noise(rng))});
            }

            Traversal tr{static_cast<int>(s + 1), k, PositionLog(std::move(fixes), l.position_log_period), {}};
            const double phase = unit(rng) * l.capture_period;
            for (std::size_t m = 0;; ++m) {
                const double tau = phase + static_cast<double>(m) * l.capture_period;
                if (tau > span) break;
                CaptureJob j;
                j.time = base + tau;
                j.tx_slot = tr.tx_slot;
                j.tx = l.transmitters[s];
                j.rx = sample_trajectory(truth, j.time);
                if (person) j.person = person_at(cfg, *person);
                j.seed = derive_seed(seed, m + 1);
                tr.jobs.push_back(j);
            }
            out.push_back(std::move(tr));
            base += span + 2.0 * lead + 1.0;
        }
    }
    return out;
}

std::string position_id(std::size_t i) { return "P" + std::to_string(i + 1); }

}  // namespace

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream, std::uint64_t index)
{
    return splitmix64(splitmix64(root ^ splitmix64(stream)) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

// ---------------------------------------------------------------------------
// Capture simulation and per-link features.

CaptureSimulator::CaptureSimulator(const ExperimentConfig& cfg)
    : layout_(cfg.layout()),
      pulse_(gaussian_monocycle(cfg.pulse.center_freq, cfg.pulse.bandwidth, cfg.pulse.sample_period)),
      capture_(cfg.capture)
{
    search_.max_order = capture_.max_order;
}

SampledWaveform CaptureSimulator::capture(const Point2& tx, const Point2& rx, const std::optional<PersonState>& person,
                                          double time, std::uint64_t seed) const
{
    return capture_detail(tx, rx, person, time, seed).waveform;
}

CaptureSimulator::Detail CaptureSimulator::capture_detail(const Point2& tx, const Point2& rx,
                                                          const std::optional<PersonState>& person, double time,
                                                          std::uint64_t seed) const
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double jitter = (2.0 * unit(rng) - 1.0) * capture_.clock_jitter;
    const bool burst = unit(rng) < capture_.interference_rate;
    const std::uint64_t noise_seed = rng();

    auto paths = enumerate_paths(layout_, tx, rx, search_);
    const double reference_peak = std::abs(paths.front().amplitude);
    const double offset = paths.front().delay - capture_.pretrigger + jitter;
    if (person) paths = apply_person_shadowing(std::move(paths), *person);
    paths = window_paths(std::move(paths), offset, capture_.window, pulse_);

    SampledWaveform h =
        synthesize_cir(paths, pulse_, capture_.window, capture_.noise_fraction * reference_peak, noise_seed);
    if (burst) {
        // Broadband interference carrying ~50x the capture's energy.
        double sum2 = 0.0;
        for (double s : h.samples) sum2 += s * s;
        const double sd = std::sqrt(50.0 * sum2 / static_cast<double>(h.samples.size()));
        std::normal_distribution<double> interference(0.0, sd);
        for (double& s : h.samples) s += interference(rng);
    }
    h.capture_time = time;
    h.tx = tx;
    h.rx = rx;
    return Detail{std::move(h), capture_.pretrigger - jitter, burst};
}

LinkFeatureExtractor::LinkFeatureExtractor(const CaptureConfig& cfg)
    : gate_{cfg.rho, cfg.gate_energy_ratio, static_cast<std::size_t>(cfg.gate_history)}, early_window_(cfg.early_window)
{
}

std::optional<AlignedWaveform> LinkFeatureExtractor::process_aligned(const SampledWaveform& h, const Pulse& tmpl)
{
    GateResult r = quality_gate(h, tmpl, std::move(state_), gate_);
    state_ = std::move(r.state);
    if (r.decision == GateDecision::discard) return std::nullopt;
    return std::move(r.aligned);
}

std::optional<double> LinkFeatureExtractor::process(const SampledWaveform& h, const Pulse& tmpl)
{
    const auto a = process_aligned(h, tmpl);
    if (!a) return std::nullopt;
    return early_energy(*a, early_window_).value_db;
}

// ---------------------------------------------------------------------------
// Trajectories and ground truth.

NodeTrajectory build_person_trajectory(const PresenceConfig& cfg, const PresenceVariant& v)
{
    const Point2 link = cfg.rx_center - cfg.tx;
    const Point2 e = link.normalized();
    const Point2 normal(-e.y(), e.x());
    const double a = cfg.approach_offset;
    const double speed = cfg.walk_speed;

    std::vector<Waypoint> w{{0.0, cfg.rest_position}};
    auto push = [&w](double t, const Point2& p, std::size_t k) {
        if (!(t > w.back().time))
            throw InvalidParameter("crossing " + std::to_string(k + 1) + " cannot be reached in time");
        w.push_back({t, p});
    };

    for (std::size_t k = 0; k < v.crossings.size(); ++k) {
        const Crossing& c = v.crossings[k];
        const double side = k % 2 == 0 ? 1.0 : -1.0;
        const double theta = c.angle_deg * std::numbers::pi / 180.0;
        const Point2 u = std::cos(theta) * e - side * std::sin(theta) * normal;
        const double half = a / std::sin(theta);
        const Point2 p = cfg.tx + c.link_fraction * link;
        push(c.time - half / speed, p - half * u, k);
        push(c.time, p, k);
        if (c.dwell > 0.0) push(c.time + c.dwell, p, k);
        push(c.time + c.dwell + half / speed, p + half * u, k);
    }
    if (w.back().time < v.duration) w.push_back({v.duration, w.back().position});
    return NodeTrajectory(std::move(w));
}

NodeTrajectory build_swing_trajectory(const PresenceConfig& cfg, const PresenceVariant& v)
{
    const Point2 d = cfg.swing_direction.normalized() * (v.displacement / 2.0);
    std::vector<Waypoint> w;
    for (std::size_t k = 0;; ++k) {
        const double t = static_cast<double>(k) * cfg.swing_half_period;
        w.push_back({t, cfg.rx_center + (k % 2 == 0 ? -d : d)});
        if (t >= v.duration) break;
    }
    if (w.size() == 1) w.push_back({cfg.swing_half_period, cfg.rx_center + d});
    return NodeTrajectory(std::move(w));
}

std::vector<Interval> truth_intervals(const NodeTrajectory& person, const Point2& a, const Point2& b, double margin,
                                      double step)
{
    if (!(step > 0.0)) throw InvalidParameter("step must be > 0");
    std::vector<Interval> out;
    bool inside = false;
    const double t0 = person.start_time();
    const auto n = static_cast<std::size_t>(std::floor((person.end_time() - t0) / step + 1e-9));
    for (std::size_t k = 0; k <= n; ++k) {
        const double t = t0 + static_cast<double>(k) * step;
        const bool near = point_segment_distance(sample_trajectory(person, t), a, b) < margin;
        if (near && !inside) out.push_back({t, t});
        if (near) out.back().end = t;
        inside = near;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Experiments.

RunReport run_energy_gap(const ExperimentConfig& cfg, const std::filesystem::path& out_dir)
{
    if (cfg.kind != ExperimentKind::energy_gap) throw InvalidParameter("config kind is not energy_gap");
    const auto& e = cfg.energy_gap;
    const CaptureSimulator sim(cfg);
    constexpr int kAttempts = 5;

    struct Sweep {
        std::vector<double> early, late;
        std::vector<PowerDelayProfile> pdp;
    };
    auto sweep = [&](bool with_person) {
        Sweep s;
        LinkFeatureExtractor fx(cfg.capture);
        std::vector<std::vector<CaptureJob>> attempts;
        for (int a = 0; a < kAttempts; ++a) attempts.push_back(energy_gap_jobs(cfg, with_person, a));
        for (int i = 0; i < e.positions; ++i) {
            std::optional<AlignedWaveform> aligned;
            for (int a = 0; a < kAttempts && !aligned; ++a) {
                const CaptureJob& j = attempts[a][i];
                aligned = fx.process_aligned(sim.capture(j.tx, j.rx, j.person, j.time, j.seed), sim.pulse());
            }
            if (!aligned) throw NoAlignment("no usable capture at sweep position " + std::to_string(i));
            s.early.push_back(early_energy(*aligned, cfg.capture.early_window).value_db);
            s.late.push_back(to_db(window_energy(*aligned, e.late_start, e.late_end)));
            s.pdp.push_back(compute_pdp(*aligned, e.pdp_bin));
        }
        return s;
    };
    const Sweep empty = sweep(false);
    const Sweep occupied = sweep(true);

    EnergyGapResult res;
    res.min_gap_db = INFINITY;
    for (int i = 0; i < e.positions; ++i) {
        EnergyGapRow r{i * e.step, empty.early[i], occupied.early[i], empty.late[i], occupied.late[i]};
        res.min_gap_db = std::min(res.min_gap_db, r.e_empty_db - r.e_presence_db);
        res.rows.push_back(r);
    }
    const auto [emin, emax] = std::minmax_element(empty.early.begin(), empty.early.end());
    const auto [lmin, lmax] = std::minmax_element(empty.late.begin(), empty.late.end());
    res.early_range_db = *emax - *emin;
    res.late_range_db = *lmax - *lmin;

    Sink sink(out_dir);
    sink.csv("energy_gap.csv", [&](std::ostream& os) {
        os << "displacement_m,E_empty_dB,E_presence_dB,late_empty_dB,late_presence_dB\n";
        for (const auto& r : res.rows)
            os << format_number(r.displacement) << ',' << format_number(r.e_empty_db) << ','
               << format_number(r.e_presence_db) << ',' << format_number(r.late_empty_db) << ','
               << format_number(r.late_presence_db) << '\n';
    });
    auto pdp_csv = [&](const Sweep& s) {
        return [&](std::ostream& os) {
            os << "displacement_m,delay_ns,energy\n";
            for (int i = 0; i < e.positions; ++i)
                for (std::size_t m = 0; m < s.pdp[i].bins.size(); ++m)
                    os << format_number(i * e.step) << ','
                       << format_number(static_cast<double>(m) * e.pdp_bin * 1e9) << ','
                       << format_number(s.pdp[i].bins[m]) << '\n';
        };
    };
    sink.csv("pdp_empty.csv", pdp_csv(empty));
    sink.csv("pdp_presence.csv", pdp_csv(occupied));

    RunReport report;
    report.kind = cfg.kind;
    report.command = "energy-gap";
    report.energy_gap = std::move(res);
    finalize(report, cfg, sink);
    return report;
}

RunReport run_presence(const ExperimentConfig& cfg, const std::filesystem::path& out_dir)
{
    if (cfg.kind != ExperimentKind::presence) throw InvalidParameter("config kind is not presence");
    const auto& p = cfg.presence;
    p.detector.validate();
    const CaptureSimulator sim(cfg);
    Sink sink(out_dir);

    RunReport report;
    report.kind = cfg.kind;
    report.command = "presence";

    for (std::size_t vi = 0; vi < p.variants.size(); ++vi) {
        const auto& v = p.variants[vi];
        PresenceVariantResult res;
        res.name = v.name;
        res.displacement = v.displacement;
        res.truth = truth_intervals(build_person_trajectory(p, v), p.tx, p.rx_center, p.truth_margin);

        LinkFeatureExtractor fx(cfg.capture);
        DetectorState state;
        std::vector<TimedFlag> flags;
        for (const CaptureJob& j : presence_jobs(cfg, vi)) {
            ++res.captures;
            const auto e_db = fx.process(sim.capture(j.tx, j.rx, j.person, j.time, j.seed), sim.pulse());
            if (!e_db || !std::isfinite(*e_db)) continue;
            ++res.kept;
            DetectorOutput o = detector_update(std::move(state), p.detector, *e_db);
            state = std::move(o.state);
            res.log.push_back({j.time, *e_db, o.event, o.presence});
            flags.push_back({j.time, o.presence});
        }
        res.detected = episodes(flags, p.episode_gap);
        res.score = score_episodes(res.detected, res.truth);

        sink.csv("presence_" + v.name + "_log.csv", [&](std::ostream& os) { write_detection_log(os, res.log); });
        sink.csv("presence_" + v.name + "_episodes.csv", [&](std::ostream& os) {
            os << "type,start_s,end_s,matched\n";
            auto emit = [&os](const char* type, const std::vector<Interval>& xs, const std::vector<Interval>& other) {
                for (const auto& x : xs) {
                    const bool matched =
                        std::any_of(other.begin(), other.end(), [&x](const Interval& o) { return x.overlaps(o); });
                    os << type << ',' << format_number(x.start) << ',' << format_number(x.end) << ','
                       << (matched ? 1 : 0) << '\n';
                }
            };
            emit("truth", res.truth, res.detected);
            emit("detected", res.detected, res.truth);
        });
        report.presence.push_back(std::move(res));
    }

    sink.csv("presence_summary.csv", [&](std::ostream& os) {
        os << "variant,displacement_m,truths,hits,misses,false_alarms,captures,kept\n";
        for (const auto& r : report.presence)
            os << r.name << ',' << format_number(r.displacement) << ',' << r.score.truths << ',' << r.score.hits << ','
               << r.score.misses << ',' << r.score.false_alarms << ',' << r.captures << ',' << r.kept << '\n';
    });
    finalize(report, cfg, sink);
    return report;
}

RefSetPtr build_reference_set(const ExperimentConfig& cfg)
{
    const auto& l = cfg.localization;
    std::vector<ReferenceReceiverSet> parts;
    for (const auto& t : l.tracks) {
        const double span = (t.to - t.from).norm() / l.speed;
        parts.push_back(generate_reference_receivers(NodeTrajectory({{0.0, t.from}, {span, t.to}}), l.max_spacing));
    }
    return std::make_shared<const ReferenceReceiverSet>(ReferenceReceiverSet::concat(parts));
}

SessionOutcome run_localization_session(const ExperimentConfig& cfg, const CaptureSimulator& sim, const RefSetPtr& refs,
                                        std::size_t session, const std::optional<Point2>& person)
{
    const auto& l = cfg.localization;
    SessionOutcome out;
    std::vector<MeasurementRecord> records;
    for (Traversal& tr : localization_session(cfg, session, person)) {
        LinkFeatureExtractor fx(cfg.capture);
        for (const CaptureJob& j : tr.jobs) {
            ++out.captures;
            const auto e_db = fx.process(sim.capture(j.tx, j.rx, j.person, j.time, j.seed), sim.pulse());
            const bool kept = e_db && std::isfinite(*e_db);
            const auto mobile = try_interpolate_position(tr.log, j.time);
            out.features.push_back({j.time, j.tx_slot, mobile.value_or(Point2(NAN, NAN)), kept ? *e_db : NAN, kept});
            if (!kept) continue;
            ++out.kept;
            if (!mobile) {
                ++out.unlogged;
                continue;
            }
            records.push_back({j.time, j.tx_slot, *mobile, *e_db});
        }
        out.log_names.push_back("tx" + std::to_string(tr.tx_slot) + "_" + l.tracks[tr.track].name);
        out.logs.push_back(std::move(tr.log));
    }
    out.stats = bin_and_median(records, refs, static_cast<int>(l.transmitters.size()),
                               AssociationOptions{l.association_cutoff});
    return out;
}

RunReport run_localization(const ExperimentConfig& cfg, const std::filesystem::path& out_dir)
{
    if (cfg.kind != ExperimentKind::localization) throw InvalidParameter("config kind is not localization");
    const auto& l = cfg.localization;
    l.rti.validate();
    const CaptureSimulator sim(cfg);
    Sink sink(out_dir);

    const RefSetPtr refs = build_reference_set(cfg);
    std::vector<LinkGeometry> links;
    for (const auto& tx : l.transmitters)
        for (const auto& r : refs->coords()) links.emplace_back(tx, r, l.rti.excess);
    const VoxelGrid grid = VoxelGrid::covering(l.monitored_area, l.rti.voxel_size);
    const WeightMatrix weights = build_weights(links, grid);
    const ImageSolver solver(weights, grid, l.rti);

    LocalizationResult res;
    res.references = refs->size();
    res.links = links.size();

    auto run_session = [&](std::size_t session, const std::string& name, const std::optional<Point2>& person) {
        SessionOutcome o = run_localization_session(cfg, sim, refs, session, person);
        res.captures += o.captures;
        res.kept += o.kept;
        res.unlogged += o.unlogged;
        res.binned += o.stats.total_count();
        res.dropped += o.stats.dropped_by_cutoff;
        if (session == 0)
            for (std::size_t k = 0; k < o.logs.size(); ++k)
                sink.csv("position_logs/" + name + "_" + o.log_names[k] + ".csv",
                         [&](std::ostream& os) { write_position_log_csv(os, o.logs[k]); });
        sink.csv("features_" + name + ".csv", [&](std::ostream& os) { write_feature_csv(os, o.features); });
        sink.csv("link_stats_" + name + ".csv", [&](std::ostream& os) { write_link_stats_csv(os, o.stats); });
        return std::move(o.stats);
    };

    const LinkStats cal = run_session(0, "calibration", std::nullopt);
    double sum = 0.0;
    for (std::size_t i = 0; i < l.standing_positions.size(); ++i) {
        const std::string id = position_id(i);
        const Point2 truth = l.standing_positions[i];
        const LinkStats occ = run_session(i + 1, id, truth);
        const std::vector<double> y = delta_median(cal, occ);
        const Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
        const ImageVector image{solver.solve(yv), grid};
        const Localization loc = localize(image);
        const double err = localization_error(loc.position, truth);
        res.rows.push_back({id, truth, loc.position, err});
        res.peaks.push_back(loc.peak);
        sum += err;

        sink.csv("y_" + id + ".csv", [&](std::ostream& os) { write_y_vector_csv(os, occ, y); });
        sink.csv("image_" + id + ".csv", [&](std::ostream& os) { write_image_csv(os, image); });
        sink.image_pgm("image_" + id + ".pgm", image);
    }
    res.mean_error = res.rows.empty() ? 0.0 : sum / static_cast<double>(res.rows.size());

    sink.csv("references.csv", [&](std::ostream& os) {
        os << "ref_index,x,y\n";
        for (std::size_t r = 0; r < refs->size(); ++r)
            os << r << ',' << format_number(refs->coords()[r].x()) << ',' << format_number(refs->coords()[r].y())
               << '\n';
    });
    sink.csv("localization_errors.csv", [&](std::ostream& os) { write_localization_report(os, res.rows); });

    RunReport report;
    report.kind = cfg.kind;
    report.command = "localize";
    report.localization = std::move(res);
    finalize(report, cfg, sink);
    return report;
}

RunReport run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir)
{
    switch (cfg.kind) {
    case ExperimentKind::energy_gap: return run_energy_gap(cfg, out_dir);
    case ExperimentKind::presence: return run_presence(cfg, out_dir);
    case ExperimentKind::localization: return run_localization(cfg, out_dir);
    }
    throw InvalidParameter("unknown experiment kind");
}

RunReport run_simulate(const ExperimentConfig& cfg, const std::filesystem::path& out_dir)
{
    if (out_dir.empty()) throw InvalidParameter("simulate needs an output directory");
    const CaptureSimulator sim(cfg);

    // Capture set per kind: both energy-gap sweeps, the first presence variant,
    // or the calibration pass of the first localization transmitter.
    std::vector<CaptureJob> jobs;
    switch (cfg.kind) {
    case ExperimentKind::energy_gap:
        jobs = energy_gap_jobs(cfg, false, 0);
        for (auto& j : energy_gap_jobs(cfg, true, 0)) {
            j.tx_slot = 2;
            j.time += static_cast<double>(cfg.energy_gap.positions);
            jobs.push_back(j);
        }
        break;
    case ExperimentKind::presence:
        if (!cfg.presence.variants.empty()) jobs = presence_jobs(cfg, 0);
        break;
    case ExperimentKind::localization:
        for (const Traversal& tr : localization_session(cfg, 0, std::nullopt))
            if (tr.tx_slot == 1) jobs.insert(jobs.end(), tr.jobs.begin(), tr.jobs.end());
        break;
    }

    std::vector<SampledWaveform> traces;
    traces.reserve(jobs.size());
    for (const CaptureJob& j : jobs) traces.push_back(sim.capture(j.tx, j.rx, j.person, j.time, j.seed));

    Sink sink(out_dir);
    sink.traces("traces.bin", traces);
    const auto loaded = read_trace_file(out_dir / "traces.bin");

    std::map<int, LinkFeatureExtractor> extractors;
    std::vector<FeatureRecord> features;
    for (std::size_t i = 0; i < loaded.size(); ++i) {
        const int slot = jobs[i].tx_slot;
        auto it = extractors.try_emplace(slot, cfg.capture).first;
        const auto e_db = it->second.process(loaded[i], sim.pulse());
        const bool kept = e_db && std::isfinite(*e_db);
        features.push_back({loaded[i].capture_time, slot, loaded[i].rx, kept ? *e_db : NAN, kept});
    }
    sink.csv("features.csv", [&](std::ostream& os) { write_feature_csv(os, features); });

    RunReport report;
    report.kind = cfg.kind;
    report.command = "simulate";
    finalize(report, cfg, sink);
    return report;
}

std::string report_json(const RunReport& r)
{
    using nlohmann::json;
    auto num = [](double v) { return std::isfinite(v) ? json(v) : json(format_number(v)); };
    json j;
    j["command"] = r.command;
    j["kind"] = to_string(r.kind);
    j["seed"] = r.seed;
    j["overrides"] = r.overrides;

    if (r.energy_gap) {
        json e;
        e["min_gap_db"] = num(r.energy_gap->min_gap_db);
        e["early_range_db"] = num(r.energy_gap->early_range_db);
        e["late_range_db"] = num(r.energy_gap->late_range_db);
        json rows = json::array();
        for (const auto& row : r.energy_gap->rows)
            rows.push_back({{"displacement_m", num(row.displacement)},
                            {"E_empty_dB", num(row.e_empty_db)},
                            {"E_presence_dB", num(row.e_presence_db)},
                            {"late_empty_dB", num(row.late_empty_db)},
                            {"late_presence_dB", num(row.late_presence_db)}});
        e["rows"] = rows;
        j["energy_gap"] = e;
    }
    if (!r.presence.empty()) {
        json vs = json::array();
        for (const auto& v : r.presence) {
            json intervals = json::array();
            for (const auto& x : v.detected) intervals.push_back({num(x.start), num(x.end)});
            json truth = json::array();
            for (const auto& x : v.truth) truth.push_back({num(x.start), num(x.end)});
            vs.push_back({{"name", v.name},
                          {"displacement_m", num(v.displacement)},
                          {"captures", v.captures},
                          {"kept", v.kept},
                          {"truths", v.score.truths},
                          {"hits", v.score.hits},
                          {"misses", v.score.misses},
                          {"false_alarms", v.score.false_alarms},
                          {"truth_intervals", truth},
                          {"episodes", intervals}});
        }
        j["presence"] = vs;
    }
    if (r.localization) {
        const auto& l = *r.localization;
        json rows = json::array();
        for (std::size_t i = 0; i < l.rows.size(); ++i)
            rows.push_back({{"position_id", l.rows[i].position_id},
                            {"true", {num(l.rows[i].truth.x()), num(l.rows[i].truth.y())}},
                            {"estimate", {num(l.rows[i].estimate.x()), num(l.rows[i].estimate.y())}},
                            {"error_m", num(l.rows[i].error)},
                            {"peak", num(l.peaks[i])}});
        j["localization"] = {{"references", l.references}, {"links", l.links},       {"captures", l.captures},
                             {"kept", l.kept},             {"unlogged", l.unlogged}, {"binned", l.binned},     {"dropped_by_cutoff", l.dropped},
                             {"mean_error_m", num(l.mean_error)}, {"positions", rows}};
    }
    json files = json::array();
    for (const auto& a : r.artifacts)
        if (a != "report.json") files.push_back(a.generic_string());
    j["artifacts"] = files;
    return j.dump(2) + "\n";
}

}  // namespace uwbdfl
