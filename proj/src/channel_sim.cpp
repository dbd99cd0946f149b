#include "uwbdfl/channel_sim.hpp"

#include "uwbdfl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace uwbdfl {

namespace {

constexpr int kSincHalfWidth = 16;

double sinc(double x)
{
    if (std::abs(x) < 1e-12) return 1.0;
    const double px = std::numbers::pi * x;
    return std::sin(px) / px;
}

double lanczos(double x)
{
    if (std::abs(x) >= kSincHalfWidth) return 0.0;
    return sinc(x) * sinc(x / kSincHalfWidth);
}

double db_to_amplitude(double db) { return std::pow(10.0, -db / 20.0); }

bool fits_in_capture(double delay, const Pulse& pulse, std::ptrdiff_t n_out)
{
    const double pos = delay / pulse.sample_period;
    return pos >= -1e-9 &&
           std::ceil(pos - 1e-9) + static_cast<double>(pulse.samples.size()) <= static_cast<double>(n_out);
}

std::ptrdiff_t capture_samples(double duration, double sample_period)
{
    return static_cast<std::ptrdiff_t>(std::llround(duration / sample_period));
}

struct ImageSearch {
    const std::vector<Wall>& walls;
    const Point2& tx;
    const Point2& rx;
    PathSearchOptions opts;
    double max_length;
    std::vector<int> sequence;
    std::vector<Point2> images;
    std::vector<PathComponent> out;

    double transmission_factor(const Point2& p, const Point2& q, int skip_a, int skip_b) const
    {
        double factor = 1.0;
        for (int w = 0; w < static_cast<int>(walls.size()); ++w) {
            if (w == skip_a || w == skip_b) continue;
            if (segments_cross(p, q, walls[w].segment)) factor *= db_to_amplitude(walls[w].loss_db);
        }
        return factor;
    }

    void try_emit()
    {
        const std::size_t k = sequence.size();
        const double length = (images.back() - rx).norm();
        if (max_length > 0.0 && length > max_length) return;

        // Back-trace reflection points from the receiver toward the source.
        std::vector<Point2> points(k + 2);
        points[0] = tx;
        points[k + 1] = rx;
        Point2 target = rx;
        for (std::size_t i = k; i-- > 0;) {
            const Segment& wall = walls[sequence[i]].segment;
            const auto hit = intersect_lines(images[i], target, wall);
            if (!hit) return;
            if (hit->t <= 1e-12 || hit->t >= 1.0 - 1e-12) return;
            if (hit->u < 0.0 || hit->u > 1.0) return;
            target = images[i] + hit->t * (target - images[i]);
            points[i + 1] = target;
        }

        double amplitude = 1.0 / length;
        for (std::size_t leg = 0; leg + 1 < points.size(); ++leg) {
            const int wall_a = leg == 0 ? -1 : sequence[leg - 1];
            const int wall_b = leg == k ? -1 : sequence[leg];
            amplitude *= transmission_factor(points[leg], points[leg + 1], wall_a, wall_b);
        }
        for (int w : sequence) amplitude *= walls[w].reflection;

        PathComponent path;
        path.amplitude = amplitude;
        path.delay = length / kSpeedOfLight;
        path.order = static_cast<int>(k);
        path.polyline = std::move(points);
        out.push_back(std::move(path));
    }

    void recurse()
    {
        if (static_cast<int>(sequence.size()) >= opts.max_order) return;
        const Point2 source = images.empty() ? tx : images.back();
        for (int w = 0; w < static_cast<int>(walls.size()); ++w) {
            if (!sequence.empty() && sequence.back() == w) continue;
            if (walls[w].reflection == 0.0) continue;
            sequence.push_back(w);
            images.push_back(reflect_across(source, walls[w].segment));
            try_emit();
            recurse();
            images.pop_back();
            sequence.pop_back();
        }
    }
};

}  // namespace

SceneLayout::SceneLayout(std::vector<Wall> walls, Bounds bounds)
    : walls_(std::move(walls)), bounds_(bounds)
{
    if (!(bounds_.width() > 0.0) || !(bounds_.height() > 0.0))
        throw InvalidParameter("scene bounds must have positive width and height");
    for (std::size_t i = 0; i < walls_.size(); ++i) {
        const Wall& w = walls_[i];
        if (!(w.loss_db >= 0.0))
            throw InvalidParameter("wall " + std::to_string(i) + ": transmission loss must be >= 0 dB");
        if (!(w.reflection >= 0.0 && w.reflection <= 1.0))
            throw InvalidParameter("wall " + std::to_string(i) + ": reflection coefficient must be in [0, 1]");
        if (w.segment.length() <= 0.0)
            throw InvalidParameter("wall " + std::to_string(i) + ": zero-length segment");
    }
}

double PathComponent::length() const
{
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < polyline.size(); ++i) total += (polyline[i + 1] - polyline[i]).norm();
    return total;
}

Point2 PathComponent::arrival_direction() const
{
    const std::size_t n = polyline.size();
    return (polyline[n - 2] - polyline[n - 1]).normalized();
}

double Pulse::energy() const
{
    double e = 0.0;
    for (double s : samples) e += s * s;
    return e * sample_period;
}

double Pulse::peak_offset() const
{
    std::size_t best = 0;
    for (std::size_t i = 1; i < samples.size(); ++i)
        if (std::abs(samples[i]) > std::abs(samples[best])) best = i;
    return static_cast<double>(best) * sample_period;
}

NodeTrajectory::NodeTrajectory(std::vector<Waypoint> waypoints) : waypoints_(std::move(waypoints))
{
    if (waypoints_.empty()) throw InvalidParameter("trajectory needs at least one waypoint");
    for (std::size_t i = 0; i < waypoints_.size(); ++i) {
        const Waypoint& w = waypoints_[i];
        if (!std::isfinite(w.time) || !w.position.allFinite())
            throw InvalidParameter("trajectory waypoint " + std::to_string(i) + " is not finite");
        if (i > 0 && !(w.time > waypoints_[i - 1].time))
            throw InvalidParameter("trajectory timestamps must be strictly increasing");
    }
}

double NodeTrajectory::path_length() const
{
    double total = 0.0;
    for (std::size_t i = 1; i < waypoints_.size(); ++i)
        total += (waypoints_[i].position - waypoints_[i - 1].position).norm();
    return total;
}

double NodeTrajectory::nominal_speed() const
{
    const double span = end_time() - start_time();
    return span > 0.0 ? path_length() / span : 0.0;
}

Pulse gaussian_monocycle(double center_freq, double bandwidth, double sample_period)
{
    if (!(sample_period > 0.0)) throw InvalidParameter("sample_period must be > 0");
    if (!(bandwidth > 0.0)) throw InvalidParameter("bandwidth must be > 0");
    const double f_lo = center_freq - bandwidth / 2.0;
    const double f_hi = center_freq + bandwidth / 2.0;
    if (!(f_lo > 0.0)) throw InvalidParameter("center_freq - bandwidth/2 must be > 0");
    if (1.0 / (2.0 * sample_period) < f_hi)
        throw InvalidParameter("sample rate below Nyquist for the requested band");

    // |S(f)|^2 is Gaussian about the carrier with std 1/(2*sqrt(2)*pi*sigma_t).
    // Half the band at 2.6 of those stds leaves ~0.9% of the energy outside.
    constexpr double kBandStds = 2.6;
    const double sigma_t = 2.0 * kBandStds / (2.0 * std::numbers::sqrt2 * std::numbers::pi * bandwidth);
    const double half_span = 4.5 * sigma_t;
    const auto half_n = static_cast<std::size_t>(std::ceil(half_span / sample_period));
    const std::size_t n = 2 * half_n + 1;

    Pulse pulse;
    pulse.sample_period = sample_period;
    pulse.f_lo = f_lo;
    pulse.f_hi = f_hi;
    pulse.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = (static_cast<double>(i) - static_cast<double>(half_n)) * sample_period;
        pulse.samples[i] = std::exp(-t * t / (2.0 * sigma_t * sigma_t)) *
                           std::cos(2.0 * std::numbers::pi * center_freq * t);
    }
    double mean = 0.0;
    for (double s : pulse.samples) mean += s;
    mean /= static_cast<double>(n);
    double peak = 0.0;
    for (double& s : pulse.samples) {
        s -= mean;
        peak = std::max(peak, std::abs(s));
    }
    for (double& s : pulse.samples) s /= peak;
    return pulse;
}

std::vector<PathComponent> enumerate_paths(const SceneLayout& layout, const Point2& tx,
                                           const Point2& rx, int max_order)
{
    PathSearchOptions opts;
    opts.max_order = max_order;
    return enumerate_paths(layout, tx, rx, opts);
}

std::vector<PathComponent> enumerate_paths(const SceneLayout& layout, const Point2& tx,
                                           const Point2& rx, const PathSearchOptions& opts)
{
    if ((tx - rx).norm() == 0.0) throw InvalidParameter("tx and rx must differ");
    if (opts.max_order < 0) throw InvalidParameter("max_order must be >= 0");

    const double direct_length = (tx - rx).norm();
    ImageSearch search{layout.walls(), tx, rx, opts,
                       opts.max_excess_length > 0.0 ? direct_length + opts.max_excess_length : 0.0,
                       {}, {}, {}};

    PathComponent direct;
    direct.amplitude = search.transmission_factor(tx, rx, -1, -1) / direct_length;
    direct.delay = direct_length / kSpeedOfLight;
    direct.order = 0;
    direct.polyline = {tx, rx};
    search.out.push_back(std::move(direct));

    search.recurse();

    std::stable_sort(search.out.begin(), search.out.end(),
                     [](const PathComponent& a, const PathComponent& b) { return a.delay < b.delay; });
    return std::move(search.out);
}

std::vector<PathComponent> apply_person_shadowing(std::vector<PathComponent> paths,
                                                  const PersonState& person)
{
    if (!person.present) return paths;
    if (!(person.radius > 0.0)) throw InvalidParameter("person radius must be > 0");
    if (!(person.shadow_loss_db >= 0.0)) throw InvalidParameter("person shadow loss must be >= 0");
    const double factor = db_to_amplitude(person.shadow_loss_db);
    for (PathComponent& path : paths) {
        for (std::size_t i = 0; i + 1 < path.polyline.size(); ++i) {
            if (point_segment_distance(person.position, path.polyline[i], path.polyline[i + 1]) < person.radius) {
                path.amplitude *= factor;
                break;
            }
        }
    }
    return paths;
}

double SampledWaveform::energy() const
{
    double e = 0.0;
    for (double h : samples) e += h * h;
    return e * sample_period;
}

SampledWaveform synthesize_cir(const std::vector<PathComponent>& paths, const Pulse& pulse,
                               double duration, double noise_std, std::uint64_t seed)
{
    const double ts = pulse.sample_period;
    if (!(ts > 0.0)) throw InvalidParameter("pulse sample period must be > 0");
    if (!(noise_std >= 0.0)) throw InvalidParameter("noise_std must be >= 0");
    const auto n_out = capture_samples(duration, ts);
    if (n_out <= 0) throw InvalidParameter("duration must be positive");

    const auto n_pulse = static_cast<std::ptrdiff_t>(pulse.samples.size());
    SampledWaveform h;
    h.sample_period = ts;
    h.samples.assign(static_cast<std::size_t>(n_out), 0.0);

    std::vector<double> kernel(2 * kSincHalfWidth);
    for (const PathComponent& path : paths) {
        const double pos = path.delay / ts;
        if (!fits_in_capture(path.delay, pulse, n_out))
            throw DurationTooShort("path at " + std::to_string(path.delay * 1e9) +
                                   " ns does not fit in a capture of " + std::to_string(duration * 1e9) + " ns");

        auto base = static_cast<std::ptrdiff_t>(std::floor(pos));
        double frac = pos - static_cast<double>(base);
        if (frac > 1.0 - 1e-9) {
            ++base;
            frac = 0.0;
        }

        if (frac < 1e-9) {
            for (std::ptrdiff_t n = 0; n < n_pulse; ++n) h.samples[base + n] += path.amplitude * pulse.samples[n];
            continue;
        }

        // kernel[d + W - 1] = L(d - frac) for d in [-W + 1, W]
        for (int d = -kSincHalfWidth + 1; d <= kSincHalfWidth; ++d)
            kernel[d + kSincHalfWidth - 1] = lanczos(static_cast<double>(d) - frac);

        for (std::ptrdiff_t m = -kSincHalfWidth + 1; m < n_pulse + kSincHalfWidth; ++m) {
            const std::ptrdiff_t k = base + m;
            if (k < 0 || k >= n_out) continue;
            const std::ptrdiff_t n_lo = std::max<std::ptrdiff_t>(0, m - kSincHalfWidth);
            const std::ptrdiff_t n_hi = std::min<std::ptrdiff_t>(n_pulse - 1, m + kSincHalfWidth - 1);
            double acc = 0.0;
            for (std::ptrdiff_t n = n_lo; n <= n_hi; ++n)
                acc += pulse.samples[n] * kernel[m - n + kSincHalfWidth - 1];
            h.samples[k] += path.amplitude * acc;
        }
    }

    if (noise_std > 0.0) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> noise(0.0, noise_std);
        for (double& s : h.samples) s += noise(rng);
    }
    return h;
}

Point2 sample_trajectory(const NodeTrajectory& traj, double t)
{
    const auto& wp = traj.waypoints();
    if (t < wp.front().time || t > wp.back().time)
        throw OutOfRange("time " + std::to_string(t) + " s outside trajectory span");
    const auto upper = std::upper_bound(wp.begin(), wp.end(), t,
                                        [](double v, const Waypoint& w) { return v < w.time; });
    if (upper == wp.end()) return wp.back().position;
    const Waypoint& b = *upper;
    const Waypoint& a = *(upper - 1);
    const double s = (t - a.time) / (b.time - a.time);
    return a.position + s * (b.position - a.position);
}

std::vector<PathComponent> window_paths(std::vector<PathComponent> paths, double offset, double window,
                                        const Pulse& pulse)
{
    const auto n_out = capture_samples(window, pulse.sample_period);
    std::vector<PathComponent> kept;
    kept.reserve(paths.size());
    for (PathComponent& p : paths) {
        p.delay -= offset;
        if (fits_in_capture(p.delay, pulse, n_out)) kept.push_back(std::move(p));
    }
    return kept;
}

}  // namespace uwbdfl
