#include "uwbdfl/channel_sim.hpp"
#include "uwbdfl/cir_processing.hpp"
#include "uwbdfl/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

using namespace uwbdfl;

namespace {

constexpr double kTs = 15.89e-12;

Pulse default_pulse() { return gaussian_monocycle(4.5e9, 3.0e9, kTs); }

SceneLayout empty_layout() { return SceneLayout({}, Bounds{-10, -10, 10, 10}); }

Wall make_wall(double x0, double y0, double x1, double y1, double loss, double refl)
{
    return Wall{Segment{Point2(x0, y0), Point2(x1, y1)}, loss, refl};
}

// Energy spectral density of the sampled pulse at frequency f.
double spectral_power(const Pulse& p, double f)
{
    std::complex<double> acc = 0.0;
    for (std::size_t n = 0; n < p.samples.size(); ++n)
        acc += p.samples[n] * std::polar(1.0, -2.0 * std::numbers::pi * f * static_cast<double>(n) * p.sample_period);
    return std::norm(acc);
}

double angle_between(const Point2& a, const Point2& b)
{
    return std::acos(std::clamp(a.normalized().dot(b.normalized()), -1.0, 1.0));
}

double max_pairwise_angle(const std::vector<Point2>& dirs)
{
    double best = 0.0;
    for (std::size_t i = 0; i < dirs.size(); ++i)
        for (std::size_t j = i + 1; j < dirs.size(); ++j) best = std::max(best, angle_between(dirs[i], dirs[j]));
    return best;
}

}  // namespace

TEST_CASE("pulse: energy concentrated in one nanosecond")
{
    const Pulse p = default_pulse();
    const auto window = static_cast<std::size_t>(std::floor(1e-9 / kTs));
    double total = 0.0;
    for (double s : p.samples) total += s * s;
    double best = 0.0;
    for (std::size_t start = 0; start + window <= p.samples.size(); ++start) {
        double e = 0.0;
        for (std::size_t k = start; k < start + window; ++k) e += p.samples[k] * p.samples[k];
        best = std::max(best, e);
    }
    CHECK(best / total >= 0.90);
}

TEST_CASE("pulse: zero mean, unit peak, autocorrelation peak equals energy")
{
    const Pulse p = default_pulse();
    double sum = 0.0, peak = 0.0, self = 0.0;
    for (double s : p.samples) {
        sum += s;
        peak = std::max(peak, std::abs(s));
        self += s * s;
    }
    CHECK(std::abs(sum) < 1e-9);
    CHECK(peak == doctest::Approx(1.0));
    CHECK(self * kTs == doctest::Approx(p.energy()).epsilon(1e-12));
    // Every non-zero lag has a smaller autocorrelation.
    for (std::size_t lag = 1; lag < p.samples.size(); ++lag) {
        double r = 0.0;
        for (std::size_t k = 0; k + lag < p.samples.size(); ++k) r += p.samples[k] * p.samples[k + lag];
        CHECK(r < self);
    }
}

TEST_CASE("pulse: less than 1% of spectral energy outside the passband")
{
    const Pulse p = default_pulse();
    CHECK(p.f_lo == doctest::Approx(3.0e9));
    CHECK(p.f_hi == doctest::Approx(6.0e9));
    const double nyquist = 0.5 / kTs;
    const int n = 6000;
    double in_band = 0.0, total = 0.0;
    for (int i = 0; i < n; ++i) {
        const double f = (i + 0.5) * nyquist / n;
        const double e = spectral_power(p, f);
        total += e;
        if (f >= p.f_lo && f <= p.f_hi) in_band += e;
    }
    CHECK(1.0 - in_band / total < 0.01);
}

TEST_CASE("pulse: invalid parameters are rejected")
{
    CHECK_THROWS_AS(gaussian_monocycle(4.5e9, 3e9, 0.0), InvalidParameter);
    CHECK_THROWS_AS(gaussian_monocycle(4.5e9, 0.0, kTs), InvalidParameter);
    CHECK_THROWS_AS(gaussian_monocycle(1.0e9, 3e9, kTs), InvalidParameter);
    // 1/(2 Ts) = 5 GHz is below the 6 GHz band edge.
    CHECK_THROWS_AS(gaussian_monocycle(4.5e9, 3e9, 100e-12), InvalidParameter);
}

TEST_CASE("paths: empty layout gives only the direct path")
{
    const auto paths = enumerate_paths(empty_layout(), Point2(0, 0), Point2(3, 0), 0);
    REQUIRE(paths.size() == 1);
    CHECK(paths[0].delay == doctest::Approx(10.007e-9).epsilon(1e-4));
    CHECK(paths[0].delay == doctest::Approx(3.0 / kSpeedOfLight).epsilon(1e-14));
    CHECK(paths[0].order == 0);
    CHECK(paths[0].polyline.size() == 2);
    CHECK(paths[0].amplitude == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("paths: a crossed wall scales the direct path by its loss")
{
    const SceneLayout layout({make_wall(1.5, -1, 1.5, 1, 5.0, 0.0)}, Bounds{-5, -5, 5, 5});
    const auto paths = enumerate_paths(layout, Point2(0, 0), Point2(3, 0), 3);
    REQUIRE(paths.size() == 1);
    CHECK(paths[0].amplitude == doctest::Approx(std::pow(10.0, -5.0 / 20.0) / 3.0));
}

TEST_CASE("paths: rectangular room first order matches image sources")
{
    const double w = 6.0, h = 4.0, refl = 0.5;
    const SceneLayout room({make_wall(0, 0, w, 0, 0, refl), make_wall(w, 0, w, h, 0, refl),
                            make_wall(w, h, 0, h, 0, refl), make_wall(0, h, 0, 0, 0, refl)},
                           Bounds{0, 0, w, h});
    const Point2 tx(1.0, 1.5), rx(4.5, 2.5);
    const auto paths = enumerate_paths(room, tx, rx, 1);
    REQUIRE(paths.size() == 5);

    // Independent image sources: mirror tx across x = 0, x = w, y = 0, y = h.
    std::vector<double> expected{(rx - tx).norm(),
                                 (rx - Point2(-tx.x(), tx.y())).norm(),
                                 (rx - Point2(2 * w - tx.x(), tx.y())).norm(),
                                 (rx - Point2(tx.x(), -tx.y())).norm(),
                                 (rx - Point2(tx.x(), 2 * h - tx.y())).norm()};
    std::sort(expected.begin(), expected.end());
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(paths[i].delay == doctest::Approx(expected[i] / kSpeedOfLight).epsilon(1e-12));
        const double amp = (paths[i].order == 0 ? 1.0 : refl) / expected[i];
        CHECK(paths[i].amplitude == doctest::Approx(amp).epsilon(1e-12));
        CHECK(paths[i].length() == doctest::Approx(expected[i]).epsilon(1e-12));
    }
    CHECK(paths[0].order == 0);
}

TEST_CASE("paths: sorted by delay, never faster than the direct path")
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.5, 5.5);
    const SceneLayout room({make_wall(0, 0, 6, 0, 3, 0.6), make_wall(6, 0, 6, 6, 3, 0.6), make_wall(6, 6, 0, 6, 3, 0.6),
                            make_wall(0, 6, 0, 0, 3, 0.6), make_wall(2, 2, 3, 3.5, 1, 0.5)},
                           Bounds{0, 0, 6, 6});
    for (int trial = 0; trial < 20; ++trial) {
        const Point2 tx(u(rng), u(rng)), rx(u(rng), u(rng));
        const auto paths = enumerate_paths(room, tx, rx, 3);
        const double direct = (tx - rx).norm() / kSpeedOfLight;
        int direct_count = 0;
        for (std::size_t i = 0; i < paths.size(); ++i) {
            CHECK(paths[i].delay >= direct - 1e-18);
            if (i > 0) CHECK(paths[i].delay >= paths[i - 1].delay);
            if (paths[i].order == 0) {
                ++direct_count;
                CHECK(paths[i].polyline.size() == 2);
            }
            CHECK(paths[i].polyline.size() == static_cast<std::size_t>(paths[i].order) + 2);
        }
        CHECK(direct_count == 1);
        CHECK(paths.front().order == 0);
    }
}

TEST_CASE("shadowing: absent person is the identity")
{
    const auto paths = enumerate_paths(empty_layout(), Point2(0, 0), Point2(3, 0), 0);
    PersonState person;
    person.position = Point2(1.5, 0);
    person.present = false;
    const auto out = apply_person_shadowing(paths, person);
    REQUIRE(out.size() == paths.size());
    CHECK(out[0].amplitude == paths[0].amplitude);
}

TEST_CASE("shadowing: person on the link line attenuates the direct path")
{
    const auto paths = enumerate_paths(empty_layout(), Point2(0, 0), Point2(3, 0), 0);
    const PersonState person{Point2(1.5, 0), 0.15, 10.0, true};
    const auto out = apply_person_shadowing(paths, person);
    CHECK(out[0].amplitude == doctest::Approx(paths[0].amplitude * std::pow(10.0, -0.5)));
    CHECK(out[0].delay == paths[0].delay);
}

TEST_CASE("shadowing: person off the link only hits paths passing through the disc")
{
    const SceneLayout layout({make_wall(-2, 2, 5, 2, 0, 0.7)}, Bounds{-5, -5, 8, 8});
    const Point2 tx(0, 0), rx(3, 0);
    const PersonState person{Point2(1.0, 1.0), 0.15, 10.0, true};
    const auto paths = enumerate_paths(layout, tx, rx, 1);
    REQUIRE(paths.size() == 2);
    const auto out = apply_person_shadowing(paths, person);

    // Oracle: projection onto each leg computed from scratch.
    auto near = [&](const PathComponent& p) {
        for (std::size_t k = 0; k + 1 < p.polyline.size(); ++k) {
            const Point2 a = p.polyline[k], b = p.polyline[k + 1];
            const double t = std::clamp((person.position - a).dot(b - a) / (b - a).squaredNorm(), 0.0, 1.0);
            if ((person.position - (a + t * (b - a))).norm() < person.radius) return true;
        }
        return false;
    };
    CHECK_FALSE(near(paths[0]));
    CHECK(out[0].amplitude == paths[0].amplitude);
    // Reflection point (1.5, 2): the tx leg passes (1, 4/3), 0.28 m from the
    // person; move the person onto it.
    const PersonState on_leg{Point2(1.0, 4.0 / 3.0), 0.15, 10.0, true};
    const auto hit = apply_person_shadowing(paths, on_leg);
    CHECK(hit[0].amplitude == paths[0].amplitude);
    CHECK(hit[1].amplitude == doctest::Approx(paths[1].amplitude * std::pow(10.0, -0.5)));
    CHECK(near(paths[1]) == (out[1].amplitude != paths[1].amplitude));
}

TEST_CASE("shadowing never increases any amplitude magnitude")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.3, 5.7);
    const SceneLayout room({make_wall(0, 0, 6, 0, 3, 0.6), make_wall(6, 0, 6, 6, 3, 0.6), make_wall(6, 6, 0, 6, 3, 0.6),
                            make_wall(0, 6, 0, 0, 3, 0.6)},
                           Bounds{0, 0, 6, 6});
    for (int trial = 0; trial < 30; ++trial) {
        const auto paths = enumerate_paths(room, Point2(u(rng), u(rng)), Point2(u(rng), u(rng)), 2);
        const PersonState person{Point2(u(rng), u(rng)), 0.3, 12.0, true};
        const auto out = apply_person_shadowing(paths, person);
        for (std::size_t i = 0; i < paths.size(); ++i) CHECK(std::abs(out[i].amplitude) <= std::abs(paths[i].amplitude));
    }
}

TEST_CASE("synthesis: a single unit path at zero delay reproduces the pulse")
{
    const Pulse p = default_pulse();
    const PathComponent path{1.0, 0.0, 0, {Point2(0, 0), Point2(1, 0)}};
    const auto h = synthesize_cir({path}, p, 5e-9, 0.0, 1);
    for (std::size_t k = 0; k < p.samples.size(); ++k) CHECK(h.samples[k] == p.samples[k]);
    for (std::size_t k = p.samples.size(); k < h.samples.size(); ++k) CHECK(h.samples[k] == 0.0);
}

TEST_CASE("synthesis: integer delay is an exact shift")
{
    const Pulse p = default_pulse();
    const PathComponent path{0.5, 40 * kTs, 0, {}};
    const auto h = synthesize_cir({path}, p, 5e-9, 0.0, 1);
    for (std::size_t k = 0; k < p.samples.size(); ++k) CHECK(h.samples[k + 40] == doctest::Approx(0.5 * p.samples[k]));
}

TEST_CASE("synthesis: paths 100 ps apart cancel, 200 ps apart add")
{
    const Pulse p = default_pulse();
    const double t0 = 1e-9;
    const auto single = synthesize_cir({{1.0, t0, 0, {}}}, p, 8e-9, 0.0, 1);
    const auto near = synthesize_cir({{1.0, t0, 0, {}}, {1.0, t0 + 100e-12, 1, {}}}, p, 8e-9, 0.0, 1);
    const auto far = synthesize_cir({{1.0, t0, 0, {}}, {1.0, t0 + 200e-12, 1, {}}}, p, 8e-9, 0.0, 1);

    auto peak = [](const SampledWaveform& h) {
        double m = 0.0;
        for (double s : h.samples) m = std::max(m, std::abs(s));
        return m;
    };
    CHECK(peak(near) < 0.5 * peak(single));

    auto early = [&](const SampledWaveform& h) {
        AlignedWaveform a;
        const auto start = static_cast<std::size_t>(std::llround(t0 / kTs));
        a.samples.assign(h.samples.begin() + static_cast<std::ptrdiff_t>(start), h.samples.end());
        a.sample_period = kTs;
        return window_energy(a, 0.0, 3e-9);
    };
    CHECK(early(far) > early(single));
}

TEST_CASE("synthesis: fractional delay preserves the pulse shape")
{
    const Pulse p = default_pulse();
    const double frac_delay = 40.37 * kTs;
    const auto h = synthesize_cir({{1.0, frac_delay, 0, {}}}, p, 5e-9, 0.0, 1);
    double e = 0.0;
    for (double s : h.samples) e += s * s;
    CHECK(e * kTs == doctest::Approx(p.energy()).epsilon(0.01));
    // Peak lands between the two bracketing integer positions.
    std::size_t argmax = 0;
    for (std::size_t k = 0; k < h.samples.size(); ++k)
        if (std::abs(h.samples[k]) > std::abs(h.samples[argmax])) argmax = k;
    const double expected = 40.37 + p.peak_offset() / kTs;
    CHECK(std::abs(static_cast<double>(argmax) - expected) <= 1.0);
}

TEST_CASE("synthesis: deterministic noise and truncation errors")
{
    const Pulse p = default_pulse();
    const std::vector<PathComponent> paths{{1.0, 0.5e-9, 0, {}}, {0.3, 2.3e-9, 1, {}}};
    const auto a = synthesize_cir(paths, p, 6e-9, 0.01, 42);
    const auto b = synthesize_cir(paths, p, 6e-9, 0.01, 42);
    const auto c = synthesize_cir(paths, p, 6e-9, 0.01, 43);
    CHECK(a.samples == b.samples);
    CHECK(a.samples != c.samples);
    CHECK_THROWS_AS(synthesize_cir({{1.0, 5.5e-9, 0, {}}}, p, 6e-9, 0.0, 1), DurationTooShort);
    CHECK_THROWS_AS(synthesize_cir(paths, p, 6e-9, -1.0, 1), InvalidParameter);
}

TEST_CASE("trajectory: interpolation, speed and range")
{
    const NodeTrajectory traj({{0.0, Point2(0, 0)}, {10.0, Point2(0.8, 0)}});
    CHECK(sample_trajectory(traj, 0.0) == Point2(0, 0));
    CHECK(sample_trajectory(traj, 10.0) == Point2(0.8, 0));
    CHECK(sample_trajectory(traj, 5.0).isApprox(Point2(0.4, 0)));
    CHECK(traj.nominal_speed() == doctest::Approx(0.08));
    Point2 prev = sample_trajectory(traj, 0.0);
    for (int k = 1; k <= 100; ++k) {
        const Point2 cur = sample_trajectory(traj, 0.1 * k);
        CHECK((cur - prev).norm() / 0.1 == doctest::Approx(0.08).epsilon(1e-9));
        prev = cur;
    }
    CHECK_THROWS_AS(sample_trajectory(traj, -0.1), OutOfRange);
    CHECK_THROWS_AS(sample_trajectory(traj, 10.1), OutOfRange);
    CHECK_THROWS_AS(NodeTrajectory({{0.0, Point2(0, 0)}, {0.0, Point2(1, 0)}}), InvalidParameter);
}

TEST_CASE("layout: invariants are enforced")
{
    CHECK_THROWS_AS(SceneLayout({make_wall(0, 0, 1, 0, -1, 0.5)}, Bounds{0, 0, 1, 1}), InvalidParameter);
    CHECK_THROWS_AS(SceneLayout({make_wall(0, 0, 1, 0, 1, 1.5)}, Bounds{0, 0, 1, 1}), InvalidParameter);
    CHECK_THROWS_AS(SceneLayout({}, Bounds{0, 0, 0, 1}), InvalidParameter);
}

TEST_CASE("property: early arrivals span a narrower angle than late ones")
{
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int scenes = 0;
    for (int trial = 0; trial < 400 && scenes < 25; ++trial) {
        // Link along x inside a corridor-like room with clutter near the link.
        const double d = 4.0 + 2.0 * u(rng);
        const Point2 tx(1.0, 0.0), rx(1.0 + d, 0.0);
        std::vector<Wall> walls{make_wall(-1, -(0.6 + 0.6 * u(rng)), d + 3, -(0.6 + 0.6 * u(rng)), 3, 0.6),
                                make_wall(-1, 0.6 + 0.6 * u(rng), d + 3, 0.6 + 0.6 * u(rng), 3, 0.6),
                                make_wall(-1, -4, -1, 4, 6, 0.6), make_wall(d + 3, -4, d + 3, 4, 6, 0.6),
                                make_wall(-1, -4, d + 3, -4, 6, 0.6), make_wall(-1, 4, d + 3, 4, 6, 0.6)};
        for (int c = 0; c < 3; ++c) {
            const double x = 1.5 + (d - 1.0) * u(rng);
            const double y = (u(rng) < 0.5 ? -1.0 : 1.0) * (0.3 + 0.5 * u(rng));
            walls.push_back(make_wall(x, y, x + 0.5 * u(rng) + 0.2, y, 1, 0.5));
        }
        const SceneLayout layout(walls, Bounds{-2, -5, d + 4, 5});
        const auto paths = enumerate_paths(layout, tx, rx, 3);
        std::vector<Point2> early, late;
        for (const auto& p : paths) {
            const double excess = p.delay - paths.front().delay;
            if (excess <= 3e-9) early.push_back(p.arrival_direction());
            if (excess <= 30e-9) late.push_back(p.arrival_direction());
        }
        if (early.size() < 5 || late.size() - early.size() < 5) continue;
        ++scenes;
        CHECK(max_pairwise_angle(early) < max_pairwise_angle(late));
    }
    CHECK(scenes >= 10);
}

TEST_CASE("property: early energy fades less than a late window over a 0.20 m sweep")
{
    const std::vector<Wall> walls{make_wall(0, 0, 8, 0, 3, 0.6),   make_wall(8, 0, 8, 5, 3, 0.6),
                                  make_wall(8, 5, 0, 5, 3, 0.6),   make_wall(0, 5, 0, 0, 3, 0.6),
                                  make_wall(2, 4, 3.5, 4, 1, 0.5), make_wall(5, 0.8, 6.5, 0.8, 1, 0.5),
                                  make_wall(7.2, 3, 7.2, 4.2, 1, 0.5)};
    const SceneLayout layout(walls, Bounds{0, 0, 8, 5});
    const Pulse p = default_pulse();
    const Point2 tx(1.0, 2.4);
    std::vector<double> early_db, late_db;
    for (int i = 0; i < 10; ++i) {
        const Point2 rx(6.5, 2.3 + 0.02 * i);
        auto paths = enumerate_paths(layout, tx, rx, 3);
        paths = window_paths(std::move(paths), paths.front().delay - 2e-9, 40e-9, p);
        const auto h = synthesize_cir(paths, p, 40e-9, 0.0, 1);
        const auto a = time_align(h, p);
        early_db.push_back(10 * std::log10(window_energy(a, 0.0, 3e-9)));
        late_db.push_back(10 * std::log10(window_energy(a, 10e-9, 20e-9)));
    }
    auto stddev = [](const std::vector<double>& v) {
        double m = 0.0, s = 0.0;
        for (double x : v) m += x;
        m /= static_cast<double>(v.size());
        for (double x : v) s += (x - m) * (x - m);
        return std::sqrt(s / static_cast<double>(v.size()));
    };
    CHECK(stddev(early_db) < stddev(late_db));
}
