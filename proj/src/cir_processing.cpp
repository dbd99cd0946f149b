#include "uwbdfl/cir_processing.hpp"

#include "uwbdfl/errors.hpp"
#include "uwbdfl/output.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

namespace uwbdfl {

double AlignedWaveform::energy() const
{
    double e = 0.0;
    for (double s : samples) e += s * s;
    return e * sample_period;
}

double PowerDelayProfile::total() const
{
    double e = 0.0;
    for (double b : bins) e += b;
    return e;
}

bool EarlyEnergy::valid() const { return std::isfinite(value_db); }

double correlation_coefficient(const std::vector<double>& h, const std::vector<double>& tmpl, std::size_t lag)
{
    if (lag + tmpl.size() > h.size()) throw InvalidParameter("correlation window runs past the waveform");
    double dot = 0.0, hh = 0.0, ss = 0.0;
    for (std::size_t n = 0; n < tmpl.size(); ++n) {
        const double x = h[lag + n];
        dot += x * tmpl[n];
        hh += x * x;
        ss += tmpl[n] * tmpl[n];
    }
    if (hh <= 0.0 || ss <= 0.0) return 0.0;
    return dot / std::sqrt(hh * ss);
}

std::optional<AlignedWaveform> try_time_align(const SampledWaveform& h, const Pulse& tmpl, double rho)
{
    if (!(rho > 0.0 && rho < 1.0)) throw InvalidParameter("rho must be in (0, 1)");
    const std::size_t n = tmpl.samples.size();
    if (n == 0 || n >= h.samples.size()) throw InvalidParameter("template must be shorter than the waveform");

    double tmpl_norm2 = 0.0;
    for (double s : tmpl.samples) tmpl_norm2 += s * s;
    if (tmpl_norm2 <= 0.0) throw InvalidParameter("template has zero energy");

    // Window energy is tracked incrementally and refreshed periodically to
    // bound round-off drift.
    const auto& x = h.samples;
    double window = 0.0;
    for (std::size_t k = 0; k < n; ++k) window += x[k] * x[k];

    const std::size_t last = x.size() - n;
    for (std::size_t lag = 0; lag <= last; ++lag) {
        if (lag > 0) {
            if (lag % 1024 == 0) {
                window = 0.0;
                for (std::size_t k = 0; k < n; ++k) window += x[lag + k] * x[lag + k];
            } else {
                window += x[lag + n - 1] * x[lag + n - 1] - x[lag - 1] * x[lag - 1];
            }
        }
        if (window <= 0.0) continue;
        double dot = 0.0;
        for (std::size_t k = 0; k < n; ++k) dot += x[lag + k] * tmpl.samples[k];
        const double coeff = dot / std::sqrt(window * tmpl_norm2);
        if (coeff > rho) {
            AlignedWaveform a;
            a.samples.assign(x.begin() + static_cast<std::ptrdiff_t>(lag), x.end());
            a.sample_period = h.sample_period;
            a.alignment_lag = lag;
            a.peak_correlation = coeff;
            return a;
        }
    }
    return std::nullopt;
}

AlignedWaveform time_align(const SampledWaveform& h, const Pulse& tmpl, double rho)
{
    auto a = try_time_align(h, tmpl, rho);
    if (!a) throw NoAlignment("no lag exceeds correlation threshold " + std::to_string(rho));
    return std::move(*a);
}

PowerDelayProfile compute_pdp(const AlignedWaveform& a, double bin_width)
{
    if (!(bin_width >= a.sample_period)) throw InvalidParameter("bin width must be >= sample period");
    PowerDelayProfile pdp;
    pdp.bin_width = bin_width;
    if (a.samples.empty()) return pdp;
    const double last_t = static_cast<double>(a.samples.size() - 1) * a.sample_period;
    pdp.bins.assign(static_cast<std::size_t>(std::floor(last_t / bin_width)) + 1, 0.0);
    for (std::size_t k = 0; k < a.samples.size(); ++k) {
        const double t = static_cast<double>(k) * a.sample_period;
        const auto m = std::min(static_cast<std::size_t>(std::floor(t / bin_width)), pdp.bins.size() - 1);
        pdp.bins[m] += a.samples[k] * a.samples[k] * a.sample_period;
    }
    return pdp;
}

double window_energy(const AlignedWaveform& a, double start, double end)
{
    double e = 0.0;
    for (std::size_t k = 0; k < a.samples.size(); ++k) {
        const double t = static_cast<double>(k) * a.sample_period;
        if (t >= end) break;
        if (t >= start) e += a.samples[k] * a.samples[k];
    }
    return e * a.sample_period;
}

EarlyEnergy early_energy(const AlignedWaveform& a, double window)
{
    if (!(window > 0.0)) throw InvalidParameter("early-energy window must be > 0");
    const double e0 = window_energy(a, 0.0, window);
    return EarlyEnergy{e0 > 0.0 ? 10.0 * std::log10(e0) : -INFINITY, window};
}

double QualityGateState::median() const
{
    if (recent_energy.empty()) return 0.0;
    std::vector<double> v(recent_energy.begin(), recent_energy.end());
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double upper = v[mid];
    if (v.size() % 2 == 1) return upper;
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

GateResult quality_gate(const SampledWaveform& h, const Pulse& tmpl, QualityGateState state,
                        const QualityGateConfig& cfg)
{
    GateResult result;
    result.aligned = try_time_align(h, tmpl, cfg.rho);
    if (!result.aligned) {
        result.decision = GateDecision::discard;
        result.state = std::move(state);
        return result;
    }
    const double energy = h.energy();
    if (!state.recent_energy.empty() && energy > cfg.energy_ratio * state.median()) {
        result.decision = GateDecision::discard;
        result.aligned.reset();
        result.state = std::move(state);
        return result;
    }
    state.recent_energy.push_back(energy);
    while (state.recent_energy.size() > cfg.history) state.recent_energy.pop_front();
    result.decision = GateDecision::keep;
    result.state = std::move(state);
    return result;
}

void write_feature_csv(std::ostream& out, const std::vector<FeatureRecord>& records)
{
    out << kFeatureCsvHeader << '\n';
    for (const auto& r : records) {
        out << format_number(r.capture_time) << ',' << r.tx_slot << ',' << format_number(r.rx.x()) << ','
            << format_number(r.rx.y()) << ',' << format_number(r.e_db) << ',' << (r.kept ? 1 : 0) << '\n';
    }
}

std::vector<FeatureRecord> read_feature_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line)) throw FormatError("empty feature CSV");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kFeatureCsvHeader) throw FormatError("unexpected feature CSV header: " + line);

    std::vector<FeatureRecord> records;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 6) throw FormatError("feature CSV line " + std::to_string(line_no) + ": expected 6 fields");
        FeatureRecord r;
        r.capture_time = parse_number(f[0]);
        r.tx_slot = static_cast<int>(parse_number(f[1]));
        r.rx = Point2(parse_number(f[2]), parse_number(f[3]));
        r.e_db = parse_number(f[4]);
        r.kept = parse_number(f[5]) != 0.0;
        records.push_back(r);
    }
    return records;
}

}  // namespace uwbdfl
