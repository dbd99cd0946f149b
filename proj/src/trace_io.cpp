#include "uwbdfl/trace_io.hpp"

#include "uwbdfl/errors.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace uwbdfl {

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
void put(std::ostream& out, T value)
{
    std::array<char, sizeof(T)> bytes;
    std::memcpy(bytes.data(), &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    out.write(bytes.data(), sizeof(T));
}

template <typename T>
T get(std::istream& in)
{
    std::array<char, sizeof(T)> bytes;
    if (!in.read(bytes.data(), sizeof(T))) throw FormatError("truncated trace record");
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    T value;
    std::memcpy(&value, bytes.data(), sizeof(T));
    return value;
}

}  // namespace

void write_trace_record(std::ostream& out, const SampledWaveform& h)
{
    const double fs = std::round(h.sample_period * 1e15);
    if (!(fs >= 1.0 && fs <= 4294967295.0)) throw InvalidParameter("sample period not representable in trace header");
    if (h.samples.size() > 0xFFFFFFFFu) throw InvalidParameter("too many samples for a trace record");

    out.write("UWBC", 4);
    put<std::uint16_t>(out, kTraceVersion);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(fs));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(h.samples.size()));
    put<double>(out, h.capture_time);
    put<double>(out, h.tx.x());
    put<double>(out, h.tx.y());
    put<double>(out, h.rx.x());
    put<double>(out, h.rx.y());
    for (double s : h.samples) put<float>(out, static_cast<float>(s));
}

bool read_trace_record(std::istream& in, SampledWaveform& h)
{
    std::array<char, 4> magic;
    in.read(magic.data(), 4);
    if (in.gcount() == 0 && in.eof()) return false;
    if (in.gcount() != 4 || std::memcmp(magic.data(), "UWBC", 4) != 0) throw FormatError("bad trace magic");

    const auto version = get<std::uint16_t>(in);
    if (version != kTraceVersion) throw FormatError("unsupported trace version " + std::to_string(version));
    const auto fs = get<std::uint32_t>(in);
    if (fs == 0) throw FormatError("zero sample period in trace header");
    const auto n = get<std::uint32_t>(in);

    h.sample_period = static_cast<double>(fs) * 1e-15;
    h.capture_time = get<double>(in);
    const double tx_x = get<double>(in);
    const double tx_y = get<double>(in);
    const double rx_x = get<double>(in);
    const double rx_y = get<double>(in);
    h.tx = Point2(tx_x, tx_y);
    h.rx = Point2(rx_x, rx_y);
    h.samples.resize(n);
    for (auto& s : h.samples) {
        s = static_cast<double>(get<float>(in));
        if (!std::isfinite(s)) throw FormatError("non-finite sample in trace record");
    }
    return true;
}

void write_trace_file(const std::filesystem::path& path, const std::vector<SampledWaveform>& records)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    for (const auto& h : records) write_trace_record(out, h);
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<SampledWaveform> read_trace_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::vector<SampledWaveform> records;
    SampledWaveform h;
    while (read_trace_record(in, h)) records.push_back(h);
    return records;
}

}  // namespace uwbdfl
