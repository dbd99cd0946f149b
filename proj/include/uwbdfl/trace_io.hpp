#pragma once

// Binary CIR trace records, little-endian:
//   "UWBC" | version u16 | T_s u32 (femtoseconds) | n u32 | capture_time f64 |
//   tx 2 x f64 | rx 2 x f64 | n x f32 samples
// A trace file is a plain concatenation of records.

#include "uwbdfl/channel_sim.hpp"

#include <filesystem>
#include <iosfwd>
#include <vector>

namespace uwbdfl {

inline constexpr std::uint16_t kTraceVersion = 1;
inline constexpr std::size_t kTraceHeaderBytes = 4 + 2 + 4 + 4 + 8 + 16 + 16;

void write_trace_record(std::ostream& out, const SampledWaveform& h);
/// Returns false at a clean end of stream; throws FormatError on a damaged record.
bool read_trace_record(std::istream& in, SampledWaveform& h);

void write_trace_file(const std::filesystem::path& path, const std::vector<SampledWaveform>& records);
std::vector<SampledWaveform> read_trace_file(const std::filesystem::path& path);

}  // namespace uwbdfl
