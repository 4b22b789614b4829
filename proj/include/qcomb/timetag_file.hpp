#pragma once

// QTT1 time-tag files.
//
//   header (20 bytes, little-endian):
//     char[4] magic "QTT1" | u16 version (1) | u32 tick_ps | u16 n_channels | u64 duration_ticks
//   records (9 bytes each, packed):
//     u64 timestamp_ticks | u8 channel
// Records are sorted by (timestamp, channel).

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include "qcomb/detector_chain.hpp"

namespace qcomb::io {

inline constexpr std::uint16_t kTimeTagVersion = 1;
inline constexpr std::size_t kHeaderBytes = 20;
inline constexpr std::size_t kRecordBytes = 9;

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TimeTagFile {
  std::uint32_t tick_ps = 81;
  std::uint64_t duration_ticks = 0;
  std::vector<detector::TimeTagStream> channels;  // index == channel id
};

/// Streams must share one integer-picosecond tick; channel ids must be < 256.
std::vector<std::uint8_t> encode_timetags(const std::vector<detector::TimeTagStream>& streams);
TimeTagFile decode_timetags(const std::vector<std::uint8_t>& bytes);

void write_timetags(const std::vector<detector::TimeTagStream>& streams, const std::filesystem::path& path);
TimeTagFile read_timetags(const std::filesystem::path& path);

}  // namespace qcomb::io
