#include "qcomb/timetag_file.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>

namespace qcomb::io {

namespace {

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(static_cast<std::uint64_t>(v) >> (8 * i)));
}

template <typename T>
T get_le(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return static_cast<T>(v);
}

struct Record {
  std::uint64_t t;
  std::uint8_t ch;
};

}  // namespace

std::vector<std::uint8_t> encode_timetags(const std::vector<detector::TimeTagStream>& streams) {
  double tick = streams.empty() ? 81e-12 : streams.front().tick;
  const double tick_ps_f = std::round(tick / 1e-12);
  if (!(tick_ps_f >= 1) || std::abs(tick_ps_f * 1e-12 - tick) > 1e-6 * tick)
    throw FormatError("tick must be a positive whole number of picoseconds");
  const auto tick_ps = static_cast<std::uint32_t>(tick_ps_f);

  int n_channels = 0;
  double duration = 0;
  std::size_t total = 0;
  for (const auto& s : streams) {
    if (s.tick != tick) throw FormatError("all streams in a file must share one tick");
    if (s.channel_id < 0 || s.channel_id > 255) throw FormatError("channel id must fit in a byte");
    n_channels = std::max(n_channels, s.channel_id + 1);
    duration = std::max(duration, s.duration);
    total += s.tags.size();
  }
  std::vector<Record> records;
  records.reserve(total);
  for (const auto& s : streams) {
    for (std::size_t i = 0; i < s.tags.size(); ++i) {
      if (s.tags[i] < 0) throw FormatError("negative timestamp");
      if (i > 0 && s.tags[i] <= s.tags[i - 1]) throw FormatError("stream timestamps must be strictly increasing");
      records.push_back({static_cast<std::uint64_t>(s.tags[i]), static_cast<std::uint8_t>(s.channel_id)});
    }
  }
  std::sort(records.begin(), records.end(),
            [](const Record& a, const Record& b) { return a.t != b.t ? a.t < b.t : a.ch < b.ch; });

  std::vector<std::uint8_t> out;
  out.reserve(kHeaderBytes + kRecordBytes * records.size());
  for (char c : {'Q', 'T', 'T', '1'}) out.push_back(static_cast<std::uint8_t>(c));
  put_le<std::uint16_t>(out, kTimeTagVersion);
  put_le<std::uint32_t>(out, tick_ps);
  put_le<std::uint16_t>(out, static_cast<std::uint16_t>(n_channels));
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(std::ceil(duration / (tick_ps * 1e-12) - 1e-9)));
  for (const auto& r : records) {
    put_le<std::uint64_t>(out, r.t);
    out.push_back(r.ch);
  }
  return out;
}

TimeTagFile decode_timetags(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < kHeaderBytes) throw FormatError("truncated header");
  if (!std::equal(bytes.begin(), bytes.begin() + 4, "QTT1")) throw FormatError("bad magic");
  const auto version = get_le<std::uint16_t>(&bytes[4]);
  if (version != kTimeTagVersion) throw FormatError("unsupported version " + std::to_string(version));
  TimeTagFile f;
  f.tick_ps = get_le<std::uint32_t>(&bytes[6]);
  if (f.tick_ps == 0) throw FormatError("zero tick");
  const auto n_channels = get_le<std::uint16_t>(&bytes[10]);
  f.duration_ticks = get_le<std::uint64_t>(&bytes[12]);
  const std::size_t body = bytes.size() - kHeaderBytes;
  if (body % kRecordBytes != 0) throw FormatError("truncated record section");

  const double tick = f.tick_ps * 1e-12;
  f.channels.resize(n_channels);
  for (std::uint16_t c = 0; c < n_channels; ++c) {
    f.channels[c].channel_id = c;
    f.channels[c].tick = tick;
    f.channels[c].duration = static_cast<double>(f.duration_ticks) * tick;
  }
  std::uint64_t prev_t = 0;
  int prev_ch = -1;
  for (std::size_t off = kHeaderBytes; off < bytes.size(); off += kRecordBytes) {
    const auto t = get_le<std::uint64_t>(&bytes[off]);
    const std::uint8_t ch = bytes[off + 8];
    if (ch >= n_channels) throw FormatError("record channel out of range");
    if (prev_ch >= 0 && (t < prev_t || (t == prev_t && ch <= prev_ch))) throw FormatError("records not sorted");
    if (t > static_cast<std::uint64_t>(INT64_MAX)) throw FormatError("timestamp overflow");
    f.channels[ch].tags.push_back(static_cast<Ticks>(t));
    prev_t = t;
    prev_ch = ch;
  }
  return f;
}

void write_timetags(const std::vector<detector::TimeTagStream>& streams, const std::filesystem::path& path) {
  const auto bytes = encode_timetags(streams);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

TimeTagFile read_timetags(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  try {
    return decode_timetags(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace qcomb::io
