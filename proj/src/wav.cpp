// Copyright 2026 DSRN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "dsrn/wav.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace dsrn {

namespace {

uint32_t read_u32(const unsigned char *p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

uint16_t read_u16(const unsigned char *p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::string &out, uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_u16(std::string &out, uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace

void validate_waveform(const Waveform &w) {
  if (w.samples.empty()) throw std::runtime_error("empty waveform");
  if (w.sample_rate_hz <= 0) throw std::runtime_error("waveform: non-positive sample rate");
  for (double s : w.samples)
    if (!std::isfinite(s)) throw std::runtime_error("waveform: non-finite sample");
}

Waveform read_wav(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open wav file: " + path);
  std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const unsigned char *p = reinterpret_cast<const unsigned char *>(buf.data());
  size_t n = buf.size();

  if (n < 12 || std::memcmp(p, "RIFF", 4) != 0 || std::memcmp(p + 8, "WAVE", 4) != 0)
    throw std::runtime_error("malformed wav header: " + path);

  uint16_t format_tag = 0, channels = 0, bits = 0;
  uint32_t sample_rate = 0;
  bool have_fmt = false;
  const unsigned char *data = nullptr;
  uint32_t data_len = 0;

  size_t pos = 12;
  while (pos + 8 <= n) {
    const unsigned char *chunk = p + pos;
    uint32_t chunk_len = read_u32(chunk + 4);
    size_t body = pos + 8;
    if (body + chunk_len > n) throw std::runtime_error("malformed wav header: truncated chunk");
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (chunk_len < 16) throw std::runtime_error("malformed wav header: short fmt chunk");
      format_tag = read_u16(p + body);
      channels = read_u16(p + body + 2);
      sample_rate = read_u32(p + body + 4);
      bits = read_u16(p + body + 14);
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = p + body;
      data_len = chunk_len;
    }
    pos = body + chunk_len + (chunk_len & 1);  // chunks are word-aligned
  }

  if (!have_fmt || data == nullptr) throw std::runtime_error("malformed wav header: missing chunk");
  if (format_tag != 1 || bits != 16)
    throw std::runtime_error("unsupported wav encoding (PCM16 required): " + path);
  if (channels != 1)
    throw std::runtime_error("unsupported wav encoding (mono required, got " +
                             std::to_string(channels) + " channels): " + path);
  if (data_len < 2) throw std::runtime_error("empty waveform");

  Waveform w;
  w.sample_rate_hz = static_cast<int>(sample_rate);
  size_t count = data_len / 2;
  w.samples.resize(count);
  for (size_t i = 0; i < count; ++i) {
    int16_t v = static_cast<int16_t>(data[2 * i] | (data[2 * i + 1] << 8));
    w.samples[i] = static_cast<double>(v) / 32768.0;
  }
  validate_waveform(w);
  return w;
}

void write_wav(const std::string &path, const Waveform &w) {
  validate_waveform(w);
  std::string out;
  uint32_t data_len = static_cast<uint32_t>(w.samples.size() * 2);
  out.reserve(44 + data_len);
  out.append("RIFF");
  put_u32(out, 36 + data_len);
  out.append("WAVE");
  out.append("fmt ");
  put_u32(out, 16);
  put_u16(out, 1);  // PCM
  put_u16(out, 1);  // mono
  put_u32(out, static_cast<uint32_t>(w.sample_rate_hz));
  put_u32(out, static_cast<uint32_t>(w.sample_rate_hz) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out.append("data");
  put_u32(out, data_len);
  for (double s : w.samples) {
    double scaled = std::round(s * 32768.0);
    if (scaled > 32767.0) scaled = 32767.0;
    if (scaled < -32768.0) scaled = -32768.0;
    put_u16(out, static_cast<uint16_t>(static_cast<int16_t>(scaled)));
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write wav file: " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw std::runtime_error("short write: " + path);
}

}  // namespace dsrn
