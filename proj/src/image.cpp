// Copyright 2026 DSRN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "dsrn/image.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include <zlib.h>

namespace dsrn {

GrayImage spectrogram_to_image(const Mat &mag) {
  const int frames = static_cast<int>(mag.rows());
  const int bins = static_cast<int>(mag.cols());
  if (frames < 1 || bins < 1) throw std::invalid_argument("spectrogram_to_image: empty input");

  Mat logged = (1.0 + mag.cwiseMax(0.0).array()).log().matrix();
  const double top = logged.maxCoeff();

  GrayImage img;
  img.width = frames;
  img.height = bins;
  img.pixels.resize(static_cast<size_t>(frames) * static_cast<size_t>(bins), 0);
  if (top <= 0.0) return img;  // all-zero input stays black

  for (int f = 0; f < bins; ++f) {
    const int row = bins - 1 - f;  // highest bin on top
    for (int t = 0; t < frames; ++t) {
      const double v = logged(t, f) / top;
      img.pixels[static_cast<size_t>(row) * img.width + t] =
          static_cast<uint8_t>(std::lround(255.0 * std::min(1.0, std::max(0.0, v))));
    }
  }
  return img;
}

void write_pgm(const std::string &path, const GrayImage &img) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write image: " + path);
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char *>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
  if (!out) throw std::runtime_error("short write: " + path);
}

namespace {

void put_be32(std::string &s, uint32_t v) {
  s.push_back(static_cast<char>((v >> 24) & 0xff));
  s.push_back(static_cast<char>((v >> 16) & 0xff));
  s.push_back(static_cast<char>((v >> 8) & 0xff));
  s.push_back(static_cast<char>(v & 0xff));
}

void put_chunk(std::string &out, const char type[4], const std::string &body) {
  put_be32(out, static_cast<uint32_t>(body.size()));
  std::string tag(type, 4);
  out += tag;
  out += body;
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef *>(tag.data()), 4);
  crc = crc32(crc, reinterpret_cast<const Bytef *>(body.data()),
              static_cast<uInt>(body.size()));
  put_be32(out, static_cast<uint32_t>(crc));
}

}  // namespace

void write_png(const std::string &path, const GrayImage &img) {
  // one filter byte (0 = none) per scanline, then zlib-compress
  std::string raw;
  raw.reserve(static_cast<size_t>(img.height) * (static_cast<size_t>(img.width) + 1));
  for (int r = 0; r < img.height; ++r) {
    raw.push_back('\0');
    raw.append(reinterpret_cast<const char *>(img.pixels.data()) +
                   static_cast<size_t>(r) * img.width,
               static_cast<size_t>(img.width));
  }
  uLongf comp_len = compressBound(static_cast<uLong>(raw.size()));
  std::string comp(comp_len, '\0');
  if (compress2(reinterpret_cast<Bytef *>(comp.data()), &comp_len,
                reinterpret_cast<const Bytef *>(raw.data()), static_cast<uLong>(raw.size()),
                9) != Z_OK)
    throw std::runtime_error("png: zlib compression failed");
  comp.resize(comp_len);

  std::string ihdr;
  put_be32(ihdr, static_cast<uint32_t>(img.width));
  put_be32(ihdr, static_cast<uint32_t>(img.height));
  ihdr.push_back(8);   // bit depth
  ihdr.push_back(0);   // grayscale
  ihdr.push_back(0);   // compression
  ihdr.push_back(0);   // filter
  ihdr.push_back(0);   // no interlace

  std::string out("\x89PNG\r\n\x1a\n", 8);
  put_chunk(out, "IHDR", ihdr);
  put_chunk(out, "IDAT", comp);
  put_chunk(out, "IEND", "");

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write image: " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw std::runtime_error("short write: " + path);
}

void write_spectrogram_image(const std::string &path, const Mat &mag) {
  GrayImage img = spectrogram_to_image(mag);
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".png") == 0)
    write_png(path, img);
  else
    write_pgm(path, img);
}

}  // namespace dsrn
