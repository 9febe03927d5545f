/* Copyright 2026 The boxseg Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

/**
 * @file io.hpp
 * @brief Raster file I/O (PNG through libpng, binary/ASCII PGM) and small
 * file helpers.
 */

#pragma once

#include <png.h>

#include <atomic>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "boxseg/boxgt.hpp"
#include "boxseg/error.hpp"
#include "boxseg/image.hpp"
#include "boxseg/segmenter.hpp"

namespace boxseg {

namespace fs = std::filesystem;

// Single-channel raster as stored: values in [0, max_value].
struct StoredImage {
  Image<std::uint16_t> values;
  int bit_depth = 8;
  int max_value() const { return bit_depth == 16 ? 65535 : 255; }
};

inline std::vector<std::uint8_t> ReadFileBytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kUnreadableFile, "cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

inline std::string ReadFileText(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kUnreadableFile, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes through a sibling temporary and renames it into place, so readers
// never observe a partial file.
inline void WriteFileAtomic(const fs::path& path, const void* data, std::size_t size) {
  static std::atomic<unsigned long> counter{0};
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()) % 100000) +
         "_" + std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
    if (!out) throw Error(ErrorCode::kIo, "short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::kIo, "cannot rename into " + path.string());
  }
}

inline void WriteFileAtomic(const fs::path& path, const std::string& text) {
  WriteFileAtomic(path, text.data(), text.size());
}

namespace detail {

struct PngReadSource {
  const std::uint8_t* data;
  std::size_t size;
  std::size_t pos;
};

inline void PngError(png_structp png, png_const_charp message) {
  auto* what = static_cast<std::string*>(png_get_error_ptr(png));
  if (what) *what = message;
  png_longjmp(png, 1);
}

inline void PngWarning(png_structp, png_const_charp) {}

inline void PngReadFromMemory(png_structp png, png_bytep out, png_size_t length) {
  auto* src = static_cast<PngReadSource*>(png_get_io_ptr(png));
  if (src->pos + length > src->size) png_error(png, "truncated PNG");
  std::memcpy(out, src->data + src->pos, length);
  src->pos += length;
}

inline void PngWriteToVector(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

inline void PngFlush(png_structp) {}

// libpng reports errors through longjmp; keep C++ objects with non-trivial
// destructors out of the frames it unwinds.
inline bool DecodePngRaw(const std::uint8_t* bytes, std::size_t size, StoredImage* result,
                         std::string* what) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, what, PngError, PngWarning);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return false;
  }
  PngReadSource src{bytes, size, 0};
  png_bytep* volatile rows = nullptr;
  std::uint8_t* volatile buffer = nullptr;
  if (setjmp(png_jmpbuf(png))) {
    delete[] rows;
    delete[] buffer;
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_set_read_fn(png, &src, PngReadFromMemory);
  png_read_info(png, info);
  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  int depth = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) {
    png_set_palette_to_rgb(png);
    depth = 8;
  }
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
    depth = 8;
  }
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (color == PNG_COLOR_TYPE_RGB || color == PNG_COLOR_TYPE_RGB_ALPHA ||
      color == PNG_COLOR_TYPE_PALETTE)
    png_set_rgb_to_gray_fixed(png, 1, -1, -1);
  png_read_update_info(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  buffer = new std::uint8_t[rowbytes * height + 1];
  rows = new png_bytep[height + 1];
  for (png_uint_32 r = 0; r < height; ++r) rows[r] = buffer + r * rowbytes;
  png_read_image(png, rows);
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  delete[] rows;

  result->bit_depth = depth == 16 ? 16 : 8;
  result->values = Image<std::uint16_t>(static_cast<int>(width), static_cast<int>(height));
  for (png_uint_32 r = 0; r < height; ++r) {
    const std::uint8_t* row = buffer + r * rowbytes;
    for (png_uint_32 c = 0; c < width; ++c) {
      std::uint16_t v;
      if (depth == 16) v = static_cast<std::uint16_t>((row[2 * c] << 8) | row[2 * c + 1]);
      else v = row[c];
      result->values.at(static_cast<int>(r), static_cast<int>(c)) = v;
    }
  }
  delete[] buffer;
  return true;
}

inline bool EncodePngRaw(const StoredImage& img, std::vector<std::uint8_t>* out, std::string* what) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, what, PngError, PngWarning);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    return false;
  }
  const int w = img.values.width(), h = img.values.height();
  const int bytes = img.bit_depth == 16 ? 2 : 1;
  std::uint8_t* volatile pixels = new std::uint8_t[static_cast<std::size_t>(w) * h * bytes + 1];
  png_bytep* volatile rows = new png_bytep[h + 1];
  if (setjmp(png_jmpbuf(png))) {
    delete[] pixels;
    delete[] rows;
    png_destroy_write_struct(&png, &info);
    return false;
  }
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const std::uint16_t v = img.values.at(r, c);
      std::uint8_t* dst = pixels + (static_cast<std::size_t>(r) * w + c) * bytes;
      if (bytes == 2) {
        dst[0] = static_cast<std::uint8_t>(v >> 8);
        dst[1] = static_cast<std::uint8_t>(v & 0xff);
      } else {
        dst[0] = static_cast<std::uint8_t>(v);
      }
    }
    rows[r] = pixels + static_cast<std::size_t>(r) * w * bytes;
  }
  png_set_write_fn(png, out, PngWriteToVector, PngFlush);
  png_set_IHDR(png, info, w, h, img.bit_depth, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows);
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  delete[] pixels;
  delete[] rows;
  return true;
}

inline StoredImage DecodePgm(const std::vector<std::uint8_t>& bytes, const std::string& name) {
  std::size_t pos = 0;
  auto fail = [&](const std::string& why) -> StoredImage {
    throw Error(ErrorCode::kUnreadableFile, name + ": " + why);
  };
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&]() -> long {
    skip_space();
    long v = 0;
    bool any = false;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos++] - '0');
      any = true;
      if (v > 1 << 30) break;
    }
    if (!any) fail("malformed PGM header");
    return v;
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '2'))
    return fail("not a PGM file");
  const bool binary = bytes[1] == '5';
  pos = 2;
  const long w = read_int(), h = read_int(), maxval = read_int();
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535) return fail("bad PGM dimensions");
  StoredImage img;
  img.bit_depth = maxval > 255 ? 16 : 8;
  img.values = Image<std::uint16_t>(static_cast<int>(w), static_cast<int>(h));
  if (binary) {
    ++pos;  // single whitespace after maxval
    const std::size_t bpp = maxval > 255 ? 2 : 1;
    if (bytes.size() < pos + static_cast<std::size_t>(w * h) * bpp) return fail("truncated PGM");
    for (std::size_t i = 0; i < img.values.size(); ++i) {
      img.values.pixels()[i] = bpp == 2
          ? static_cast<std::uint16_t>((bytes[pos + 2 * i] << 8) | bytes[pos + 2 * i + 1])
          : bytes[pos + i];
    }
  } else {
    for (std::size_t i = 0; i < img.values.size(); ++i)
      img.values.pixels()[i] = static_cast<std::uint16_t>(std::min(read_int(), maxval));
  }
  return img;
}

}  // namespace detail

inline StoredImage DecodeImage(const std::vector<std::uint8_t>& bytes, const std::string& name) {
  static constexpr std::uint8_t kPngSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPngSig, 8) == 0) {
    StoredImage img;
    std::string what = "corrupt PNG";
    if (!detail::DecodePngRaw(bytes.data(), bytes.size(), &img, &what))
      throw Error(ErrorCode::kUnreadableFile, name + ": " + what);
    return img;
  }
  return detail::DecodePgm(bytes, name);
}

inline StoredImage ReadStoredImage(const fs::path& path) {
  return DecodeImage(ReadFileBytes(path), path.string());
}

inline std::vector<std::uint8_t> EncodePng(const StoredImage& img) {
  std::vector<std::uint8_t> out;
  std::string what = "PNG encoding failed";
  if (!detail::EncodePngRaw(img, &out, &what)) throw Error(ErrorCode::kIo, what);
  return out;
}

inline void WritePng(const fs::path& path, const StoredImage& img) {
  const auto bytes = EncodePng(img);
  WriteFileAtomic(path, bytes.data(), bytes.size());
}

inline void WritePng8(const fs::path& path, const Image<std::uint8_t>& img) {
  StoredImage s{Image<std::uint16_t>(img.bounds()), 8};
  for (std::size_t i = 0; i < img.size(); ++i) s.values.pixels()[i] = img.pixels()[i];
  WritePng(path, s);
}

inline void WritePng16(const fs::path& path, const Image<std::uint16_t>& img) {
  WritePng(path, StoredImage{img, 16});
}

inline void WritePgm(const fs::path& path, const StoredImage& img) {
  std::string out = "P5\n" + std::to_string(img.values.width()) + " " +
                    std::to_string(img.values.height()) + "\n" +
                    std::to_string(img.max_value()) + "\n";
  for (std::uint16_t v : img.values.pixels()) {
    if (img.bit_depth == 16) {
      out.push_back(static_cast<char>(v >> 8));
      out.push_back(static_cast<char>(v & 0xff));
    } else {
      out.push_back(static_cast<char>(v));
    }
  }
  WriteFileAtomic(path, out);
}

// Intensities divided by the type maximum.
inline GrayImage ToIntensity(const StoredImage& img) {
  GrayImage out(img.values.bounds());
  const float scale = 1.0f / static_cast<float>(img.max_value());
  for (std::size_t i = 0; i < out.size(); ++i)
    out.pixels()[i] = static_cast<float>(img.values.pixels()[i]) * scale;
  return out;
}

inline GrayImage LoadIntensityImage(const fs::path& path) {
  return ToIntensity(ReadStoredImage(path));
}

inline ProbabilityMap ImportProbabilityMap(const fs::path& path,
                                           std::optional<ImageBounds> expected = std::nullopt) {
  ProbabilityMap p = ToIntensity(ReadStoredImage(path));
  if (expected) RequireSameBounds(p.bounds(), *expected, path.string().c_str());
  return p;
}

// 8-bit export; values round to the nearest of 256 levels.
inline StoredImage ProbabilityTo8Bit(const ProbabilityMap& p) {
  StoredImage s{Image<std::uint16_t>(p.bounds()), 8};
  for (std::size_t i = 0; i < p.size(); ++i)
    s.values.pixels()[i] = static_cast<std::uint16_t>(
        std::lround(std::clamp(p.pixels()[i], 0.0f, 1.0f) * 255.0f));
  return s;
}

inline void ExportProbabilityMap(const fs::path& path, const ProbabilityMap& p) {
  WritePng(path, ProbabilityTo8Bit(p));
}

inline void WriteLabelMap(const fs::path& path, const LabelMap& labels) {
  WritePng8(path, labels.codes());
}

inline LabelMap ReadLabelMap(const fs::path& path) {
  const StoredImage s = ReadStoredImage(path);
  if (s.bit_depth != 8) throw Error(ErrorCode::kValidation, path.string() + ": label map must be 8-bit");
  Image<std::uint8_t> codes(s.values.bounds());
  for (std::size_t i = 0; i < codes.size(); ++i)
    codes.pixels()[i] = static_cast<std::uint8_t>(s.values.pixels()[i]);
  return LabelMap::FromCodes(codes);
}

inline Image<std::uint16_t> ReadInstanceLabels(const fs::path& path) {
  return ReadStoredImage(path).values;
}

}  // namespace boxseg
