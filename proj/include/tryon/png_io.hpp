#pragma once

#include <csetjmp>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include <png.h>

#include "tryon/error.hpp"

namespace tryon {

// Single-channel image with samples normalized by bit depth (0..255 or 0..65535).
struct GrayImage {
  int width = 0;
  int height = 0;
  int bit_depth = 8;
  std::vector<std::uint16_t> samples;  // row-major, row 0 first

  std::uint32_t max_value() const { return bit_depth == 16 ? 65535u : 255u; }
};

inline bool has_png_signature(std::span<const std::uint8_t> bytes) {
  static constexpr std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
  return bytes.size() >= 8 && std::memcmp(bytes.data(), sig, 8) == 0;
}

/// Decodes an 8- or 16-bit grayscale PNG (palette/colour types are rejected).
inline GrayImage decode_png_gray(std::span<const std::uint8_t> bytes) {
  if (!has_png_signature(bytes)) throw Error(Errc::parse_error, "not a PNG file");
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()))
    throw Error(Errc::parse_error, std::string("PNG header: ") + image.message);

  // only true grayscale sources; the simplified API reports the stored format
  if ((image.format & PNG_FORMAT_FLAG_COLOR) != 0 || (image.format & PNG_FORMAT_FLAG_COLORMAP) != 0) {
    png_image_free(&image);
    throw Error(Errc::unsupported_feature, "displacement PNG must be grayscale");
  }
  GrayImage out;
  out.width = static_cast<int>(image.width);
  out.height = static_cast<int>(image.height);
  const bool sixteen = (image.format & PNG_FORMAT_FLAG_LINEAR) != 0;
  out.bit_depth = sixteen ? 16 : 8;
  out.samples.resize(static_cast<std::size_t>(image.width) * image.height);
  if (sixteen) {
    image.format = PNG_FORMAT_LINEAR_Y;
    if (!png_image_finish_read(&image, nullptr, out.samples.data(), 0, nullptr))
      throw Error(Errc::parse_error, std::string("PNG decode: ") + image.message);
  } else {
    std::vector<std::uint8_t> buf(out.samples.size());
    image.format = PNG_FORMAT_GRAY;
    if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr))
      throw Error(Errc::parse_error, std::string("PNG decode: ") + image.message);
    for (std::size_t i = 0; i < buf.size(); ++i) out.samples[i] = buf[i];
  }
  return out;
}

namespace detail {

inline void png_write_to_vector(png_structp png, png_bytep data, png_size_t len) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + len);
}

inline void png_flush_noop(png_structp) {}

}  // namespace detail

/// Encodes a grayscale image. 16-bit samples are written big-endian as PNG requires.
inline std::vector<std::uint8_t> encode_png_gray(const GrayImage& img) {
  if (img.width < 1 || img.height < 1 ||
      img.samples.size() != static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height))
    throw Error(Errc::invalid_argument, "encode_png_gray: bad image dimensions");
  if (img.bit_depth != 8 && img.bit_depth != 16) throw Error(Errc::invalid_argument, "bit depth must be 8 or 16");

  std::vector<std::uint8_t> out;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error(Errc::io_error, "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(Errc::io_error, "PNG encode failed");
  }
  png_set_write_fn(png, &out, detail::png_write_to_vector, detail::png_flush_noop);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height), img.bit_depth,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t bytes_per = img.bit_depth == 16 ? 2 : 1;
  std::vector<std::uint8_t> row(static_cast<std::size_t>(img.width) * bytes_per);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const std::uint16_t s = img.samples[static_cast<std::size_t>(y) * img.width + x];
      if (bytes_per == 2) {
        row[2 * x] = static_cast<std::uint8_t>(s >> 8);
        row[2 * x + 1] = static_cast<std::uint8_t>(s & 0xFF);
      } else {
        row[x] = static_cast<std::uint8_t>(s);
      }
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

}  // namespace tryon
