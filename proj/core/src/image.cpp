#include "synthforge/image.hpp"

#include <png.h>

#include <cstring>
#include <fstream>
#include <string>

#include "synthforge/errors.hpp"

namespace synthforge {

namespace {

png_uint_32 format_for(int channels) {
  switch (channels) {
    case 1: return PNG_FORMAT_GRAY;
    case 3: return PNG_FORMAT_RGB;
    default: throw ParameterError("images must have 1 or 3 channels");
  }
}

// Keeps the stored channel layout: gray stays gray, anything colored becomes RGB.
void choose_output_format(png_image& img) {
  img.format = (img.format & PNG_FORMAT_FLAG_COLOR) ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
}

Image finish_read(png_image& img, const std::string& what) {
  choose_output_format(img);
  Image out(static_cast<int>(img.width), static_cast<int>(img.height), PNG_IMAGE_SAMPLE_CHANNELS(img.format));
  if (!png_image_finish_read(&img, nullptr, out.pixels.data(), 0, nullptr)) {
    const std::string msg = img.message;
    png_image_free(&img);
    throw FormatError("cannot decode PNG " + what + ": " + msg);
  }
  return out;
}

}  // namespace

std::size_t Image::foreground_count() const {
  std::size_t count = 0;
  const std::size_t n = static_cast<std::size_t>(width) * height;
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < channels; ++c) {
      if (pixels[i * channels + c] != 0) {
        ++count;
        break;
      }
    }
  }
  return count;
}

double Image::foreground_fraction() const {
  const std::size_t n = static_cast<std::size_t>(width) * height;
  return n == 0 ? 0.0 : static_cast<double>(foreground_count()) / static_cast<double>(n);
}

std::vector<std::uint8_t> encode_png(const Image& image) {
  if (image.width <= 0 || image.height <= 0) throw ParameterError("cannot encode an empty image");
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width);
  img.height = static_cast<png_uint_32>(image.height);
  img.format = format_for(image.channels);

  png_alloc_size_t size = 0;
  if (!png_image_write_get_memory_size(img, size, 0, image.pixels.data(), 0, nullptr)) {
    throw FormatError(std::string("PNG size query failed: ") + img.message);
  }
  std::vector<std::uint8_t> bytes(size);
  if (!png_image_write_to_memory(&img, bytes.data(), &size, 0, image.pixels.data(), 0, nullptr)) {
    throw FormatError(std::string("PNG encode failed: ") + img.message);
  }
  bytes.resize(size);
  return bytes;
}

Image decode_png(std::span<const std::uint8_t> bytes) {
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size())) {
    throw FormatError(std::string("cannot read PNG: ") + img.message);
  }
  return finish_read(img, "buffer");
}

void write_png(const std::filesystem::path& path, const Image& image) {
  const auto bytes = encode_png(image);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("failed writing " + path.string());
}

Image read_png(const std::filesystem::path& path) {
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str())) {
    throw FormatError("cannot read PNG " + path.string() + ": " + img.message);
  }
  return finish_read(img, path.string());
}

ImageHeader read_png_header(const std::filesystem::path& path) {
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str())) {
    throw FormatError("cannot read PNG " + path.string() + ": " + img.message);
  }
  ImageHeader header{static_cast<int>(img.width), static_cast<int>(img.height),
                     (img.format & PNG_FORMAT_FLAG_COLOR) ? 3 : 1};
  png_image_free(&img);
  return header;
}

}  // namespace synthforge
