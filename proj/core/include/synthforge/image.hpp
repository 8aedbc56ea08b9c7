#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace synthforge {

/// 8-bit image, row-major, interleaved channels (1 = gray, 3 = RGB).
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<std::uint8_t> pixels;

  Image() = default;
  Image(int w, int h, int c) : width(w), height(h), channels(c), pixels(static_cast<std::size_t>(w) * h * c, 0) {}

  std::uint8_t& at(int x, int y, int c = 0) {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  std::uint8_t at(int x, int y, int c = 0) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }

  /// Pixels with any non-zero channel.
  std::size_t foreground_count() const;
  double foreground_fraction() const;

  friend bool operator==(const Image&, const Image&) = default;
};

struct ImageHeader {
  int width = 0;
  int height = 0;
  int channels = 0;
};

/// PNG bytes with fixed compression settings and no timestamp chunk: equal
/// images encode to equal bytes.
std::vector<std::uint8_t> encode_png(const Image& image);
Image decode_png(std::span<const std::uint8_t> bytes);

void write_png(const std::filesystem::path& path, const Image& image);
/// Throws FormatError for unreadable files. Gray+alpha and RGBA inputs are
/// reduced to gray and RGB; 16-bit inputs are scaled to 8 bits.
Image read_png(const std::filesystem::path& path);
/// Reads only the IHDR chunk.
ImageHeader read_png_header(const std::filesystem::path& path);

}  // namespace synthforge
