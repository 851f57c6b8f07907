#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace kmfl {

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

/// Unsigned-byte rank-3 IDX tensor (count x rows x cols), row-major payload.
struct IdxImages {
  std::uint32_t count = 0;
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<std::uint8_t> pixels;

  std::span<const std::uint8_t> image(std::size_t k) const {
    const std::size_t size = static_cast<std::size_t>(rows) * cols;
    return std::span<const std::uint8_t>(pixels).subspan(k * size, size);
  }
  std::uint8_t at(std::size_t k, std::size_t r, std::size_t c) const {
    return pixels[(k * rows + r) * cols + c];
  }
};

/// Parses a big-endian IDX image file (magic 0x00000803). The payload must be
/// exactly count*rows*cols bytes: BadMagic, TruncatedPayload and TrailingBytes
/// are raised otherwise.
IdxImages parse_idx_images(std::span<const std::uint8_t> bytes);

/// Parses a big-endian IDX label file (magic 0x00000801).
std::vector<std::uint8_t> parse_idx_labels(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> serialize_idx_images(const IdxImages& images);
std::vector<std::uint8_t> serialize_idx_labels(std::span<const std::uint8_t> labels);

/// Reads a whole file, transparently inflating it when it starts with the gzip
/// signature 0x1f 0x8b.
std::vector<std::uint8_t> read_maybe_gzip(const std::filesystem::path& path);

}  // namespace kmfl
