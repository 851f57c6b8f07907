#include "kmfl/idx.hpp"

#include <zlib.h>

#include <fstream>
#include <iterator>
#include <string>

#include "kmfl/error.hpp"

namespace kmfl {
namespace {

std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  return (static_cast<std::uint32_t>(bytes[offset]) << 24) |
         (static_cast<std::uint32_t>(bytes[offset + 1]) << 16) |
         (static_cast<std::uint32_t>(bytes[offset + 2]) << 8) |
         static_cast<std::uint32_t>(bytes[offset + 3]);
}

void write_be32(std::vector<std::uint8_t>& out, std::uint32_t value) {
  out.push_back(static_cast<std::uint8_t>(value >> 24));
  out.push_back(static_cast<std::uint8_t>(value >> 16));
  out.push_back(static_cast<std::uint8_t>(value >> 8));
  out.push_back(static_cast<std::uint8_t>(value));
}

void check_header(std::span<const std::uint8_t> bytes, std::uint32_t magic, std::size_t header) {
  if (bytes.size() < 4) throw Error(ErrorKind::kTruncatedPayload, "missing IDX magic");
  const std::uint32_t found = read_be32(bytes, 0);
  if (found != magic) {
    throw Error(ErrorKind::kBadMagic, "expected magic " + std::to_string(magic) + ", found " +
                                          std::to_string(found));
  }
  if (bytes.size() < header) throw Error(ErrorKind::kTruncatedPayload, "incomplete IDX header");
}

void check_payload(std::size_t available, std::uint64_t expected) {
  if (available < expected) {
    throw Error(ErrorKind::kTruncatedPayload, "payload has " + std::to_string(available) +
                                                  " bytes, header declares " +
                                                  std::to_string(expected));
  }
  if (available > expected) {
    throw Error(ErrorKind::kTrailingBytes, std::to_string(available - expected) +
                                               " bytes after the declared payload");
  }
}

}  // namespace

IdxImages parse_idx_images(std::span<const std::uint8_t> bytes) {
  constexpr std::size_t kHeader = 16;
  check_header(bytes, kIdxImageMagic, kHeader);
  IdxImages out;
  out.count = read_be32(bytes, 4);
  out.rows = read_be32(bytes, 8);
  out.cols = read_be32(bytes, 12);
  const std::uint64_t expected = static_cast<std::uint64_t>(out.count) * out.rows * out.cols;
  check_payload(bytes.size() - kHeader, expected);
  out.pixels.assign(bytes.begin() + kHeader, bytes.end());
  return out;
}

std::vector<std::uint8_t> parse_idx_labels(std::span<const std::uint8_t> bytes) {
  constexpr std::size_t kHeader = 8;
  check_header(bytes, kIdxLabelMagic, kHeader);
  check_payload(bytes.size() - kHeader, read_be32(bytes, 4));
  return {bytes.begin() + kHeader, bytes.end()};
}

std::vector<std::uint8_t> serialize_idx_images(const IdxImages& images) {
  std::vector<std::uint8_t> out;
  out.reserve(16 + images.pixels.size());
  write_be32(out, kIdxImageMagic);
  write_be32(out, images.count);
  write_be32(out, images.rows);
  write_be32(out, images.cols);
  out.insert(out.end(), images.pixels.begin(), images.pixels.end());
  return out;
}

std::vector<std::uint8_t> serialize_idx_labels(std::span<const std::uint8_t> labels) {
  std::vector<std::uint8_t> out;
  out.reserve(8 + labels.size());
  write_be32(out, kIdxLabelMagic);
  write_be32(out, static_cast<std::uint32_t>(labels.size()));
  out.insert(out.end(), labels.begin(), labels.end());
  return out;
}

std::vector<std::uint8_t> read_maybe_gzip(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::vector<std::uint8_t> raw((std::istreambuf_iterator<char>(in)),
                                std::istreambuf_iterator<char>());
  if (raw.size() < 2 || raw[0] != 0x1f || raw[1] != 0x8b) return raw;

  z_stream stream{};
  // 16 + MAX_WBITS selects the gzip wrapper.
  if (inflateInit2(&stream, 16 + MAX_WBITS) != Z_OK) {
    throw Error(ErrorKind::kIo, "zlib init failed for " + path.string());
  }
  std::vector<std::uint8_t> out;
  std::uint8_t chunk[1 << 16];
  stream.next_in = raw.data();
  stream.avail_in = static_cast<uInt>(raw.size());
  int status = Z_OK;
  while (status != Z_STREAM_END) {
    stream.next_out = chunk;
    stream.avail_out = sizeof(chunk);
    status = inflate(&stream, Z_NO_FLUSH);
    if (status != Z_OK && status != Z_STREAM_END) {
      inflateEnd(&stream);
      throw Error(ErrorKind::kIo, "corrupt gzip stream in " + path.string());
    }
    out.insert(out.end(), chunk, chunk + (sizeof(chunk) - stream.avail_out));
  }
  inflateEnd(&stream);
  return out;
}

}  // namespace kmfl
