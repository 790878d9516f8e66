#include "socialmotion/container.h"

#include <fstream>
#include <iterator>

#include "binary_io.h"
#include "socialmotion/error.h"

namespace socialmotion {

namespace detail {

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    fail(ErrorCode::Io, "cannot open " + path);
  }
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    fail(ErrorCode::Io, "cannot open " + path + " for writing");
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    fail(ErrorCode::Io, "failed writing " + path);
  }
}

void verify_trailing_crc(const std::vector<std::uint8_t>& bytes, const std::string& source) {
  if (bytes.size() < 4) {
    fail(ErrorCode::Format, source + ": truncated (no checksum)");
  }
  const std::size_t body = bytes.size() - 4;
  ByteReader tail(bytes.data() + body, 4, source);
  const std::uint32_t stored = tail.u32("checksum");
  const std::uint32_t actual = ByteWriter::checksum(bytes.data(), body);
  if (stored != actual) {
    fail(ErrorCode::Integrity, source + ": checksum mismatch (file is corrupted)");
  }
}

} // namespace detail

const NamedTensor& Container::tensor(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) {
      return t;
    }
  }
  fail(ErrorCode::Format, "container has no tensor '" + name + "'");
}

bool Container::has(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) {
      return true;
    }
  }
  return false;
}

std::vector<std::uint8_t> encode_container(const Container& c) {
  if (c.magic.size() != 4) {
    fail(ErrorCode::InvalidArgument, "container magic must be 4 bytes");
  }
  detail::ByteWriter w;
  w.raw(c.magic);
  w.u32(c.version);
  w.str(c.config_json);
  w.u32(static_cast<std::uint32_t>(c.tensors.size()));
  for (const auto& t : c.tensors) {
    w.str(t.name);
    w.u32(static_cast<std::uint32_t>(t.value.rows()));
    w.u32(static_cast<std::uint32_t>(t.value.cols()));
    for (Eigen::Index r = 0; r < t.value.rows(); ++r) {
      for (Eigen::Index k = 0; k < t.value.cols(); ++k) {
        w.f32(static_cast<float>(t.value(r, k)));
      }
    }
  }
  w.crc();
  return w.bytes();
}

Container decode_container(const std::vector<std::uint8_t>& bytes, const std::string& expected_magic,
                           std::uint32_t max_version, const std::string& source) {
  if (bytes.size() < 12) {
    fail(ErrorCode::Format, source + ": truncated header");
  }
  // The trailing 4 bytes are the checksum; the body reader never sees them.
  detail::ByteReader r(bytes.data(), bytes.size() - 4, source);
  Container c;
  c.magic = r.raw(4, "magic");
  if (!expected_magic.empty() && c.magic != expected_magic) {
    fail(ErrorCode::Format, source + ": bad magic (expected " + expected_magic + ")");
  }
  c.version = r.u32("version");
  if (c.version == 0 || c.version > max_version) {
    fail(ErrorCode::UnsupportedVersion, source + ": unsupported version " + std::to_string(c.version) +
                                            " (supported up to " + std::to_string(max_version) + ")");
  }
  c.config_json = r.str("config");
  const std::uint32_t count = r.u32("tensor count");
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor t;
    t.name = r.str("tensor name");
    const std::uint32_t rows = r.u32("tensor rows");
    const std::uint32_t cols = r.u32("tensor cols");
    if (static_cast<std::uint64_t>(rows) * cols * 4 > r.remaining()) {
      fail(ErrorCode::Format, source + ": truncated tensor '" + t.name + "'");
    }
    t.value.resize(rows, cols);
    for (std::uint32_t a = 0; a < rows; ++a) {
      for (std::uint32_t b = 0; b < cols; ++b) {
        t.value(a, b) = r.f32("tensor data");
      }
    }
    c.tensors.push_back(std::move(t));
  }
  if (r.remaining() != 0) {
    fail(ErrorCode::Format, source + ": unexpected trailing bytes");
  }
  detail::verify_trailing_crc(bytes, source);
  return c;
}

void write_container(const std::string& path, const Container& c) {
  detail::write_file_bytes(path, encode_container(c));
}

Container read_container(const std::string& path, const std::string& expected_magic, std::uint32_t max_version) {
  return decode_container(detail::read_file_bytes(path), expected_magic, max_version, path);
}

} // namespace socialmotion
