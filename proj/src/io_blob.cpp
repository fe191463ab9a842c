#include "cdrift/io_blob.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <limits>

namespace cdrift {

namespace {

void put_u32_le(std::uint32_t v, unsigned char* out) {
  out[0] = static_cast<unsigned char>(v & 0xff);
  out[1] = static_cast<unsigned char>((v >> 8) & 0xff);
  out[2] = static_cast<unsigned char>((v >> 16) & 0xff);
  out[3] = static_cast<unsigned char>((v >> 24) & 0xff);
}

std::uint32_t get_u32_le(const unsigned char* in) {
  return static_cast<std::uint32_t>(in[0]) |
         (static_cast<std::uint32_t>(in[1]) << 8) |
         (static_cast<std::uint32_t>(in[2]) << 16) |
         (static_cast<std::uint32_t>(in[3]) << 24);
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), ErrorKind::input, "cannot open for writing: " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorKind::input, "cannot open for reading: " + path.string());
  return in;
}

}  // namespace

void write_f32_blob(const std::filesystem::path& path, const Mat& m) {
  auto out = open_out(path);
  std::vector<unsigned char> buf(static_cast<std::size_t>(m.cols()) * 4);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double d = m(i, j);
      require(std::isfinite(d), ErrorKind::input, "non-finite entry in blob write");
      const float f = static_cast<float>(d);
      require(std::isfinite(f), ErrorKind::input, "entry overflows binary32 in blob write");
      put_u32_le(std::bit_cast<std::uint32_t>(f), buf.data() + 4 * j);
    }
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size()));
  }
  require(out.good(), ErrorKind::input, "write failed: " + path.string());
}

Mat read_f32_blob(const std::filesystem::path& path, std::int64_t rows,
                  std::int64_t cols) {
  require(rows >= 0 && cols >= 0, ErrorKind::input, "negative blob shape");
  const std::int64_t expected = rows * cols * 4;
  const std::int64_t actual = file_size_bytes(path);
  require(actual == expected, ErrorKind::input,
          "blob length mismatch for " + path.string() + ": expected " +
              std::to_string(expected) + " bytes, got " + std::to_string(actual));
  auto in = open_in(path);
  Mat m(rows, cols);
  std::vector<unsigned char> buf(static_cast<std::size_t>(cols) * 4);
  for (std::int64_t i = 0; i < rows; ++i) {
    in.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(buf.size()));
    require(in.good() || (in.eof() && i == rows - 1), ErrorKind::input,
            "short read: " + path.string());
    for (std::int64_t j = 0; j < cols; ++j) {
      const float f = std::bit_cast<float>(get_u32_le(buf.data() + 4 * j));
      m(i, j) = static_cast<double>(f);
    }
  }
  return m;
}

void write_u32_blob(const std::filesystem::path& path,
                    const std::vector<std::uint32_t>& values) {
  auto out = open_out(path);
  std::vector<unsigned char> buf(values.size() * 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    put_u32_le(values[i], buf.data() + 4 * i);
  }
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size()));
  require(out.good(), ErrorKind::input, "write failed: " + path.string());
}

std::vector<std::uint32_t> read_u32_blob(const std::filesystem::path& path,
                                         std::int64_t count) {
  const std::int64_t expected = count * 4;
  const std::int64_t actual = file_size_bytes(path);
  require(actual == expected, ErrorKind::input,
          "u32 blob length mismatch for " + path.string() + ": expected " +
              std::to_string(expected) + " bytes, got " + std::to_string(actual));
  auto in = open_in(path);
  std::vector<unsigned char> buf(static_cast<std::size_t>(expected));
  in.read(reinterpret_cast<char*>(buf.data()),
          static_cast<std::streamsize>(buf.size()));
  std::vector<std::uint32_t> values(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i < count; ++i) {
    values[static_cast<std::size_t>(i)] = get_u32_le(buf.data() + 4 * i);
  }
  return values;
}

std::int64_t file_size_bytes(const std::filesystem::path& path) {
  std::error_code ec;
  const auto size = std::filesystem::file_size(path, ec);
  require(!ec, ErrorKind::input, "missing file: " + path.string());
  return static_cast<std::int64_t>(size);
}

}  // namespace cdrift
