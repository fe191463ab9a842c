// Raw binary blob IO: row-major little-endian binary32 matrices and
// little-endian u32 sequences. Byte order is fixed regardless of host.
#pragma once

#include "cdrift/common.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace cdrift {

// Writes matrix entries row-major as little-endian IEEE-754 binary32.
// Entries must fit in binary32 without overflowing to infinity.
void write_f32_blob(const std::filesystem::path& path, const Mat& m);

// Reads rows*cols little-endian binary32 values into a double matrix.
// The file length must be exactly rows*cols*4 bytes.
Mat read_f32_blob(const std::filesystem::path& path, std::int64_t rows,
                  std::int64_t cols);

void write_u32_blob(const std::filesystem::path& path,
                    const std::vector<std::uint32_t>& values);

std::vector<std::uint32_t> read_u32_blob(const std::filesystem::path& path,
                                         std::int64_t count);

std::int64_t file_size_bytes(const std::filesystem::path& path);

}  // namespace cdrift
