#ifndef RDA_IMAGE_IO_HPP
#define RDA_IMAGE_IO_HPP

#include <filesystem>
#include <string>

#include "rda/image.hpp"

namespace rda::io {

// 8-bit binary PGM (P5, one channel) and PPM (P6, three channels). Samples
// map linearly between [0, maxval] and [0, 1]; values outside [0, 1] are
// clamped on write.
Image read_pnm(const std::filesystem::path& path);
void write_pnm(const std::filesystem::path& path, const Image& image);

// FIMG: ASCII header "FIMG <H> <W> <C>\n" followed by H*W*C little-endian
// float32 values, planar, row-major within each channel.
Image read_fimg(const std::filesystem::path& path);
void write_fimg(const std::filesystem::path& path, const Image& image);

/// Dispatches on the file magic.
Image read_image(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over the target.
void write_atomic(const std::filesystem::path& path, const std::string& bytes);

void append_f32_le(std::string& out, float value);
float read_f32_le(const char* bytes);

}  // namespace rda::io

#endif  // RDA_IMAGE_IO_HPP
