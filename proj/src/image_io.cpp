#include "rda/image_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "rda/error.hpp"

namespace rda::io {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Reads the next whitespace-delimited header token, skipping '#' comments.
std::string next_token(const std::string& bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    if (bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
      ++pos;
    } else {
      break;
    }
  }
  std::size_t start = pos;
  while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
  return bytes.substr(start, pos - start);
}

int parse_int(const std::string& token, const std::filesystem::path& path) {
  try {
    std::size_t used = 0;
    int v = std::stoi(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception&) {
    throw IoError("malformed header field '" + token + "' in " + path.string());
  }
}

}  // namespace

void append_f32_le(std::string& out, float value) {
  auto bits = std::bit_cast<std::uint32_t>(value);
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
}

float read_f32_le(const char* bytes) {
  std::uint32_t bits = 0;
  for (int b = 0; b < 4; ++b) {
    bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[b])) << (8 * b);
  }
  return std::bit_cast<float>(bits);
}

void write_atomic(const std::filesystem::path& path, const std::string& bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

Image read_pnm(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  std::size_t pos = 0;
  const std::string magic = next_token(bytes, pos);
  int channels = 0;
  if (magic == "P5") {
    channels = 1;
  } else if (magic == "P6") {
    channels = 3;
  } else {
    throw IoError("unsupported PNM magic '" + magic + "' in " + path.string());
  }
  const int width = parse_int(next_token(bytes, pos), path);
  const int height = parse_int(next_token(bytes, pos), path);
  const int maxval = parse_int(next_token(bytes, pos), path);
  if (maxval < 1 || maxval > 255) throw IoError("only 8-bit PNM is supported: " + path.string());
  ++pos;  // single whitespace after maxval
  const std::size_t count = static_cast<std::size_t>(width) * height * channels;
  if (width < 1 || height < 1 || bytes.size() < pos + count) {
    throw IoError("truncated PNM data in " + path.string());
  }
  Image image(height, width, channels);
  for (int i = 0; i < height; ++i) {
    for (int j = 0; j < width; ++j) {
      for (int c = 0; c < channels; ++c) {
        auto raw = static_cast<unsigned char>(
            bytes[pos + (static_cast<std::size_t>(i) * width + j) * channels + c]);
        image.at(c, i, j) = static_cast<double>(raw) / maxval;
      }
    }
  }
  return image;
}

void write_pnm(const std::filesystem::path& path, const Image& image) {
  std::string out = (image.channels() == 1 ? "P5\n" : "P6\n") + std::to_string(image.width()) +
                    " " + std::to_string(image.height()) + "\n255\n";
  for (int i = 0; i < image.height(); ++i) {
    for (int j = 0; j < image.width(); ++j) {
      for (int c = 0; c < image.channels(); ++c) {
        double v = std::clamp(image.at(c, i, j), 0.0, 1.0);
        out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
      }
    }
  }
  write_atomic(path, out);
}

Image read_fimg(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  std::size_t newline = bytes.find('\n');
  if (newline == std::string::npos) throw IoError("missing FIMG header in " + path.string());
  std::istringstream header(bytes.substr(0, newline));
  std::string magic;
  int height = 0, width = 0, channels = 0;
  if (!(header >> magic >> height >> width >> channels) || magic != "FIMG") {
    throw IoError("malformed FIMG header in " + path.string());
  }
  const std::size_t count = static_cast<std::size_t>(height) * width * channels;
  if (height < 1 || width < 1 || bytes.size() != newline + 1 + 4 * count) {
    throw IoError("FIMG payload size mismatch in " + path.string());
  }
  std::vector<double> data(count);
  const char* payload = bytes.data() + newline + 1;
  for (std::size_t k = 0; k < count; ++k) data[k] = read_f32_le(payload + 4 * k);
  return Image(height, width, channels, std::move(data));
}

void write_fimg(const std::filesystem::path& path, const Image& image) {
  std::string out = "FIMG " + std::to_string(image.height()) + " " +
                    std::to_string(image.width()) + " " + std::to_string(image.channels()) + "\n";
  out.reserve(out.size() + 4 * image.size());
  for (double v : image.values()) append_f32_le(out, static_cast<float>(v));
  write_atomic(path, out);
}

Image read_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[4] = {};
  in.read(magic, 4);
  if (std::memcmp(magic, "FIMG", 4) == 0) return read_fimg(path);
  if (magic[0] == 'P' && (magic[1] == '5' || magic[1] == '6')) return read_pnm(path);
  throw IoError("unrecognized image format: " + path.string());
}

}  // namespace rda::io
