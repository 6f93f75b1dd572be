#include <cctype>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>

#include "trafficlens/imaging.hpp"

namespace trafficlens {
namespace {

class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  // Skips whitespace and '#' comments, then reads a non-negative decimal.
  long next_number(const char* what) {
    skip_blanks();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) {
      throw Error(ErrorKind::MalformedHeader, std::string("expected ") + what);
    }
    long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_++] - '0');
      if (v > std::numeric_limits<int>::max()) throw Error(ErrorKind::MalformedHeader, std::string(what) + " too large");
    }
    return v;
  }

  // Exactly one whitespace byte separates the header from the raster.
  std::size_t raster_start() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw Error(ErrorKind::MalformedHeader, "missing whitespace after maxval");
    }
    return pos_ + 1;
  }

 private:
  void skip_blanks() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 2;
};

}  // namespace

ImageBuffer decode_pnm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    throw Error(ErrorKind::MalformedHeader, "only binary P5/P6 is supported");
  }
  const int channels = bytes[1] == '5' ? 1 : 3;
  HeaderReader rd(bytes);
  const long width = rd.next_number("width");
  const long height = rd.next_number("height");
  const long maxval = rd.next_number("maxval");
  if (width < 1 || height < 1) throw Error(ErrorKind::MalformedHeader, "dimensions must be positive");
  if (maxval != 255) throw Error(ErrorKind::MalformedHeader, "maxval " + std::to_string(maxval) + " unsupported");
  const std::size_t start = rd.raster_start();
  const std::size_t need = static_cast<std::size_t>(width) * height * channels;
  if (bytes.size() - start < need) {
    throw Error(ErrorKind::TruncatedData,
                "raster has " + std::to_string(bytes.size() - start) + " of " + std::to_string(need) + " bytes");
  }
  return ImageBuffer(static_cast<int>(width), static_cast<int>(height), channels,
                     std::vector<std::uint8_t>(bytes.begin() + start, bytes.begin() + start + need));
}

std::vector<std::uint8_t> encode_pnm(const ImageBuffer& img) {
  const std::string header = std::string(img.channels() == 1 ? "P5" : "P6") + "\n" + std::to_string(img.width()) +
                             " " + std::to_string(img.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.data().begin(), img.data().end());
  return out;
}

ImageBuffer read_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_pnm(bytes);
}

void write_pnm(const std::filesystem::path& path, const ImageBuffer& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  const auto bytes = encode_pnm(img);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace trafficlens
