#include "ergopattern/image.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "ergopattern/errors.hpp"

namespace ergo {

namespace {

class HeaderReader {
public:
  explicit HeaderReader(const std::string& bytes) : bytes_(bytes) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const auto c = static_cast<unsigned char>(bytes_[pos_]);
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(c)) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  long integer(const char* what) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) ++pos_;
    if (pos_ == start || pos_ - start > 9) {
      throw IoError(std::string("graymap: bad or missing ") + what);
    }
    return std::stol(bytes_.substr(start, pos_ - start));
  }

  std::size_t& pos() { return pos_; }

private:
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw IoError("write failed for " + path.string());
  }
}

} // namespace

Graymap parse_pgm(const std::string& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5')) {
    throw IoError("not a portable graymap (expected P2 or P5)");
  }
  const bool binary = bytes[1] == '5';
  HeaderReader reader(bytes);
  reader.pos() = 2;
  const long width = reader.integer("width");
  const long height = reader.integer("height");
  const long maxval = reader.integer("maxval");
  if (width < 1 || height < 1) throw IoError("graymap has zero size");
  if (maxval < 1 || maxval > 65535) throw IoError("graymap maxval out of range");

  Graymap out;
  out.maxval = static_cast<int>(maxval);
  out.samples.resize(height, width);
  if (binary) {
    std::size_t pos = reader.pos();
    if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
      throw IoError("graymap: missing separator before raster");
    }
    ++pos;
    const std::size_t bytes_per = maxval > 255 ? 2 : 1;
    const std::size_t need = static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * bytes_per;
    if (bytes.size() - pos < need) throw IoError("graymap raster truncated");
    for (long r = 0; r < height; ++r) {
      for (long c = 0; c < width; ++c) {
        unsigned v = static_cast<unsigned char>(bytes[pos++]);
        if (bytes_per == 2) v = (v << 8) | static_cast<unsigned char>(bytes[pos++]);
        if (v > static_cast<unsigned>(maxval)) throw IoError("graymap sample exceeds maxval");
        out.samples(r, c) = static_cast<double>(v) / static_cast<double>(maxval);
      }
    }
  } else {
    for (long r = 0; r < height; ++r) {
      for (long c = 0; c < width; ++c) {
        const long v = reader.integer("sample");
        if (v > maxval) throw IoError("graymap sample exceeds maxval");
        out.samples(r, c) = static_cast<double>(v) / static_cast<double>(maxval);
      }
    }
  }
  return out;
}

Graymap read_pgm(const std::filesystem::path& path) {
  try {
    return parse_pgm(read_file(path));
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

std::string encode_pgm(const GrayImage& image) {
  if (image.size() == 0) throw IoError("refusing to encode an empty image");
  std::string out = "P5\n" + std::to_string(image.cols()) + " " + std::to_string(image.rows()) + "\n255\n";
  out.append(reinterpret_cast<const char*>(image.data()), static_cast<std::size_t>(image.size()));
  return out;
}

void write_pgm(const std::filesystem::path& path, const GrayImage& image) {
  write_file(path, encode_pgm(image));
}

std::string encode_ppm(const RgbImage& image) {
  if (image.r.size() == 0) throw IoError("refusing to encode an empty image");
  std::string out = "P6\n" + std::to_string(image.cols()) + " " + std::to_string(image.rows()) + "\n255\n";
  out.reserve(out.size() + static_cast<std::size_t>(3 * image.r.size()));
  for (Eigen::Index r = 0; r < image.rows(); ++r) {
    for (Eigen::Index c = 0; c < image.cols(); ++c) {
      out.push_back(static_cast<char>(image.r(r, c)));
      out.push_back(static_cast<char>(image.g(r, c)));
      out.push_back(static_cast<char>(image.b(r, c)));
    }
  }
  return out;
}

void write_ppm(const std::filesystem::path& path, const RgbImage& image) {
  write_file(path, encode_ppm(image));
}

} // namespace ergo
