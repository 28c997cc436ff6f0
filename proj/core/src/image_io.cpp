#include "latch/image_io.hpp"

#include <cctype>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

#include "latch/error.hpp"

#ifdef LATCH_WITH_PNG
#include <png.h>
#endif

namespace latch {
namespace {

class PgmReader {
 public:
  explicit PgmReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  [[noreturn]] void fail(const std::string& what) const {
    std::ostringstream msg;
    msg << "PGM decode error at byte offset " << pos_ << ": " << what;
    throw DecodeError(msg.str());
  }

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const auto c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n' && bytes_[pos_] != '\r')
          ++pos_;
      } else if (std::isspace(c)) {
        ++pos_;
      } else {
        return;
      }
    }
  }

  std::uint64_t read_uint(const char* field) {
    skip_space_and_comments();
    if (pos_ >= bytes_.size()) fail(std::string("unexpected end of data reading ") + field);
    if (!std::isdigit(bytes_[pos_])) fail(std::string("expected decimal ") + field);
    std::uint64_t value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > std::numeric_limits<std::uint32_t>::max())
        fail(std::string(field) + " is too large");
      ++pos_;
    }
    return value;
  }

  std::size_t pos() const { return pos_; }
  void advance(std::size_t n) { pos_ += n; }
  std::size_t remaining() const { return bytes_.size() - pos_; }
  std::uint8_t peek() const { return bytes_[pos_]; }
  std::span<const std::uint8_t> tail() const { return bytes_.subspan(pos_); }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

GrayImage load_pgm(std::span<const std::uint8_t> bytes) {
  PgmReader in(bytes);
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '2'))
    in.fail("malformed magic number (expected P5 or P2)");
  const bool binary = bytes[1] == '5';
  in.advance(2);
  if (in.remaining() == 0 || !(std::isspace(in.peek()) || in.peek() == '#'))
    in.fail("magic number must be followed by whitespace");

  const auto width = in.read_uint("width");
  const auto height = in.read_uint("height");
  if (width == 0 || height == 0) in.fail("zero image dimension");
  const auto maxval = in.read_uint("maxval");
  if (maxval == 0 || maxval > 255) in.fail("maxval must be in [1, 255]");

  const std::size_t count = static_cast<std::size_t>(width) * height;
  std::vector<std::uint8_t> data(count);
  if (binary) {
    if (in.remaining() == 0 || !std::isspace(in.peek()))
      in.fail("expected single whitespace byte before raster");
    in.advance(1);
    if (in.remaining() < count) {
      std::ostringstream what;
      what << "truncated raster: need " << count << " bytes, have " << in.remaining();
      in.fail(what.str());
    }
    const auto raster = in.tail().first(count);
    std::copy(raster.begin(), raster.end(), data.begin());
    for (std::size_t i = 0; i < count; ++i) {
      if (data[i] > maxval) {
        in.advance(i);
        in.fail("sample exceeds maxval");
      }
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      const auto v = in.read_uint("sample");
      if (v > maxval) in.fail("sample exceeds maxval");
      data[i] = static_cast<std::uint8_t>(v);
    }
  }
  return GrayImage(static_cast<std::uint32_t>(width), static_cast<std::uint32_t>(height),
                   std::move(data));
}

std::vector<std::uint8_t> encode_pgm(const GrayImage& img) {
  std::ostringstream header;
  header << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
  const std::string h = header.str();
  std::vector<std::uint8_t> out(h.begin(), h.end());
  const auto px = img.pixels();
  out.insert(out.end(), px.begin(), px.end());
  return out;
}

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open file: " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError("cannot write file: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw LoadError("write failed: " + path);
}

bool png_supported() {
#ifdef LATCH_WITH_PNG
  return true;
#else
  return false;
#endif
}

namespace {

bool has_suffix(const std::string& s, const std::string& suffix) {
  if (s.size() < suffix.size()) return false;
  for (std::size_t i = 0; i < suffix.size(); ++i)
    if (std::tolower(s[s.size() - suffix.size() + i]) != suffix[i]) return false;
  return true;
}

#ifdef LATCH_WITH_PNG
GrayImage load_png(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()))
    throw DecodeError("PNG decode error in " + path + ": " + image.message);
  image.format = PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> data(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, data.data(), 0, nullptr)) {
    const std::string why = image.message;
    png_image_free(&image);
    throw DecodeError("PNG decode error in " + path + ": " + why);
  }
  return GrayImage(image.width, image.height, std::move(data));
}
#endif

}  // namespace

GrayImage load_image(const std::string& path) {
  if (has_suffix(path, ".png")) {
#ifdef LATCH_WITH_PNG
    return load_png(path);
#else
    throw DecodeError("PNG support not compiled in: " + path);
#endif
  }
  const auto bytes = read_file_bytes(path);
  try {
    return load_pgm(bytes);
  } catch (const DecodeError& e) {
    throw DecodeError(path + ": " + e.what());
  }
}

void save_pgm(const std::string& path, const GrayImage& img) {
  write_file_bytes(path, encode_pgm(img));
}

}  // namespace latch
