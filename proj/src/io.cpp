#include "kboot/io.hpp"

#include <fmt/format.h>
#include <png.h>

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace kboot::io {

namespace {

constexpr std::uint32_t kMaxStored = 65535;

struct Quantized {
  std::size_t rows = 0, cols = 0;
  std::uint32_t maxval = kMaxStored;
  std::vector<std::uint16_t> samples;
};

Quantized quantize(const Image& image, double value_max) {
  Quantized q{image.n_fe(), image.n_pe(), kMaxStored, std::vector<std::uint16_t>(image.size())};
  for (std::size_t i = 0; i < image.size(); ++i) {
    const double s = std::round(image[i] / value_max * kMaxStored);
    q.samples[i] = static_cast<std::uint16_t>(std::clamp(s, 0.0, double{kMaxStored}));
  }
  return q;
}

// ---- PNG ------------------------------------------------------------------

struct PngBuffer {
  std::vector<std::byte>* out = nullptr;
  std::span<const std::byte> in;
  std::size_t pos = 0;
};

void png_write_cb(png_structp png, png_bytep data, png_size_t len) {
  auto* buf = static_cast<PngBuffer*>(png_get_io_ptr(png));
  const auto* p = reinterpret_cast<const std::byte*>(data);
  buf->out->insert(buf->out->end(), p, p + len);
}

void png_flush_cb(png_structp) {}

void png_read_cb(png_structp png, png_bytep data, png_size_t len) {
  auto* buf = static_cast<PngBuffer*>(png_get_io_ptr(png));
  if (buf->pos + len > buf->in.size()) png_error(png, "truncated PNG stream");
  std::memcpy(data, buf->in.data() + buf->pos, len);
  buf->pos += len;
}

// libpng reports errors by longjmp; the two functions below keep every
// C++ object with a destructor outside the setjmp frame.
bool png_encode_raw(const Quantized& q, std::vector<std::byte>& out, std::vector<png_bytep>& rows_ptr) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    return false;
  }
  PngBuffer buf{&out, {}, 0};
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_set_write_fn(png, &buf, png_write_cb, png_flush_cb);
  png_set_IHDR(png, info, static_cast<png_uint_32>(q.cols), static_cast<png_uint_32>(q.rows), 16,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows_ptr.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

std::vector<std::byte> encode_png(const Quantized& q) {
  std::vector<std::uint8_t> raw(q.samples.size() * 2);
  for (std::size_t i = 0; i < q.samples.size(); ++i) {
    raw[2 * i] = static_cast<std::uint8_t>(q.samples[i] >> 8);
    raw[2 * i + 1] = static_cast<std::uint8_t>(q.samples[i] & 0xff);
  }
  std::vector<png_bytep> rows(q.rows);
  for (std::size_t r = 0; r < q.rows; ++r) rows[r] = raw.data() + r * q.cols * 2;
  std::vector<std::byte> out;
  if (!png_encode_raw(q, out, rows)) throw IoError("PNG encoding failed");
  return out;
}

struct PngHeader {
  png_uint_32 width = 0, height = 0;
  int depth = 0;
};

bool png_decode_raw(std::span<const std::byte> bytes, PngHeader& hdr, std::vector<std::uint8_t>& raw,
                    std::vector<png_bytep>& rows, std::string& error) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return false;
  }
  PngBuffer buf{nullptr, bytes, 0};
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    error = "malformed or truncated PNG";
    return false;
  }
  png_set_read_fn(png, &buf, png_read_cb);
  png_read_info(png, info);

  const int color = png_get_color_type(png, info);
  int depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
    depth = 8;
  }
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (color == PNG_COLOR_TYPE_RGB || color == PNG_COLOR_TYPE_RGB_ALPHA || color == PNG_COLOR_TYPE_PALETTE) {
    png_set_rgb_to_gray_fixed(png, 1, -1, -1);
  }
  png_read_update_info(png, info);

  hdr.width = png_get_image_width(png, info);
  hdr.height = png_get_image_height(png, info);
  hdr.depth = png_get_bit_depth(png, info);
  const png_size_t stride = png_get_rowbytes(png, info);
  raw.resize(stride * hdr.height);
  rows.resize(hdr.height);
  for (png_uint_32 r = 0; r < hdr.height; ++r) rows[r] = raw.data() + r * stride;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

Quantized decode_png(std::span<const std::byte> bytes) {
  PngHeader hdr;
  std::vector<std::uint8_t> raw;
  std::vector<png_bytep> rows;
  std::string error;
  if (!png_decode_raw(bytes, hdr, raw, rows, error)) throw FormatError(error.empty() ? "PNG decoding failed" : error, 0);

  Quantized q;
  q.rows = hdr.height;
  q.cols = hdr.width;
  q.maxval = hdr.depth == 16 ? 65535u : 255u;
  q.samples.resize(q.rows * q.cols);
  for (std::size_t i = 0; i < q.samples.size(); ++i) {
    q.samples[i] = hdr.depth == 16 ? static_cast<std::uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1])
                                   : raw[i];
  }
  return q;
}

// ---- PGM ------------------------------------------------------------------

std::vector<std::byte> encode_pgm(const Quantized& q) {
  const std::string header = fmt::format("P5\n{} {}\n{}\n", q.cols, q.rows, q.maxval);
  std::vector<std::byte> out(header.size() + q.samples.size() * 2);
  std::memcpy(out.data(), header.data(), header.size());
  std::byte* p = out.data() + header.size();
  for (const auto s : q.samples) {
    *p++ = static_cast<std::byte>(s >> 8);
    *p++ = static_cast<std::byte>(s & 0xff);
  }
  return out;
}

Quantized decode_pgm(std::span<const std::byte> bytes) {
  std::size_t pos = 2;  // past "P5"
  auto next_token = [&]() -> std::uint64_t {
    while (pos < bytes.size()) {
      const char ch = static_cast<char>(bytes[pos]);
      if (ch == '#') {
        while (pos < bytes.size() && static_cast<char>(bytes[pos]) != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(ch))) {
        ++pos;
      } else {
        break;
      }
    }
    const std::size_t start = pos;
    std::uint64_t v = 0;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
      v = v * 10 + static_cast<std::uint64_t>(static_cast<char>(bytes[pos]) - '0');
      if (v > (1u << 30)) throw FormatError("PGM header value too large", start);
      ++pos;
    }
    if (pos == start) throw FormatError("PGM header truncated or malformed", start);
    return v;
  };
  Quantized q;
  q.cols = next_token();
  q.rows = next_token();
  q.maxval = static_cast<std::uint32_t>(next_token());
  if (q.maxval == 0 || q.maxval > 65535) throw FormatError("PGM maxval out of range", pos);
  if (pos >= bytes.size()) throw FormatError("PGM header truncated", pos);
  ++pos;  // single whitespace before raster

  const std::size_t bpp = q.maxval > 255 ? 2 : 1;
  const std::size_t need = q.rows * q.cols * bpp;
  if (bytes.size() - pos < need) throw FormatError("PGM raster truncated", bytes.size());
  q.samples.resize(q.rows * q.cols);
  for (std::size_t i = 0; i < q.samples.size(); ++i) {
    if (bpp == 2) {
      q.samples[i] = static_cast<std::uint16_t>((std::to_integer<unsigned>(bytes[pos]) << 8) |
                                                std::to_integer<unsigned>(bytes[pos + 1]));
    } else {
      q.samples[i] = std::to_integer<std::uint16_t>(bytes[pos]);
    }
    pos += bpp;
  }
  return q;
}

// ---- little-endian helpers -------------------------------------------------

void put_u32(std::vector<std::byte>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(std::span<const std::byte> bytes, std::size_t pos) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::to_integer<std::uint32_t>(bytes[pos + i]) << (8 * i);
  return v;
}

constexpr char kMagic[4] = {'K', 'S', 'P', '1'};

}  // namespace

ImageFormat format_from_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".png") return ImageFormat::png16;
  if (ext == ".pgm") return ImageFormat::pgm16;
  throw IoError(fmt::format("{}: unknown image extension (expected .png or .pgm)", path.string()));
}

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
  return std::filesystem::path(path.string() + ".meta");
}

std::vector<std::byte> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("{}: cannot open for reading", path.string()));
  std::vector<char> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError(fmt::format("{}: read failed", path.string()));
  std::vector<std::byte> out(data.size());
  std::memcpy(out.data(), data.data(), data.size());
  return out;
}

void write_file(const std::filesystem::path& path, std::span<const std::byte> bytes) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("{}: cannot open for writing", path.string()));
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError(fmt::format("{}: write failed", path.string()));
}

void save_image(const Image& image, const std::filesystem::path& path, ImageFormat format) {
  if (image.size() == 0) throw DimensionError("save_image: empty image");
  double value_max = *std::max_element(image.values().begin(), image.values().end());
  if (!(value_max > 0.0) || !std::isfinite(value_max)) value_max = 1.0;

  const Quantized q = quantize(image, value_max);
  write_file(path, format == ImageFormat::png16 ? encode_png(q) : encode_pgm(q));

  const std::string meta = fmt::format("value_max={:.17g}\n", value_max);
  write_file(sidecar_path(path), std::as_bytes(std::span(meta.data(), meta.size())));
}

void save_image(const Image& image, const std::filesystem::path& path) {
  save_image(image, path, format_from_extension(path));
}

std::optional<double> read_value_max(const std::filesystem::path& path) {
  std::ifstream in(sidecar_path(path));
  if (!in) return std::nullopt;
  std::string line;
  while (std::getline(in, line)) {
    constexpr std::string_view key = "value_max=";
    if (line.rfind(key, 0) != 0) continue;
    try {
      std::size_t used = 0;
      const double v = std::stod(line.substr(key.size()), &used);
      if (std::isfinite(v) && v > 0.0) return v;
    } catch (const std::exception&) {
    }
    return std::nullopt;
  }
  return std::nullopt;
}

Image load_image(const std::filesystem::path& path) {
  const std::vector<std::byte> bytes = read_file(path);
  Quantized q;
  static constexpr unsigned char kPngSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPngSig, 8) == 0) {
    q = decode_png(bytes);
  } else if (bytes.size() >= 2 && static_cast<char>(bytes[0]) == 'P' && static_cast<char>(bytes[1]) == '5') {
    q = decode_pgm(bytes);
  } else {
    throw FormatError(fmt::format("{}: not a PNG or binary PGM file", path.string()), 0);
  }
  if (q.rows < 2 || q.cols < 2) throw DimensionError(fmt::format("{}: image smaller than 2x2", path.string()));

  const std::optional<double> value_max = read_value_max(path);
  if (!value_max) {
    std::cerr << "warning: " << sidecar_path(path).string()
              << " missing or unreadable; assuming value_max=1\n";
  }
  const double scale = value_max.value_or(1.0) / static_cast<double>(q.maxval);
  Image img(q.rows, q.cols);
  for (std::size_t i = 0; i < img.size(); ++i) img[i] = q.samples[i] * scale;
  return img;
}

std::vector<std::byte> encode_kspace(const KSpace& kspace) {
  if (kspace.n_fe() > UINT32_MAX || kspace.n_pe() > UINT32_MAX) throw DimensionError("KSP1: grid too large");
  std::vector<std::byte> out;
  out.reserve(12 + kspace.size() * 8);
  for (const char c : kMagic) out.push_back(static_cast<std::byte>(c));
  put_u32(out, static_cast<std::uint32_t>(kspace.n_fe()));
  put_u32(out, static_cast<std::uint32_t>(kspace.n_pe()));
  for (const auto& z : kspace.values()) {
    put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(z.real())));
    put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(z.imag())));
  }
  return out;
}

KSpace decode_kspace(std::span<const std::byte> bytes) {
  if (bytes.size() < 4) throw FormatError("KSP1: truncated magic", bytes.size());
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError("KSP1: bad magic", 0);
  if (bytes.size() < 12) throw FormatError("KSP1: truncated header", bytes.size());
  const std::uint32_t n_fe = get_u32(bytes, 4);
  const std::uint32_t n_pe = get_u32(bytes, 8);
  if (n_fe < 2) throw FormatError("KSP1: n_fe must be >= 2", 4);
  if (n_pe < 2) throw FormatError("KSP1: n_pe must be >= 2", 8);
  const std::uint64_t expected = 12 + std::uint64_t{n_fe} * n_pe * 8;
  if (bytes.size() < expected) throw FormatError("KSP1: truncated sample data", bytes.size());
  if (bytes.size() > expected) throw FormatError("KSP1: trailing bytes after sample data", expected);

  KSpace k(n_fe, n_pe);
  std::size_t pos = 12;
  for (auto& z : k.values()) {
    const float re = std::bit_cast<float>(get_u32(bytes, pos));
    const float im = std::bit_cast<float>(get_u32(bytes, pos + 4));
    z = {re, im};
    pos += 8;
  }
  return k;
}

void save_kspace(const KSpace& kspace, const std::filesystem::path& path) {
  write_file(path, encode_kspace(kspace));
}

KSpace load_kspace(const std::filesystem::path& path) {
  try {
    return decode_kspace(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.detail(), e.offset());
  }
}

}  // namespace kboot::io
