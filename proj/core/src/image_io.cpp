#include "ctxalign/image_io.hpp"

#include <png.h>

#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "ctxalign/errors.hpp"

namespace ctxalign::image_io {

namespace {

// rethrown as DecodeError after the longjmp
[[noreturn]] void png_error_fn(png_structp png, png_const_charp) {
  longjmp(png_jmpbuf(png), 1);
}

void png_warning_fn(png_structp, png_const_charp) {}

struct PngReadCtx {
  const std::uint8_t* data;
  std::size_t size;
  std::size_t pos;
};

void png_read_bytes(png_structp png, png_bytep out, png_size_t count) {
  auto* ctx = static_cast<PngReadCtx*>(png_get_io_ptr(png));
  if (ctx->pos + count > ctx->size) {
    png_error(png, "read past end of buffer");
  }
  std::memcpy(out, ctx->data + ctx->pos, count);
  ctx->pos += count;
}

void png_write_bytes(png_structp png, png_bytep data, png_size_t count) {
  auto* sink = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  sink->insert(sink->end(), data, data + count);
}

void png_flush(png_structp) {}

std::uint8_t luminance601(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  const double y = 0.299 * r + 0.587 * g + 0.114 * b;
  return static_cast<std::uint8_t>(std::lround(std::min(255.0, std::max(0.0, y))));
}

GrayImage decode_png(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_fn,
                                           png_warning_fn);
  if (!png) throw Error(Errc::decode_error, "libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error(Errc::decode_error, "libpng info init failed");
  }

  std::vector<std::uint8_t> interleaved;
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int channels = 0;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(Errc::decode_error, "corrupt PNG '" + path + "'");
  }

  PngReadCtx ctx{bytes.data(), bytes.size(), 0};
  png_set_read_fn(png, &ctx, png_read_bytes);
  png_read_info(png, info);

  png_set_strip_16(png);
  png_set_palette_to_rgb(png);
  png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  width = png_get_image_width(png, info);
  height = png_get_image_height(png, info);
  channels = png_get_channels(png, info);
  if (width == 0 || height == 0 || (channels != 1 && channels != 3)) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(Errc::decode_error, "unsupported PNG layout in '" + path + "'");
  }

  const std::size_t stride = static_cast<std::size_t>(width) * channels;
  interleaved.resize(stride * height);
  std::vector<png_bytep> rows(height);
  for (png_uint_32 r = 0; r < height; ++r) rows[r] = interleaved.data() + r * stride;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  GrayImage img;
  img.width = static_cast<int>(width);
  img.height = static_cast<int>(height);
  img.pixels.resize(static_cast<std::size_t>(width) * height);
  if (channels == 1) {
    img.pixels.assign(interleaved.begin(), interleaved.end());
  } else {
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
      img.pixels[i] = luminance601(interleaved[3 * i], interleaved[3 * i + 1],
                                   interleaved[3 * i + 2]);
    }
  }
  return img;
}

// P5 (binary) and P2 (ASCII), maxval up to 65535 rescaled to 8 bits.
GrayImage decode_pgm(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::size_t pos = 0;
  auto skip_ws_and_comments = [&] {
    while (pos < bytes.size()) {
      const char c = static_cast<char>(bytes[pos]);
      if (c == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto next_token = [&]() -> std::string {
    skip_ws_and_comments();
    std::string tok;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
      tok.push_back(static_cast<char>(bytes[pos++]));
    }
    return tok;
  };
  auto next_int = [&](const char* what) -> long {
    const std::string tok = next_token();
    try {
      std::size_t used = 0;
      const long v = std::stol(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      return v;
    } catch (const std::exception&) {
      throw Error(Errc::decode_error, std::string("bad PGM ") + what + " in '" + path + "'");
    }
  };

  const std::string magic = next_token();
  const bool binary = magic == "P5";
  if (!binary && magic != "P2") throw Error(Errc::decode_error, "bad PGM magic in '" + path + "'");
  const long width = next_int("width");
  const long height = next_int("height");
  const long maxval = next_int("maxval");
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535) {
    throw Error(Errc::decode_error, "bad PGM header in '" + path + "'");
  }

  GrayImage img;
  img.width = static_cast<int>(width);
  img.height = static_cast<int>(height);
  const std::size_t count = static_cast<std::size_t>(width) * height;
  img.pixels.resize(count);

  if (binary) {
    ++pos;  // single whitespace byte after maxval
    const int bytes_per = maxval > 255 ? 2 : 1;
    if (bytes.size() - pos < count * bytes_per) {
      throw Error(Errc::decode_error, "truncated PGM '" + path + "'");
    }
    for (std::size_t i = 0; i < count; ++i) {
      long v = bytes[pos++];
      if (bytes_per == 2) v = (v << 8) | bytes[pos++];
      img.pixels[i] = static_cast<std::uint8_t>(v * 255 / maxval);
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      const long v = next_int("sample");
      if (v < 0 || v > maxval) throw Error(Errc::decode_error, "PGM sample out of range in '" + path + "'");
      img.pixels[i] = static_cast<std::uint8_t>(v * 255 / maxval);
    }
  }
  return img;
}

}  // namespace

GrayImage decode_image(const std::string& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(Errc::broken_reference, path);
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::broken_reference, path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  static const std::uint8_t png_magic[4] = {0x89, 'P', 'N', 'G'};
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), png_magic, 4) == 0) {
    return decode_png(path, bytes);
  }
  if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '2')) {
    return decode_pgm(path, bytes);
  }
  throw Error(Errc::decode_error, "unrecognized image format in '" + path + "'");
}

std::vector<std::uint8_t> encode_png(const GrayImage& img) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_fn,
                                            png_warning_fn);
  if (!png) throw Error(Errc::decode_error, "libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw Error(Errc::decode_error, "libpng info init failed");
  }

  std::vector<std::uint8_t> out;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(Errc::decode_error, "PNG encoding failed");
  }

  png_set_write_fn(png, &out, png_write_bytes, png_flush);
  png_set_IHDR(png, info, img.width, img.height, 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_bytep> rows(img.height);
  for (int r = 0; r < img.height; ++r) {
    rows[r] = const_cast<png_bytep>(img.pixels.data() + static_cast<std::size_t>(r) * img.width);
  }
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

void write_pgm(const std::string& path, const GrayImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_error, "cannot write '" + path + "'");
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
  if (!out) throw Error(Errc::io_error, "short write to '" + path + "'");
}

}  // namespace ctxalign::image_io
