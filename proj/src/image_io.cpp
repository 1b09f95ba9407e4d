#include "cloakvit/image_io.hpp"

#include <cstring>
#include <system_error>

#include <png.h>

#include "cloakvit/error.hpp"
#include "cloakvit/file_util.hpp"

namespace cloakvit {

namespace fs = std::filesystem;

Image read_png(const fs::path& path) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.c_str())) {
    const std::string msg = png.message;
    png_image_free(&png);
    if (!fs::exists(path)) throw Error(ErrorCode::Io, "cannot open " + path.string());
    throw Error(ErrorCode::Format, path.string() + ": not a readable PNG (" + msg + ")");
  }
  if (png.format & PNG_FORMAT_FLAG_ALPHA) {
    png_image_free(&png);
    throw Error(ErrorCode::Format,
                path.string() + ": images with an alpha channel are not supported");
  }
  if (png.format & PNG_FORMAT_FLAG_LINEAR) {
    png_image_free(&png);
    throw Error(ErrorCode::Format, path.string() + ": 16-bit PNGs are not supported");
  }
  png.format = PNG_FORMAT_RGB;
  Image img(png.height, png.width, 3);
  if (!png_image_finish_read(&png, nullptr, img.data.data(), 0, nullptr)) {
    const std::string msg = png.message;
    png_image_free(&png);
    throw Error(ErrorCode::Format, path.string() + ": " + msg);
  }
  return img;
}

void write_png(const Image& img, const fs::path& path) {
  if (img.channels != 1 && img.channels != 3) {
    throw Error(ErrorCode::Shape, "PNG output supports 1 or 3 channels");
  }
  if (img.data.size() != img.height * img.width * img.channels) {
    throw Error(ErrorCode::Shape, "image buffer length does not match its dimensions");
  }
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(img.width);
  png.height = static_cast<png_uint_32>(img.height);
  png.format = img.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;

  const fs::path tmp = temp_sibling(path);
  if (!png_image_write_to_file(&png, tmp.c_str(), 0, img.data.data(), 0, nullptr)) {
    const std::string msg = png.message;
    std::error_code ec;
    fs::remove(tmp, ec);
    throw Error(ErrorCode::Io, "cannot write " + path.string() + ": " + msg);
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::Io, "cannot move output into place: " + path.string());
  }
}

}  // namespace cloakvit
