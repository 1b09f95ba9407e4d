#pragma once

#include <filesystem>

#include "cloakvit/tensor.hpp"

namespace cloakvit {

/// 8-bit PNG to RGB. Grayscale is promoted; alpha and 16-bit inputs are rejected.
Image read_png(const std::filesystem::path& path);

/// Writes 1- or 3-channel images; the file appears atomically.
void write_png(const Image& img, const std::filesystem::path& path);

}  // namespace cloakvit
