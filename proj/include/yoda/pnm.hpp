#pragma once

#include <filesystem>

#include "yoda/image.hpp"

namespace yoda {

// Binary PGM (P5, 1 channel) / PPM (P6, 3 channels), maxval 255.
// Encode: round(v*255) clamped to [0,255]; decode: v/255. Round-tripping an
// 8-bit-quantized image is lossless.
void write_pnm(const std::filesystem::path& path, const ImageTensor& img);
ImageTensor read_pnm(const std::filesystem::path& path);

} // namespace yoda
