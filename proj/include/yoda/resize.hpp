#pragma once

#include "yoda/image.hpp"

namespace yoda {

// Separable Catmull-Rom bicubic (a = -0.5), half-pixel centers, edge-clamped,
// per-output-pixel weight normalization. Downscaling stretches the kernel to
// the scaled support (anti-aliasing). Identity dims return the input as-is.
ImageTensor bicubic_resize(const ImageTensor& img, int out_h, int out_w);

} // namespace yoda
