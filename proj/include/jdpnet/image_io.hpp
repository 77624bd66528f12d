#pragma once

#include "jdpnet/tensor.hpp"

#include <cstdint>
#include <filesystem>

namespace jdp::io {

/// Decode an 8-bit PNG or JPEG into a 3 x H x W tensor with values k / 255.
/// Grayscale is expanded to RGB and alpha is composited onto black.
ImageTensor read_image(const std::filesystem::path& path);

/// Encode a 1- or 3-channel tensor as an 8-bit PNG (values clamped to [0, 1],
/// quantized round-half-up).
void write_png(const std::filesystem::path& path, const ImageTensor& img);

/// floor(255 v + 0.5) after clamping v to [0, 1].
std::uint8_t quantize(double v) noexcept;

/// True for .png / .jpg / .jpeg (any case).
bool is_supported_image(const std::filesystem::path& path);

/// Replicate-pad the bottom and right edges up to the next multiple of `multiple`.
ImageTensor pad_to_multiple(const ImageTensor& img, std::size_t multiple);

/// Top-left height x width window.
ImageTensor crop(const ImageTensor& img, std::size_t height, std::size_t width);

}  // namespace jdp::io
