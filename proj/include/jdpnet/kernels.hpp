#pragma once

#include "jdpnet/tensor.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace jdp {

enum class Padding {
    same,   ///< zero padding of floor(k/2); preserves H x W
    valid,  ///< no padding; shrinks by k - 1 per axis
};

/// Direct 2D cross-correlation (no kernel flip), stride 1.
ImageTensor conv2d(const ImageTensor& input, const ConvKernel& kernel, Padding padding = Padding::same);

ImageTensor elu(const ImageTensor& x);
ImageTensor sigmoid(const ImageTensor& x);
double elu(double x) noexcept;
double sigmoid(double x) noexcept;
/// log(1 + exp(x)) without overflow.
double softplus(double x) noexcept;

/// 2x2 max pooling with stride 2. Odd trailing rows/columns are dropped.
ImageTensor max_pool2(const ImageTensor& input);

/// Nearest-neighbour 2x upsampling.
ImageTensor upsample2(const ImageTensor& input);

/// Stack a's channels followed by b's channels.
ImageTensor concat_channels(const ImageTensor& a, const ImageTensor& b);

/// Per-channel arithmetic mean over H x W.
std::vector<double> global_avg_pool(const ImageTensor& input);

/// Per-channel mean and population standard deviation (two-pass).
ChannelStats channel_stats(const ImageTensor& input);

/// Normalized 1D Gaussian taps of radius ceil(3 * omega). The 2D filter is
/// the outer product of this vector with itself.
std::vector<double> gaussian_kernel_1d(double omega);

/// Per-channel Gaussian low-pass with replicate-edge padding.
ImageTensor gaussian_blur(const ImageTensor& input, double omega);

/// Sobel gradient magnitude sqrt(Gx^2 + Gy^2) of a single-channel tensor,
/// replicate-edge padding.
ImageTensor sobel_magnitude(const ImageTensor& channel);

/// Elementwise clamp to [lo, hi].
ImageTensor clamp(const ImageTensor& x, double lo = 0.0, double hi = 1.0);

/// Sort, drop floor(trim * n) values from each tail, average the rest.
double alpha_trimmed_mean(std::span<const double> values, double trim);

/// Sum of squared deviations from the trimmed mean over all n values, divided by n.
double alpha_trimmed_variance(std::span<const double> values, double trim);

/// Number of values dropped from each tail for a given trim fraction.
std::size_t trim_count(std::size_t n, double trim);

struct OpponentChannels {
    ImageTensor rg;  ///< R - G
    ImageTensor yb;  ///< (R + G) / 2 - B
};

OpponentChannels opponent_channels(const ImageTensor& rgb);

struct Block {
    std::size_t y0 = 0;
    std::size_t x0 = 0;
    std::size_t height = 0;
    std::size_t width = 0;
    double min = 0.0;
    double max = 0.0;
};

/// Split a single-channel tensor into a rows x cols grid of rectangular blocks.
/// Each block is floor(H / rows) tall (floor(W / cols) wide); the remainder goes
/// to the last block row (column). Blocks are returned in row-major grid order.
std::vector<Block> block_partition(const ImageTensor& channel, std::size_t rows, std::size_t cols);

/// Extents of a 1D split of `length` into `parts` pieces, remainder on the last piece.
std::vector<std::size_t> split_extents(std::size_t length, std::size_t parts);

}  // namespace jdp
