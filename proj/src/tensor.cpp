#include "jdpnet/tensor.hpp"

#include "jdpnet/errors.hpp"

#include <algorithm>
#include <cmath>

namespace jdp {

namespace {

void check_extent(std::size_t channels, std::size_t height, std::size_t width) {
    if (channels == 0 || height == 0 || width == 0) {
        throw DimensionError("tensor extents must be >= 1, got " + std::to_string(channels) + "x" +
                             std::to_string(height) + "x" + std::to_string(width));
    }
}

}  // namespace

ImageTensor::ImageTensor(std::size_t channels, std::size_t height, std::size_t width, double fill)
    : channels_(channels), height_(height), width_(width) {
    check_extent(channels, height, width);
    data_.assign(channels * height * width, fill);
}

ImageTensor::ImageTensor(std::size_t channels, std::size_t height, std::size_t width,
                         std::vector<double> data)
    : channels_(channels), height_(height), width_(width), data_(std::move(data)) {
    check_extent(channels, height, width);
    if (data_.size() != channels * height * width) {
        throw DimensionError("tensor data length " + std::to_string(data_.size()) +
                             " does not match " + shape_string());
    }
}

std::span<double> ImageTensor::channel(std::size_t c) {
    if (c >= channels_) throw DimensionError("channel index out of range");
    return std::span<double>(data_).subspan(c * plane_size(), plane_size());
}

std::span<const double> ImageTensor::channel(std::size_t c) const {
    if (c >= channels_) throw DimensionError("channel index out of range");
    return std::span<const double>(data_).subspan(c * plane_size(), plane_size());
}

ImageTensor ImageTensor::slice_channels(std::size_t first, std::size_t count) const {
    if (count == 0 || first + count > channels_) {
        throw DimensionError("channel slice out of range for " + shape_string());
    }
    const auto begin = data_.begin() + static_cast<std::ptrdiff_t>(first * plane_size());
    return ImageTensor(count, height_, width_,
                       std::vector<double>(begin, begin + static_cast<std::ptrdiff_t>(count * plane_size())));
}

bool ImageTensor::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

std::string ImageTensor::shape_string() const {
    return std::to_string(channels_) + "x" + std::to_string(height_) + "x" + std::to_string(width_);
}

ConvKernel::ConvKernel(std::size_t out_channels, std::size_t in_channels, std::size_t kernel_height,
                       std::size_t kernel_width)
    : out_(out_channels),
      in_(in_channels),
      kh_(kernel_height),
      kw_(kernel_width),
      weights_(out_channels * in_channels * kernel_height * kernel_width, 0.0),
      bias_(out_channels, 0.0) {
    validate();
}

ConvKernel::ConvKernel(std::size_t out_channels, std::size_t in_channels, std::size_t kernel_height,
                       std::size_t kernel_width, std::vector<double> weights, std::vector<double> bias)
    : out_(out_channels),
      in_(in_channels),
      kh_(kernel_height),
      kw_(kernel_width),
      weights_(std::move(weights)),
      bias_(std::move(bias)) {
    validate();
}

void ConvKernel::validate() const {
    if (out_ == 0 || in_ == 0) throw DimensionError("kernel channel counts must be >= 1");
    if ((kh_ != 1 && kh_ != 3) || (kw_ != 1 && kw_ != 3)) {
        throw DimensionError("kernel spatial size must be 1x1 or 3x3, got " + shape_string());
    }
    if (weights_.size() != out_ * in_ * kh_ * kw_) {
        throw DimensionError("kernel weight count does not match " + shape_string());
    }
    if (bias_.size() != out_) throw DimensionError("kernel bias length must equal out_channels");
    auto finite = [](double v) { return std::isfinite(v); };
    if (!std::all_of(weights_.begin(), weights_.end(), finite) ||
        !std::all_of(bias_.begin(), bias_.end(), finite)) {
        throw ParameterError("kernel contains non-finite values");
    }
}

std::string ConvKernel::shape_string() const {
    return std::to_string(out_) + "x" + std::to_string(in_) + "x" + std::to_string(kh_) + "x" +
           std::to_string(kw_);
}

}  // namespace jdp
