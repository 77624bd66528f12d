#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace jdp {

/// Dense C x H x W array of doubles, channel-major, row-major within a channel.
///
/// Used both for pixel-domain images (values in [0, 1]) and for unbounded
/// feature maps. Every tensor has at least one element.
class ImageTensor {
public:
    ImageTensor(std::size_t channels, std::size_t height, std::size_t width, double fill = 0.0);
    ImageTensor(std::size_t channels, std::size_t height, std::size_t width, std::vector<double> data);

    std::size_t channels() const noexcept { return channels_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t width() const noexcept { return width_; }
    std::size_t plane_size() const noexcept { return height_ * width_; }
    std::size_t size() const noexcept { return data_.size(); }

    double& at(std::size_t c, std::size_t y, std::size_t x) noexcept {
        return data_[(c * height_ + y) * width_ + x];
    }
    double at(std::size_t c, std::size_t y, std::size_t x) const noexcept {
        return data_[(c * height_ + y) * width_ + x];
    }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }

    std::span<double> channel(std::size_t c);
    std::span<const double> channel(std::size_t c) const;

    /// Copy of channels [first, first + count).
    ImageTensor slice_channels(std::size_t first, std::size_t count) const;

    bool same_shape(const ImageTensor& other) const noexcept {
        return channels_ == other.channels_ && height_ == other.height_ && width_ == other.width_;
    }
    bool all_finite() const noexcept;
    std::string shape_string() const;

    friend bool operator==(const ImageTensor&, const ImageTensor&) = default;

private:
    std::size_t channels_;
    std::size_t height_;
    std::size_t width_;
    std::vector<double> data_;
};

/// Per-channel population mean and standard deviation.
struct ChannelStats {
    std::vector<double> means;
    std::vector<double> stds;
};

/// Convolution weights laid out [out][in][ky][kx], plus one bias per output channel.
class ConvKernel {
public:
    ConvKernel(std::size_t out_channels, std::size_t in_channels, std::size_t kernel_height,
               std::size_t kernel_width);
    ConvKernel(std::size_t out_channels, std::size_t in_channels, std::size_t kernel_height,
               std::size_t kernel_width, std::vector<double> weights, std::vector<double> bias);

    std::size_t out_channels() const noexcept { return out_; }
    std::size_t in_channels() const noexcept { return in_; }
    std::size_t kernel_height() const noexcept { return kh_; }
    std::size_t kernel_width() const noexcept { return kw_; }

    double& weight(std::size_t o, std::size_t i, std::size_t ky, std::size_t kx) noexcept {
        return weights_[((o * in_ + i) * kh_ + ky) * kw_ + kx];
    }
    double weight(std::size_t o, std::size_t i, std::size_t ky, std::size_t kx) const noexcept {
        return weights_[((o * in_ + i) * kh_ + ky) * kw_ + kx];
    }

    std::span<double> weights() noexcept { return weights_; }
    std::span<const double> weights() const noexcept { return weights_; }
    std::span<double> bias() noexcept { return bias_; }
    std::span<const double> bias() const noexcept { return bias_; }

    std::string shape_string() const;

    friend bool operator==(const ConvKernel&, const ConvKernel&) = default;

private:
    void validate() const;

    std::size_t out_;
    std::size_t in_;
    std::size_t kh_;
    std::size_t kw_;
    std::vector<double> weights_;
    std::vector<double> bias_;
};

}  // namespace jdp
