#pragma once

#include "jdpnet/tensor.hpp"

#include <optional>
#include <vector>

namespace jdp::net {
class NetworkWeights;
}

namespace jdp::fpp {

struct FppConfig {
    double omega = 1.5;       ///< Gaussian scale of the low-pass
    double lambda_bem = 0.5;  ///< BEM pivot / intensity, in (0, 1)
    std::optional<double> target_gray;  ///< defaults to the mean of the channel means
    double epsilon = 1e-9;

    void validate() const;
};

struct GrayWorldResult {
    ImageTensor image;
    double target = 0.0;
    std::vector<double> gains;                ///< 1 for pass-through channels
    std::vector<std::size_t> passthrough;     ///< channels with |mean| <= epsilon
};

/// Scale each channel by target / channel_mean.
GrayWorldResult gray_world_correct_with_report(const ImageTensor& x, const FppConfig& cfg);
ImageTensor gray_world_correct(const ImageTensor& x, const FppConfig& cfg);

/// F3 - gaussian_blur(F3, omega) + lambda
ImageTensor compute_bem(const ImageTensor& f3, const FppConfig& cfg);

/// Pivot blend: F3 * BEM / l below the pivot, 1 - (1 - F3)(1 - BEM) / l above it.
ImageTensor bem_blend(const ImageTensor& f3, const ImageTensor& bem, const FppConfig& cfg);

/// Gray-world correction, BEM blend, output conv ("fpp.out"), clamp to [0, 1].
ImageTensor fpp_forward(const ImageTensor& f2, const net::NetworkWeights& weights, const FppConfig& cfg);

/// The same stages without learned weights, applied directly to an RGB image.
ImageTensor fpp_enhance_image(const ImageTensor& img, const FppConfig& cfg);

}  // namespace jdp::fpp
