#include "jdpnet/fpp.hpp"

#include "jdpnet/errors.hpp"
#include "jdpnet/kernels.hpp"
#include "jdpnet/network.hpp"

#include <cmath>
#include <numeric>

namespace jdp::fpp {

void FppConfig::validate() const {
    if (!(omega > 0.0) || !std::isfinite(omega)) throw ParameterError("omega must be > 0");
    if (!(lambda_bem > 0.0 && lambda_bem < 1.0)) throw ParameterError("lambda_bem must lie in (0, 1)");
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ParameterError("epsilon must be > 0");
    if (target_gray && !std::isfinite(*target_gray)) throw ParameterError("target_gray must be finite");
}

GrayWorldResult gray_world_correct_with_report(const ImageTensor& x, const FppConfig& cfg) {
    cfg.validate();
    const auto means = global_avg_pool(x);
    GrayWorldResult result{x, 0.0, std::vector<double>(x.channels(), 1.0), {}};
    result.target = cfg.target_gray.value_or(std::accumulate(means.begin(), means.end(), 0.0) /
                                             static_cast<double>(means.size()));
    for (std::size_t c = 0; c < x.channels(); ++c) {
        if (std::abs(means[c]) <= cfg.epsilon) {
            result.passthrough.push_back(c);
            continue;
        }
        const double gain = result.target / means[c];
        result.gains[c] = gain;
        for (double& v : result.image.channel(c)) v *= gain;
    }
    return result;
}

ImageTensor gray_world_correct(const ImageTensor& x, const FppConfig& cfg) {
    return gray_world_correct_with_report(x, cfg).image;
}

ImageTensor compute_bem(const ImageTensor& f3, const FppConfig& cfg) {
    cfg.validate();
    const ImageTensor low = gaussian_blur(f3, cfg.omega);
    ImageTensor bem = f3;
    auto b = bem.data();
    const auto l = low.data();
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = b[i] - l[i] + cfg.lambda_bem;
    return bem;
}

ImageTensor bem_blend(const ImageTensor& f3, const ImageTensor& bem, const FppConfig& cfg) {
    cfg.validate();
    if (!f3.same_shape(bem)) {
        throw DimensionError("bem_blend: " + f3.shape_string() + " vs " + bem.shape_string());
    }
    const double lambda = cfg.lambda_bem;
    ImageTensor out = f3;
    auto o = out.data();
    const auto f = f3.data();
    const auto m = bem.data();
    for (std::size_t i = 0; i < o.size(); ++i) {
        // upper branch 1 - (1 - f)(1 - m) / l, rearranged so that m == l returns f exactly
        o[i] = m[i] < lambda ? f[i] * m[i] / lambda : f[i] + (1.0 - f[i]) * (lambda - 1.0 + m[i]) / lambda;
    }
    return out;
}

namespace {

ImageTensor blend_stage(const ImageTensor& f3, const FppConfig& cfg) { return bem_blend(f3, compute_bem(f3, cfg), cfg); }

}  // namespace

ImageTensor fpp_forward(const ImageTensor& f2, const net::NetworkWeights& weights, const FppConfig& cfg) {
    const ConvKernel& out_conv = weights.at("fpp.out");
    if (out_conv.in_channels() != f2.channels()) {
        throw DimensionError("fpp_forward: output conv expects " + std::to_string(out_conv.in_channels()) +
                             " channels, F2 is " + f2.shape_string());
    }
    const ImageTensor fp = blend_stage(gray_world_correct(f2, cfg), cfg);
    return clamp(conv2d(fp, out_conv));
}

ImageTensor fpp_enhance_image(const ImageTensor& img, const FppConfig& cfg) {
    if (img.channels() != 3) throw DimensionError("fpp_enhance_image expects an RGB image");
    return clamp(blend_stage(gray_world_correct(img, cfg), cfg));
}

}  // namespace jdp::fpp
