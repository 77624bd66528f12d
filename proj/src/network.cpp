#include "jdpnet/errors.hpp"
#include "jdpnet/kernels.hpp"
#include "jdpnet/network.hpp"

#include <cmath>
#include <random>

namespace jdp::net {

namespace {

ImageTensor column(std::span<const double> values) {
    return ImageTensor(values.size(), 1, 1, std::vector<double>(values.begin(), values.end()));
}

std::vector<double> flatten(const ImageTensor& t) { return {t.data().begin(), t.data().end()}; }

// Up -> Concat[skip, Up] -> Conv3x3 -> ELU
ImageTensor decoder_stage(const ImageTensor& x, const ImageTensor& skip, const ConvKernel& conv) {
    return elu(conv2d(concat_channels(skip, upsample2(x)), conv));
}

}  // namespace

FeBlockOutput fe_block(const ImageTensor& x, const ConvKernel& conv1, const ConvKernel& conv2) {
    // dropout sits between the two convs and is the identity at inference
    ImageTensor pre_pool = elu(conv2d(elu(conv2d(x, conv1)), conv2));
    ImageTensor pooled = max_pool2(pre_pool);
    return {std::move(pre_pool), std::move(pooled)};
}

ImageTensor ese_layer(const ImageTensor& x, const ConvKernel& w1, const ConvKernel& w2) {
    if (w1.kernel_height() != 1 || w2.kernel_height() != 1) throw DimensionError("ese_layer expects 1x1 kernels");
    if (w2.out_channels() != x.channels()) {
        throw DimensionError("ese_layer: gate has " + std::to_string(w2.out_channels()) + " channels, input is " +
                             x.shape_string());
    }
    const auto pooled = global_avg_pool(x);
    const ImageTensor gate = sigmoid(conv2d(elu(conv2d(column(pooled), w1)), w2));
    ImageTensor y = x;
    for (std::size_t c = 0; c < y.channels(); ++c) {
        const double g = gate.at(c, 0, 0);
        for (double& v : y.channel(c)) v *= g;
    }
    return y;
}

ResBlockWeights res_block_weights(const NetworkWeights& weights, std::string_view prefix) {
    const std::string p(prefix);
    return {weights.at(p + ".conv1"), weights.at(p + ".conv2"), weights.at(p + ".ese.w1"), weights.at(p + ".ese.w2")};
}

ImageTensor ese_resblock(const ImageTensor& x, const ResBlockWeights& w) {
    if (w.conv2.out_channels() != x.channels()) {
        throw DimensionError("ese_resblock: branch emits " + std::to_string(w.conv2.out_channels()) +
                             " channels, residual has " + x.shape_string());
    }
    ImageTensor y = ese_layer(conv2d(elu(conv2d(x, w.conv1)), w.conv2), w.ese_w1, w.ese_w2);
    auto yd = y.data();
    const auto xd = x.data();
    for (std::size_t i = 0; i < yd.size(); ++i) yd[i] += xd[i];
    return y;
}

JfeOutput jfe_forward(const ImageTensor& img, const NetworkWeights& weights) {
    if (img.channels() != 3) throw DimensionError("jfe_forward expects an RGB image, got " + img.shape_string());
    if (img.height() % 8 != 0 || img.width() % 8 != 0) {
        throw DimensionError("jfe_forward: height and width must be divisible by 8, got " + img.shape_string());
    }
    std::vector<ImageTensor> skips;
    ImageTensor x = img;
    for (const char* block : {"fe1", "fe2", "fe3"}) {
        const std::string b(block);
        auto out = fe_block(x, weights.at(b + ".conv1"), weights.at(b + ".conv2"));
        skips.push_back(std::move(out.pre_pool));
        x = std::move(out.pooled);
    }
    ImageTensor bottleneck = ese_resblock(x, res_block_weights(weights, "jfe.res"));

    ImageTensor y = decoder_stage(bottleneck, skips[2], weights.at("dec3.conv"));
    y = decoder_stage(y, skips[1], weights.at("dec2.conv"));
    y = decoder_stage(y, skips[0], weights.at("dec1.conv"));
    return {std::move(y), std::move(bottleneck), std::move(skips)};
}

PgOutput pg_module(const ImageTensor& f1, const NetworkWeights& weights, PgMode mode) {
    const ConvKernel& conv_a = weights.at("pg.mean_a");
    if (conv_a.in_channels() != f1.channels()) {
        throw DimensionError("pg_module: expects " + std::to_string(conv_a.in_channels()) + " channels, F1 is " +
                             f1.shape_string());
    }
    const ChannelStats stats = channel_stats(f1);
    const ImageTensor mu = column(stats.means);
    const ImageTensor sigma = column(stats.stds);

    PgOutput out;
    out.params.a = flatten(conv2d(mu, conv_a));
    out.params.m = flatten(conv2d(mu, weights.at("pg.mean_m")));
    out.params.b = flatten(conv2d(sigma, weights.at("pg.std_b")));
    out.params.n = flatten(conv2d(sigma, weights.at("pg.std_n")));
    for (double& v : out.params.m) v = softplus(v);
    for (double& v : out.params.n) v = softplus(v);

    const std::size_t n = out.params.a.size();
    out.mu_opt.resize(n);
    out.sigma_opt.resize(n);
    if (!mode.sampled) {
        for (std::size_t i = 0; i < n; ++i) {
            out.mu_opt[i] = out.params.a[i];
            out.sigma_opt[i] = softplus(out.params.b[i]);
        }
    } else {
        std::mt19937_64 rng(mode.seed);
        std::normal_distribution<double> z(0.0, 1.0);
        for (std::size_t i = 0; i < n; ++i) out.mu_opt[i] = out.params.a[i] + out.params.m[i] * z(rng);
        for (std::size_t i = 0; i < n; ++i) out.sigma_opt[i] = softplus(out.params.b[i] + out.params.n[i] * z(rng));
    }
    return out;
}

ImageTensor adain(const ImageTensor& content, std::span<const double> mu_opt, std::span<const double> sigma_opt,
                  double eps) {
    if (mu_opt.size() != content.channels() || sigma_opt.size() != content.channels()) {
        throw DimensionError("adain: target vectors must have one entry per channel of " + content.shape_string());
    }
    if (!(eps > 0.0)) throw ParameterError("adain: epsilon must be > 0");
    const ChannelStats stats = channel_stats(content);
    ImageTensor out = content;
    for (std::size_t c = 0; c < content.channels(); ++c) {
        if (!(sigma_opt[c] >= 0.0)) throw ParameterError("adain: target standard deviations must be >= 0");
        const double scale = sigma_opt[c] / (stats.stds[c] + eps);
        for (double& v : out.channel(c)) v = scale * (v - stats.means[c]) + mu_opt[c];
    }
    return out;
}

PbOutput pb_forward(const ImageTensor& f1, const NetworkWeights& weights, PgMode mode) {
    PgOutput pg = pg_module(f1, weights, mode);
    ImageTensor f2 = ese_resblock(adain(f1, pg.mu_opt, pg.sigma_opt), res_block_weights(weights, "pb.res"));
    return {std::move(f2), std::move(pg.params)};
}

ImageTensor jdpnet_forward(const ImageTensor& img, const NetworkWeights& weights, const fpp::FppConfig& cfg,
                           PgMode mode) {
    for (double v : img.data()) {
        if (!(v >= 0.0 && v <= 1.0)) throw ParameterError("jdpnet_forward: pixel values must lie in [0, 1]");
    }
    const JfeOutput jfe = jfe_forward(img, weights);
    const PbOutput pb = pb_forward(jfe.f1, weights, mode);
    return fpp::fpp_forward(pb.f2, weights, cfg);
}

}  // namespace jdp::net
