#include "jdpnet/aqualoss.hpp"

#include "aqualoss_internal.hpp"
#include "jdpnet/errors.hpp"
#include "jdpnet/kernels.hpp"

#include <cmath>

namespace jdp::loss {

namespace detail {

ImageTensor to_metric_domain(const ImageTensor& img) {
    ImageTensor out = img;
    for (double& v : out.data()) v *= kMetricScale;
    return out;
}

ImageTensor luminance(const ImageTensor& rgb) {
    require_rgb(rgb, "luminance");
    ImageTensor out(1, rgb.height(), rgb.width());
    const auto r = rgb.channel(0);
    const auto g = rgb.channel(1);
    const auto b = rgb.channel(2);
    auto y = out.data();
    for (std::size_t i = 0; i < rgb.plane_size(); ++i) y[i] = 0.299 * r[i] + 0.587 * g[i] + 0.114 * b[i];
    return out;
}

ImageTensor edge_map(const ImageTensor& channel, EdgeMapMode mode) {
    ImageTensor edges = sobel_magnitude(channel);
    if (mode == EdgeMapMode::edge_weighted_intensity) {
        auto e = edges.data();
        const auto c = channel.data();
        for (std::size_t i = 0; i < e.size(); ++i) e[i] *= c[i];
    }
    return edges;
}

void require_rgb(const ImageTensor& img, const char* who) {
    if (img.channels() != 3) {
        throw DimensionError(std::string(who) + " expects a 3-channel image, got " + img.shape_string());
    }
}

}  // namespace detail

namespace {

void require_finite(double v, const char* name) {
    if (!std::isfinite(v)) throw ParameterError(std::string(name) + " must be finite");
}

void require_grid(const BlockGrid& g, const char* name) {
    if (g.rows == 0 || g.cols == 0) throw ParameterError(std::string(name) + " must be at least 1x1");
}

// 2 / (k1 k2) * sum over blocks of log((max + eps) / (min + eps))
double eme(const ImageTensor& map, const BlockGrid& grid, double eps) {
    const auto blocks = block_partition(map, grid.rows, grid.cols);
    double sum = 0.0;
    for (const auto& b : blocks) sum += std::log((b.max + eps) / (b.min + eps));
    return 2.0 / static_cast<double>(grid.rows * grid.cols) * sum;
}

}  // namespace

void AblWeights::validate() const {
    require_finite(c1, "c1");
    require_finite(c2, "c2");
    require_finite(c3, "c3");
    require_finite(lambda_imp, "lambda_imp");
    if (!(trim >= 0.0 && trim < 0.5)) throw ParameterError("trim must lie in [0, 0.5)");
    for (double cw : channel_weights) {
        if (!std::isfinite(cw) || cw < 0.0) throw ParameterError("channel weights must be finite and >= 0");
    }
    require_grid(eme_blocks, "eme_blocks");
    require_grid(cti_blocks, "cti_blocks");
    if (!(alpha_entropy > 0.0) || !std::isfinite(alpha_entropy)) throw ParameterError("alpha must be > 0");
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ParameterError("epsilon must be > 0");
}

void LossWeights::validate() const {
    require_finite(lambda1, "lambda1");
    require_finite(lambda2, "lambda2");
    require_finite(lambda3, "lambda3");
    require_finite(lambda4, "lambda4");
}

ColorIndex color_index(const ImageTensor& img, const AblWeights& w) {
    detail::require_rgb(img, "color_index");
    const auto opp = opponent_channels(detail::to_metric_domain(img));
    const double mu_rg = alpha_trimmed_mean(opp.rg.data(), w.trim);
    const double mu_yb = alpha_trimmed_mean(opp.yb.data(), w.trim);
    const double var_rg = alpha_trimmed_variance(opp.rg.data(), w.trim);
    const double var_yb = alpha_trimmed_variance(opp.yb.data(), w.trim);

    ColorIndex out;
    out.l = std::sqrt(mu_rg * mu_rg + mu_yb * mu_yb);
    out.r = std::sqrt(var_rg + var_yb);
    out.l_coi = -0.027 * out.l + 0.159 * out.r;
    return out;
}

double sharpness_index(const ImageTensor& img, const AblWeights& w) {
    detail::require_rgb(img, "sharpness_index");
    const ImageTensor scaled = detail::to_metric_domain(img);
    double total = 0.0;
    for (std::size_t c = 0; c < 3; ++c) {
        const ImageTensor map = detail::edge_map(scaled.slice_channels(c, 1), w.edge_map);
        total += w.channel_weights[c] * eme(map, w.eme_blocks, w.epsilon);
    }
    return total;
}

double contrast_index(const ImageTensor& img, const AblWeights& w) {
    detail::require_rgb(img, "contrast_index");
    const ImageTensor luma = detail::luminance(detail::to_metric_domain(img));
    const auto blocks = block_partition(luma, w.cti_blocks.rows, w.cti_blocks.cols);
    const double alpha = w.alpha_entropy;
    double sum = 0.0;
    for (const auto& b : blocks) {
        const double top = b.max - b.min;
        if (top <= w.epsilon) continue;  // x^a log x -> 0 as x -> 0+
        const double ratio = top / (b.max + b.min);
        sum += alpha * std::pow(ratio, alpha) * std::log(ratio);
    }
    const double weight = -1.0 / static_cast<double>(w.cti_blocks.rows * w.cti_blocks.cols);
    return weight * sum;
}

AblBreakdown abl(const ImageTensor& img, const AblWeights& w) {
    const ColorIndex coi = color_index(img, w);
    AblBreakdown out;
    out.l_coi = coi.l_coi;
    out.l = coi.l;
    out.r = coi.r;
    out.l_si = sharpness_index(img, w);
    out.l_cti = contrast_index(img, w);
    out.abl = w.c1 * out.l_coi + w.c2 * out.l_si + w.c3 * out.l_cti;
    return out;
}

double aqua_balance_loss(const ImageTensor& out_img, const ImageTensor& in_img, const AblWeights& w) {
    const double d = abl(out_img, w).abl - abl(in_img, w).abl + w.lambda_imp;
    return d * d;
}

double kl_diag_gaussian(std::span<const double> mu_p, std::span<const double> sigma_p,
                        std::span<const double> mu_q, std::span<const double> sigma_q) {
    const std::size_t n = mu_p.size();
    if (sigma_p.size() != n || mu_q.size() != n || sigma_q.size() != n) {
        throw DimensionError("kl_diag_gaussian: parameter vectors differ in length");
    }
    double kl = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(sigma_p[i] > 0.0) || !(sigma_q[i] > 0.0)) {
            throw ParameterError("kl_diag_gaussian: standard deviations must be > 0");
        }
        const double dm = mu_p[i] - mu_q[i];
        kl += std::log(sigma_q[i] / sigma_p[i]) +
              (sigma_p[i] * sigma_p[i] + dm * dm) / (2.0 * sigma_q[i] * sigma_q[i]) - 0.5;
    }
    return kl;
}

double pg_kl_to_standard_normal(const PgParams& pg) {
    const std::vector<double> zeros(pg.a.size(), 0.0);
    const std::vector<double> ones(pg.a.size(), 1.0);
    return kl_diag_gaussian(pg.a, pg.m, zeros, ones) + kl_diag_gaussian(pg.b, pg.n, zeros, ones);
}

double reconstruction_loss(const ImageTensor& out, const ImageTensor& gt) {
    if (!out.same_shape(gt)) {
        throw DimensionError("reconstruction_loss: " + out.shape_string() + " vs " + gt.shape_string());
    }
    double sum = 0.0;
    const auto a = out.data();
    const auto b = gt.data();
    for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
    return sum / static_cast<double>(a.size());
}

CompositeLoss composite_loss(const ImageTensor& out, const ImageTensor& gt, const PgParams& kl_inputs,
                             const LossWeights& lw, const AblWeights& w, const CompositeLossOptions& options) {
    lw.validate();
    w.validate();
    const ImageTensor* reference = &gt;
    if (options.reference == AblReference::degraded_input) {
        if (options.degraded_input == nullptr) {
            throw InputError("composite_loss: degraded-input reference selected but no input image given");
        }
        reference = options.degraded_input;
    }

    CompositeLoss loss;
    loss.weights = lw;
    loss.perceptual = options.perceptual ? options.perceptual(out, gt) : 0.0;
    loss.kl = pg_kl_to_standard_normal(kl_inputs);
    loss.reconstruction = reconstruction_loss(out, gt);
    loss.aqua_balance = aqua_balance_loss(out, *reference, w);
    loss.total = lw.lambda1 * loss.perceptual + lw.lambda2 * loss.kl + lw.lambda3 * loss.reconstruction +
                 lw.lambda4 * loss.aqua_balance;
    return loss;
}

}  // namespace jdp::loss
