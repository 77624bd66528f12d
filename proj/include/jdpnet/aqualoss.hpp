#pragma once

#include "jdpnet/pg_params.hpp"
#include "jdpnet/tensor.hpp"

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace jdp::loss {

struct BlockGrid {
    std::size_t rows = 8;
    std::size_t cols = 8;

    friend bool operator==(const BlockGrid&, const BlockGrid&) = default;
};

/// What the sharpness index measures inside each block.
enum class EdgeMapMode {
    edge_weighted_intensity,  ///< sobel(channel) * channel
    sobel_magnitude,          ///< raw sobel(channel)
};

/// Coefficients and hyperparameters of the AbL score.
///
/// The three component indices are evaluated on pixels rescaled from [0, 1]
/// to [0, 255]; `epsilon` is therefore expressed in 8-bit levels.
struct AblWeights {
    double c1 = 0.029;  ///< colour
    double c2 = 0.295;  ///< sharpness
    double c3 = 3.550;  ///< contrast
    double lambda_imp = 0.0;
    double trim = 0.1;
    std::array<double, 3> channel_weights{0.299, 0.587, 0.114};
    BlockGrid eme_blocks{};
    BlockGrid cti_blocks{};
    double alpha_entropy = 1.0;
    double epsilon = 1.0;
    EdgeMapMode edge_map = EdgeMapMode::edge_weighted_intensity;

    /// Throws ParameterError when an invariant is violated.
    void validate() const;
};

struct ColorIndex {
    double l_coi = 0.0;
    double l = 0.0;  ///< norm of the trimmed opponent means
    double r = 0.0;  ///< root of the summed trimmed opponent variances
};

struct AblBreakdown {
    double l_coi = 0.0;
    double l_si = 0.0;
    double l_cti = 0.0;
    double abl = 0.0;
    double l = 0.0;
    double r = 0.0;
};

struct LossWeights {
    double lambda1 = 0.025;  ///< perceptual
    double lambda2 = 1.0;    ///< KL
    double lambda3 = 0.1;    ///< reconstruction
    double lambda4 = 0.1;    ///< AquaBalanceLoss

    void validate() const;
};

/// Scale applied to [0, 1] pixels before the AbL statistics are taken.
inline constexpr double kMetricScale = 255.0;

ColorIndex color_index(const ImageTensor& img, const AblWeights& w);
double sharpness_index(const ImageTensor& img, const AblWeights& w);
double contrast_index(const ImageTensor& img, const AblWeights& w);
AblBreakdown abl(const ImageTensor& img, const AblWeights& w);

/// |AbL(out) - AbL(reference) + lambda_imp|^2
double aqua_balance_loss(const ImageTensor& out_img, const ImageTensor& in_img, const AblWeights& w);

/// KL(N(mu_p, diag sigma_p^2) || N(mu_q, diag sigma_q^2)).
double kl_diag_gaussian(std::span<const double> mu_p, std::span<const double> sigma_p,
                        std::span<const double> mu_q, std::span<const double> sigma_q);

/// KL of both PG Gaussians against a standard-normal prior.
double pg_kl_to_standard_normal(const PgParams& pg);

/// Mean absolute error.
double reconstruction_loss(const ImageTensor& out, const ImageTensor& gt);

/// Perceptual term hook: (output, ground truth) -> loss value.
using PerceptualTerm = std::function<double(const ImageTensor&, const ImageTensor&)>;

/// Which image the AquaBalanceLoss term compares the output against.
enum class AblReference { ground_truth, degraded_input };

struct CompositeLossOptions {
    PerceptualTerm perceptual;  ///< empty -> contributes 0
    AblReference reference = AblReference::ground_truth;
    const ImageTensor* degraded_input = nullptr;  ///< required for AblReference::degraded_input
};

struct CompositeLoss {
    double perceptual = 0.0;
    double kl = 0.0;
    double reconstruction = 0.0;
    double aqua_balance = 0.0;
    double total = 0.0;
    LossWeights weights;
};

CompositeLoss composite_loss(const ImageTensor& out, const ImageTensor& gt, const PgParams& kl_inputs,
                             const LossWeights& lw, const AblWeights& w,
                             const CompositeLossOptions& options = {});

// ---------------------------------------------------------------------------
// Numerical-gradient diagnostics

enum class AblComponent { coi, si, cti, abl };

struct PixelSample {
    std::size_t y = 0;
    std::size_t x = 0;

    friend bool operator==(const PixelSample&, const PixelSample&) = default;
};

/// Central-difference derivative of one component with respect to every
/// channel value of one pixel.
struct GradientSample {
    PixelSample pixel;
    std::vector<double> per_channel;
};

/// Scalar value of a single component (unweighted for coi/si/cti, the weighted
/// sum for abl).
double component_value(const ImageTensor& img, AblComponent component, const AblWeights& w);

/// Throws ParameterError if a pixel is out of bounds or if any channel value
/// +/- h would leave [0, 1].
std::vector<GradientSample> numerical_gradient(const ImageTensor& img, AblComponent component,
                                               const AblWeights& w, std::span<const PixelSample> pixels,
                                               double h);

/// Seeded choice of up to `count` distinct pixels whose channel values all lie
/// in [h, 1 - h]. Throws InputError when no such pixel exists.
std::vector<PixelSample> select_interior_pixels(const ImageTensor& img, std::size_t count, double h,
                                                unsigned long long seed);

/// True when perturbing any channel of `pixel` by up to +/- h changes neither
/// the trimmed-set membership of the opponent channels nor the location of any
/// block extremum used by the sharpness and contrast indices.
bool is_tie_free(const ImageTensor& img, const AblWeights& w, PixelSample pixel, double h);

struct StepConsistency {
    PixelSample pixel;
    std::size_t channel = 0;
    double coarse = 0.0;
    double fine = 0.0;
    double relative_difference = 0.0;
    bool tie_free = false;
};

/// Compare central differences at two step sizes for every pixel/channel.
std::vector<StepConsistency> step_consistency(const ImageTensor& img, AblComponent component,
                                              const AblWeights& w, std::span<const PixelSample> pixels,
                                              double h_coarse, double h_fine);

/// Pairwise cosine similarities of the sampled coi / si / cti gradients.
/// Entries are empty when either gradient vector has zero norm.
struct GradientAngleReport {
    std::array<std::array<std::optional<double>, 3>, 3> cosine;
    std::array<double, 3> norms{};
};

GradientAngleReport gradient_angle_report(const ImageTensor& img, const AblWeights& w,
                                          std::span<const PixelSample> pixels, double h);

const char* component_name(AblComponent component) noexcept;
AblComponent parse_component(std::string_view name);

}  // namespace jdp::loss
