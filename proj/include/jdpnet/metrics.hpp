#pragma once

#include "jdpnet/aqualoss.hpp"
#include "jdpnet/tensor.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace jdp::metrics {

/// PSNR reported for identical images (and the upper bound for all others).
inline constexpr double kPsnrCap = 100.0;

/// 10 log10(1 / MSE) over all channels, peak value 1.
double psnr(const ImageTensor& a, const ImageTensor& b);

/// Mean SSIM of the luminance planes over every valid 11x11 Gaussian window
/// (sigma 1.5, K1 = 0.01, K2 = 0.03, L = 1).
double ssim(const ImageTensor& a, const ImageTensor& b);

inline constexpr std::size_t kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;

/// Underwater image quality measure. This is exactly the AbL score.
double uiqm(const ImageTensor& img, const loss::AblWeights& w);

/// Guard in the saturation term chroma / (luma + eps).
inline constexpr double kUciqeEpsilon = 1e-3;

/// Opponent-space UCIQE: 0.4680 std(chroma) + 0.2745 (p99 - p1 of luma)
/// + 0.2576 mean(chroma / (luma + eps)), with chroma = sqrt(RG^2 + YB^2).
double uciqe(const ImageTensor& img);

/// Linear-interpolation percentile (q in [0, 1]) of an unsorted sample.
double percentile(std::span<const double> values, double q);

enum class Metric { psnr, ssim, uiqm, uciqe };

std::string_view metric_name(Metric m) noexcept;
Metric parse_metric(std::string_view name);
/// Comma-separated list, e.g. "psnr,ssim,uiqm".
std::vector<Metric> parse_metric_list(std::string_view list);
bool needs_reference(Metric m) noexcept;

struct NamedImage {
    std::string name;  ///< filename stem used for pairing
    ImageTensor image;
};

struct SkippedImage {
    std::string name;
    std::string reason;
};

struct MetricRow {
    std::string image;
    std::vector<double> values;  ///< same order as MetricReport::metrics
};

struct MetricReport {
    std::vector<Metric> metrics;
    std::vector<MetricRow> rows;     ///< sorted by image name
    std::vector<double> aggregate;   ///< arithmetic mean of each column
    std::vector<SkippedImage> skipped;
};

/// Score every test image. Reference metrics pair test and reference images by
/// name; unpaired images are listed in `skipped`. Up to `jobs` images are scored
/// concurrently; the report does not depend on `jobs`.
MetricReport evaluate(std::span<const NamedImage> tests, std::optional<std::span<const NamedImage>> refs,
                      const std::vector<Metric>& metrics, const loss::AblWeights& w, std::size_t jobs = 1);

}  // namespace jdp::metrics
