#include "jdpnet/metrics.hpp"

#include "aqualoss_internal.hpp"
#include "jdpnet/errors.hpp"
#include "jdpnet/kernels.hpp"
#include "jdpnet/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace jdp::metrics {

namespace {

void require_same_shape(const ImageTensor& a, const ImageTensor& b, const char* who) {
    if (!a.same_shape(b)) {
        throw DimensionError(std::string(who) + ": shape mismatch " + a.shape_string() + " vs " + b.shape_string());
    }
}

ImageTensor luma_plane(const ImageTensor& img) {
    if (img.channels() == 1) return img;
    return loss::detail::luminance(img);
}

// Normalized 11-tap Gaussian for the SSIM window.
std::vector<double> ssim_taps() {
    std::vector<double> taps(kSsimWindow);
    const double center = static_cast<double>(kSsimWindow / 2);
    double sum = 0.0;
    for (std::size_t i = 0; i < kSsimWindow; ++i) {
        const double d = static_cast<double>(i) - center;
        taps[i] = std::exp(-0.5 * d * d / (kSsimSigma * kSsimSigma));
        sum += taps[i];
    }
    for (double& t : taps) t /= sum;
    return taps;
}

// Separable weighted window sums over every valid window position.
std::vector<double> window_filter(const std::vector<double>& plane, std::size_t h, std::size_t w,
                                  const std::vector<double>& taps) {
    const std::size_t k = taps.size();
    const std::size_t ow = w - k + 1;
    const std::size_t oh = h - k + 1;
    std::vector<double> rows(h * ow);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (std::size_t i = 0; i < k; ++i) acc += taps[i] * plane[y * w + x + i];
            rows[y * ow + x] = acc;
        }
    }
    std::vector<double> out(oh * ow);
    for (std::size_t y = 0; y < oh; ++y) {
        for (std::size_t x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (std::size_t i = 0; i < k; ++i) acc += taps[i] * rows[(y + i) * ow + x];
            out[y * ow + x] = acc;
        }
    }
    return out;
}

}  // namespace

double psnr(const ImageTensor& a, const ImageTensor& b) {
    require_same_shape(a, b, "psnr");
    double ss = 0.0;
    const auto da = a.data();
    const auto db = b.data();
    for (std::size_t i = 0; i < da.size(); ++i) ss += (da[i] - db[i]) * (da[i] - db[i]);
    const double mse = ss / static_cast<double>(da.size());
    if (mse == 0.0) return kPsnrCap;
    return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

double ssim(const ImageTensor& a, const ImageTensor& b) {
    require_same_shape(a, b, "ssim");
    if (a.height() < kSsimWindow || a.width() < kSsimWindow) {
        throw DimensionError("ssim: images must be at least 11x11, got " + a.shape_string());
    }
    const ImageTensor la = luma_plane(a);
    const ImageTensor lb = luma_plane(b);
    const std::size_t h = a.height();
    const std::size_t w = a.width();
    const std::size_t n = h * w;

    std::vector<double> x(la.data().begin(), la.data().end());
    std::vector<double> y(lb.data().begin(), lb.data().end());
    std::vector<double> xx(n), yy(n), xy(n);
    for (std::size_t i = 0; i < n; ++i) {
        xx[i] = x[i] * x[i];
        yy[i] = y[i] * y[i];
        xy[i] = x[i] * y[i];
    }
    const auto taps = ssim_taps();
    const auto mu_x = window_filter(x, h, w, taps);
    const auto mu_y = window_filter(y, h, w, taps);
    const auto e_xx = window_filter(xx, h, w, taps);
    const auto e_yy = window_filter(yy, h, w, taps);
    const auto e_xy = window_filter(xy, h, w, taps);

    constexpr double c1 = (0.01 * 1.0) * (0.01 * 1.0);
    constexpr double c2 = (0.03 * 1.0) * (0.03 * 1.0);
    double sum = 0.0;
    for (std::size_t i = 0; i < mu_x.size(); ++i) {
        const double mx = mu_x[i];
        const double my = mu_y[i];
        const double vx = e_xx[i] - mx * mx;
        const double vy = e_yy[i] - my * my;
        const double cov = e_xy[i] - mx * my;
        sum += ((2.0 * mx * my + c1) * (2.0 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
    }
    return sum / static_cast<double>(mu_x.size());
}

double uiqm(const ImageTensor& img, const loss::AblWeights& w) { return loss::abl(img, w).abl; }

double percentile(std::span<const double> values, double q) {
    if (values.empty()) throw ParameterError("percentile of an empty sample");
    if (!(q >= 0.0 && q <= 1.0)) throw ParameterError("percentile rank must lie in [0, 1]");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double uciqe(const ImageTensor& img) {
    if (img.channels() != 3) throw DimensionError("uciqe expects an RGB image, got " + img.shape_string());
    const ImageTensor luma = loss::detail::luminance(img);
    const auto opp = opponent_channels(img);
    const std::size_t n = img.plane_size();

    std::vector<double> chroma(n);
    double sat_sum = 0.0;
    const auto rg = opp.rg.data();
    const auto yb = opp.yb.data();
    const auto l = luma.data();
    for (std::size_t i = 0; i < n; ++i) {
        chroma[i] = std::sqrt(rg[i] * rg[i] + yb[i] * yb[i]);
        sat_sum += chroma[i] / (l[i] + kUciqeEpsilon);
    }
    const double chroma_mean = std::accumulate(chroma.begin(), chroma.end(), 0.0) / static_cast<double>(n);
    double chroma_ss = 0.0;
    for (double c : chroma) chroma_ss += (c - chroma_mean) * (c - chroma_mean);
    const double chroma_std = std::sqrt(chroma_ss / static_cast<double>(n));
    const double contrast = percentile(l, 0.99) - percentile(l, 0.01);
    const double saturation = sat_sum / static_cast<double>(n);
    return 0.4680 * chroma_std + 0.2745 * contrast + 0.2576 * saturation;
}

std::string_view metric_name(Metric m) noexcept {
    switch (m) {
        case Metric::psnr: return "psnr";
        case Metric::ssim: return "ssim";
        case Metric::uiqm: return "uiqm";
        case Metric::uciqe: return "uciqe";
    }
    return "?";
}

Metric parse_metric(std::string_view name) {
    for (Metric m : {Metric::psnr, Metric::ssim, Metric::uiqm, Metric::uciqe}) {
        if (metric_name(m) == name) return m;
    }
    throw ParameterError("unknown metric '" + std::string(name) + "' (expected psnr|ssim|uiqm|uciqe)");
}

std::vector<Metric> parse_metric_list(std::string_view list) {
    std::vector<Metric> out;
    std::size_t start = 0;
    while (start <= list.size()) {
        const std::size_t comma = list.find(',', start);
        const std::string_view item = list.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        if (item.empty()) throw ParameterError("empty entry in metric list");
        const Metric m = parse_metric(item);
        if (std::find(out.begin(), out.end(), m) != out.end()) {
            throw ParameterError("metric '" + std::string(item) + "' listed twice");
        }
        out.push_back(m);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

bool needs_reference(Metric m) noexcept { return m == Metric::psnr || m == Metric::ssim; }

MetricReport evaluate(std::span<const NamedImage> tests, std::optional<std::span<const NamedImage>> refs,
                      const std::vector<Metric>& metrics, const loss::AblWeights& w, std::size_t jobs) {
    if (metrics.empty()) throw InputError("no metrics requested");
    if (tests.empty()) throw InputError("no test images to evaluate");
    w.validate();
    const bool reference_needed = std::any_of(metrics.begin(), metrics.end(), needs_reference);
    if (reference_needed && !refs) throw InputError("reference metrics requested but no reference images given");

    MetricReport report;
    report.metrics = metrics;

    std::map<std::string, const NamedImage*> by_name;
    for (const auto& t : tests) {
        if (!by_name.emplace(t.name, &t).second) throw InputError("duplicate test image name '" + t.name + "'");
    }
    std::map<std::string, const ImageTensor*> ref_by_name;
    if (refs) {
        for (const auto& r : *refs) ref_by_name.emplace(r.name, &r.image);
    }

    struct WorkItem {
        const NamedImage* test;
        const ImageTensor* ref;
    };
    std::vector<WorkItem> work;
    for (const auto& [name, test] : by_name) {
        const ImageTensor* ref = nullptr;
        if (reference_needed) {
            const auto it = ref_by_name.find(name);
            if (it == ref_by_name.end()) {
                report.skipped.push_back({name, "no reference image with the same name"});
                continue;
            }
            if (!it->second->same_shape(test->image)) {
                report.skipped.push_back({name, "reference shape " + it->second->shape_string() +
                                                    " differs from " + test->image.shape_string()});
                continue;
            }
            ref = it->second;
        }
        work.push_back({test, ref});
    }
    if (reference_needed) {
        for (const auto& [name, _] : ref_by_name) {
            if (!by_name.contains(name)) report.skipped.push_back({name, "reference image has no test counterpart"});
        }
    }
    if (work.empty()) throw InputError("no pairable images for the requested metrics");

    report.rows.resize(work.size());
    parallel_for(work.size(), jobs, [&](std::size_t i) {
        const auto& item = work[i];
        MetricRow row{item.test->name, {}};
        for (Metric m : metrics) {
            switch (m) {
                case Metric::psnr: row.values.push_back(psnr(item.test->image, *item.ref)); break;
                case Metric::ssim: row.values.push_back(ssim(item.test->image, *item.ref)); break;
                case Metric::uiqm: row.values.push_back(uiqm(item.test->image, w)); break;
                case Metric::uciqe: row.values.push_back(uciqe(item.test->image)); break;
            }
        }
        report.rows[i] = std::move(row);
    });

    report.aggregate.assign(metrics.size(), 0.0);
    for (const auto& row : report.rows) {
        for (std::size_t k = 0; k < metrics.size(); ++k) report.aggregate[k] += row.values[k];
    }
    for (double& v : report.aggregate) v /= static_cast<double>(report.rows.size());
    return report;
}

}  // namespace jdp::metrics
