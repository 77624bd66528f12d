#pragma once

// Slow, direct-formula reference implementations. None of these call into the
// library's kernels; they index raw arrays with plain loops.

#include "jdpnet/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace oracle {

using jdp::ConvKernel;
using jdp::ImageTensor;

inline ImageTensor random_tensor(std::mt19937_64& rng, std::size_t c, std::size_t h, std::size_t w, double lo = 0.0,
                                 double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> data(c * h * w);
    for (double& v : data) v = u(rng);
    return ImageTensor(c, h, w, std::move(data));
}

inline ConvKernel random_kernel(std::mt19937_64& rng, std::size_t out, std::size_t in, std::size_t k) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> w(out * in * k * k);
    std::vector<double> b(out);
    for (double& v : w) v = u(rng);
    for (double& v : b) v = u(rng);
    return ConvKernel(out, in, k, k, std::move(w), std::move(b));
}

inline double max_abs_diff(const ImageTensor& a, const ImageTensor& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

// Quadruple loop, zero padding, "same" output size.
inline ImageTensor conv_same(const ImageTensor& x, const ConvKernel& k) {
    const long kh = static_cast<long>(k.kernel_height());
    const long kw = static_cast<long>(k.kernel_width());
    const long H = static_cast<long>(x.height());
    const long W = static_cast<long>(x.width());
    ImageTensor out(k.out_channels(), x.height(), x.width());
    for (std::size_t o = 0; o < k.out_channels(); ++o) {
        for (long y = 0; y < H; ++y) {
            for (long xx = 0; xx < W; ++xx) {
                double acc = k.bias()[o];
                for (std::size_t i = 0; i < k.in_channels(); ++i) {
                    for (long dy = 0; dy < kh; ++dy) {
                        for (long dx = 0; dx < kw; ++dx) {
                            const long sy = y + dy - kh / 2;
                            const long sx = xx + dx - kw / 2;
                            if (sy < 0 || sy >= H || sx < 0 || sx >= W) continue;
                            acc += k.weight(o, i, dy, dx) * x.at(i, sy, sx);
                        }
                    }
                }
                out.at(o, y, xx) = acc;
            }
        }
    }
    return out;
}

inline ImageTensor conv_valid(const ImageTensor& x, const ConvKernel& k) {
    const std::size_t kh = k.kernel_height();
    const std::size_t kw = k.kernel_width();
    ImageTensor out(k.out_channels(), x.height() - kh + 1, x.width() - kw + 1);
    for (std::size_t o = 0; o < out.channels(); ++o)
        for (std::size_t y = 0; y < out.height(); ++y)
            for (std::size_t xx = 0; xx < out.width(); ++xx) {
                double acc = k.bias()[o];
                for (std::size_t i = 0; i < k.in_channels(); ++i)
                    for (std::size_t dy = 0; dy < kh; ++dy)
                        for (std::size_t dx = 0; dx < kw; ++dx) acc += k.weight(o, i, dy, dx) * x.at(i, y + dy, xx + dx);
                out.at(o, y, xx) = acc;
            }
    return out;
}

inline ImageTensor max_pool(const ImageTensor& x) {
    ImageTensor out(x.channels(), x.height() / 2, x.width() / 2);
    for (std::size_t c = 0; c < out.channels(); ++c)
        for (std::size_t y = 0; y < out.height(); ++y)
            for (std::size_t xx = 0; xx < out.width(); ++xx) {
                double m = x.at(c, 2 * y, 2 * xx);
                m = std::max(m, x.at(c, 2 * y, 2 * xx + 1));
                m = std::max(m, x.at(c, 2 * y + 1, 2 * xx));
                m = std::max(m, x.at(c, 2 * y + 1, 2 * xx + 1));
                out.at(c, y, xx) = m;
            }
    return out;
}

inline ImageTensor upsample(const ImageTensor& x) {
    ImageTensor out(x.channels(), 2 * x.height(), 2 * x.width());
    for (std::size_t c = 0; c < out.channels(); ++c)
        for (std::size_t y = 0; y < out.height(); ++y)
            for (std::size_t xx = 0; xx < out.width(); ++xx) out.at(c, y, xx) = x.at(c, y / 2, xx / 2);
    return out;
}

inline long clamp_index(long i, long n) { return std::clamp(i, 0L, n - 1); }

// Full 2D Gaussian window (not separable), replicate edges.
inline ImageTensor blur_2d(const ImageTensor& x, double omega) {
    const long r = static_cast<long>(std::ceil(3.0 * omega));
    double total = 0.0;
    for (long dy = -r; dy <= r; ++dy)
        for (long dx = -r; dx <= r; ++dx) total += std::exp(-(dy * dy + dx * dx) / (2.0 * omega * omega));
    const long H = static_cast<long>(x.height());
    const long W = static_cast<long>(x.width());
    ImageTensor out(x.channels(), x.height(), x.width());
    for (std::size_t c = 0; c < x.channels(); ++c)
        for (long y = 0; y < H; ++y)
            for (long xx = 0; xx < W; ++xx) {
                double acc = 0.0;
                for (long dy = -r; dy <= r; ++dy)
                    for (long dx = -r; dx <= r; ++dx) {
                        const double g = std::exp(-(dy * dy + dx * dx) / (2.0 * omega * omega)) / total;
                        acc += g * x.at(c, clamp_index(y + dy, H), clamp_index(xx + dx, W));
                    }
                out.at(c, y, xx) = acc;
            }
    return out;
}

inline ImageTensor sobel(const ImageTensor& x) {
    static constexpr int gx[3][3] = {{-1, 0, 1}, {-2, 0, 2}, {-1, 0, 1}};
    static constexpr int gy[3][3] = {{-1, -2, -1}, {0, 0, 0}, {1, 2, 1}};
    const long H = static_cast<long>(x.height());
    const long W = static_cast<long>(x.width());
    ImageTensor out(1, x.height(), x.width());
    for (long y = 0; y < H; ++y)
        for (long xx = 0; xx < W; ++xx) {
            double sx = 0.0;
            double sy = 0.0;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    const double v = x.at(0, clamp_index(y + dy, H), clamp_index(xx + dx, W));
                    sx += gx[dy + 1][dx + 1] * v;
                    sy += gy[dy + 1][dx + 1] * v;
                }
            out.at(0, y, xx) = std::sqrt(sx * sx + sy * sy);
        }
    return out;
}

inline std::vector<double> trimmed_slice(std::vector<double> v, double trim) {
    std::sort(v.begin(), v.end());
    const auto k = static_cast<std::size_t>(std::floor(trim * static_cast<double>(v.size()) + 1e-9));
    return {v.begin() + static_cast<long>(k), v.end() - static_cast<long>(k)};
}

inline double trimmed_mean(const std::vector<double>& v, double trim) {
    const auto kept = trimmed_slice(v, trim);
    double s = 0.0;
    for (double x : kept) s += x;
    return s / static_cast<double>(kept.size());
}

// Squared deviations of every value from the trimmed mean, over n.
inline double trimmed_variance(const std::vector<double>& v, double trim) {
    const double mu = trimmed_mean(v, trim);
    double s = 0.0;
    for (double x : v) s += (x - mu) * (x - mu);
    return s / static_cast<double>(v.size());
}

// Block edges: floor(n / k) per block, remainder on the last.
inline std::vector<std::size_t> edges(std::size_t n, std::size_t k) {
    std::vector<std::size_t> e(k + 1);
    for (std::size_t i = 0; i <= k; ++i) e[i] = i * (n / k);
    e[k] = n;
    return e;
}

// The colour index computed straight from the RGB values in 8-bit units.
struct Coi {
    double l, r, l_coi;
};
inline Coi color_index(const ImageTensor& img, double trim) {
    std::vector<double> rg, yb;
    for (std::size_t y = 0; y < img.height(); ++y)
        for (std::size_t x = 0; x < img.width(); ++x) {
            const double R = 255.0 * img.at(0, y, x);
            const double G = 255.0 * img.at(1, y, x);
            const double B = 255.0 * img.at(2, y, x);
            rg.push_back(R - G);
            yb.push_back((R + G) / 2.0 - B);
        }
    const double mrg = trimmed_mean(rg, trim);
    const double myb = trimmed_mean(yb, trim);
    const double l = std::sqrt(mrg * mrg + myb * myb);
    const double r = std::sqrt(trimmed_variance(rg, trim) + trimmed_variance(yb, trim));
    return {l, r, -0.027 * l + 0.159 * r};
}

inline double sharpness_index(const ImageTensor& img, std::size_t k1, std::size_t k2, const double (&lambda)[3],
                              double eps) {
    double total = 0.0;
    for (std::size_t c = 0; c < 3; ++c) {
        ImageTensor plane(1, img.height(), img.width());
        for (std::size_t y = 0; y < img.height(); ++y)
            for (std::size_t x = 0; x < img.width(); ++x) plane.at(0, y, x) = 255.0 * img.at(c, y, x);
        const ImageTensor s = sobel(plane);
        const auto ey = edges(img.height(), k1);
        const auto ex = edges(img.width(), k2);
        double sum = 0.0;
        for (std::size_t by = 0; by < k1; ++by)
            for (std::size_t bx = 0; bx < k2; ++bx) {
                double lo = 1e300, hi = -1e300;
                for (std::size_t y = ey[by]; y < ey[by + 1]; ++y)
                    for (std::size_t x = ex[bx]; x < ex[bx + 1]; ++x) {
                        const double e = s.at(0, y, x) * plane.at(0, y, x);
                        lo = std::min(lo, e);
                        hi = std::max(hi, e);
                    }
                sum += std::log((hi + eps) / (lo + eps));
            }
        total += lambda[c] * 2.0 / static_cast<double>(k1 * k2) * sum;
    }
    return total;
}

inline double contrast_index(const ImageTensor& img, std::size_t k1, std::size_t k2, double alpha, double eps) {
    const auto ey = edges(img.height(), k1);
    const auto ex = edges(img.width(), k2);
    double sum = 0.0;
    for (std::size_t by = 0; by < k1; ++by)
        for (std::size_t bx = 0; bx < k2; ++bx) {
            double lo = 1e300, hi = -1e300;
            for (std::size_t y = ey[by]; y < ey[by + 1]; ++y)
                for (std::size_t x = ex[bx]; x < ex[bx + 1]; ++x) {
                    const double l =
                        255.0 * (0.299 * img.at(0, y, x) + 0.587 * img.at(1, y, x) + 0.114 * img.at(2, y, x));
                    lo = std::min(lo, l);
                    hi = std::max(hi, l);
                }
            if (hi - lo <= eps) continue;
            const double q = (hi - lo) / (hi + lo);
            sum += alpha * std::pow(q, alpha) * std::log(q);
        }
    return -sum / static_cast<double>(k1 * k2);
}

inline double luma(const ImageTensor& img, std::size_t y, std::size_t x) {
    return 0.299 * img.at(0, y, x) + 0.587 * img.at(1, y, x) + 0.114 * img.at(2, y, x);
}

// Mean SSIM by evaluating each 11x11 window directly.
inline double ssim(const ImageTensor& a, const ImageTensor& b) {
    double g[11][11];
    double total = 0.0;
    for (int i = 0; i < 11; ++i)
        for (int j = 0; j < 11; ++j) {
            g[i][j] = std::exp(-((i - 5) * (i - 5) + (j - 5) * (j - 5)) / (2.0 * 1.5 * 1.5));
            total += g[i][j];
        }
    const double c1 = 1e-4, c2 = 9e-4;
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t y = 0; y + 11 <= a.height(); ++y)
        for (std::size_t x = 0; x + 11 <= a.width(); ++x) {
            double mx = 0, my = 0;
            for (int i = 0; i < 11; ++i)
                for (int j = 0; j < 11; ++j) {
                    mx += g[i][j] / total * luma(a, y + i, x + j);
                    my += g[i][j] / total * luma(b, y + i, x + j);
                }
            double vx = 0, vy = 0, cov = 0;
            for (int i = 0; i < 11; ++i)
                for (int j = 0; j < 11; ++j) {
                    const double dx = luma(a, y + i, x + j) - mx;
                    const double dy = luma(b, y + i, x + j) - my;
                    vx += g[i][j] / total * dx * dx;
                    vy += g[i][j] / total * dy * dy;
                    cov += g[i][j] / total * dx * dy;
                }
            sum += (2 * mx * my + c1) * (2 * cov + c2) / ((mx * mx + my * my + c1) * (vx + vy + c2));
            ++count;
        }
    return sum / static_cast<double>(count);
}

inline double psnr(const ImageTensor& a, const ImageTensor& b) {
    double ss = 0.0;
    for (std::size_t c = 0; c < a.channels(); ++c)
        for (std::size_t y = 0; y < a.height(); ++y)
            for (std::size_t x = 0; x < a.width(); ++x) {
                const double d = a.at(c, y, x) - b.at(c, y, x);
                ss += d * d;
            }
    return 10.0 * std::log10(static_cast<double>(a.size()) / ss);
}

inline double interp_percentile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline double uciqe(const ImageTensor& img, double eps) {
    std::vector<double> chroma, lum;
    double sat = 0.0;
    for (std::size_t y = 0; y < img.height(); ++y)
        for (std::size_t x = 0; x < img.width(); ++x) {
            const double R = img.at(0, y, x), G = img.at(1, y, x), B = img.at(2, y, x);
            const double rg = R - G;
            const double yb = (R + G) / 2.0 - B;
            const double c = std::hypot(rg, yb);
            const double l = luma(img, y, x);
            chroma.push_back(c);
            lum.push_back(l);
            sat += c / (l + eps);
        }
    const double n = static_cast<double>(chroma.size());
    double mean = 0.0;
    for (double c : chroma) mean += c;
    mean /= n;
    double var = 0.0;
    for (double c : chroma) var += (c - mean) * (c - mean);
    return 0.4680 * std::sqrt(var / n) + 0.2745 * (interp_percentile(lum, 0.99) - interp_percentile(lum, 0.01)) +
           0.2576 * sat / n;
}

}  // namespace oracle
