#include "jdpnet/kernels.hpp"

#include "jdpnet/errors.hpp"

#include <algorithm>
#include <cmath>

namespace jdp {

namespace {

std::size_t clamp_index(std::ptrdiff_t i, std::size_t n) noexcept {
    if (i < 0) return 0;
    if (static_cast<std::size_t>(i) >= n) return n - 1;
    return static_cast<std::size_t>(i);
}

template <typename Fn>
ImageTensor map_elements(const ImageTensor& x, Fn fn) {
    ImageTensor out = x;
    for (double& v : out.data()) v = fn(v);
    return out;
}

}  // namespace

ImageTensor conv2d(const ImageTensor& input, const ConvKernel& kernel, Padding padding) {
    if (kernel.in_channels() != input.channels()) {
        throw DimensionError("conv2d: kernel expects " + std::to_string(kernel.in_channels()) +
                             " input channels, tensor has " + input.shape_string());
    }
    const std::size_t kh = kernel.kernel_height();
    const std::size_t kw = kernel.kernel_width();
    const std::ptrdiff_t pad_y = padding == Padding::same ? static_cast<std::ptrdiff_t>(kh / 2) : 0;
    const std::ptrdiff_t pad_x = padding == Padding::same ? static_cast<std::ptrdiff_t>(kw / 2) : 0;

    std::size_t out_h = input.height();
    std::size_t out_w = input.width();
    if (padding == Padding::valid) {
        if (input.height() < kh || input.width() < kw) {
            throw DimensionError("conv2d: valid padding leaves an empty output for " + input.shape_string());
        }
        out_h = input.height() - kh + 1;
        out_w = input.width() - kw + 1;
    }

    const auto in_h = static_cast<std::ptrdiff_t>(input.height());
    const auto in_w = static_cast<std::ptrdiff_t>(input.width());
    ImageTensor out(kernel.out_channels(), out_h, out_w);

    for (std::size_t o = 0; o < kernel.out_channels(); ++o) {
        auto dst = out.channel(o);
        std::fill(dst.begin(), dst.end(), kernel.bias()[o]);
        for (std::size_t i = 0; i < kernel.in_channels(); ++i) {
            const auto src = input.channel(i);
            for (std::size_t ky = 0; ky < kh; ++ky) {
                for (std::size_t kx = 0; kx < kw; ++kx) {
                    const double w = kernel.weight(o, i, ky, kx);
                    if (w == 0.0) continue;
                    const std::ptrdiff_t dy = static_cast<std::ptrdiff_t>(ky) - pad_y;
                    const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(kx) - pad_x;
                    // output x range whose source column lands inside the input
                    const std::ptrdiff_t x_lo = std::max<std::ptrdiff_t>(0, -dx);
                    const std::ptrdiff_t x_hi = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(out_w), in_w - dx);
                    for (std::size_t y = 0; y < out_h; ++y) {
                        const std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(y) + dy;
                        if (sy < 0 || sy >= in_h) continue;
                        const double* s = src.data() + sy * in_w + dx;
                        double* d = dst.data() + y * out_w;
                        for (std::ptrdiff_t x = x_lo; x < x_hi; ++x) d[x] += w * s[x];
                    }
                }
            }
        }
    }
    return out;
}

double elu(double x) noexcept { return x > 0.0 ? x : std::expm1(x); }

double sigmoid(double x) noexcept {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double softplus(double x) noexcept {
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

ImageTensor elu(const ImageTensor& x) { return map_elements(x, [](double v) { return elu(v); }); }

ImageTensor sigmoid(const ImageTensor& x) { return map_elements(x, [](double v) { return sigmoid(v); }); }

ImageTensor clamp(const ImageTensor& x, double lo, double hi) {
    return map_elements(x, [lo, hi](double v) { return std::clamp(v, lo, hi); });
}

ImageTensor max_pool2(const ImageTensor& input) {
    if (input.height() < 2 || input.width() < 2) {
        throw DimensionError("max_pool2: input must be at least 2x2, got " + input.shape_string());
    }
    const std::size_t oh = input.height() / 2;
    const std::size_t ow = input.width() / 2;
    ImageTensor out(input.channels(), oh, ow);
    for (std::size_t c = 0; c < input.channels(); ++c) {
        for (std::size_t y = 0; y < oh; ++y) {
            for (std::size_t x = 0; x < ow; ++x) {
                out.at(c, y, x) = std::max({input.at(c, 2 * y, 2 * x), input.at(c, 2 * y, 2 * x + 1),
                                            input.at(c, 2 * y + 1, 2 * x), input.at(c, 2 * y + 1, 2 * x + 1)});
            }
        }
    }
    return out;
}

ImageTensor upsample2(const ImageTensor& input) {
    ImageTensor out(input.channels(), input.height() * 2, input.width() * 2);
    for (std::size_t c = 0; c < out.channels(); ++c) {
        for (std::size_t y = 0; y < out.height(); ++y) {
            for (std::size_t x = 0; x < out.width(); ++x) out.at(c, y, x) = input.at(c, y / 2, x / 2);
        }
    }
    return out;
}

ImageTensor concat_channels(const ImageTensor& a, const ImageTensor& b) {
    if (a.height() != b.height() || a.width() != b.width()) {
        throw DimensionError("concat_channels: spatial mismatch " + a.shape_string() + " vs " + b.shape_string());
    }
    std::vector<double> data;
    data.reserve(a.size() + b.size());
    data.insert(data.end(), a.data().begin(), a.data().end());
    data.insert(data.end(), b.data().begin(), b.data().end());
    return ImageTensor(a.channels() + b.channels(), a.height(), a.width(), std::move(data));
}

std::vector<double> global_avg_pool(const ImageTensor& input) {
    std::vector<double> means(input.channels());
    const auto n = static_cast<double>(input.plane_size());
    for (std::size_t c = 0; c < input.channels(); ++c) {
        const auto plane = input.channel(c);
        // a constant plane has its value as the exact mean; summation would round
        if (std::all_of(plane.begin(), plane.end(), [&](double v) { return v == plane.front(); })) {
            means[c] = plane.front();
            continue;
        }
        double sum = 0.0;
        for (double v : plane) sum += v;
        means[c] = sum / n;
    }
    return means;
}

ChannelStats channel_stats(const ImageTensor& input) {
    ChannelStats stats;
    stats.means = global_avg_pool(input);
    stats.stds.resize(input.channels());
    const auto n = static_cast<double>(input.plane_size());
    for (std::size_t c = 0; c < input.channels(); ++c) {
        double ss = 0.0;
        for (double v : input.channel(c)) {
            const double d = v - stats.means[c];
            ss += d * d;
        }
        stats.stds[c] = std::sqrt(ss / n);
    }
    return stats;
}

std::vector<double> gaussian_kernel_1d(double omega) {
    if (!(omega > 0.0) || !std::isfinite(omega)) {
        throw ParameterError("gaussian_blur: omega must be a positive finite value");
    }
    const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * omega));
    std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (std::ptrdiff_t i = -radius; i <= radius; ++i) {
        const double v = std::exp(-0.5 * static_cast<double>(i * i) / (omega * omega));
        taps[static_cast<std::size_t>(i + radius)] = v;
        sum += v;
    }
    for (double& t : taps) t /= sum;
    return taps;
}

ImageTensor gaussian_blur(const ImageTensor& input, double omega) {
    const auto taps = gaussian_kernel_1d(omega);
    const auto radius = static_cast<std::ptrdiff_t>(taps.size() / 2);
    const std::size_t h = input.height();
    const std::size_t w = input.width();

    ImageTensor horizontal(input.channels(), h, w);
    for (std::size_t c = 0; c < input.channels(); ++c) {
        for (std::size_t y = 0; y < h; ++y) {
            for (std::size_t x = 0; x < w; ++x) {
                // accumulate offsets from the centre tap so a flat row comes back unchanged
                const double centre = input.at(c, y, x);
                double acc = 0.0;
                for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
                    acc += taps[static_cast<std::size_t>(k + radius)] *
                           (input.at(c, y, clamp_index(static_cast<std::ptrdiff_t>(x) + k, w)) - centre);
                }
                horizontal.at(c, y, x) = centre + acc;
            }
        }
    }
    ImageTensor out(input.channels(), h, w);
    for (std::size_t c = 0; c < input.channels(); ++c) {
        for (std::size_t y = 0; y < h; ++y) {
            for (std::size_t x = 0; x < w; ++x) {
                const double centre = horizontal.at(c, y, x);
                double acc = 0.0;
                for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
                    acc += taps[static_cast<std::size_t>(k + radius)] *
                           (horizontal.at(c, clamp_index(static_cast<std::ptrdiff_t>(y) + k, h), x) - centre);
                }
                out.at(c, y, x) = centre + acc;
            }
        }
    }
    return out;
}

ImageTensor sobel_magnitude(const ImageTensor& channel) {
    if (channel.channels() != 1) throw DimensionError("sobel_magnitude expects a single channel");
    if (channel.height() < 3 || channel.width() < 3) {
        throw DimensionError("sobel_magnitude: input must be at least 3x3, got " + channel.shape_string());
    }
    const std::size_t h = channel.height();
    const std::size_t w = channel.width();
    ImageTensor out(1, h, w);
    for (std::size_t y = 0; y < h; ++y) {
        const std::size_t ym = clamp_index(static_cast<std::ptrdiff_t>(y) - 1, h);
        const std::size_t yp = clamp_index(static_cast<std::ptrdiff_t>(y) + 1, h);
        for (std::size_t x = 0; x < w; ++x) {
            const std::size_t xm = clamp_index(static_cast<std::ptrdiff_t>(x) - 1, w);
            const std::size_t xp = clamp_index(static_cast<std::ptrdiff_t>(x) + 1, w);
            const double gx = (channel.at(0, ym, xp) - channel.at(0, ym, xm)) +
                              2.0 * (channel.at(0, y, xp) - channel.at(0, y, xm)) +
                              (channel.at(0, yp, xp) - channel.at(0, yp, xm));
            const double gy = (channel.at(0, yp, xm) - channel.at(0, ym, xm)) +
                              2.0 * (channel.at(0, yp, x) - channel.at(0, ym, x)) +
                              (channel.at(0, yp, xp) - channel.at(0, ym, xp));
            out.at(0, y, x) = std::sqrt(gx * gx + gy * gy);
        }
    }
    return out;
}

OpponentChannels opponent_channels(const ImageTensor& rgb) {
    if (rgb.channels() != 3) {
        throw DimensionError("opponent_channels expects 3 channels, got " + rgb.shape_string());
    }
    OpponentChannels out{ImageTensor(1, rgb.height(), rgb.width()), ImageTensor(1, rgb.height(), rgb.width())};
    const auto r = rgb.channel(0);
    const auto g = rgb.channel(1);
    const auto b = rgb.channel(2);
    auto rg = out.rg.data();
    auto yb = out.yb.data();
    for (std::size_t i = 0; i < rgb.plane_size(); ++i) {
        rg[i] = r[i] - g[i];
        yb[i] = (r[i] + g[i]) / 2.0 - b[i];
    }
    return out;
}

}  // namespace jdp
