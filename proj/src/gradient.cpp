#include "aqualoss_internal.hpp"
#include "jdpnet/aqualoss.hpp"
#include "jdpnet/errors.hpp"
#include "jdpnet/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace jdp::loss {

namespace {

// Discrete structure that the piecewise-smooth AbL components branch on.
// Two images with equal signatures are on the same smooth piece.
struct StructureSignature {
    std::vector<char> rg_kept;
    std::vector<char> yb_kept;
    std::vector<std::size_t> extrema;  // (argmin, argmax) per block, edge maps then luminance
    std::vector<char> flat_blocks;     // contrast blocks under the epsilon cutoff

    friend bool operator==(const StructureSignature&, const StructureSignature&) = default;
};

std::vector<char> trimmed_membership(std::span<const double> values, double trim) {
    const std::size_t n = values.size();
    const std::size_t k = trim_count(n, trim);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<char> kept(n, 0);
    for (std::size_t i = k; i < n - k; ++i) kept[order[i]] = 1;
    return kept;
}

void append_block_extrema(const ImageTensor& map, const BlockGrid& grid, std::vector<std::size_t>& out) {
    const auto blocks = block_partition(map, grid.rows, grid.cols);
    for (const auto& b : blocks) {
        std::size_t arg_min = b.y0 * map.width() + b.x0;
        std::size_t arg_max = arg_min;
        const auto data = map.data();
        for (std::size_t y = b.y0; y < b.y0 + b.height; ++y) {
            for (std::size_t x = b.x0; x < b.x0 + b.width; ++x) {
                const std::size_t i = y * map.width() + x;
                if (data[i] < data[arg_min]) arg_min = i;
                if (data[i] > data[arg_max]) arg_max = i;
            }
        }
        out.push_back(arg_min);
        out.push_back(arg_max);
    }
}

StructureSignature signature(const ImageTensor& img, const AblWeights& w) {
    const ImageTensor scaled = detail::to_metric_domain(img);
    const auto opp = opponent_channels(scaled);
    StructureSignature sig;
    sig.rg_kept = trimmed_membership(opp.rg.data(), w.trim);
    sig.yb_kept = trimmed_membership(opp.yb.data(), w.trim);
    for (std::size_t c = 0; c < 3; ++c) {
        append_block_extrema(detail::edge_map(scaled.slice_channels(c, 1), w.edge_map), w.eme_blocks, sig.extrema);
    }
    const ImageTensor luma = detail::luminance(scaled);
    append_block_extrema(luma, w.cti_blocks, sig.extrema);
    for (const auto& b : block_partition(luma, w.cti_blocks.rows, w.cti_blocks.cols)) {
        sig.flat_blocks.push_back(b.max - b.min <= w.epsilon ? 1 : 0);
    }
    return sig;
}

void check_samples(const ImageTensor& img, std::span<const PixelSample> pixels, double h) {
    if (!(h > 0.0) || !std::isfinite(h)) throw ParameterError("finite-difference step must be > 0");
    for (const auto& p : pixels) {
        if (p.y >= img.height() || p.x >= img.width()) {
            throw ParameterError("sample pixel (" + std::to_string(p.y) + ", " + std::to_string(p.x) +
                                 ") is outside the " + img.shape_string() + " image");
        }
        for (std::size_t c = 0; c < img.channels(); ++c) {
            const double v = img.at(c, p.y, p.x);
            if (v - h < 0.0 || v + h > 1.0) {
                throw ParameterError("sample pixel (" + std::to_string(p.y) + ", " + std::to_string(p.x) +
                                     ") is within one step of the [0, 1] bounds");
            }
        }
    }
}

double central_difference(ImageTensor& work, std::size_t c, PixelSample p, AblComponent component,
                          const AblWeights& w, double h) {
    double& v = work.at(c, p.y, p.x);
    const double original = v;
    v = original + h;
    const double up = component_value(work, component, w);
    v = original - h;
    const double down = component_value(work, component, w);
    v = original;
    return (up - down) / (2.0 * h);
}

}  // namespace

double component_value(const ImageTensor& img, AblComponent component, const AblWeights& w) {
    switch (component) {
        case AblComponent::coi: return color_index(img, w).l_coi;
        case AblComponent::si: return sharpness_index(img, w);
        case AblComponent::cti: return contrast_index(img, w);
        case AblComponent::abl: return abl(img, w).abl;
    }
    throw ParameterError("unknown AbL component");
}

std::vector<GradientSample> numerical_gradient(const ImageTensor& img, AblComponent component,
                                               const AblWeights& w, std::span<const PixelSample> pixels,
                                               double h) {
    check_samples(img, pixels, h);
    ImageTensor work = img;
    std::vector<GradientSample> out;
    out.reserve(pixels.size());
    for (const auto& p : pixels) {
        GradientSample s{p, std::vector<double>(img.channels())};
        for (std::size_t c = 0; c < img.channels(); ++c) s.per_channel[c] = central_difference(work, c, p, component, w, h);
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<PixelSample> select_interior_pixels(const ImageTensor& img, std::size_t count, double h,
                                                unsigned long long seed) {
    std::vector<PixelSample> candidates;
    for (std::size_t y = 0; y < img.height(); ++y) {
        for (std::size_t x = 0; x < img.width(); ++x) {
            bool interior = true;
            for (std::size_t c = 0; c < img.channels() && interior; ++c) {
                const double v = img.at(c, y, x);
                interior = v - h >= 0.0 && v + h <= 1.0;
            }
            if (interior) candidates.push_back({y, x});
        }
    }
    if (candidates.empty()) {
        throw InputError("no interior pixels: every pixel has a channel within " + std::to_string(h) +
                         " of the [0, 1] bounds, so central differences would leave the pixel domain");
    }
    std::mt19937_64 rng(seed);
    std::shuffle(candidates.begin(), candidates.end(), rng);
    candidates.resize(std::min(count, candidates.size()));
    std::sort(candidates.begin(), candidates.end(),
              [](const PixelSample& a, const PixelSample& b) { return a.y != b.y ? a.y < b.y : a.x < b.x; });
    return candidates;
}

bool is_tie_free(const ImageTensor& img, const AblWeights& w, PixelSample pixel, double h) {
    const StructureSignature base = signature(img, w);
    ImageTensor work = img;
    for (std::size_t c = 0; c < img.channels(); ++c) {
        double& v = work.at(c, pixel.y, pixel.x);
        const double original = v;
        for (double step : {h, -h}) {
            v = original + step;
            if (!(signature(work, w) == base)) return false;
        }
        v = original;
    }
    return true;
}

std::vector<StepConsistency> step_consistency(const ImageTensor& img, AblComponent component,
                                              const AblWeights& w, std::span<const PixelSample> pixels,
                                              double h_coarse, double h_fine) {
    const auto coarse = numerical_gradient(img, component, w, pixels, h_coarse);
    const auto fine = numerical_gradient(img, component, w, pixels, h_fine);
    std::vector<StepConsistency> out;
    for (std::size_t i = 0; i < pixels.size(); ++i) {
        const bool tie_free = is_tie_free(img, w, pixels[i], std::max(h_coarse, h_fine));
        for (std::size_t c = 0; c < img.channels(); ++c) {
            StepConsistency s;
            s.pixel = pixels[i];
            s.channel = c;
            s.coarse = coarse[i].per_channel[c];
            s.fine = fine[i].per_channel[c];
            const double scale = std::max(std::abs(s.coarse), std::abs(s.fine));
            s.relative_difference = scale > 0.0 ? std::abs(s.coarse - s.fine) / scale : 0.0;
            s.tie_free = tie_free;
            out.push_back(s);
        }
    }
    return out;
}

GradientAngleReport gradient_angle_report(const ImageTensor& img, const AblWeights& w,
                                          std::span<const PixelSample> pixels, double h) {
    constexpr std::array components{AblComponent::coi, AblComponent::si, AblComponent::cti};
    std::array<std::vector<double>, 3> vectors;
    for (std::size_t k = 0; k < 3; ++k) {
        for (const auto& s : numerical_gradient(img, components[k], w, pixels, h)) {
            vectors[k].insert(vectors[k].end(), s.per_channel.begin(), s.per_channel.end());
        }
    }

    GradientAngleReport report;
    for (std::size_t k = 0; k < 3; ++k) {
        report.norms[k] = std::sqrt(std::inner_product(vectors[k].begin(), vectors[k].end(), vectors[k].begin(), 0.0));
    }
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = i; j < 3; ++j) {
            if (report.norms[i] == 0.0 || report.norms[j] == 0.0) continue;
            const double dot = std::inner_product(vectors[i].begin(), vectors[i].end(), vectors[j].begin(), 0.0);
            const double cosine = std::clamp(dot / (report.norms[i] * report.norms[j]), -1.0, 1.0);
            report.cosine[i][j] = cosine;
            report.cosine[j][i] = cosine;
        }
    }
    return report;
}

const char* component_name(AblComponent component) noexcept {
    switch (component) {
        case AblComponent::coi: return "coi";
        case AblComponent::si: return "si";
        case AblComponent::cti: return "cti";
        case AblComponent::abl: return "abl";
    }
    return "?";
}

AblComponent parse_component(std::string_view name) {
    if (name == "coi") return AblComponent::coi;
    if (name == "si") return AblComponent::si;
    if (name == "cti") return AblComponent::cti;
    if (name == "abl") return AblComponent::abl;
    throw ParameterError("unknown AbL component '" + std::string(name) + "' (expected coi|si|cti|abl)");
}

}  // namespace jdp::loss
