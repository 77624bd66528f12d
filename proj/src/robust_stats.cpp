#include "jdpnet/errors.hpp"
#include "jdpnet/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace jdp {

std::size_t trim_count(std::size_t n, double trim) {
    if (!(trim >= 0.0 && trim < 0.5)) throw ParameterError("trim fraction must lie in [0, 0.5)");
    if (n == 0) throw ParameterError("trimmed statistics need a non-empty list");
    // tolerate representation error in products such as 0.1 * 30
    const auto k = static_cast<std::size_t>(std::floor(trim * static_cast<double>(n) + 1e-9));
    if (n <= 2 * k) throw ParameterError("trimming leaves no values");
    return k;
}

double alpha_trimmed_mean(std::span<const double> values, double trim) {
    const std::size_t k = trim_count(values.size(), trim);
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const auto first = sorted.begin() + static_cast<std::ptrdiff_t>(k);
    const auto last = sorted.end() - static_cast<std::ptrdiff_t>(k);
    return std::accumulate(first, last, 0.0) / static_cast<double>(sorted.size() - 2 * k);
}

double alpha_trimmed_variance(std::span<const double> values, double trim) {
    const double mu = alpha_trimmed_mean(values, trim);
    double ss = 0.0;
    for (double v : values) ss += (v - mu) * (v - mu);
    return ss / static_cast<double>(values.size());
}

std::vector<std::size_t> split_extents(std::size_t length, std::size_t parts) {
    if (parts == 0 || parts > length) {
        throw ParameterError("cannot split " + std::to_string(length) + " pixels into " +
                             std::to_string(parts) + " blocks");
    }
    std::vector<std::size_t> extents(parts, length / parts);
    extents.back() += length % parts;
    return extents;
}

std::vector<Block> block_partition(const ImageTensor& channel, std::size_t rows, std::size_t cols) {
    if (channel.channels() != 1) throw DimensionError("block_partition expects a single channel");
    if (rows == 0 || cols == 0 || rows > channel.height() || cols > channel.width()) {
        throw ParameterError("block grid " + std::to_string(rows) + "x" + std::to_string(cols) +
                             " does not fit a " + channel.shape_string() + " image");
    }
    const auto heights = split_extents(channel.height(), rows);
    const auto widths = split_extents(channel.width(), cols);

    std::vector<Block> blocks;
    blocks.reserve(rows * cols);
    std::size_t y0 = 0;
    for (std::size_t by = 0; by < rows; ++by) {
        std::size_t x0 = 0;
        for (std::size_t bx = 0; bx < cols; ++bx) {
            Block b{y0, x0, heights[by], widths[bx], channel.at(0, y0, x0), channel.at(0, y0, x0)};
            for (std::size_t y = y0; y < y0 + b.height; ++y) {
                for (std::size_t x = x0; x < x0 + b.width; ++x) {
                    b.min = std::min(b.min, channel.at(0, y, x));
                    b.max = std::max(b.max, channel.at(0, y, x));
                }
            }
            blocks.push_back(b);
            x0 += widths[bx];
        }
        y0 += heights[by];
    }
    return blocks;
}

}  // namespace jdp
