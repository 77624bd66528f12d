#pragma once

#include "jdpnet/aqualoss.hpp"
#include "jdpnet/tensor.hpp"

namespace jdp::loss::detail {

/// Copy of img with every value multiplied by kMetricScale.
ImageTensor to_metric_domain(const ImageTensor& img);

/// 0.299 R + 0.587 G + 0.114 B as a single-channel tensor.
ImageTensor luminance(const ImageTensor& rgb);

/// Per-channel map whose block extrema feed the EME measure.
ImageTensor edge_map(const ImageTensor& channel, EdgeMapMode mode);

void require_rgb(const ImageTensor& img, const char* who);

}  // namespace jdp::loss::detail
