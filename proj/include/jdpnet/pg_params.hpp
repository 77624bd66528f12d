#pragma once

#include <vector>

namespace jdp {

/// Gaussian parameters produced by the PG stage: N(a, m^2) for the channel
/// means and N(b, n^2) for the channel standard deviations. m and n are
/// stored after the softplus transform, so they are strictly positive.
struct PgParams {
    std::vector<double> a;
    std::vector<double> m;
    std::vector<double> b;
    std::vector<double> n;

    friend bool operator==(const PgParams&, const PgParams&) = default;
};

}  // namespace jdp
