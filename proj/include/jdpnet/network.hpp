#pragma once

#include "jdpnet/fpp.hpp"
#include "jdpnet/pg_params.hpp"
#include "jdpnet/tensor.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace jdp::net {

/// One convolution in the architecture graph.
struct LayerShape {
    std::string name;
    std::size_t out_channels = 0;
    std::size_t in_channels = 0;
    std::size_t kernel_size = 0;  ///< square kernels only: 1 or 3
};

/// Hidden width of the ESE channel gate for a block with `channels` channels.
std::size_t ese_hidden_channels(std::size_t channels) noexcept;

/// Every convolution of the network, in a fixed order, for base width C.
///
///   fe{1,2,3}.conv{1,2}       3x3, encoder (first conv takes RGB)
///   jfe.res.conv{1,2}         3x3, bottleneck ESE-ResBlock
///   jfe.res.ese.w{1,2}        1x1, its channel gate
///   dec{3,2,1}.conv           3x3 fusing conv after upsample + concat; dec1 emits 2C
///   pg.{mean_a,mean_m,std_b,std_n}  1x1 on the 2C channel statistics
///   pb.res.*                  ESE-ResBlock at 2C after AdaIN
///   fpp.out                   3x3, 2C -> RGB
std::vector<LayerShape> architecture(std::size_t channel_width);

/// Immutable-after-construction set of named convolution kernels.
class NetworkWeights {
public:
    explicit NetworkWeights(std::size_t channel_width);

    std::size_t channel_width() const noexcept { return channel_width_; }
    const ConvKernel& at(std::string_view name) const;
    void set(const std::string& name, ConvKernel kernel);
    const std::map<std::string, ConvKernel, std::less<>>& layers() const noexcept { return layers_; }

    /// Shape audit: every layer of architecture(C) present with its exact
    /// shape, and nothing else. Throws DimensionError naming the first problem.
    void validate() const;

    friend bool operator==(const NetworkWeights&, const NetworkWeights&) = default;

private:
    std::size_t channel_width_;
    std::map<std::string, ConvKernel, std::less<>> layers_;
};

/// He-normal weights (std sqrt(2 / fan_in)), zero biases. Values are rounded
/// to float precision so they survive the on-disk format unchanged.
NetworkWeights init_weights(std::uint64_t seed, std::size_t channel_width);

// ---------------------------------------------------------------------------
// On-disk format
//
// <dir>/manifest.txt   header line "jdpnet-weights 1 <channel_width>", then one
//                      line per tensor: "<name> <byte_offset> <dim0>x<dim1>..."
//                      (weights are OxIxKxK, biases O)
// <dir>/weights.bin    all tensors back to back, little-endian float32

inline constexpr const char* kManifestFile = "manifest.txt";
inline constexpr const char* kPayloadFile = "weights.bin";

struct ManifestEntry {
    std::string name;
    std::uint64_t offset = 0;
    std::vector<std::size_t> shape;

    std::size_t element_count() const noexcept;
};

struct Manifest {
    std::size_t channel_width = 0;
    std::vector<ManifestEntry> entries;
};

void save_weights(const NetworkWeights& weights, const std::filesystem::path& dir);
NetworkWeights load_weights(const std::filesystem::path& dir);
Manifest read_manifest(const std::filesystem::path& dir);

struct LayerSummary {
    std::string name;
    std::vector<std::size_t> shape;
    std::uint32_t crc32 = 0;  ///< checksum of the tensor's payload bytes
};

/// Checks the manifest against the architecture graph and the payload length,
/// and checksums every tensor. Throws InputError naming the first bad layer.
std::vector<LayerSummary> inspect_weights(const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Forward pass

struct FeBlockOutput {
    ImageTensor pre_pool;
    ImageTensor pooled;
};

/// Conv3x3 -> ELU -> Dropout (identity at inference) -> Conv3x3 -> ELU, then 2x2 max pool.
FeBlockOutput fe_block(const ImageTensor& x, const ConvKernel& conv1, const ConvKernel& conv2);

/// X * sigmoid(W2 ELU(W1 GAP(X))), the gate broadcast over H x W.
ImageTensor ese_layer(const ImageTensor& x, const ConvKernel& w1, const ConvKernel& w2);

struct ResBlockWeights {
    const ConvKernel& conv1;
    const ConvKernel& conv2;
    const ConvKernel& ese_w1;
    const ConvKernel& ese_w2;
};

ResBlockWeights res_block_weights(const NetworkWeights& weights, std::string_view prefix);

/// ESELayer(Conv3x3(ELU(Conv3x3(x)))) + x
ImageTensor ese_resblock(const ImageTensor& x, const ResBlockWeights& w);

struct JfeOutput {
    ImageTensor f1;                  ///< 2C x H x W
    ImageTensor bottleneck;          ///< C x H/8 x W/8, after the ESE-ResBlock
    std::vector<ImageTensor> skips;  ///< pre-pool maps of the three FE blocks
};

JfeOutput jfe_forward(const ImageTensor& img, const NetworkWeights& weights);

/// How the PG stage turns its Gaussians into AdaIN targets.
struct PgMode {
    bool sampled = false;
    std::uint64_t seed = 0;

    static PgMode deterministic() noexcept { return {}; }
    static PgMode sampling(std::uint64_t seed) noexcept { return {true, seed}; }
};

struct PgOutput {
    PgParams params;
    std::vector<double> mu_opt;
    std::vector<double> sigma_opt;
};

PgOutput pg_module(const ImageTensor& f1, const NetworkWeights& weights, PgMode mode = {});

inline constexpr double kAdainEpsilon = 1e-8;

/// sigma_opt * (x - mean_x) / (std_x + eps) + mu_opt, per channel.
ImageTensor adain(const ImageTensor& content, std::span<const double> mu_opt, std::span<const double> sigma_opt,
                  double eps = kAdainEpsilon);

struct PbOutput {
    ImageTensor f2;
    PgParams params;
};

/// ese_resblock(adain(F1, pg_module(F1)))
PbOutput pb_forward(const ImageTensor& f1, const NetworkWeights& weights, PgMode mode = {});

/// Full forward pass; img must be 3 x H x W with H, W divisible by 8.
ImageTensor jdpnet_forward(const ImageTensor& img, const NetworkWeights& weights, const fpp::FppConfig& cfg = {},
                           PgMode mode = {});

}  // namespace jdp::net
