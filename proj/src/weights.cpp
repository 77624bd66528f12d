#include "jdpnet/errors.hpp"
#include "jdpnet/network.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace jdp::net {

namespace {

constexpr const char* kMagic = "jdpnet-weights";
constexpr int kFormatVersion = 1;

std::string shape_text(const std::vector<std::size_t>& shape) {
    std::string s;
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += 'x';
        s += std::to_string(shape[i]);
    }
    return s;
}

std::vector<std::size_t> parse_shape(const std::string& text) {
    std::vector<std::size_t> shape;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, 'x')) {
        if (part.empty() || !std::all_of(part.begin(), part.end(), [](char ch) { return ch >= '0' && ch <= '9'; })) {
            throw InputError("malformed shape '" + text + "' in weight manifest");
        }
        shape.push_back(std::stoull(part));
    }
    if (shape.empty()) throw InputError("empty shape in weight manifest");
    return shape;
}

void append_le_float(std::string& out, double value) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(value));
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFFu));
}

double read_le_float(const unsigned char* p) {
    const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                               (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
    return static_cast<double>(std::bit_cast<float>(bits));
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct ExpectedTensor {
    std::string name;
    std::vector<std::size_t> shape;
};

std::vector<ExpectedTensor> expected_tensors(std::size_t channel_width) {
    std::vector<ExpectedTensor> out;
    for (const auto& l : architecture(channel_width)) {
        out.push_back({l.name + ".weight", {l.out_channels, l.in_channels, l.kernel_size, l.kernel_size}});
        out.push_back({l.name + ".bias", {l.out_channels}});
    }
    return out;
}

// Validates names/shapes of the manifest against the architecture and the
// payload extent. Returns entries keyed by name.
std::map<std::string, ManifestEntry> audit_manifest(const Manifest& manifest, std::size_t payload_bytes) {
    std::map<std::string, ManifestEntry> by_name;
    for (const auto& e : manifest.entries) {
        const std::uint64_t end = e.offset + 4ull * e.element_count();
        if (end > payload_bytes) {
            throw InputError("layer '" + e.name + "' spans bytes [" + std::to_string(e.offset) + ", " +
                             std::to_string(end) + ") but the payload holds only " +
                             std::to_string(payload_bytes) + " bytes");
        }
        if (!by_name.emplace(e.name, e).second) throw InputError("duplicate layer '" + e.name + "' in manifest");
    }
    std::set<std::string> expected_names;
    for (const auto& t : expected_tensors(manifest.channel_width)) {
        expected_names.insert(t.name);
        const auto it = by_name.find(t.name);
        if (it == by_name.end()) throw InputError("missing layer '" + t.name + "'");
        if (it->second.shape != t.shape) {
            throw InputError("layer '" + t.name + "' has shape " + shape_text(it->second.shape) + ", expected " +
                             shape_text(t.shape));
        }
    }
    for (const auto& [name, _] : by_name) {
        if (!expected_names.contains(name)) throw InputError("unknown layer '" + name + "'");
    }
    return by_name;
}

}  // namespace

std::size_t ese_hidden_channels(std::size_t channels) noexcept { return std::max<std::size_t>(1, channels / 4); }

std::vector<LayerShape> architecture(std::size_t channel_width) {
    if (channel_width == 0) throw ParameterError("channel_width must be >= 1");
    const std::size_t c = channel_width;
    const std::size_t c2 = 2 * c;
    std::vector<LayerShape> layers{
        {"fe1.conv1", c, 3, 3}, {"fe1.conv2", c, c, 3},
        {"fe2.conv1", c, c, 3}, {"fe2.conv2", c, c, 3},
        {"fe3.conv1", c, c, 3}, {"fe3.conv2", c, c, 3},
        {"jfe.res.conv1", c, c, 3}, {"jfe.res.conv2", c, c, 3},
        {"jfe.res.ese.w1", ese_hidden_channels(c), c, 1}, {"jfe.res.ese.w2", c, ese_hidden_channels(c), 1},
        {"dec3.conv", c, 2 * c, 3}, {"dec2.conv", c, 2 * c, 3}, {"dec1.conv", c2, 2 * c, 3},
        {"pg.mean_a", c2, c2, 1}, {"pg.mean_m", c2, c2, 1},
        {"pg.std_b", c2, c2, 1}, {"pg.std_n", c2, c2, 1},
        {"pb.res.conv1", c2, c2, 3}, {"pb.res.conv2", c2, c2, 3},
        {"pb.res.ese.w1", ese_hidden_channels(c2), c2, 1}, {"pb.res.ese.w2", c2, ese_hidden_channels(c2), 1},
        {"fpp.out", 3, c2, 3},
    };
    return layers;
}

NetworkWeights::NetworkWeights(std::size_t channel_width) : channel_width_(channel_width) {
    if (channel_width == 0) throw ParameterError("channel_width must be >= 1");
}

const ConvKernel& NetworkWeights::at(std::string_view name) const {
    const auto it = layers_.find(name);
    if (it == layers_.end()) throw DimensionError("network has no layer '" + std::string(name) + "'");
    return it->second;
}

void NetworkWeights::set(const std::string& name, ConvKernel kernel) { layers_.insert_or_assign(name, std::move(kernel)); }

void NetworkWeights::validate() const {
    const auto graph = architecture(channel_width_);
    for (const auto& l : graph) {
        const auto it = layers_.find(l.name);
        if (it == layers_.end()) throw DimensionError("shape audit: missing layer '" + l.name + "'");
        const ConvKernel& k = it->second;
        if (k.out_channels() != l.out_channels || k.in_channels() != l.in_channels ||
            k.kernel_height() != l.kernel_size || k.kernel_width() != l.kernel_size) {
            throw DimensionError("shape audit: layer '" + l.name + "' is " + k.shape_string() + ", expected " +
                                 std::to_string(l.out_channels) + "x" + std::to_string(l.in_channels) + "x" +
                                 std::to_string(l.kernel_size) + "x" + std::to_string(l.kernel_size));
        }
    }
    if (layers_.size() != graph.size()) {
        for (const auto& [name, _] : layers_) {
            if (std::none_of(graph.begin(), graph.end(), [&](const LayerShape& l) { return l.name == name; })) {
                throw DimensionError("shape audit: unknown layer '" + name + "'");
            }
        }
    }
}

NetworkWeights init_weights(std::uint64_t seed, std::size_t channel_width) {
    NetworkWeights weights(channel_width);
    std::mt19937_64 rng(seed);
    for (const auto& l : architecture(channel_width)) {
        ConvKernel k(l.out_channels, l.in_channels, l.kernel_size, l.kernel_size);
        const double fan_in = static_cast<double>(l.in_channels * l.kernel_size * l.kernel_size);
        std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / fan_in));
        for (double& v : k.weights()) v = static_cast<double>(static_cast<float>(dist(rng)));
        weights.set(l.name, std::move(k));
    }
    return weights;
}

std::size_t ManifestEntry::element_count() const noexcept {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

void save_weights(const NetworkWeights& weights, const std::filesystem::path& dir) {
    weights.validate();
    std::filesystem::create_directories(dir);
    std::string payload;
    std::ostringstream manifest;
    manifest << kMagic << ' ' << kFormatVersion << ' ' << weights.channel_width() << '\n';
    for (const auto& l : architecture(weights.channel_width())) {
        const ConvKernel& k = weights.at(l.name);
        manifest << l.name << ".weight " << payload.size() << ' '
                 << shape_text({l.out_channels, l.in_channels, l.kernel_size, l.kernel_size}) << '\n';
        for (double v : k.weights()) append_le_float(payload, v);
        manifest << l.name << ".bias " << payload.size() << ' ' << shape_text({l.out_channels}) << '\n';
        for (double v : k.bias()) append_le_float(payload, v);
    }
    std::ofstream m(dir / kManifestFile, std::ios::binary | std::ios::trunc);
    m << manifest.str();
    std::ofstream p(dir / kPayloadFile, std::ios::binary | std::ios::trunc);
    p.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (!m || !p) throw InputError("failed to write weights to " + dir.string());
}

Manifest read_manifest(const std::filesystem::path& dir) {
    std::istringstream in(read_file(dir / kManifestFile));
    Manifest manifest;
    std::string magic;
    int version = 0;
    if (!(in >> magic >> version >> manifest.channel_width) || magic != kMagic) {
        throw InputError("weight manifest has no valid header");
    }
    if (version != kFormatVersion) throw InputError("unsupported weight format version " + std::to_string(version));
    if (manifest.channel_width == 0) throw InputError("weight manifest declares channel width 0");
    std::string name;
    std::string shape;
    std::uint64_t offset = 0;
    while (in >> name) {
        if (!(in >> offset >> shape)) throw InputError("truncated manifest line for '" + name + "'");
        manifest.entries.push_back({name, offset, parse_shape(shape)});
    }
    return manifest;
}

NetworkWeights load_weights(const std::filesystem::path& dir) {
    const Manifest manifest = read_manifest(dir);
    const std::string payload = read_file(dir / kPayloadFile);
    const auto entries = audit_manifest(manifest, payload.size());
    const auto* bytes = reinterpret_cast<const unsigned char*>(payload.data());

    auto read_tensor = [&](const std::string& name) {
        const ManifestEntry& e = entries.at(name);
        std::vector<double> values(e.element_count());
        for (std::size_t i = 0; i < values.size(); ++i) values[i] = read_le_float(bytes + e.offset + 4 * i);
        if (!std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); })) {
            throw InputError("layer '" + name + "' contains non-finite values");
        }
        return values;
    };

    NetworkWeights weights(manifest.channel_width);
    for (const auto& l : architecture(manifest.channel_width)) {
        weights.set(l.name, ConvKernel(l.out_channels, l.in_channels, l.kernel_size, l.kernel_size,
                                       read_tensor(l.name + ".weight"), read_tensor(l.name + ".bias")));
    }
    weights.validate();
    return weights;
}

std::vector<LayerSummary> inspect_weights(const std::filesystem::path& dir) {
    const Manifest manifest = read_manifest(dir);
    const std::string payload = read_file(dir / kPayloadFile);
    audit_manifest(manifest, payload.size());
    std::vector<LayerSummary> out;
    for (const auto& e : manifest.entries) {
        const auto* start = reinterpret_cast<const Bytef*>(payload.data() + e.offset);
        const auto crc = crc32(crc32(0L, Z_NULL, 0), start, static_cast<uInt>(4 * e.element_count()));
        out.push_back({e.name, e.shape, static_cast<std::uint32_t>(crc)});
    }
    return out;
}

}  // namespace jdp::net
