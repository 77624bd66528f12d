#pragma once

#include "jdpnet/aqualoss.hpp"
#include "jdpnet/fpp.hpp"
#include "jdpnet/metrics.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace jdp::cli {

enum class ReportFormat { csv, json };

/// Effective configuration of one CLI invocation:
/// built-in defaults < --config file < command-line flags.
struct RunConfig {
    loss::AblWeights abl;
    fpp::FppConfig fpp;
    loss::LossWeights loss;
    std::vector<metrics::Metric> metrics;  ///< empty -> command default
    ReportFormat format = ReportFormat::csv;
    std::uint64_t seed = 0;
    std::size_t jobs = 1;
    bool sampled = false;

    /// Throws ParameterError if any owned type's invariants fail.
    void validate() const;
};

/// Merge a JSON config object into `cfg`. Unknown keys (at any level) are errors.
void apply_config_json(RunConfig& cfg, const nlohmann::json& j);
void apply_config_file(RunConfig& cfg, const std::filesystem::path& path);
nlohmann::json config_to_json(const RunConfig& cfg);

/// "K1xK2" -> grid
loss::BlockGrid parse_block_grid(std::string_view text);

/// Shortest round-trip decimal representation, independent of locale.
std::string format_double(double v);

/// Header "image,<metric>...", one row per image, then an AGGREGATE row. LF endings.
std::string report_to_csv(const metrics::MetricReport& report);
nlohmann::json report_to_json(const metrics::MetricReport& report);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};
CsvTable parse_csv(std::string_view text);

/// Entry point shared by the executable and the tests. Returns the process exit status.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace jdp::cli
