#include "jdpnet/cli.hpp"
#include "jdpnet/errors.hpp"

#include <array>
#include <charconv>
#include <cmath>

namespace jdp::cli {

std::string format_double(double v) {
    if (!std::isfinite(v)) throw ParameterError("cannot serialize a non-finite value");
    std::array<char, 32> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc()) throw ParameterError("number formatting failed");
    return std::string(buf.data(), ptr);
}

std::string report_to_csv(const metrics::MetricReport& report) {
    std::string out = "image";
    for (auto m : report.metrics) {
        out += ',';
        out += metrics::metric_name(m);
    }
    out += '\n';
    auto append_row = [&](const std::string& name, const std::vector<double>& values) {
        out += name;
        for (double v : values) {
            out += ',';
            out += format_double(v);
        }
        out += '\n';
    };
    for (const auto& row : report.rows) append_row(row.image, row.values);
    append_row("AGGREGATE", report.aggregate);
    return out;
}

nlohmann::json report_to_json(const metrics::MetricReport& report) {
    using nlohmann::json;
    json names = json::array();
    for (auto m : report.metrics) names.push_back(std::string(metrics::metric_name(m)));
    json rows = json::array();
    for (const auto& row : report.rows) {
        json values = json::object();
        for (std::size_t k = 0; k < report.metrics.size(); ++k) {
            values[std::string(metrics::metric_name(report.metrics[k]))] = row.values[k];
        }
        rows.push_back({{"image", row.image}, {"values", values}});
    }
    json aggregate = json::object();
    for (std::size_t k = 0; k < report.metrics.size(); ++k) {
        aggregate[std::string(metrics::metric_name(report.metrics[k]))] = report.aggregate[k];
    }
    json skipped = json::array();
    for (const auto& s : report.skipped) skipped.push_back({{"image", s.name}, {"reason", s.reason}});
    json out = {{"metrics", names}, {"rows", rows}, {"aggregate", aggregate}, {"skipped", skipped}};
    for (auto m : report.metrics) {
        if (m == metrics::Metric::uciqe) out["notes"] = {"UCIQE (opponent-space variant)"};
    }
    return out;
}

CsvTable parse_csv(std::string_view text) {
    CsvTable table;
    auto split = [](std::string_view line) {
        std::vector<std::string> cells;
        std::size_t start = 0;
        while (true) {
            const auto comma = line.find(',', start);
            cells.emplace_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        return cells;
    };
    std::size_t start = 0;
    bool first = true;
    while (start < text.size()) {
        const auto nl = text.find('\n', start);
        const std::string_view line = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
        if (!line.empty()) {
            if (first) {
                table.header = split(line);
                first = false;
            } else {
                table.rows.push_back(split(line));
            }
        }
        if (nl == std::string_view::npos) break;
        start = nl + 1;
    }
    return table;
}

}  // namespace jdp::cli
