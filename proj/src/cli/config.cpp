#include "jdpnet/cli.hpp"
#include "jdpnet/errors.hpp"

#include <charconv>
#include <fstream>
#include <set>

namespace jdp::cli {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ParameterError("config section '" + where + "' must be an object");
    for (const auto& [key, _] : j.items()) {
        if (!allowed.contains(key)) throw ParameterError("unknown config key '" + where + key + "'");
    }
}

double number(const json& j, const std::string& key) {
    if (!j.is_number()) throw ParameterError("config key '" + key + "' must be a number");
    return j.get<double>();
}

std::size_t count(const json& j, const std::string& key) {
    if (!j.is_number_unsigned()) throw ParameterError("config key '" + key + "' must be a non-negative integer");
    return j.get<std::size_t>();
}

loss::BlockGrid grid(const json& j, const std::string& key) {
    if (j.is_string()) return parse_block_grid(j.get<std::string>());
    if (!j.is_array() || j.size() != 2) throw ParameterError("config key '" + key + "' must be \"K1xK2\" or [k1, k2]");
    return {count(j[0], key), count(j[1], key)};
}

void apply_abl(loss::AblWeights& w, const json& j) {
    reject_unknown_keys(j,
                        {"c1", "c2", "c3", "lambda_imp", "trim", "channel_weights", "eme_blocks", "cti_blocks",
                         "alpha", "epsilon", "edge_map"},
                        "abl.");
    if (j.contains("c1")) w.c1 = number(j["c1"], "abl.c1");
    if (j.contains("c2")) w.c2 = number(j["c2"], "abl.c2");
    if (j.contains("c3")) w.c3 = number(j["c3"], "abl.c3");
    if (j.contains("lambda_imp")) w.lambda_imp = number(j["lambda_imp"], "abl.lambda_imp");
    if (j.contains("trim")) w.trim = number(j["trim"], "abl.trim");
    if (j.contains("alpha")) w.alpha_entropy = number(j["alpha"], "abl.alpha");
    if (j.contains("epsilon")) w.epsilon = number(j["epsilon"], "abl.epsilon");
    if (j.contains("eme_blocks")) w.eme_blocks = grid(j["eme_blocks"], "abl.eme_blocks");
    if (j.contains("cti_blocks")) w.cti_blocks = grid(j["cti_blocks"], "abl.cti_blocks");
    if (j.contains("channel_weights")) {
        const auto& cw = j["channel_weights"];
        if (!cw.is_array() || cw.size() != 3) throw ParameterError("abl.channel_weights must be a 3-element array");
        for (std::size_t i = 0; i < 3; ++i) w.channel_weights[i] = number(cw[i], "abl.channel_weights");
    }
    if (j.contains("edge_map")) {
        const auto mode = j["edge_map"].is_string() ? j["edge_map"].get<std::string>() : std::string();
        if (mode == "edge_weighted_intensity") {
            w.edge_map = loss::EdgeMapMode::edge_weighted_intensity;
        } else if (mode == "sobel_magnitude") {
            w.edge_map = loss::EdgeMapMode::sobel_magnitude;
        } else {
            throw ParameterError("abl.edge_map must be \"edge_weighted_intensity\" or \"sobel_magnitude\"");
        }
    }
}

void apply_fpp(fpp::FppConfig& f, const json& j) {
    reject_unknown_keys(j, {"omega", "lambda_bem", "target_gray", "epsilon"}, "fpp.");
    if (j.contains("omega")) f.omega = number(j["omega"], "fpp.omega");
    if (j.contains("lambda_bem")) f.lambda_bem = number(j["lambda_bem"], "fpp.lambda_bem");
    if (j.contains("epsilon")) f.epsilon = number(j["epsilon"], "fpp.epsilon");
    if (j.contains("target_gray")) {
        if (j["target_gray"].is_null()) {
            f.target_gray.reset();
        } else {
            f.target_gray = number(j["target_gray"], "fpp.target_gray");
        }
    }
}

void apply_loss(loss::LossWeights& l, const json& j) {
    reject_unknown_keys(j, {"lambda1", "lambda2", "lambda3", "lambda4"}, "loss.");
    if (j.contains("lambda1")) l.lambda1 = number(j["lambda1"], "loss.lambda1");
    if (j.contains("lambda2")) l.lambda2 = number(j["lambda2"], "loss.lambda2");
    if (j.contains("lambda3")) l.lambda3 = number(j["lambda3"], "loss.lambda3");
    if (j.contains("lambda4")) l.lambda4 = number(j["lambda4"], "loss.lambda4");
}

}  // namespace

void RunConfig::validate() const {
    abl.validate();
    fpp.validate();
    loss.validate();
    if (jobs == 0) throw ParameterError("jobs must be >= 1");
}

loss::BlockGrid parse_block_grid(std::string_view text) {
    const auto x = text.find_first_of("xX");
    if (x == std::string_view::npos) throw ParameterError("block grid must look like K1xK2, got '" + std::string(text) + "'");
    auto parse = [&](std::string_view part) {
        std::size_t v = 0;
        const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
        if (ec != std::errc() || ptr != part.data() + part.size() || v == 0) {
            throw ParameterError("block grid must look like K1xK2 with positive integers, got '" + std::string(text) + "'");
        }
        return v;
    };
    return {parse(text.substr(0, x)), parse(text.substr(x + 1))};
}

void apply_config_json(RunConfig& cfg, const json& j) {
    reject_unknown_keys(j, {"abl", "fpp", "loss", "metrics", "format", "seed", "jobs", "sampled"}, "");
    if (j.contains("abl")) apply_abl(cfg.abl, j["abl"]);
    if (j.contains("fpp")) apply_fpp(cfg.fpp, j["fpp"]);
    if (j.contains("loss")) apply_loss(cfg.loss, j["loss"]);
    if (j.contains("metrics")) {
        const auto& m = j["metrics"];
        if (m.is_string()) {
            cfg.metrics = metrics::parse_metric_list(m.get<std::string>());
        } else if (m.is_array()) {
            cfg.metrics.clear();
            for (const auto& item : m) {
                if (!item.is_string()) throw ParameterError("metrics entries must be strings");
                cfg.metrics.push_back(metrics::parse_metric(item.get<std::string>()));
            }
        } else {
            throw ParameterError("metrics must be a string or an array of strings");
        }
    }
    if (j.contains("format")) {
        const auto f = j["format"].is_string() ? j["format"].get<std::string>() : std::string();
        if (f == "csv") {
            cfg.format = ReportFormat::csv;
        } else if (f == "json") {
            cfg.format = ReportFormat::json;
        } else {
            throw ParameterError("format must be \"csv\" or \"json\"");
        }
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) throw ParameterError("seed must be a non-negative integer");
        cfg.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("jobs")) cfg.jobs = count(j["jobs"], "jobs");
    if (j.contains("sampled")) {
        if (!j["sampled"].is_boolean()) throw ParameterError("sampled must be a boolean");
        cfg.sampled = j["sampled"].get<bool>();
    }
}

void apply_config_file(RunConfig& cfg, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw InputError("config file " + path.string() + " is not valid JSON: " + e.what());
    }
    apply_config_json(cfg, j);
}

json config_to_json(const RunConfig& cfg) {
    const auto& a = cfg.abl;
    json metric_list = json::array();
    for (auto m : cfg.metrics) metric_list.push_back(std::string(metrics::metric_name(m)));
    return {
        {"abl",
         {{"c1", a.c1},
          {"c2", a.c2},
          {"c3", a.c3},
          {"lambda_imp", a.lambda_imp},
          {"trim", a.trim},
          {"channel_weights", a.channel_weights},
          {"eme_blocks", {a.eme_blocks.rows, a.eme_blocks.cols}},
          {"cti_blocks", {a.cti_blocks.rows, a.cti_blocks.cols}},
          {"alpha", a.alpha_entropy},
          {"epsilon", a.epsilon},
          {"edge_map", a.edge_map == loss::EdgeMapMode::edge_weighted_intensity ? "edge_weighted_intensity"
                                                                                 : "sobel_magnitude"}}},
        {"fpp",
         {{"omega", cfg.fpp.omega},
          {"lambda_bem", cfg.fpp.lambda_bem},
          {"target_gray", cfg.fpp.target_gray ? json(*cfg.fpp.target_gray) : json(nullptr)},
          {"epsilon", cfg.fpp.epsilon}}},
        {"loss",
         {{"lambda1", cfg.loss.lambda1},
          {"lambda2", cfg.loss.lambda2},
          {"lambda3", cfg.loss.lambda3},
          {"lambda4", cfg.loss.lambda4}}},
        {"metrics", metric_list},
        {"format", cfg.format == ReportFormat::csv ? "csv" : "json"},
        {"seed", cfg.seed},
        {"jobs", cfg.jobs},
        {"sampled", cfg.sampled},
    };
}

}  // namespace jdp::cli
