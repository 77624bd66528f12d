#include "jdpnet/cli.hpp"
#include "jdpnet/errors.hpp"
#include "jdpnet/image_io.hpp"
#include "jdpnet/network.hpp"
#include "jdpnet/parallel.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>

namespace jdp::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPartial = 1;
constexpr int kExitError = 2;

constexpr const char* kSidecarName = "enhance.json";

// Flag values exactly as given; unset means "keep the config/default value".
struct Overrides {
    std::optional<std::string> config;
    std::optional<double> omega;
    std::optional<double> lambda_bem;
    std::optional<double> trim;
    std::optional<std::string> blocks;
    std::optional<double> alpha;
    std::optional<double> lambda_imp;
    std::optional<double> c1;
    std::optional<double> c2;
    std::optional<double> c3;
    std::optional<std::string> metrics;
    std::optional<std::string> format;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> jobs;
    bool sampled = false;
};

void add_config_flag(CLI::App* sub, Overrides& ov) {
    sub->add_option("--config", ov.config, "JSON config file (defaults < file < flags)");
}

void add_abl_flags(CLI::App* sub, Overrides& ov) {
    sub->add_option("--trim", ov.trim, "alpha-trim fraction per tail");
    sub->add_option("--blocks", ov.blocks, "block grid K1xK2 for the sharpness and contrast indices");
    sub->add_option("--alpha", ov.alpha, "entropy exponent of the contrast index");
    sub->add_option("--lambda-imp", ov.lambda_imp, "bias term of AquaBalanceLoss");
    sub->add_option("--c1", ov.c1, "colour weight");
    sub->add_option("--c2", ov.c2, "sharpness weight");
    sub->add_option("--c3", ov.c3, "contrast weight");
}

void add_fpp_flags(CLI::App* sub, Overrides& ov) {
    sub->add_option("--omega", ov.omega, "Gaussian scale of the BEM low-pass");
    sub->add_option("--lambda-bem", ov.lambda_bem, "BEM pivot in (0, 1)");
}

RunConfig resolve_config(const Overrides& ov) {
    RunConfig cfg;
    if (ov.config) apply_config_file(cfg, *ov.config);
    if (ov.omega) cfg.fpp.omega = *ov.omega;
    if (ov.lambda_bem) cfg.fpp.lambda_bem = *ov.lambda_bem;
    if (ov.trim) cfg.abl.trim = *ov.trim;
    if (ov.blocks) {
        cfg.abl.eme_blocks = parse_block_grid(*ov.blocks);
        cfg.abl.cti_blocks = cfg.abl.eme_blocks;
    }
    if (ov.alpha) cfg.abl.alpha_entropy = *ov.alpha;
    if (ov.lambda_imp) cfg.abl.lambda_imp = *ov.lambda_imp;
    if (ov.c1) cfg.abl.c1 = *ov.c1;
    if (ov.c2) cfg.abl.c2 = *ov.c2;
    if (ov.c3) cfg.abl.c3 = *ov.c3;
    if (ov.metrics) cfg.metrics = metrics::parse_metric_list(*ov.metrics);
    if (ov.format) {
        if (*ov.format == "csv") {
            cfg.format = ReportFormat::csv;
        } else if (*ov.format == "json") {
            cfg.format = ReportFormat::json;
        } else {
            throw ParameterError("--format must be csv or json");
        }
    }
    if (ov.seed) cfg.seed = *ov.seed;
    if (ov.jobs) cfg.jobs = *ov.jobs;
    if (ov.sampled) cfg.sampled = true;
    cfg.validate();
    return cfg;
}

// Supported image files of a directory (sorted by filename) or a single file.
std::vector<fs::path> collect_images(const fs::path& input) {
    if (fs::is_regular_file(input)) return {input};
    if (!fs::is_directory(input)) throw InputError("input does not exist: " + input.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(input)) {
        if (entry.is_regular_file() && io::is_supported_image(entry.path())) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end(), [](const fs::path& a, const fs::path& b) {
        return a.filename().string() < b.filename().string();
    });
    return files;
}

struct LoadedSet {
    std::vector<metrics::NamedImage> images;
    std::vector<metrics::SkippedImage> failures;
};

LoadedSet load_named_images(const std::vector<fs::path>& files, std::size_t jobs) {
    std::vector<std::optional<ImageTensor>> decoded(files.size());
    std::vector<std::string> errors(files.size());
    parallel_for(files.size(), jobs, [&](std::size_t i) {
        try {
            decoded[i] = io::read_image(files[i]);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });
    LoadedSet set;
    std::map<std::string, bool> seen;
    for (std::size_t i = 0; i < files.size(); ++i) {
        const std::string stem = files[i].stem().string();
        if (!decoded[i]) {
            set.failures.push_back({files[i].filename().string(), errors[i]});
        } else if (seen.contains(stem)) {
            set.failures.push_back({files[i].filename().string(), "another file already uses the name '" + stem + "'"});
        } else {
            seen[stem] = true;
            set.images.push_back({stem, std::move(*decoded[i])});
        }
    }
    return set;
}

void write_text_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) throw InputError("cannot write " + path.string());
}

// ---------------------------------------------------------------------------

struct EnhanceArgs {
    std::string input;
    std::string output;
    std::optional<std::string> weights;
    bool fpp_only = false;
};

int cmd_enhance(const EnhanceArgs& args, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    if (!args.fpp_only && !args.weights) {
        err << "error: enhance needs --weights DIR or --fpp-only\n";
        return kExitError;
    }
    std::optional<net::NetworkWeights> weights;
    if (!args.fpp_only) {
        try {
            weights = net::load_weights(*args.weights);
        } catch (const std::exception& e) {
            err << "error: invalid weights in " << *args.weights << ": " << e.what() << '\n';
            return kExitError;
        }
    }
    const auto files = collect_images(args.input);
    if (files.empty()) {
        err << "error: no PNG or JPEG images found in " << args.input << '\n';
        return kExitError;
    }
    fs::create_directories(args.output);

    struct Outcome {
        std::string error;
        double milliseconds = 0.0;
    };
    std::vector<Outcome> outcomes(files.size());
    std::map<std::string, std::size_t> first_owner;
    for (std::size_t i = 0; i < files.size(); ++i) {
        const std::string name = files[i].stem().string() + ".png";
        if (!first_owner.emplace(name, i).second) outcomes[i].error = "output name " + name + " is already taken";
    }

    parallel_for(files.size(), cfg.jobs, [&](std::size_t i) {
        if (!outcomes[i].error.empty()) return;
        const auto start = std::chrono::steady_clock::now();
        try {
            const ImageTensor img = io::read_image(files[i]);
            ImageTensor result = img;
            if (args.fpp_only) {
                result = fpp::fpp_enhance_image(img, cfg.fpp);
            } else {
                const auto mode = cfg.sampled ? net::PgMode::sampling(cfg.seed + i) : net::PgMode::deterministic();
                const ImageTensor padded = io::pad_to_multiple(img, 8);
                result = io::crop(net::jdpnet_forward(padded, *weights, cfg.fpp, mode), img.height(), img.width());
            }
            io::write_png(fs::path(args.output) / (files[i].stem().string() + ".png"), result);
        } catch (const std::exception& e) {
            outcomes[i].error = e.what();
        }
        outcomes[i].milliseconds =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    });

    json entries = json::array();
    std::size_t failed = 0;
    for (std::size_t i = 0; i < files.size(); ++i) {
        json entry = {{"input", files[i].filename().string()}, {"milliseconds", outcomes[i].milliseconds}};
        if (outcomes[i].error.empty()) {
            entry["output"] = files[i].stem().string() + ".png";
            entry["status"] = "ok";
        } else {
            ++failed;
            entry["status"] = "error";
            entry["error"] = outcomes[i].error;
            err << "error: " << files[i].filename().string() << ": " << outcomes[i].error << '\n';
        }
        entries.push_back(entry);
    }
    json sidecar = {{"command", "enhance"},
                    {"mode", args.fpp_only ? "fpp-only" : "network"},
                    {"weights", args.weights ? json(*args.weights) : json(nullptr)},
                    {"seed", cfg.seed},
                    {"config", config_to_json(cfg)},
                    {"images", entries}};
    write_text_file(fs::path(args.output) / kSidecarName, sidecar.dump(2) + "\n");
    out << "enhanced " << files.size() - failed << " of " << files.size() << " images into " << args.output << '\n';
    return failed == 0 ? kExitOk : kExitPartial;
}

// ---------------------------------------------------------------------------

struct EvaluateArgs {
    std::string tests;
    std::optional<std::string> refs;
    std::optional<std::string> out_path;
};

int cmd_evaluate(const EvaluateArgs& args, RunConfig cfg, std::ostream& out, std::ostream& err) {
    if (cfg.metrics.empty()) {
        cfg.metrics = args.refs ? std::vector{metrics::Metric::psnr, metrics::Metric::ssim, metrics::Metric::uiqm,
                                              metrics::Metric::uciqe}
                                : std::vector{metrics::Metric::uiqm, metrics::Metric::uciqe};
    }
    if (!fs::is_directory(args.tests)) {
        err << "error: test directory does not exist: " << args.tests << '\n';
        return kExitError;
    }
    auto tests = load_named_images(collect_images(args.tests), cfg.jobs);
    std::optional<LoadedSet> refs;
    if (args.refs) {
        if (!fs::is_directory(*args.refs)) {
            err << "error: reference directory does not exist: " << *args.refs << '\n';
            return kExitError;
        }
        refs = load_named_images(collect_images(*args.refs), cfg.jobs);
    }
    if (tests.images.empty()) {
        for (const auto& f : tests.failures) err << "skipped: " << f.name << ": " << f.reason << '\n';
        err << "error: no readable test images in " << args.tests << '\n';
        return kExitError;
    }

    std::optional<std::span<const metrics::NamedImage>> ref_span;
    if (refs) ref_span = std::span<const metrics::NamedImage>(refs->images);
    metrics::MetricReport report = metrics::evaluate(tests.images, ref_span, cfg.metrics, cfg.abl, cfg.jobs);
    report.skipped.insert(report.skipped.begin(), tests.failures.begin(), tests.failures.end());
    if (refs) report.skipped.insert(report.skipped.end(), refs->failures.begin(), refs->failures.end());

    for (const auto& s : report.skipped) err << "skipped: " << s.name << ": " << s.reason << '\n';
    const bool has_uciqe = std::find(cfg.metrics.begin(), cfg.metrics.end(), metrics::Metric::uciqe) != cfg.metrics.end();
    if (has_uciqe && cfg.format == ReportFormat::csv) err << "note: uciqe column is UCIQE (opponent-space variant)\n";

    std::string text;
    if (cfg.format == ReportFormat::csv) {
        text = report_to_csv(report);
    } else {
        json j = report_to_json(report);
        j["config"] = config_to_json(cfg);
        text = j.dump(2) + "\n";
    }
    if (args.out_path) {
        write_text_file(*args.out_path, text);
    } else {
        out << text;
    }
    return report.skipped.empty() ? kExitOk : kExitPartial;
}

// ---------------------------------------------------------------------------

struct GradcheckArgs {
    std::string image;
    std::string component = "abl";
    std::size_t samples = 8;
    double h = 1e-3;
    std::optional<std::string> out_path;
};

constexpr double kStepRelativeTolerance = 0.05;

json optional_matrix(const loss::GradientAngleReport& r) {
    json m = json::array();
    for (const auto& row : r.cosine) {
        json jr = json::array();
        for (const auto& v : row) jr.push_back(v ? json(*v) : json(nullptr));
        m.push_back(jr);
    }
    return m;
}

int cmd_gradcheck(const GradcheckArgs& args, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    if (args.samples == 0) {
        err << "error: --samples must be >= 1\n";
        return kExitError;
    }
    if (!(args.h > 0.0)) {
        err << "error: --step must be > 0\n";
        return kExitError;
    }
    const auto component = loss::parse_component(args.component);
    const ImageTensor img = io::read_image(args.image);
    const double h_fine = args.h / 10.0;
    const auto pixels = loss::select_interior_pixels(img, args.samples, args.h, cfg.seed);

    const auto coarse = loss::numerical_gradient(img, component, cfg.abl, pixels, args.h);
    const auto fine = loss::numerical_gradient(img, component, cfg.abl, pixels, h_fine);
    const auto consistency = loss::step_consistency(img, component, cfg.abl, pixels, args.h, h_fine);
    // The contrast term only moves at block extrema, so a small sample can leave its gradient at
    // zero; the angle matrix uses every interior pixel instead.
    const auto all_pixels = loss::select_interior_pixels(img, img.height() * img.width(), args.h, cfg.seed);
    const auto angles = loss::gradient_angle_report(img, cfg.abl, all_pixels, args.h);

    bool finite = true;
    json samples = json::array();
    for (std::size_t i = 0; i < pixels.size(); ++i) {
        for (double g : coarse[i].per_channel) finite = finite && std::isfinite(g);
        for (double g : fine[i].per_channel) finite = finite && std::isfinite(g);
        samples.push_back({{"y", pixels[i].y},
                           {"x", pixels[i].x},
                           {"gradient", finite ? json(coarse[i].per_channel) : json(nullptr)},
                           {"gradient_fine", finite ? json(fine[i].per_channel) : json(nullptr)}});
    }
    json ratios = json::array();
    std::size_t tie_free = 0;
    std::size_t agreeing = 0;
    for (const auto& s : consistency) {
        ratios.push_back({{"y", s.pixel.y},
                          {"x", s.pixel.x},
                          {"channel", s.channel},
                          {"coarse", std::isfinite(s.coarse) ? json(s.coarse) : json(nullptr)},
                          {"fine", std::isfinite(s.fine) ? json(s.fine) : json(nullptr)},
                          {"relative_difference", std::isfinite(s.relative_difference) ? json(s.relative_difference) : json(nullptr)},
                          {"tie_free", s.tie_free}});
        if (s.tie_free) {
            ++tie_free;
            if (s.relative_difference <= kStepRelativeTolerance) ++agreeing;
        }
    }
    json report = {{"image", args.image},
                   {"component", loss::component_name(component)},
                   {"h", args.h},
                   {"h_fine", h_fine},
                   {"seed", cfg.seed},
                   {"config", config_to_json(cfg)},
                   {"samples", samples},
                   {"angle_matrix", optional_matrix(angles)},
                   {"angle_components", {"coi", "si", "cti"}},
                   {"angle_pixels", all_pixels.size()},
                   {"consistency", ratios},
                   {"tie_free_entries", tie_free},
                   {"tie_free_within_tolerance", agreeing},
                   {"relative_tolerance", kStepRelativeTolerance},
                   {"finite", finite},
                   {"pass", finite}};
    const std::string text = report.dump(2) + "\n";
    if (args.out_path) {
        write_text_file(*args.out_path, text);
    } else {
        out << text;
    }
    return finite ? kExitOk : kExitPartial;
}

// ---------------------------------------------------------------------------

struct WeightsArgs {
    std::string dir;
    std::uint64_t seed = 0;
    std::size_t channel_width = 64;
};

std::string hex32(std::uint32_t v) {
    char buf[9];
    std::snprintf(buf, sizeof buf, "%08x", v);
    return buf;
}

int cmd_weights_init(const WeightsArgs& args, std::ostream& out) {
    const auto weights = net::init_weights(args.seed, args.channel_width);
    net::save_weights(weights, args.dir);
    out << "wrote " << weights.layers().size() << " layers (channel width " << args.channel_width << ") to "
        << args.dir << '\n';
    return kExitOk;
}

int cmd_weights_inspect(const WeightsArgs& args, std::ostream& out, std::ostream& err) {
    try {
        const auto manifest = net::read_manifest(args.dir);
        const auto layers = net::inspect_weights(args.dir);
        out << "channel_width " << manifest.channel_width << '\n';
        for (const auto& l : layers) {
            std::string shape;
            for (std::size_t i = 0; i < l.shape.size(); ++i) shape += (i ? "x" : "") + std::to_string(l.shape[i]);
            out << l.name << ' ' << shape << ' ' << hex32(l.crc32) << '\n';
        }
    } catch (const std::exception& e) {
        err << "error: shape audit failed: " << e.what() << '\n';
        return kExitError;
    }
    return kExitOk;
}

int cmd_stats(const std::string& image, const RunConfig& cfg, std::ostream& out) {
    const auto b = loss::abl(io::read_image(image), cfg.abl);
    const json j = {{"image", image}, {"l_coi", b.l_coi}, {"l_si", b.l_si}, {"l_cti", b.l_cti},
                    {"abl", b.abl},   {"l", b.l},         {"r", b.r},       {"config", config_to_json(cfg)}};
    out << j.dump(2) << '\n';
    return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Underwater image enhancement, quality metrics and AquaBalanceLoss diagnostics"};
    app.name("jdpnet");
    app.require_subcommand(1);

    Overrides ov;

    EnhanceArgs enhance;
    auto* enhance_cmd = app.add_subcommand("enhance", "Enhance one image or a directory of images");
    enhance_cmd->add_option("input", enhance.input, "image file or directory")->required();
    enhance_cmd->add_option("output", enhance.output, "output directory")->required();
    enhance_cmd->add_option("--weights", enhance.weights, "weight directory (manifest.txt + weights.bin)");
    enhance_cmd->add_flag("--fpp-only", enhance.fpp_only, "classical post-processing only, no network");
    enhance_cmd->add_flag("--sample", ov.sampled, "sample the PG Gaussians instead of using their means");
    enhance_cmd->add_option("--seed", ov.seed, "seed for sampled mode");
    enhance_cmd->add_option("--jobs", ov.jobs, "images processed concurrently");
    add_fpp_flags(enhance_cmd, ov);
    add_config_flag(enhance_cmd, ov);

    EvaluateArgs evaluate;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Score a directory of images");
    evaluate_cmd->add_option("tests", evaluate.tests, "directory of images to score")->required();
    evaluate_cmd->add_option("--ref", evaluate.refs, "reference directory, paired by filename stem");
    evaluate_cmd->add_option("--metrics", ov.metrics, "comma-separated list of psnr,ssim,uiqm,uciqe");
    evaluate_cmd->add_option("--out", evaluate.out_path, "report path (default: stdout)");
    evaluate_cmd->add_option("--format", ov.format, "csv or json");
    evaluate_cmd->add_option("--jobs", ov.jobs, "images scored concurrently");
    add_abl_flags(evaluate_cmd, ov);
    add_config_flag(evaluate_cmd, ov);

    GradcheckArgs gradcheck;
    auto* gradcheck_cmd = app.add_subcommand("gradcheck", "Central-difference gradients of the AbL components");
    gradcheck_cmd->add_option("image", gradcheck.image, "image file")->required();
    gradcheck_cmd->add_option("--component", gradcheck.component, "coi, si, cti or abl");
    gradcheck_cmd->add_option("--samples", gradcheck.samples, "number of sampled pixels");
    gradcheck_cmd->add_option("--step", gradcheck.h, "finite-difference step (pixel domain)");
    gradcheck_cmd->add_option("--out", gradcheck.out_path, "JSON output path (default: stdout)");
    gradcheck_cmd->add_option("--seed", ov.seed, "pixel sampling seed");
    add_abl_flags(gradcheck_cmd, ov);
    add_config_flag(gradcheck_cmd, ov);

    WeightsArgs weights;
    auto* weights_cmd = app.add_subcommand("weights", "Create or audit a weight directory");
    weights_cmd->require_subcommand(1);
    auto* init_cmd = weights_cmd->add_subcommand("init", "Write seeded He-initialized weights");
    init_cmd->add_option("dir", weights.dir)->required();
    init_cmd->add_option("--seed", weights.seed);
    init_cmd->add_option("--channel-width", weights.channel_width, "base channel count C")->check(CLI::PositiveNumber);
    auto* inspect_cmd = weights_cmd->add_subcommand("inspect", "List layers, shapes and checksums");
    inspect_cmd->add_option("dir", weights.dir)->required();

    std::string stats_image;
    auto* stats_cmd = app.add_subcommand("stats", "Print the AbL breakdown of one image");
    stats_cmd->add_option("image", stats_image)->required();
    add_abl_flags(stats_cmd, ov);
    add_config_flag(stats_cmd, ov);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (init_cmd->parsed()) return cmd_weights_init(weights, out);
        if (inspect_cmd->parsed()) return cmd_weights_inspect(weights, out, err);
        const RunConfig cfg = resolve_config(ov);
        if (enhance_cmd->parsed()) return cmd_enhance(enhance, cfg, out, err);
        if (evaluate_cmd->parsed()) return cmd_evaluate(evaluate, cfg, out, err);
        if (gradcheck_cmd->parsed()) return cmd_gradcheck(gradcheck, cfg, out, err);
        if (stats_cmd->parsed()) return cmd_stats(stats_image, cfg, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}

}  // namespace jdp::cli
