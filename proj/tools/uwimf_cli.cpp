#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "uwimf/error.hpp"
#include "uwimf/image_io.hpp"
#include "uwimf/pipeline.hpp"

namespace {

constexpr int kExitBadInput = 2;
constexpr int kExitInfeasible = 3;

using nlohmann::json;
namespace fs = std::filesystem;

struct Globals {
    std::uint64_t seed = 0;
    int threads = 1;
    double range_scale = 0.001;
    bool linear = false;
};

uwimf::RunOptions run_options(const Globals& g) {
    uwimf::RunOptions o;
    o.seed = g.seed;
    o.threads = g.threads;
    o.range_scale = g.range_scale;
    o.assume_srgb = !g.linear;
    return o;
}

void emit(const json& j, const std::string& out) {
    if (out.empty() || out == "-") {
        std::cout << j.dump(2) << '\n';
    } else {
        uwimf::write_json(j, out);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Underwater image formation: estimate, synthesize, enhance, evaluate"};
    app.set_version_flag("--version", std::string(uwimf::version()));
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--seed", g.seed, "Seed for every randomized step")->capture_default_str();
    app.add_option("--threads", g.threads, "Worker threads for batch operations")
        ->check(CLI::Range(1, 1024))
        ->capture_default_str();
    app.add_option("--range-scale", g.range_scale, "Meters per unit of PNG range maps")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_flag("--linear", g.linear, "Treat image files as linear instead of sRGB-encoded");

    // estimate
    auto* estimate = app.add_subcommand("estimate", "Estimate water parameters from an image and range map");
    std::string est_image, est_range, est_out;
    double est_depth = 0.0;
    estimate->add_option("--image", est_image)->required();
    estimate->add_option("--range", est_range)->required();
    estimate->add_option("--depth-m", est_depth, "Camera depth recorded in the output");
    estimate->add_option("--out", est_out, "Output JSON (stdout if omitted)");

    // synthesize
    auto* synth = app.add_subcommand("synthesize", "Render a synthetic underwater dataset");
    std::string syn_images, syn_ranges, syn_presets, syn_out;
    int syn_k = 2;
    synth->add_option("--images", syn_images, "In-air image file or directory")->required();
    synth->add_option("--ranges", syn_ranges, "Range map directory (matched by stem)")->required();
    synth->add_option("--presets", syn_presets, "Preset library JSON file or directory")->required();
    synth->add_option("--k", syn_k, "Presets per image")->capture_default_str();
    synth->add_option("--out", syn_out, "Output directory")->required();

    // enhance
    auto* enh = app.add_subcommand("enhance", "Closed-form restoration");
    std::string enh_input, enh_ranges, enh_params, enh_manifest, enh_out;
    bool enh_stretch = false;
    enh->add_option("--input", enh_input, "Image file or directory");
    enh->add_option("--ranges", enh_ranges, "Range map file or directory");
    enh->add_option("--params", enh_params, "Water parameters JSON (estimated if omitted)");
    enh->add_option("--manifest", enh_manifest, "Synthesis manifest: restore every record");
    enh->add_option("--out", enh_out, "Output file or directory")->required();
    enh->add_flag("--stretch", enh_stretch, "Per-channel 1-99 percentile stretch");

    // evaluate
    auto* eval = app.add_subcommand("evaluate", "Score images");
    std::string ev_metric, ev_input, ev_reference, ev_manifest, ev_mask, ev_out;
    eval->add_option("--metric", ev_metric)
        ->required()
        ->check(CLI::IsMember({"psnr", "ssim", "uiqm", "uciqe", "rgb-error"}));
    eval->add_option("--input", ev_input)->required();
    eval->add_option("--reference", ev_reference);
    eval->add_option("--manifest", ev_manifest);
    eval->add_option("--mask", ev_mask, "Patch list JSON for rgb-error");
    eval->add_option("--out", ev_out, "Output JSON (stdout if omitted)");

    // gap
    auto* gap = app.add_subcommand("gap", "Domain gap between two image sets");
    std::string gap_a, gap_b, gap_out;
    int gap_grid = 50;
    gap->add_option("--set-a", gap_a)->required();
    gap->add_option("--set-b", gap_b)->required();
    gap->add_option("--grid", gap_grid)->check(CLI::Range(1, 10000))->capture_default_str();
    gap->add_option("--out", gap_out, "Output JSON (stdout if omitted)");

    // wavelet
    auto* wav = app.add_subcommand("wavelet", "Export Haar subbands");
    std::string wav_image, wav_out;
    wav->add_option("--image", wav_image)->required();
    wav->add_option("--out-dir", wav_out)->required();

    // run
    auto* run = app.add_subcommand("run", "Run a staged JSON configuration");
    std::string run_config, run_out;
    run->add_option("config", run_config, "Configuration file")->required();
    run->add_option("--out", run_out, "Results JSON (stdout if omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitBadInput;
    }

    const uwimf::RunOptions opts = run_options(g);
    try {
        if (*estimate) {
            uwimf::EstimationConfig cfg;
            cfg.seed = g.seed;
            cfg.depth_m = est_depth;
            const auto img = uwimf::load_image(est_image, opts.assume_srgb);
            const auto z = uwimf::load_range(est_range, opts.range_scale);
            emit(uwimf::estimate_report(uwimf::estimate_water_params(img, z, cfg), cfg), est_out);
        } else if (*synth) {
            uwimf::DatasetOptions d;
            d.k_per_image = syn_k;
            d.out_dir = syn_out;
            d.run = opts;
            const auto records = uwimf::synthesize_dataset(uwimf::find_image_pairs(syn_images, syn_ranges),
                                                           uwimf::load_presets(syn_presets), d);
            std::cerr << "wrote " << records.size() << " records to "
                      << (fs::path(syn_out) / "manifest.jsonl").string() << '\n';
        } else if (*enh) {
            uwimf::EnhanceRequest req;
            req.out = enh_out;
            req.options.stretch = enh_stretch;
            if (!enh_manifest.empty()) {
                req.manifest = enh_manifest;
            } else {
                if (enh_input.empty()) throw uwimf::InvalidInput("enhance: --input or --manifest is required");
                req.input = enh_input;
                if (!enh_ranges.empty()) req.ranges = enh_ranges;
            }
            if (!enh_params.empty()) req.params = enh_params;
            uwimf::enhance_batch(req, opts);
        } else if (*eval) {
            uwimf::EvaluateRequest req;
            req.metric = ev_metric;
            req.input = ev_input;
            if (!ev_reference.empty()) req.reference = ev_reference;
            if (!ev_manifest.empty()) req.manifest = ev_manifest;
            if (!ev_mask.empty()) req.mask = uwimf::load_patch_mask(ev_mask);
            emit(uwimf::evaluate_batch(req, opts), ev_out);
        } else if (*gap) {
            emit(uwimf::domain_gap(gap_a, gap_b, gap_grid, opts), gap_out);
        } else if (*wav) {
            uwimf::export_subbands(wav_image, wav_out, opts);
        } else if (*run) {
            uwimf::RunOverrides overrides;
            if (app.count("--seed")) overrides.seed = g.seed;
            if (app.count("--threads")) overrides.threads = g.threads;
            if (app.count("--range-scale")) overrides.range_scale = g.range_scale;
            emit(uwimf::run_manifest(fs::path(run_config), overrides), run_out);
        }
    } catch (const uwimf::EstimationInfeasible& e) {
        std::cerr << "estimation infeasible: " << e.what() << '\n';
        return kExitInfeasible;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitBadInput;
    }
    return 0;
}
