#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "uwimf/estimation.hpp"
#include "uwimf/formation.hpp"
#include "uwimf/image.hpp"
#include "uwimf/metrics.hpp"

namespace uwimf {

namespace fs = std::filesystem;

/// Library version recorded in every provenance block.
const char* version();

/// Settings shared by every batch entry point.
struct RunOptions {
    std::uint64_t seed = 0;
    int threads = 1;
    double range_scale = 0.001;  ///< meters per unit for PNG range maps
    bool assume_srgb = true;     ///< decode inputs / encode outputs with the sRGB curve
};

struct Preset {
    std::string name;
    WaterParams params;
};

/// Named water conditions; names are unique and the list is non-empty.
struct PresetLibrary {
    std::vector<Preset> presets;

    void validate() const;
};

void to_json(nlohmann::json& j, const PresetLibrary& lib);
void from_json(const nlohmann::json& j, PresetLibrary& lib);

/// Reads presets from a JSON file ({"presets": [{"name", "params"}]}, or a bare WaterParams
/// object named after the file stem) or from a directory of such files.
PresetLibrary load_presets(const fs::path& path);

/// One synthesized sample. Paths are relative to the manifest directory.
struct SynthRecord {
    std::string id;
    std::string source;  ///< stem of the in-air image
    std::string preset;
    std::string degraded;
    std::string clear;
    std::string backscatter;
    std::string transmission;
    std::string range;
    Rgb white_point{1.0, 1.0, 1.0};
    WaterParams params;
    double roundtrip_max_error = 0.0;  ///< max |restore(I) - J| in memory, before quantization
};

void to_json(nlohmann::json& j, const SynthRecord& r);
void from_json(const nlohmann::json& j, SynthRecord& r);

/// An in-air image and its range map, matched by filename stem.
struct ImagePair {
    std::string stem;
    fs::path image;
    fs::path range;
};

/// Sorted image files (.png, .ppm) of a directory, or the single file itself.
std::vector<fs::path> list_images(const fs::path& file_or_dir);

/// Pairs every image with `<stem>.pfm` or `<stem>.png` in `ranges_dir`.
/// Throws InvalidInput when a range map is missing.
std::vector<ImagePair> find_image_pairs(const fs::path& images, const fs::path& ranges_dir);

/// For each of `n_images` images, k distinct preset indices drawn without replacement.
std::vector<std::vector<std::size_t>> sample_presets(std::size_t n_images, std::size_t n_presets,
                                                     int k, std::uint64_t seed);

struct DatasetOptions {
    int k_per_image = 2;
    fs::path out_dir;
    RunOptions run;
};

/// Renders k presets per in-air image and writes
///   out_dir/clear/<stem>.png, out_dir/degraded/<id>.png,
///   out_dir/components/<id>_B.png, out_dir/components/<id>_T.png (16-bit linear),
///   out_dir/manifest.jsonl (one SynthRecord per line, in input order).
std::vector<SynthRecord> synthesize_dataset(const std::vector<ImagePair>& pairs,
                                            const PresetLibrary& presets,
                                            const DatasetOptions& options);

std::vector<SynthRecord> read_manifest(const fs::path& manifest_path);

struct EnhanceOptions {
    bool stretch = false;  ///< per-channel percentile stretch after clamping
    double stretch_low = 0.01;
    double stretch_high = 0.99;
    EstimationConfig estimation;
};

/// Closed-form enhancement: restore with the given (or estimated) water condition,
/// clamp to [0, 1] and optionally stretch.
LinearImage enhance(const LinearImage& observed, const RangeMap& z,
                    const std::optional<WaterParams>& params, const EnhanceOptions& options = {});

/// WaterParams JSON plus a "diagnostics" object.
nlohmann::json estimate_report(const WaterEstimate& estimate, const EstimationConfig& config);

/// Batch form of enhance().
struct EnhanceRequest {
    fs::path input;                    ///< image file or directory
    std::optional<fs::path> ranges;    ///< range file or directory (matched by stem)
    std::optional<fs::path> params;    ///< fixed water condition; estimated per image if absent
    std::optional<fs::path> manifest;  ///< synthesize manifest: restore every record with its own params
    fs::path out;                      ///< output directory, or a file for a single input
    EnhanceOptions options;
};

/// Writes enhanced images and returns {"outputs": {name: {...}}}.
nlohmann::json enhance_batch(const EnhanceRequest& request, const RunOptions& options);

/// Metric names accepted by evaluate_batch: psnr, ssim, uiqm, uciqe, rgb-error.
struct EvaluateRequest {
    std::string metric;
    fs::path input;
    std::optional<fs::path> reference;  ///< file or directory matched by filename
    std::optional<fs::path> manifest;   ///< alternative pairing: <input>/<id>.png vs record clear
    std::optional<PatchMask> mask;
};

PatchMask load_patch_mask(const fs::path& path);

/// Scores each input; results keyed by file name with per-component breakdowns.
nlohmann::json evaluate_batch(const EvaluateRequest& request, const RunOptions& options);

/// Domain gap between two image folders: PCA embedding of color statistics,
/// intersection ratio of A against B and center distance.
nlohmann::json domain_gap(const fs::path& set_a, const fs::path& set_b, int grid,
                          const RunOptions& options);

/// Writes the four Haar subbands of an image as 16-bit images mapped to [0, 1] and
/// returns the affine per band (value = stored * scale + offset), also written to
/// out_dir/subbands.json.
nlohmann::json export_subbands(const fs::path& image, const fs::path& out_dir,
                               const RunOptions& options);

/// Explicit command-line settings that take precedence over a configuration file.
struct RunOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<double> range_scale;
};

/// Runs the stages of a JSON configuration in order:
///   {"seed": 0, "threads": 1, "range_scale": 0.001, "assume_srgb": true,
///    "stages": [{"type": "estimate" | "synthesize" | "enhance" | "evaluate" | "gap" |
///                "wavelet", ...stage fields...}]}
/// Relative paths resolve against `base_dir`. Every stage result carries provenance
/// (input digests, seed, version); the output contains no timestamps, so reruns are
/// byte-identical.
nlohmann::json run_manifest(const nlohmann::json& config, const fs::path& base_dir,
                            const RunOverrides& overrides = {});
nlohmann::json run_manifest(const fs::path& config_path, const RunOverrides& overrides = {});

/// FNV-1a 64-bit digest of a file, as 16 hex digits.
std::string file_digest(const fs::path& path);

/// Serializes with two-space indentation and a trailing newline.
void write_json(const nlohmann::json& j, const fs::path& path);

}  // namespace uwimf
