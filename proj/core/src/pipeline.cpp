#include "uwimf/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

#include "uwimf/domaingap.hpp"
#include "uwimf/image_io.hpp"
#include "uwimf/rng.hpp"
#include "uwimf/wavelet.hpp"

#ifndef UWIMF_VERSION
#define UWIMF_VERSION "0.0.0"
#endif

namespace uwimf {
namespace {

using nlohmann::json;

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    return s;
}

bool is_image_file(const fs::path& p) {
    const std::string ext = lower(p.extension().string());
    return ext == ".png" || ext == ".ppm";
}

// Runs fn(i) for i in [0, n) on up to `threads` workers; rethrows the lowest-index failure.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw InvalidInput("malformed JSON in '" + path.string() + "': " + e.what());
    }
}

std::string relative_to(const fs::path& target, const fs::path& base) {
    return fs::absolute(target).lexically_normal().lexically_proximate(
        fs::absolute(base).lexically_normal()).generic_string();
}

// Scores are reported as numbers, except +inf which JSON cannot represent.
json score_value(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

double max_abs_difference(const LinearImage& a, const LinearImage& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
    }
    return worst;
}

void ensure_directory(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw InvalidInput("cannot create directory '" + dir.string() + "': " + ec.message());
}

fs::path find_range_for(const std::string& stem, const fs::path& ranges) {
    if (fs::is_regular_file(ranges)) return ranges;
    for (const char* ext : {".pfm", ".png"}) {
        const fs::path candidate = ranges / (stem + ext);
        if (fs::is_regular_file(candidate)) return candidate;
    }
    throw InvalidInput("no range map for '" + stem + "' in '" + ranges.string() + "'");
}

LinearImage percentile_stretch(const LinearImage& img, double low, double high) {
    LinearImage out = img;
    for (int c = 0; c < 3; ++c) {
        std::vector<double> values(img.pixel_count());
        for (std::size_t p = 0; p < values.size(); ++p) values[p] = img.at(p, c);
        const double lo = percentile(values, low);
        const double hi = percentile(values, high);
        if (!(hi > lo)) continue;
        for (std::size_t p = 0; p < values.size(); ++p) {
            out.at(p, c) = std::clamp((img.at(p, c) - lo) / (hi - lo), 0.0, 1.0);
        }
    }
    return out;
}

}  // namespace

const char* version() { return UWIMF_VERSION; }

std::string file_digest(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("cannot open '" + path.string() + "'");
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buffer[1 << 14];
    while (in) {
        in.read(buffer, sizeof(buffer));
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buffer[i]);
            h *= 0x100000001b3ULL;
        }
    }
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
    return hex;
}

void write_json(const json& j, const fs::path& path) {
    if (path.has_parent_path()) ensure_directory(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("cannot write '" + path.string() + "'");
    out << j.dump(2) << '\n';
    if (!out) throw InvalidInput("cannot write '" + path.string() + "'");
}

// ---------------------------------------------------------------------------
// Presets and records

void PresetLibrary::validate() const {
    if (presets.empty()) throw InvalidInput("preset library is empty");
    std::set<std::string> names;
    for (const Preset& p : presets) {
        if (p.name.empty()) throw InvalidInput("preset names must be non-empty");
        if (!names.insert(p.name).second) throw InvalidInput("duplicate preset name '" + p.name + "'");
        p.params.validate();
    }
}

void to_json(json& j, const PresetLibrary& lib) {
    j = json{{"presets", json::array()}};
    for (const Preset& p : lib.presets) j["presets"].push_back({{"name", p.name}, {"params", p.params}});
}

void from_json(const json& j, PresetLibrary& lib) {
    if (!j.is_object() || !j.contains("presets") || !j.at("presets").is_array()) {
        throw InvalidInput("preset library must be an object with a 'presets' array");
    }
    PresetLibrary out;
    for (const json& entry : j.at("presets")) {
        if (!entry.is_object() || !entry.contains("name") || !entry.at("name").is_string() ||
            !entry.contains("params")) {
            throw InvalidInput("each preset needs a 'name' string and a 'params' object");
        }
        Preset p;
        p.name = entry.at("name").get<std::string>();
        from_json(entry.at("params"), p.params);
        out.presets.push_back(std::move(p));
    }
    out.validate();
    lib = std::move(out);
}

PresetLibrary load_presets(const fs::path& path) {
    auto load_one = [](const fs::path& file, PresetLibrary& lib) {
        const json j = read_json_file(file);
        if (j.is_object() && j.contains("presets")) {
            PresetLibrary part;
            from_json(j, part);
            for (auto& p : part.presets) lib.presets.push_back(std::move(p));
        } else {
            Preset p;
            p.name = file.stem().string();
            from_json(j, p.params);
            lib.presets.push_back(std::move(p));
        }
    };
    PresetLibrary lib;
    if (fs::is_directory(path)) {
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(path)) {
            if (e.is_regular_file() && lower(e.path().extension().string()) == ".json") {
                files.push_back(e.path());
            }
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) load_one(f, lib);
    } else {
        load_one(path, lib);
    }
    lib.validate();
    return lib;
}

void to_json(json& j, const SynthRecord& r) {
    j = json{{"id", r.id},
             {"source", r.source},
             {"preset", r.preset},
             {"degraded", r.degraded},
             {"clear", r.clear},
             {"backscatter", r.backscatter},
             {"transmission", r.transmission},
             {"range", r.range},
             {"white_point", r.white_point},
             {"params", r.params},
             {"roundtrip_max_error", r.roundtrip_max_error}};
}

void from_json(const json& j, SynthRecord& r) {
    try {
        r.id = j.at("id").get<std::string>();
        r.source = j.at("source").get<std::string>();
        r.preset = j.at("preset").get<std::string>();
        r.degraded = j.at("degraded").get<std::string>();
        r.clear = j.at("clear").get<std::string>();
        r.backscatter = j.at("backscatter").get<std::string>();
        r.transmission = j.at("transmission").get<std::string>();
        r.range = j.at("range").get<std::string>();
        r.white_point = j.at("white_point").get<Rgb>();
        from_json(j.at("params"), r.params);
        r.roundtrip_max_error = j.at("roundtrip_max_error").get<double>();
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("malformed manifest record: ") + e.what());
    }
}

std::vector<fs::path> list_images(const fs::path& file_or_dir) {
    if (fs::is_regular_file(file_or_dir)) return {file_or_dir};
    if (!fs::is_directory(file_or_dir)) {
        throw InvalidInput("input '" + file_or_dir.string() + "' does not exist");
    }
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(file_or_dir)) {
        if (e.is_regular_file() && is_image_file(e.path())) out.push_back(e.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<ImagePair> find_image_pairs(const fs::path& images, const fs::path& ranges_dir) {
    std::vector<ImagePair> pairs;
    for (const fs::path& img : list_images(images)) {
        const std::string stem = img.stem().string();
        pairs.push_back({stem, img, find_range_for(stem, ranges_dir)});
    }
    if (pairs.empty()) throw InvalidInput("no images found in '" + images.string() + "'");
    return pairs;
}

std::vector<std::vector<std::size_t>> sample_presets(std::size_t n_images, std::size_t n_presets,
                                                     int k, std::uint64_t seed) {
    if (k < 1) throw InvalidInput("k_per_image must be at least 1");
    if (static_cast<std::size_t>(k) > n_presets) {
        throw InvalidInput("k_per_image (" + std::to_string(k) + ") exceeds the preset count (" +
                           std::to_string(n_presets) + ")");
    }
    std::vector<std::vector<std::size_t>> out(n_images);
    for (std::size_t i = 0; i < n_images; ++i) {
        DeterministicRng rng(derive_seed(seed, i));
        std::vector<std::size_t> order(n_presets);
        for (std::size_t p = 0; p < n_presets; ++p) order[p] = p;
        for (std::size_t p = 0; p < static_cast<std::size_t>(k); ++p) {
            const std::size_t pick = p + static_cast<std::size_t>(rng.below(n_presets - p));
            std::swap(order[p], order[pick]);
        }
        order.resize(static_cast<std::size_t>(k));
        out[i] = std::move(order);
    }
    return out;
}

std::vector<SynthRecord> synthesize_dataset(const std::vector<ImagePair>& pairs,
                                            const PresetLibrary& presets,
                                            const DatasetOptions& options) {
    presets.validate();
    if (options.out_dir.empty()) throw InvalidInput("synthesize: output directory is required");
    const auto picks =
        sample_presets(pairs.size(), presets.presets.size(), options.k_per_image, options.run.seed);

    const fs::path out = options.out_dir;
    ensure_directory(out / "clear");
    ensure_directory(out / "degraded");
    ensure_directory(out / "components");

    std::vector<std::vector<SynthRecord>> per_image(pairs.size());
    parallel_for(pairs.size(), options.run.threads, [&](std::size_t i) {
        const ImagePair& pair = pairs[i];
        const LinearImage clear = load_image(pair.image, options.run.assume_srgb);
        const RangeMap z = load_range(pair.range, options.run.range_scale);
        require_same_size(clear, z, ("synthesize '" + pair.stem + "'").c_str());

        const fs::path clear_path = out / "clear" / (pair.stem + ".png");
        save_image(clear, clear_path, options.run.assume_srgb, 16);

        for (std::size_t pick : picks[i]) {
            const Preset& preset = presets.presets[pick];
            const Synthesis syn = synthesize(clear, z, preset.params);
            const LinearImage back = restore(syn.image, syn.components);

            SynthRecord rec;
            rec.id = pair.stem + "__" + preset.name;
            rec.source = pair.stem;
            rec.preset = preset.name;
            const fs::path degraded = out / "degraded" / (rec.id + ".png");
            const fs::path b_path = out / "components" / (rec.id + "_B.png");
            const fs::path t_path = out / "components" / (rec.id + "_T.png");
            save_image(syn.image, degraded, options.run.assume_srgb, 16);
            save_image(syn.components.backscatter, b_path, false, 16);
            save_image(syn.components.transmission, t_path, false, 16);

            rec.degraded = relative_to(degraded, out);
            rec.clear = relative_to(clear_path, out);
            rec.backscatter = relative_to(b_path, out);
            rec.transmission = relative_to(t_path, out);
            rec.range = relative_to(pair.range, out);
            rec.white_point = syn.components.white_point;
            rec.params = preset.params;
            rec.roundtrip_max_error = max_abs_difference(back, clear);
            per_image[i].push_back(std::move(rec));
        }
    });

    std::vector<SynthRecord> records;
    std::ofstream manifest(out / "manifest.jsonl", std::ios::binary);
    if (!manifest) throw InvalidInput("cannot write manifest in '" + out.string() + "'");
    for (auto& group : per_image) {
        for (auto& rec : group) {
            manifest << json(rec).dump() << '\n';
            records.push_back(std::move(rec));
        }
    }
    if (!manifest) throw InvalidInput("cannot write manifest in '" + out.string() + "'");
    return records;
}

std::vector<SynthRecord> read_manifest(const fs::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw InvalidInput("cannot open manifest '" + manifest_path.string() + "'");
    std::vector<SynthRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw InvalidInput("malformed manifest line: " + std::string(e.what()));
        }
        SynthRecord r;
        from_json(j, r);
        records.push_back(std::move(r));
    }
    return records;
}

// ---------------------------------------------------------------------------
// Enhancement

LinearImage enhance(const LinearImage& observed, const RangeMap& z,
                    const std::optional<WaterParams>& params, const EnhanceOptions& options) {
    validate(observed);
    validate(z);
    require_same_size(observed, z, "enhance");
    ComponentMaps components;
    if (params) {
        components = make_components(z, *params);
    } else {
        components = estimate_water_params(observed, z, options.estimation).components;
    }
    LinearImage out = clamped(restore(observed, components));
    if (options.stretch) out = percentile_stretch(out, options.stretch_low, options.stretch_high);
    return out;
}

json estimate_report(const WaterEstimate& estimate, const EstimationConfig& config) {
    json j = estimate.params;
    json per_channel = json::array();
    json residual_j = json::array();
    json residual_beta = json::array();
    for (const ChannelBackscatter& c : estimate.backscatter.channels) {
        per_channel.push_back(c.rms_error);
        residual_j.push_back(c.residual_J);
        residual_beta.push_back(c.residual_beta);
    }
    j["diagnostics"] = {
        {"backscatter_rms_error", estimate.backscatter.rms_error},
        {"backscatter_rms_error_per_channel", per_channel},
        {"backscatter_residual_J", residual_j},
        {"backscatter_residual_beta", residual_beta},
        {"dark_bins", estimate.dark_bins},
        {"dark_samples", estimate.backscatter.sample_count},
        {"attenuation_bins", estimate.attenuation.bin_centers.size()},
        {"attenuation_excluded_fraction", estimate.attenuation.excluded_fraction},
        {"illuminant_gain", estimate.attenuation.gain},
        {"illuminant_iterations", estimate.illuminant_iterations},
        {"seed", config.seed},
    };
    return j;
}

json enhance_batch(const EnhanceRequest& request, const RunOptions& options) {
    struct Job {
        std::string name;
        fs::path image;
        fs::path range;
        std::optional<WaterParams> params;
        fs::path output;
    };
    std::vector<Job> jobs;
    std::optional<WaterParams> fixed;
    if (request.params) from_json(read_json_file(*request.params), fixed.emplace());

    if (request.manifest) {
        const fs::path base = request.manifest->parent_path();
        ensure_directory(request.out);
        for (const SynthRecord& r : read_manifest(*request.manifest)) {
            jobs.push_back({r.id, base / r.degraded, base / r.range, r.params,
                            request.out / (r.id + ".png")});
        }
    } else {
        if (!request.ranges) throw InvalidInput("enhance: a range map (file or directory) is required");
        const auto pairs = find_image_pairs(request.input, *request.ranges);
        const bool single_file = fs::is_regular_file(request.input) && is_image_file(request.out);
        if (!single_file) ensure_directory(request.out);
        for (const ImagePair& p : pairs) {
            const fs::path target =
                single_file ? request.out : request.out / (p.stem + ".png");
            jobs.push_back({p.image.filename().string(), p.image, p.range, fixed, target});
        }
    }

    std::vector<json> reports(jobs.size());
    parallel_for(jobs.size(), options.threads, [&](std::size_t i) {
        const Job& job = jobs[i];
        const LinearImage img = load_image(job.image, options.assume_srgb);
        const RangeMap z = load_range(job.range, options.range_scale);
        require_same_size(img, z, ("enhance '" + job.name + "'").c_str());
        json report{{"file", job.output.filename().string()}};
        LinearImage result;
        if (job.params) {
            result = enhance(img, z, job.params, request.options);
            report["estimated"] = false;
        } else {
            EstimationConfig cfg = request.options.estimation;
            cfg.seed = options.seed;
            const WaterEstimate est = estimate_water_params(img, z, cfg);
            EnhanceOptions opts = request.options;
            result = enhance(img, z, est.params, opts);
            report["estimated"] = true;
            report["params"] = est.params;
        }
        if (job.output.has_parent_path()) ensure_directory(job.output.parent_path());
        save_image(result, job.output, options.assume_srgb, 16);
        reports[i] = std::move(report);
    });

    json out{{"outputs", json::object()}};
    for (std::size_t i = 0; i < jobs.size(); ++i) out["outputs"][jobs[i].name] = reports[i];
    return out;
}

// ---------------------------------------------------------------------------
// Evaluation

PatchMask load_patch_mask(const fs::path& path) {
    const json j = read_json_file(path);
    const json& list = j.is_object() && j.contains("patches") ? j.at("patches") : j;
    if (!list.is_array()) throw InvalidInput("patch mask must be an array of {x, y, w, h}");
    PatchMask mask;
    for (const json& p : list) {
        try {
            mask.patches.push_back(
                {p.at("x").get<int>(), p.at("y").get<int>(), p.at("w").get<int>(), p.at("h").get<int>()});
        } catch (const json::exception& e) {
            throw InvalidInput(std::string("malformed patch entry: ") + e.what());
        }
    }
    if (mask.patches.empty()) throw InvalidInput("patch mask is empty");
    return mask;
}

json evaluate_batch(const EvaluateRequest& request, const RunOptions& options) {
    static const std::set<std::string> known{"psnr", "ssim", "uiqm", "uciqe", "rgb-error"};
    if (!known.count(request.metric)) throw InvalidInput("unknown metric '" + request.metric + "'");
    const bool full_reference = request.metric == "psnr" || request.metric == "ssim";
    if (request.metric == "rgb-error" && !request.mask) {
        throw InvalidInput("rgb-error requires a patch mask");
    }

    struct Item {
        std::string name;
        fs::path input;
        std::optional<fs::path> reference;
    };
    std::vector<Item> items;
    if (request.manifest) {
        const fs::path base = request.manifest->parent_path();
        for (const SynthRecord& r : read_manifest(*request.manifest)) {
            const fs::path in = fs::is_directory(request.input) ? request.input / (r.id + ".png")
                                                                : request.input;
            items.push_back({r.id + ".png", in, base / r.clear});
        }
    } else {
        for (const fs::path& in : list_images(request.input)) {
            Item item{in.filename().string(), in, std::nullopt};
            if (request.reference) {
                if (fs::is_regular_file(*request.reference)) {
                    item.reference = *request.reference;
                } else {
                    const fs::path candidate = *request.reference / in.filename();
                    if (!fs::is_regular_file(candidate)) {
                        throw InvalidInput("no reference for '" + item.name + "' in '" +
                                           request.reference->string() + "'");
                    }
                    item.reference = candidate;
                }
            }
            items.push_back(std::move(item));
        }
    }
    if (items.empty()) throw InvalidInput("evaluate: no input images");
    if (full_reference) {
        for (const Item& item : items) {
            if (!item.reference) throw InvalidInput(request.metric + " requires a reference image");
        }
    }

    std::vector<json> entries(items.size());
    std::vector<double> scores(items.size());
    parallel_for(items.size(), options.threads, [&](std::size_t i) {
        const Item& item = items[i];
        const LinearImage img = load_image(item.input, options.assume_srgb);
        json entry;
        double score = 0.0;
        if (request.metric == "psnr") {
            score = psnr(img, load_image(*item.reference, options.assume_srgb));
        } else if (request.metric == "ssim") {
            score = ssim(img, load_image(*item.reference, options.assume_srgb));
        } else if (request.metric == "uiqm") {
            const UiqmBreakdown b = uiqm_components(img);
            score = b.uiqm;
            entry["components"] = {{"uicm", b.uicm}, {"uism", b.uism}, {"uiconm", b.uiconm}};
        } else if (request.metric == "uciqe") {
            const UciqeBreakdown b = uciqe_components(img);
            score = b.uciqe;
            entry["components"] = {{"chroma_std", b.chroma_std},
                                   {"luminance_contrast", b.luminance_contrast},
                                   {"saturation_mean", b.saturation_mean}};
        } else {
            score = rgb_error(img, *request.mask);
        }
        entry["score"] = score_value(score);
        scores[i] = score;
        entries[i] = std::move(entry);
    });

    json results = json::object();
    double sum = 0.0;
    for (std::size_t i = 0; i < items.size(); ++i) {
        results[items[i].name] = entries[i];
        sum += scores[i];
    }
    return json{{"metric", request.metric},
                {"results", results},
                {"summary",
                 {{"count", items.size()}, {"mean", score_value(sum / static_cast<double>(items.size()))}}}};
}

json domain_gap(const fs::path& set_a, const fs::path& set_b, int grid, const RunOptions& options) {
    const auto files_a = list_images(set_a);
    const auto files_b = list_images(set_b);
    if (files_a.empty() || files_b.empty()) throw InvalidInput("gap: both image sets must be non-empty");

    std::vector<fs::path> all = files_a;
    all.insert(all.end(), files_b.begin(), files_b.end());
    std::vector<FeatureVector> features(all.size());
    parallel_for(all.size(), options.threads, [&](std::size_t i) {
        features[i] = extract_features(load_image(all[i], options.assume_srgb));
    });

    const Embedding2D joint = embed_2d(features);
    Embedding2D a;
    Embedding2D b;
    a.method = b.method = joint.method;
    a.points.assign(joint.points.begin(), joint.points.begin() + static_cast<std::ptrdiff_t>(files_a.size()));
    b.points.assign(joint.points.begin() + static_cast<std::ptrdiff_t>(files_a.size()), joint.points.end());

    return json{{"ir_percent", intersection_ratio(a, b, grid)},
                {"cd", center_distance(a, b)},
                {"n_a", files_a.size()},
                {"n_b", files_b.size()},
                {"method", joint.method},
                {"grid", grid},
                {"ir_sensitivity",
                 {{"25", intersection_ratio(a, b, 25)}, {"100", intersection_ratio(a, b, 100)}}}};
}

json export_subbands(const fs::path& image, const fs::path& out_dir, const RunOptions& options) {
    const LinearImage img = load_image(image, options.assume_srgb);
    const auto bands = dwt2_rgb(img);
    ensure_directory(out_dir);

    json report{{"image", image.filename().string()},
                {"original_width", img.width()},
                {"original_height", img.height()},
                {"band_width", bands[0].LL.width()},
                {"band_height", bands[0].LL.height()},
                {"kernel", "haar, 1/2-normalized"},
                {"bands", json::object()}};
    const std::pair<const char*, GrayImage Subbands::*> names[] = {
        {"LL", &Subbands::LL}, {"LH", &Subbands::LH}, {"HL", &Subbands::HL}, {"HH", &Subbands::HH}};
    for (const auto& [name, member] : names) {
        const int w = bands[0].LL.width();
        const int h = bands[0].LL.height();
        LinearImage packed(w, h);
        for (int c = 0; c < 3; ++c) {
            const GrayImage& plane = bands[c].*member;
            for (std::size_t p = 0; p < plane.pixel_count(); ++p) packed.at(p, c) = plane.at(p);
        }
        const auto [lo, hi] = std::minmax_element(packed.data().begin(), packed.data().end());
        const double offset = *lo;
        const double scale = *hi > *lo ? *hi - *lo : 1.0;
        for (double& v : packed.data()) v = (v - offset) / scale;
        const std::string file = std::string(name) + ".png";
        save_image(packed, out_dir / file, false, 16);
        report["bands"][name] = {{"file", file}, {"offset", offset}, {"scale", scale}};
    }
    write_json(report, out_dir / "subbands.json");
    return report;
}

// ---------------------------------------------------------------------------
// Staged runs

namespace {

void digest_into(json& inputs, const std::string& label, const fs::path& path) {
    if (fs::is_regular_file(path)) {
        inputs[label] = file_digest(path);
        return;
    }
    if (!fs::is_directory(path)) throw InvalidInput("missing input '" + label + "'");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(path)) {
        if (e.is_regular_file()) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) inputs[label + "/" + f.filename().string()] = file_digest(f);
}

std::string require_string(const json& stage, const char* key) {
    if (!stage.contains(key) || !stage.at(key).is_string()) {
        throw InvalidInput(std::string("stage '") + stage.value("type", "?") + "' needs string field '" +
                           key + "'");
    }
    return stage.at(key).get<std::string>();
}

std::optional<std::string> optional_string(const json& stage, const char* key) {
    if (!stage.contains(key)) return std::nullopt;
    if (!stage.at(key).is_string()) throw InvalidInput(std::string("field '") + key + "' must be a string");
    return stage.at(key).get<std::string>();
}

}  // namespace

json run_manifest(const json& config, const fs::path& base_dir, const RunOverrides& overrides) {
    if (!config.is_object()) throw InvalidInput("run configuration must be a JSON object");
    RunOptions run;
    try {
        run.seed = config.value("seed", std::uint64_t{0});
        run.threads = config.value("threads", 1);
        run.range_scale = config.value("range_scale", 0.001);
        run.assume_srgb = config.value("assume_srgb", true);
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("malformed run configuration: ") + e.what());
    }
    if (overrides.seed) run.seed = *overrides.seed;
    if (overrides.threads) run.threads = *overrides.threads;
    if (overrides.range_scale) run.range_scale = *overrides.range_scale;

    const json stages = config.value("stages", json::array());
    if (!stages.is_array()) throw InvalidInput("'stages' must be an array");

    auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base_dir / p; };

    json results{{"version", version()}, {"seed", run.seed}, {"stages", json::array()}};
    for (std::size_t index = 0; index < stages.size(); ++index) {
        const json& stage = stages[index];
        if (!stage.is_object() || !stage.contains("type") || !stage.at("type").is_string()) {
            throw InvalidInput("stage " + std::to_string(index) + " needs a 'type' string");
        }
        const std::string type = stage.at("type").get<std::string>();
        json inputs = json::object();
        json result;

        if (type == "estimate") {
            const std::string image = require_string(stage, "image");
            const std::string range = require_string(stage, "range");
            digest_into(inputs, image, resolve(image));
            digest_into(inputs, range, resolve(range));
            EstimationConfig cfg;
            cfg.seed = run.seed;
            cfg.depth_m = stage.value("depth_m", 0.0);
            const WaterEstimate est = estimate_water_params(load_image(resolve(image), run.assume_srgb),
                                                            load_range(resolve(range), run.range_scale), cfg);
            result = estimate_report(est, cfg);
            if (auto out = optional_string(stage, "out")) write_json(result, resolve(*out));
        } else if (type == "synthesize") {
            const std::string images = require_string(stage, "images");
            const std::string ranges = require_string(stage, "ranges");
            const std::string presets = require_string(stage, "presets");
            const std::string out_dir = require_string(stage, "out_dir");
            digest_into(inputs, images, resolve(images));
            digest_into(inputs, ranges, resolve(ranges));
            digest_into(inputs, presets, resolve(presets));
            DatasetOptions opts;
            opts.k_per_image = stage.value("k", 2);
            opts.out_dir = resolve(out_dir);
            opts.run = run;
            const auto records = synthesize_dataset(find_image_pairs(resolve(images), resolve(ranges)),
                                                    load_presets(resolve(presets)), opts);
            double worst = 0.0;
            for (const auto& r : records) worst = std::max(worst, r.roundtrip_max_error);
            result = {{"manifest", (fs::path(out_dir) / "manifest.jsonl").generic_string()},
                      {"records", records.size()},
                      {"roundtrip_max_error", worst}};
        } else if (type == "enhance") {
            EnhanceRequest req;
            req.out = resolve(require_string(stage, "out"));
            if (auto m = optional_string(stage, "manifest")) {
                digest_into(inputs, *m, resolve(*m));
                req.manifest = resolve(*m);
            } else {
                const std::string input = require_string(stage, "input");
                digest_into(inputs, input, resolve(input));
                req.input = resolve(input);
                const std::string ranges = require_string(stage, "ranges");
                digest_into(inputs, ranges, resolve(ranges));
                req.ranges = resolve(ranges);
            }
            if (auto p = optional_string(stage, "params")) {
                digest_into(inputs, *p, resolve(*p));
                req.params = resolve(*p);
            }
            req.options.stretch = stage.value("stretch", false);
            result = enhance_batch(req, run);
        } else if (type == "evaluate") {
            EvaluateRequest req;
            req.metric = require_string(stage, "metric");
            const std::string input = require_string(stage, "input");
            digest_into(inputs, input, resolve(input));
            req.input = resolve(input);
            if (auto r = optional_string(stage, "reference")) {
                digest_into(inputs, *r, resolve(*r));
                req.reference = resolve(*r);
            }
            if (auto m = optional_string(stage, "manifest")) {
                digest_into(inputs, *m, resolve(*m));
                req.manifest = resolve(*m);
            }
            if (auto m = optional_string(stage, "mask")) {
                digest_into(inputs, *m, resolve(*m));
                req.mask = load_patch_mask(resolve(*m));
            }
            result = evaluate_batch(req, run);
            if (auto out = optional_string(stage, "out")) write_json(result, resolve(*out));
        } else if (type == "gap") {
            const std::string a = require_string(stage, "set_a");
            const std::string b = require_string(stage, "set_b");
            digest_into(inputs, a, resolve(a));
            digest_into(inputs, b, resolve(b));
            result = domain_gap(resolve(a), resolve(b), stage.value("grid", 50), run);
            if (auto out = optional_string(stage, "out")) write_json(result, resolve(*out));
        } else if (type == "wavelet") {
            const std::string image = require_string(stage, "image");
            digest_into(inputs, image, resolve(image));
            result = export_subbands(resolve(image), resolve(require_string(stage, "out_dir")), run);
        } else {
            throw InvalidInput("unknown stage type '" + type + "'");
        }

        results["stages"].push_back(
            {{"index", index},
             {"type", type},
             {"provenance", {{"inputs", inputs}, {"seed", run.seed}, {"version", version()}}},
             {"result", result}});
    }
    return results;
}

json run_manifest(const fs::path& config_path, const RunOverrides& overrides) {
    const json config = read_json_file(config_path);
    return run_manifest(config, config_path.parent_path(), overrides);
}

}  // namespace uwimf
