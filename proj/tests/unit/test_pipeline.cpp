#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "cli_fixture.hpp"
#include "scenes.hpp"
#include "tempdir.hpp"
#include "uwimf/error.hpp"
#include "uwimf/formation.hpp"
#include "uwimf/image_io.hpp"
#include "uwimf/pipeline.hpp"

namespace uwimf {
namespace {

using testing::TempDir;

double max_abs_difference(const LinearImage& a, const LinearImage& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
    return worst;
}

TEST(Presets, Validation) {
    PresetLibrary lib;
    EXPECT_THROW(lib.validate(), InvalidInput);
    lib.presets = {{"a", testing::greenish_preset()}, {"a", testing::bluish_preset()}};
    EXPECT_THROW(lib.validate(), InvalidInput);
    lib.presets[1].name = "";
    EXPECT_THROW(lib.validate(), InvalidInput);
    lib.presets[1].name = "b";
    EXPECT_NO_THROW(lib.validate());
}

TEST(Presets, JsonFileBareFileAndDirectory) {
    TempDir dir("presets");
    PresetLibrary lib;
    lib.presets = {{"greenish", testing::greenish_preset()}, {"bluish", testing::bluish_preset()}};
    write_json(lib, dir / "lib.json");
    const PresetLibrary back = load_presets(dir / "lib.json");
    ASSERT_EQ(back.presets.size(), 2u);
    EXPECT_EQ(back.presets[0].name, "greenish");
    EXPECT_EQ(back.presets[1].params, testing::bluish_preset());

    std::filesystem::create_directories(dir / "many");
    write_json(testing::greenish_preset(), dir / "many" / "green.json");
    write_json(testing::bluish_preset(), dir / "many" / "blue.json");
    const PresetLibrary many = load_presets(dir / "many");
    ASSERT_EQ(many.presets.size(), 2u);
    std::set<std::string> names;
    for (const auto& p : many.presets) names.insert(p.name);
    EXPECT_EQ(names, (std::set<std::string>{"green", "blue"}));

    write_json({{"presets", nlohmann::json::array()}}, dir / "empty.json");
    EXPECT_THROW(load_presets(dir / "empty.json"), InvalidInput);
    EXPECT_THROW(load_presets(dir / "missing.json"), InvalidInput);
}

TEST(SamplePresets, DistinctDeterministicAndBounded) {
    const auto a = sample_presets(50, 6, 3, 99);
    ASSERT_EQ(a.size(), 50u);
    for (const auto& picks : a) {
        ASSERT_EQ(picks.size(), 3u);
        EXPECT_EQ(std::set<std::size_t>(picks.begin(), picks.end()).size(), 3u);
        for (std::size_t p : picks) EXPECT_LT(p, 6u);
    }
    EXPECT_EQ(sample_presets(50, 6, 3, 99), a);
    EXPECT_NE(sample_presets(50, 6, 3, 100), a);
    // k = n picks every preset.
    for (const auto& picks : sample_presets(5, 4, 4, 1)) {
        EXPECT_EQ(std::set<std::size_t>(picks.begin(), picks.end()).size(), 4u);
    }
    EXPECT_THROW(sample_presets(3, 2, 3, 0), InvalidInput);
    EXPECT_THROW(sample_presets(3, 2, 0, 0), InvalidInput);
}

TEST(SamplePresets, EveryPresetGetsUsed) {
    std::vector<int> hits(5, 0);
    for (const auto& picks : sample_presets(400, 5, 2, 7)) {
        for (std::size_t p : picks) ++hits[p];
    }
    // 800 draws over 5 presets: 160 expected each.
    for (int h : hits) {
        EXPECT_GT(h, 110);
        EXPECT_LT(h, 210);
    }
}

class DatasetTest : public ::testing::Test {
protected:
    void SetUp() override { testing::write_cli_workspace(ws_.path(), 2, 40); }

    PresetLibrary library() const { return load_presets(ws_ / "presets.json"); }
    std::vector<ImagePair> pairs() const { return find_image_pairs(ws_ / "in_air", ws_ / "ranges"); }

    TempDir ws_{"dataset"};
};

TEST_F(DatasetTest, PairsAreSortedAndMissingRangesThrow) {
    const auto p = pairs();
    ASSERT_EQ(p.size(), 2u);
    EXPECT_EQ(p[0].stem, "scene_0");
    EXPECT_EQ(p[1].stem, "scene_1");
    std::filesystem::remove(ws_ / "ranges" / "scene_1.pfm");
    EXPECT_THROW(pairs(), InvalidInput);
}

TEST_F(DatasetTest, RecordsLayoutAndRoundTrip) {
    DatasetOptions opts;
    opts.k_per_image = 2;
    opts.out_dir = ws_ / "out";
    opts.run.seed = 3;
    const auto records = synthesize_dataset(pairs(), library(), opts);
    ASSERT_EQ(records.size(), 4u);
    EXPECT_EQ(records[0].source, "scene_0");
    EXPECT_EQ(records[0].clear, records[1].clear);
    EXPECT_NE(records[0].preset, records[1].preset);
    for (const SynthRecord& r : records) {
        EXPECT_EQ(r.id, r.source + "__" + r.preset);
        EXPECT_LE(r.roundtrip_max_error, 1e-5);
        for (const std::string& rel : {r.degraded, r.clear, r.backscatter, r.transmission, r.range}) {
            EXPECT_TRUE(std::filesystem::exists(opts.out_dir / rel)) << rel;
        }
    }

    const auto back = read_manifest(opts.out_dir / "manifest.jsonl");
    ASSERT_EQ(back.size(), records.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        EXPECT_EQ(back[i].id, records[i].id);
        EXPECT_EQ(back[i].params, records[i].params);
        EXPECT_EQ(back[i].degraded, records[i].degraded);
    }
}

TEST_F(DatasetTest, IdentityWaterReproducesTheClearFile) {
    PresetLibrary lib;
    lib.presets = {{"clear", testing::identity_preset()}};
    DatasetOptions opts;
    opts.k_per_image = 1;
    opts.out_dir = ws_ / "out";
    const auto records = synthesize_dataset(pairs(), lib, opts);
    for (const SynthRecord& r : records) {
        EXPECT_EQ(testing::read_bytes(opts.out_dir / r.degraded), testing::read_bytes(opts.out_dir / r.clear));
        EXPECT_EQ(r.roundtrip_max_error, 0.0);
    }
}

TEST_F(DatasetTest, StoredFilesRestoreWithTheirParams) {
    DatasetOptions opts;
    opts.k_per_image = 2;
    opts.out_dir = ws_ / "out";
    opts.run.seed = 5;
    for (const SynthRecord& r : synthesize_dataset(pairs(), library(), opts)) {
        const LinearImage degraded = load_image(opts.out_dir / r.degraded);
        const LinearImage clear = load_image(opts.out_dir / r.clear);
        const RangeMap z = load_range(opts.out_dir / r.range);
        const LinearImage restored = enhance(degraded, z, r.params);
        EXPECT_GE(psnr(restored, clear), 40.0) << r.id;
    }
}

TEST_F(DatasetTest, ThreadCountDoesNotChangeOutput) {
    DatasetOptions opts;
    opts.k_per_image = 2;
    opts.run.seed = 8;
    opts.out_dir = ws_ / "one";
    opts.run.threads = 1;
    synthesize_dataset(pairs(), library(), opts);
    opts.out_dir = ws_ / "four";
    opts.run.threads = 4;
    synthesize_dataset(pairs(), library(), opts);
    EXPECT_EQ(testing::snapshot(ws_ / "one"), testing::snapshot(ws_ / "four"));
}

TEST(Enhance, IdentityWaterReturnsClampedInput) {
    DeterministicRng rng(4);
    const LinearImage img = testing::random_image(12, 9, rng);
    const RangeMap z = testing::random_range(12, 9, rng, 1.0, 5.0);
    const LinearImage out = enhance(img, z, testing::identity_preset());
    EXPECT_EQ(max_abs_difference(out, img), 0.0);
}

TEST(Enhance, StretchSpansUnitRange) {
    DeterministicRng rng(5);
    const LinearImage img = testing::random_image(30, 30, rng, 0.3, 0.6);
    const RangeMap z = testing::random_range(30, 30, rng, 1.0, 5.0);
    EnhanceOptions opts;
    opts.stretch = true;
    const LinearImage out = enhance(img, z, testing::identity_preset(), opts);
    for (int c = 0; c < 3; ++c) {
        double lo = 1.0, hi = 0.0;
        for (std::size_t p = 0; p < out.pixel_count(); ++p) {
            lo = std::min(lo, out.at(p, c));
            hi = std::max(hi, out.at(p, c));
        }
        EXPECT_EQ(lo, 0.0);
        EXPECT_EQ(hi, 1.0);
    }
}

TEST(FileDigest, StableAndContentSensitive) {
    TempDir dir("digest");
    write_json({{"a", 1}}, dir / "a.json");
    write_json({{"a", 1}}, dir / "b.json");
    write_json({{"a", 2}}, dir / "c.json");
    EXPECT_EQ(file_digest(dir / "a.json"), file_digest(dir / "b.json"));
    EXPECT_NE(file_digest(dir / "a.json"), file_digest(dir / "c.json"));
    EXPECT_EQ(file_digest(dir / "a.json").size(), 16u);
    EXPECT_EQ(testing::read_bytes(dir / "a.json"), "{\n  \"a\": 1\n}\n");
}

TEST(RunManifest, EmptyAndMalformedConfigs) {
    TempDir dir("run");
    const nlohmann::json empty = run_manifest(nlohmann::json{{"stages", nlohmann::json::array()}}, dir.path());
    EXPECT_TRUE(empty["stages"].empty());
    EXPECT_EQ(empty["version"], version());

    EXPECT_THROW(run_manifest(nlohmann::json::array(), dir.path()), InvalidInput);
    EXPECT_THROW(run_manifest(nlohmann::json{{"stages", 3}}, dir.path()), InvalidInput);
    EXPECT_THROW(run_manifest(nlohmann::json{{"stages", {{{"type", "teleport"}}}}}, dir.path()), InvalidInput);
    EXPECT_THROW(run_manifest(nlohmann::json{{"stages", {{{"type", "wavelet"}}}}}, dir.path()), InvalidInput);
    EXPECT_THROW(run_manifest(dir / "nope.json"), InvalidInput);
}

TEST(RunManifest, ChainRestoresEveryImageAndReruns) {
    TempDir ws("chain");
    testing::write_cli_workspace(ws.path(), 5, 40);
    nlohmann::json config = {
        {"seed", 2},
        {"stages",
         {{{"type", "synthesize"}, {"images", "in_air"}, {"ranges", "ranges"}, {"presets", "greenish.json"},
           {"k", 1}, {"out_dir", "out/synth"}},
          {{"type", "enhance"}, {"manifest", "out/synth/manifest.jsonl"}, {"out", "out/enhanced"}},
          {{"type", "evaluate"}, {"metric", "psnr"}, {"input", "out/enhanced"},
           {"manifest", "out/synth/manifest.jsonl"}}}}};
    write_json(config, ws / "chain.json");
    const nlohmann::json first = run_manifest(ws / "chain.json");
    ASSERT_EQ(first["stages"].size(), 3u);
    const auto& results = first["stages"][2]["result"]["results"];
    ASSERT_EQ(results.size(), 5u);
    for (const auto& [name, entry] : results.items()) {
        EXPECT_GE(entry["score"].get<double>(), 40.0) << name;
    }
    for (const auto& stage : first["stages"]) {
        EXPECT_EQ(stage["provenance"]["seed"], 2);
        EXPECT_FALSE(stage["provenance"]["inputs"].empty());
    }
    const auto files = testing::snapshot(ws / "out");

    RunOverrides overrides;
    overrides.threads = 3;
    const nlohmann::json second = run_manifest(ws / "chain.json", overrides);
    EXPECT_EQ(first.dump(), second.dump());
    EXPECT_EQ(testing::snapshot(ws / "out"), files);

    overrides.seed = 9;
    EXPECT_EQ(run_manifest(ws / "chain.json", overrides)["seed"], 9);
}

}  // namespace
}  // namespace uwimf
