#include "terrain/model_io.hpp"
#include "terrain/pipeline.hpp"
#include "terrain/synthetic.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace terrain;

namespace {

SyntheticSpec small_spec(std::uint64_t seed) {
    SyntheticSpec spec = default_synthetic_spec(seed);
    spec.train_seconds = 12.0;
    spec.test_seconds = 12.0;
    spec.mixed_sequence.clear();
    return spec;
}

PipelineConfig small_config() {
    PipelineConfig cfg;
    cfg.window_size = 9;
    cfg.feature_count = 22;  // deliberately above the 6 available channels
    cfg.variance_threshold = 0.65;
    cfg.k = 5;
    return cfg;
}

} // namespace

TEST_CASE("train produces a model with a consistent dimension chain") {
    const SyntheticDataset data = generate_synthetic(small_spec(101));
    TrainDiagnostics diag;
    const TrainedModel model = train(data.manifest.channels, data.train_runs, small_config(), &diag);

    CHECK_NOTHROW(model.check_dimensions());
    CHECK(model.pca.retained >= 1);
    CHECK(model.knn.dim() == model.pca.retained);
    CHECK(model.knn.size() > 0);

    // 22 requested features against 6 channels: capped with a warning
    CHECK(model.selection.ordered_features.size() == 6);
    REQUIRE(diag.warnings.size() == 1);
    CHECK(diag.warnings[0].find("capped") != std::string::npos);
}

TEST_CASE("train rejects degenerate datasets") {
    const SyntheticDataset data = generate_synthetic(small_spec(103));
    PipelineConfig cfg = small_config();

    CHECK_THROWS_AS(train({}, data.train_runs, cfg), TrainingError);
    CHECK_THROWS_AS(train(data.manifest.channels, {}, cfg), TrainingError);
    CHECK_THROWS_AS(train(data.manifest.channels, {data.train_runs[0]}, cfg), TrainingError);

    // a run too short for k windows names its label
    std::vector<LabeledRun> runs = data.train_runs;
    runs[1].frames = runs[1].frames.topRows(cfg.window_size * 2).eval();
    runs[1].timestamps = runs[1].timestamps.head(cfg.window_size * 2).eval();
    CHECK_THROWS_WITH_AS(train(data.manifest.channels, runs, cfg),
                         doctest::Contains("grass"), TrainingError);

    cfg.window_size = 100000;  // nobody has enough frames
    CHECK_THROWS_AS(train(data.manifest.channels, data.train_runs, cfg), TrainingError);
}

TEST_CASE("training twice yields byte-identical serialized models") {
    const SyntheticDataset first = generate_synthetic(small_spec(107));
    const SyntheticDataset second = generate_synthetic(small_spec(107));
    const TrainedModel a = train(first.manifest.channels, first.train_runs, small_config());
    const TrainedModel b = train(second.manifest.channels, second.train_runs, small_config());
    CHECK(model_to_json(a) == model_to_json(b));
}

TEST_CASE("classifying the training run itself at k=1 is perfect") {
    const SyntheticDataset data = generate_synthetic(small_spec(109));
    PipelineConfig cfg = small_config();
    cfg.k = 1;
    const TrainedModel model = train(data.manifest.channels, data.train_runs, cfg);

    for (const auto& run : data.train_runs) {
        const ClassifyResult result = classify_offline(model, run);
        REQUIRE_FALSE(result.predictions.empty());
        for (const auto& wp : result.predictions) {
            CHECK(wp.prediction.label == run.label);
            CHECK(wp.prediction.max_distance == 0.0);  // its own training point
        }
    }
}

TEST_CASE("held-out synthetic runs classify as their terrain") {
    const SyntheticDataset data = generate_synthetic(small_spec(113));
    const TrainedModel model = train(data.manifest.channels, data.train_runs, small_config());
    for (const auto& run : data.test_runs) {
        const ClassifyResult result = classify_offline(model, run);
        int correct = 0;
        for (const auto& wp : result.predictions)
            if (wp.prediction.label == run.label) ++correct;
        CHECK(correct > static_cast<int>(result.predictions.size()) / 2);
    }
}

TEST_CASE("a run shorter than the window yields no predictions") {
    const SyntheticDataset data = generate_synthetic(small_spec(127));
    const TrainedModel model = train(data.manifest.channels, data.train_runs, small_config());
    LabeledRun stub = data.test_runs[0];
    stub.frames = stub.frames.topRows(4).eval();
    stub.timestamps = stub.timestamps.head(4).eval();
    const ClassifyResult result = classify_offline(model, stub);
    CHECK(result.predictions.empty());

    LabeledRun narrow = data.test_runs[0];
    narrow.frames = narrow.frames.leftCols(3).eval();
    CHECK_THROWS_AS(classify_offline(model, narrow), SchemaError);
}

TEST_CASE("streaming predictions equal batch stride-1 classification exactly") {
    const SyntheticDataset data = generate_synthetic(small_spec(131));
    const TrainedModel model = train(data.manifest.channels, data.train_runs, small_config());

    for (const auto& run : data.test_runs) {
        const ClassifyResult batch = classify_run(model, run, 1);
        const ClassifyResult stream = classify_stream(model, run);
        REQUIRE(batch.predictions.size() == stream.predictions.size());
        for (std::size_t i = 0; i < batch.predictions.size(); ++i) {
            const auto& b = batch.predictions[i];
            const auto& s = stream.predictions[i];
            CHECK(b.prediction.label == s.prediction.label);
            CHECK(b.prediction.max_distance == s.prediction.max_distance);  // bit-exact
            CHECK(b.prediction.votes == s.prediction.votes);
            CHECK(b.end_frame == s.end_frame);
        }
    }
}

TEST_CASE("stream warm-up and mid-stream width errors") {
    const SyntheticDataset data = generate_synthetic(small_spec(137));
    const TrainedModel model = train(data.manifest.channels, data.train_runs, small_config());

    StreamClassifier classifier(model);
    const auto& run = data.test_runs[0];
    for (int t = 0; t < model.config.window_size - 1; ++t)
        CHECK_FALSE(classifier.push(run.frames.row(t).transpose()).has_value());
    CHECK(classifier.push(run.frames.row(model.config.window_size - 1).transpose()).has_value());

    CHECK_THROWS_WITH_AS(classifier.push(Vector::Zero(2)), doctest::Contains("frame 9"),
                         SchemaError);
}

TEST_CASE("classify_window accepts full-width feature vectors") {
    const SyntheticDataset data = generate_synthetic(small_spec(139));
    const TrainedModel model = train(data.manifest.channels, data.train_runs, small_config());
    const auto windows = extract_windows(data.test_runs[2],
                                         WindowParams{model.config.window_size,
                                                      model.config.window_size},
                                         model.channels);
    REQUIRE_FALSE(windows.empty());
    int correct = 0;
    for (const auto& w : windows)
        if (classify_window(model, w.values).label == w.label) ++correct;
    CHECK(correct > static_cast<int>(windows.size()) / 2);
    CHECK_THROWS_AS(classify_window(model, Vector::Zero(2)), SchemaError);
}

TEST_CASE("model save/load round-trips predictions exactly") {
    const SyntheticDataset data = generate_synthetic(small_spec(149));
    const TrainedModel model = train(data.manifest.channels, data.train_runs, small_config());

    const auto path = std::filesystem::temp_directory_path() / "terrain_model_roundtrip.json";
    save_model(model, path);
    const TrainedModel loaded = load_model(path);
    std::filesystem::remove(path);

    CHECK(model_to_json(loaded) == model_to_json(model));

    std::mt19937_64 rng(151);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int q = 0; q < 100; ++q) {
        Vector query(model.knn.dim());
        for (Index j = 0; j < query.size(); ++j) query(j) = gauss(rng);
        const Prediction a = knn_classify(model.knn, query);
        const Prediction b = knn_classify(loaded.knn, query);
        CHECK(a.label == b.label);
        CHECK(a.max_distance == b.max_distance);
        CHECK(a.votes == b.votes);
    }
}

TEST_CASE("model loading rejects corruption") {
    const SyntheticDataset data = generate_synthetic(small_spec(157));
    const TrainedModel model = train(data.manifest.channels, data.train_runs, small_config());
    const std::string text = model_to_json(model);

    CHECK_THROWS_AS(model_from_json(text.substr(0, text.size() / 2)), ModelError);  // truncated

    std::string versioned = text;
    const auto pos = versioned.find("\"format_version\": 1");
    REQUIRE(pos != std::string::npos);
    versioned.replace(pos, 19, "\"format_version\": 2");
    CHECK_THROWS_AS(model_from_json(versioned), VersionError);

    std::string edited = text;
    const auto retained = edited.find("\"retained\": ");
    REQUIRE(retained != std::string::npos);
    edited.replace(retained, 13, "\"retained\": 9");
    CHECK_THROWS_WITH_AS(model_from_json(edited), doctest::Contains("retained"), ModelError);
}

TEST_CASE("synthetic generation is reproducible and shaped by its spec") {
    const SyntheticSpec spec = small_spec(163);
    const SyntheticDataset a = generate_synthetic(spec);
    const SyntheticDataset b = generate_synthetic(spec);
    REQUIRE(a.train_runs.size() == b.train_runs.size());
    for (std::size_t i = 0; i < a.train_runs.size(); ++i) {
        std::ostringstream ta, tb;
        write_run(ta, a.train_runs[i], spec.channels);
        write_run(tb, b.train_runs[i], spec.channels);
        CHECK(ta.str() == tb.str());  // byte-identical
    }

    SyntheticSpec reseeded = spec;
    reseeded.seed = 164;
    std::ostringstream ta, tb;
    write_run(ta, a.train_runs[0], spec.channels);
    write_run(tb, generate_synthetic(reseeded).train_runs[0], spec.channels);
    CHECK(ta.str() != tb.str());
}

TEST_CASE("window energy scales with the squared noise std") {
    // two terrains with stds 1 and 2 on one energy channel; expected window
    // energy is (N-1) * sigma^2, so the ratio converges to 4
    SyntheticSpec spec;
    spec.seed = 167;
    spec.channels = {{"vib", FeatureMode::Energy}, {"pen", FeatureMode::Mean}};
    spec.train_seconds = 9.0 * 1000.0 / 16.7;  // 1000 windows of 9 frames
    spec.test_seconds = 1.0;
    TerrainSynthSpec narrow{"one", Vector(2), Vector(2)};
    narrow.noise_std << 1.0, 0.0;
    narrow.offset << 0.0, 0.1;
    TerrainSynthSpec wide{"two", Vector(2), Vector(2)};
    wide.noise_std << 2.0, 0.0;
    wide.offset << 0.0, 0.2;
    spec.terrains = {narrow, wide};

    const SyntheticDataset data = generate_synthetic(spec);
    const auto mean_energy = [&](const LabeledRun& run) {
        const auto windows = extract_windows(run, WindowParams{9, 9}, spec.channels);
        double sum = 0.0;
        for (const auto& w : windows) sum += w.values(0);
        return sum / static_cast<double>(windows.size());
    };
    const double ratio = mean_energy(data.train_runs[1]) / mean_energy(data.train_runs[0]);
    CHECK(ratio == doctest::Approx(4.0).epsilon(0.10));
    CHECK(mean_energy(data.train_runs[0]) == doctest::Approx(8.0).epsilon(0.10));  // (N-1) sigma^2
}

TEST_CASE("zero-noise terrains have zero window energy") {
    SyntheticSpec spec;
    spec.seed = 173;
    spec.channels = {{"vib", FeatureMode::Energy}, {"pen", FeatureMode::Mean}};
    spec.train_seconds = 6.0;
    spec.test_seconds = 1.0;
    TerrainSynthSpec quiet{"flat", Vector(2), Vector(2)};
    quiet.noise_std << 0.0, 0.0;
    quiet.offset << 3.0, 0.5;
    spec.terrains = {quiet};

    const SyntheticDataset data = generate_synthetic(spec);
    for (const auto& w : extract_windows(data.train_runs[0], WindowParams{9, 9}, spec.channels)) {
        CHECK(w.values(0) == 0.0);
        CHECK(w.values(1) == doctest::Approx(0.5));
    }
}

TEST_CASE("synthetic specs validate and round-trip through files") {
    SyntheticSpec bad = small_spec(179);
    bad.terrains[0].noise_std(0) = -1.0;
    CHECK_THROWS_AS(generate_synthetic(bad), DomainError);

    SyntheticSpec no_mean = small_spec(181);
    for (auto& ch : no_mean.channels) ch.mode = FeatureMode::Energy;
    CHECK_THROWS_AS(generate_synthetic(no_mean), DomainError);

    SyntheticSpec unknown_mix = small_spec(191);
    unknown_mix.mixed_sequence = {"lava"};
    CHECK_THROWS_AS(generate_synthetic(unknown_mix), DomainError);

    const auto path = std::filesystem::temp_directory_path() / "terrain_spec_roundtrip.json";
    const SyntheticSpec spec = small_spec(193);
    save_synthetic_spec(spec, path);
    const SyntheticSpec back = load_synthetic_spec(path);
    std::filesystem::remove(path);
    CHECK(back.seed == spec.seed);
    CHECK(back.channels.size() == spec.channels.size());
    REQUIRE(back.terrains.size() == spec.terrains.size());
    for (std::size_t i = 0; i < spec.terrains.size(); ++i) {
        CHECK(back.terrains[i].label == spec.terrains[i].label);
        CHECK((back.terrains[i].noise_std - spec.terrains[i].noise_std).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("written synthetic datasets train through the file path") {
    const auto dir = std::filesystem::temp_directory_path() / "terrain_synth_files";
    std::filesystem::remove_all(dir);
    SyntheticSpec spec = small_spec(197);
    spec.mixed_sequence = {"concrete", "rocks"};
    spec.mixed_seconds_per_segment = 3.0;
    write_synthetic(spec, dir);

    const DatasetManifest manifest = load_manifest(dir / "manifest.json");
    const auto runs = load_runs(manifest);
    CHECK(validate_manifest(manifest, runs).empty());
    const TrainedModel model = train(manifest.channels, runs, small_config());
    CHECK(model.knn.size() > 0);

    const auto segments = load_sequence(dir / "sequence.json");
    CHECK(segments.size() == 2);
    for (const auto& s : segments) CHECK(std::filesystem::exists(s));
    std::filesystem::remove_all(dir);
}
