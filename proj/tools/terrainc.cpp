// terrainc - train, inspect and run the proprioceptive terrain classifier.
//
// Exit codes: 0 success, 1 usage error, 2 data/model error.

#include "terrain/model_io.hpp"
#include "terrain/pipeline.hpp"
#include "terrain/synthetic.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <charconv>
#include <chrono>
#include <fstream>
#include <iostream>
#include <thread>

namespace {

using namespace terrain;
using json = nlohmann::ordered_json;

constexpr int exit_ok = 0;
constexpr int exit_usage = 1;
constexpr int exit_data = 2;

struct ConfigFlags {
    std::string config_path;
    int window = -1;
    int features = -1;
    double variance = -1.0;
    int k = -1;
};

void add_config_flags(CLI::App* cmd, ConfigFlags& flags) {
    cmd->add_option("--config", flags.config_path, "JSON config file (partial keys allowed)");
    cmd->add_option("--window", flags.window, "window size N in frames");
    cmd->add_option("--features", flags.features, "features kept by mRMR");
    cmd->add_option("--variance", flags.variance, "cumulative explained-variance threshold");
    cmd->add_option("--k", flags.k, "KNN neighbour count");
}

PipelineConfig resolve_config(const ConfigFlags& flags, double manifest_rate) {
    PipelineConfig cfg;
    cfg.rate_hz = manifest_rate;
    if (!flags.config_path.empty()) {
        std::ifstream in(flags.config_path);
        if (!in) throw FormatError("cannot open config '" + flags.config_path + "'");
        json doc;
        try {
            doc = json::parse(in);
        } catch (const json::exception& e) {
            throw FormatError("config '" + flags.config_path + "': " + e.what());
        }
        cfg.window_size = doc.value("window_size", cfg.window_size);
        cfg.feature_count = doc.value("feature_count", cfg.feature_count);
        cfg.variance_threshold = doc.value("variance_threshold", cfg.variance_threshold);
        cfg.k = doc.value("k", cfg.k);
        cfg.rate_hz = doc.value("rate_hz", cfg.rate_hz);
    }
    if (flags.window > 0) cfg.window_size = flags.window;
    if (flags.features > 0) cfg.feature_count = flags.features;
    if (flags.variance > 0.0) cfg.variance_threshold = flags.variance;
    if (flags.k > 0) cfg.k = flags.k;
    cfg.validate();
    return cfg;
}

std::vector<TerrainLabel> model_classes(const TrainedModel& model) {
    std::vector<TerrainLabel> classes;
    for (const auto& l : model.knn.labels)
        if (std::find(classes.begin(), classes.end(), l) == classes.end()) classes.push_back(l);
    return classes;
}

std::vector<TerrainLabel> with_extra_classes(std::vector<TerrainLabel> classes,
                                             const std::vector<TerrainLabel>& extra) {
    for (const auto& l : extra)
        if (std::find(classes.begin(), classes.end(), l) == classes.end()) classes.push_back(l);
    return classes;
}

void report_predictions(const TrainedModel& model, const ClassifyResult& result,
                        const std::string& csv_path) {
    if (result.predictions.empty()) {
        std::cout << "0 windows (run shorter than the window size)\n";
        return;
    }
    if (result.truth.empty()) {
        for (const auto& wp : result.predictions)
            std::cout << wp.end_frame << ',' << wp.prediction.label << ','
                      << wp.prediction.confidence() << "\n";
        return;
    }
    std::vector<TerrainLabel> predicted;
    predicted.reserve(result.predictions.size());
    for (const auto& wp : result.predictions) predicted.push_back(wp.prediction.label);
    const auto classes = with_extra_classes(model_classes(model), result.truth);
    const auto [matrix, accuracy] = evaluate(predicted, result.truth, classes);
    print_report(std::cout, matrix, accuracy);
    if (!csv_path.empty()) {
        std::ofstream out(csv_path, std::ios::binary);
        if (!out) throw FormatError("cannot write '" + csv_path + "'");
        write_confusion_csv(out, matrix);
    }
}

int cmd_train(const std::string& manifest_path, const std::string& out_path,
              const ConfigFlags& flags, const std::string& selection_csv) {
    const DatasetManifest manifest = load_manifest(manifest_path);
    const auto runs = load_runs(manifest);
    for (const auto& d : validate_manifest(manifest, runs)) std::cerr << "warning: " << d << "\n";

    const PipelineConfig cfg = resolve_config(flags, manifest.rate_hz);
    TrainDiagnostics train_diag;
    const TrainedModel model = train(manifest.channels, runs, cfg, &train_diag);
    for (const auto& w : train_diag.warnings) std::cerr << "warning: " << w << "\n";

    save_model(model, out_path);
    std::cout << "trained on " << runs.size() << " runs;";
    for (const auto& [label, n] : train_diag.windows_per_label)
        std::cout << " " << label << "=" << n;
    std::cout << " windows; " << model.selection.ordered_features.size() << " features -> "
              << model.pca.retained << " components; model written to " << out_path << "\n";

    if (!selection_csv.empty()) {
        std::ofstream out(selection_csv, std::ios::binary);
        if (!out) throw FormatError("cannot write '" + selection_csv + "'");
        std::vector<std::string> names;
        for (const auto& ch : model.channels) names.push_back(ch.name);
        write_selection_csv(out, model.selection, names);
    }
    return exit_ok;
}

int cmd_eval_run(const TrainedModel& model, const std::string& run_path, bool stream,
                 const std::string& csv_path) {
    const LabeledRun run = load_run(run_path, model.channels);
    const ClassifyResult result = stream ? classify_stream(model, run) : classify_offline(model, run);
    report_predictions(model, result, csv_path);
    return exit_ok;
}

int cmd_eval_sequence(const TrainedModel& model, const std::string& sequence_path,
                      const std::string& csv_path) {
    const auto segment_paths = load_sequence(sequence_path);
    std::vector<TerrainLabel> predicted;
    std::vector<TerrainLabel> truth_aligned;

    StreamClassifier classifier(model);
    for (const auto& path : segment_paths) {
        const LabeledRun segment = load_run(path, model.channels);
        for (Index t = 0; t < segment.frame_count(); ++t) {
            const auto pred = classifier.push(segment.frames.row(t).transpose());
            if (!pred) continue;
            predicted.push_back(pred->label);
            truth_aligned.push_back(segment.label);  // label of the window's final frame
        }
    }
    if (predicted.empty()) {
        std::cout << "0 windows (sequence shorter than the window size)\n";
        return exit_ok;
    }

    const auto classes = with_extra_classes(model_classes(model), truth_aligned);
    const auto [matrix, accuracy] = evaluate(predicted, truth_aligned, classes);
    print_report(std::cout, matrix, accuracy);

    const int n = model.config.window_size;
    const double steady = accuracy_excluding_transitions(predicted, truth_aligned, 2 * n);
    if (steady >= 0.0)
        std::cout << "accuracy excluding " << 2 * n << " frames after each transition: " << steady
                  << "\n";
    for (const auto& lag : transition_lag(predicted, truth_aligned))
        // predictions start at frame N-1; report the raw frame index
        std::cout << "transition at frame " << lag.index + n - 1 << ": lag " << lag.lag
                  << " frames" << (lag.matched ? "" : " (never matched)") << "\n";

    if (!csv_path.empty()) {
        std::ofstream out(csv_path, std::ios::binary);
        if (!out) throw FormatError("cannot write '" + csv_path + "'");
        write_confusion_csv(out, matrix);
    }
    return exit_ok;
}

int cmd_stream(const TrainedModel& model, const std::string& input_path, bool fast) {
    std::ifstream file;
    const bool from_file = !input_path.empty();
    if (from_file) {
        file.open(input_path);
        if (!file) throw FormatError("cannot open stream input '" + input_path + "'");
    }
    std::istream& in = from_file ? file : std::cin;

    const auto frame_interval = std::chrono::duration<double>(1.0 / model.config.rate_hz);
    StreamClassifier classifier(model);
    const Index width = static_cast<Index>(model.channels.size());
    Vector values(width);
    std::string line;
    long frame_index = 0;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty()) continue;

        Index col = 0;
        const char* p = line.data();
        const char* end = p + line.size();
        while (true) {
            const char* field_end = p;
            while (field_end < end && *field_end != ',') ++field_end;
            if (col >= width)
                throw SchemaError("frame " + std::to_string(frame_index) + ": expected " +
                                  std::to_string(width) + " values");
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(p, field_end, v);
            if (ec != std::errc{} || ptr != field_end)
                throw DataError("frame " + std::to_string(frame_index) + ": cannot parse value '" +
                                std::string(p, field_end) + "'");
            values(col++) = v;
            if (field_end == end) break;
            p = field_end + 1;
        }
        if (col != width)
            throw SchemaError("frame " + std::to_string(frame_index) + ": expected " +
                              std::to_string(width) + " values, got " + std::to_string(col));

        // replaying a file mimics the sensor rate unless --fast is given
        if (from_file && !fast) std::this_thread::sleep_for(frame_interval);

        if (const auto pred = classifier.push(values))
            std::cout << frame_index << ',' << pred->label << ',' << pred->confidence() << "\n";
        ++frame_index;
    }
    return exit_ok;
}

int cmd_gen(const std::string& spec_path, const std::string& out_dir, std::uint64_t seed,
            bool seed_given, const std::string& emit_spec) {
    SyntheticSpec spec =
        spec_path.empty() ? default_synthetic_spec(seed) : load_synthetic_spec(spec_path);
    if (seed_given) spec.seed = seed;
    if (!emit_spec.empty()) {
        save_synthetic_spec(spec, emit_spec);
        std::cout << "spec written to " << emit_spec << "\n";
        if (out_dir.empty()) return exit_ok;
    }
    const auto data = write_synthetic(spec, out_dir);
    std::cout << "wrote " << data.train_runs.size() << " training runs, " << data.test_runs.size()
              << " held-out runs";
    if (!data.mixed_segments.empty())
        std::cout << ", " << data.mixed_segments.size() << " mixed segments";
    std::cout << " under " << out_dir << "\n";
    return exit_ok;
}

int cmd_inspect(const TrainedModel& model, const std::string& selection_csv) {
    std::cout << "format_version: " << model.format_version << "\n";
    std::cout << "config: window_size=" << model.config.window_size
              << " feature_count=" << model.config.feature_count
              << " variance_threshold=" << model.config.variance_threshold
              << " k=" << model.config.k << " rate_hz=" << model.config.rate_hz << "\n";
    std::cout << "channels: " << model.channels.size() << "\n";

    std::cout << "selected features (" << model.selection.ordered_features.size() << "):\n";
    const auto names = model.selected_names();
    for (std::size_t i = 0; i < names.size(); ++i)
        std::cout << "  " << i << ": " << names[i] << " (score " << model.selection.scores[i]
                  << ")\n";

    std::cout << "explained variance:\n";
    double cumulative = 0.0;
    for (Index i = 0; i < model.pca.explained_variance_ratio.size(); ++i) {
        cumulative += model.pca.explained_variance_ratio(i);
        std::cout << "  pc" << i + 1 << ": eigenvalue " << model.pca.eigenvalues(i) << ", ratio "
                  << model.pca.explained_variance_ratio(i) << ", cumulative " << cumulative
                  << (i < model.pca.retained ? "  [retained]" : "") << "\n";
    }
    std::cout << "retained components: " << model.pca.retained << "\n";
    std::cout << "knn: " << model.knn.size() << " points, dim " << model.knn.dim() << ", k "
              << model.knn.k << "\n";

    if (!selection_csv.empty()) {
        std::ofstream out(selection_csv, std::ios::binary);
        if (!out) throw FormatError("cannot write '" + selection_csv + "'");
        std::vector<std::string> all_names;
        for (const auto& ch : model.channels) all_names.push_back(ch.name);
        write_selection_csv(out, model.selection, all_names);
    }
    return exit_ok;
}

int cmd_tune(const std::string& manifest_path, double fraction, std::uint64_t seed) {
    const DatasetManifest manifest = load_manifest(manifest_path);
    const auto runs = load_runs(manifest);

    const std::vector<int> window_grid = {5, 9, 15};
    const std::vector<int> feature_grid = {8, 16, 22};
    const std::vector<double> variance_grid = {0.5, 0.65, 0.9};
    const std::vector<int> k_grid = {1, 3, 5};

    PipelineConfig best;
    double best_accuracy = -1.0;
    for (int n : window_grid) {
        std::vector<FeatureVector> windows;
        for (const auto& run : runs) {
            auto w = extract_windows(run, WindowParams{n, n}, manifest.channels);
            windows.insert(windows.end(), w.begin(), w.end());
        }
        std::vector<TerrainLabel> labels;
        labels.reserve(windows.size());
        for (const auto& w : windows) labels.push_back(w.label);
        const Split split = split_train_validation(labels, fraction, seed);

        std::vector<FeatureVector> train_windows, validation_windows;
        for (int i : split.train) train_windows.push_back(windows[static_cast<std::size_t>(i)]);
        for (int i : split.validation)
            validation_windows.push_back(windows[static_cast<std::size_t>(i)]);

        for (int features : feature_grid) {
            for (double variance : variance_grid) {
                for (int k : k_grid) {
                    PipelineConfig cfg;
                    cfg.window_size = n;
                    cfg.feature_count = features;
                    cfg.variance_threshold = variance;
                    cfg.k = k;
                    cfg.rate_hz = manifest.rate_hz;
                    TrainedModel model;
                    try {
                        model = train_from_windows(manifest.channels, train_windows, cfg);
                    } catch (const TrainingError&) {
                        continue;  // grid point infeasible on this split
                    }
                    int correct = 0;
                    for (const auto& w : validation_windows)
                        if (classify_window(model, w.values).label == w.label) ++correct;
                    const double accuracy = static_cast<double>(correct) /
                                            static_cast<double>(validation_windows.size());
                    std::cout << "N=" << n << " features=" << features << " variance=" << variance
                              << " k=" << k << " -> validation accuracy " << accuracy << "\n";
                    if (accuracy > best_accuracy) {
                        best_accuracy = accuracy;
                        best = cfg;
                    }
                }
            }
        }
    }
    if (best_accuracy < 0.0) throw TrainingError("no feasible grid point");
    std::cout << "best: window_size=" << best.window_size << " feature_count=" << best.feature_count
              << " variance_threshold=" << best.variance_threshold << " k=" << best.k
              << " (validation accuracy " << best_accuracy << ")\n";
    return exit_ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"proprioceptive terrain classifier"};
    app.require_subcommand(1);

    auto* train_cmd = app.add_subcommand("train", "train a model from a dataset manifest");
    std::string manifest_path, out_path, selection_csv;
    ConfigFlags train_flags;
    std::uint64_t train_seed = 0;
    train_cmd->add_option("--manifest", manifest_path, "dataset manifest JSON")->required();
    train_cmd->add_option("--out", out_path, "output model file")->required();
    train_cmd->add_option("--selection-csv", selection_csv, "dump per-step selection scores");
    train_cmd->add_option("--seed", train_seed, "seed (training itself is deterministic)");
    add_config_flags(train_cmd, train_flags);

    auto* eval_cmd = app.add_subcommand("eval", "classify a recorded run and score it");
    std::string eval_model_path, eval_run_path, eval_sequence_path, eval_csv;
    bool eval_stream = false;
    eval_cmd->add_option("--model", eval_model_path, "trained model file")->required();
    auto* run_opt = eval_cmd->add_option("--run", eval_run_path, "run CSV to classify");
    auto* seq_opt =
        eval_cmd->add_option("--sequence", eval_sequence_path, "ordered mixed-terrain sequence JSON");
    eval_cmd->add_flag("--stream", eval_stream, "classify with stride 1 (per-frame)");
    eval_cmd->add_option("--csv", eval_csv, "write the confusion matrix as CSV");
    run_opt->excludes(seq_opt);

    auto* stream_cmd = app.add_subcommand("stream", "classify frames from stdin or a replayed file");
    std::string stream_model_path, stream_input;
    bool stream_fast = false;
    stream_cmd->add_option("--model", stream_model_path, "trained model file")->required();
    stream_cmd->add_option("--input", stream_input, "headerless CSV of frames (default: stdin)");
    stream_cmd->add_flag("--fast", stream_fast, "do not throttle file replay to rate_hz");

    auto* gen_cmd = app.add_subcommand("gen", "generate a synthetic dataset");
    std::string gen_spec_path, gen_out_dir, gen_emit_spec;
    std::uint64_t gen_seed = 0;
    gen_cmd->add_option("--spec", gen_spec_path, "synthetic spec JSON (default: built-in)");
    gen_cmd->add_option("--out", gen_out_dir, "output directory");
    auto* gen_seed_opt = gen_cmd->add_option("--seed", gen_seed, "override the spec seed");
    gen_cmd->add_option("--emit-spec", gen_emit_spec, "write the effective spec JSON");

    auto* inspect_cmd = app.add_subcommand("inspect", "print a model summary");
    std::string inspect_model_path, inspect_csv;
    inspect_cmd->add_option("--model", inspect_model_path, "trained model file")->required();
    inspect_cmd->add_option("--selection-csv", inspect_csv, "dump per-step selection scores");

    auto* tune_cmd = app.add_subcommand("tune", "grid-search hyperparameters on a validation split");
    std::string tune_manifest;
    double tune_fraction = 0.25;
    std::uint64_t tune_seed = 0;
    tune_cmd->add_option("--manifest", tune_manifest, "dataset manifest JSON")->required();
    tune_cmd->add_option("--fraction", tune_fraction, "validation share of windows");
    tune_cmd->add_option("--seed", tune_seed, "split seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return exit_ok;  // --help
        app.exit(e);
        return exit_usage;
    }

    if (*eval_cmd && eval_run_path.empty() && eval_sequence_path.empty()) {
        std::cerr << "eval needs --run or --sequence\n";
        return exit_usage;
    }
    if (*gen_cmd && gen_out_dir.empty() && gen_emit_spec.empty()) {
        std::cerr << "gen needs --out or --emit-spec\n";
        return exit_usage;
    }

    try {
        if (*train_cmd) return cmd_train(manifest_path, out_path, train_flags, selection_csv);
        if (*eval_cmd) {
            const TrainedModel model = load_model(eval_model_path);
            if (!eval_sequence_path.empty())
                return cmd_eval_sequence(model, eval_sequence_path, eval_csv);
            return cmd_eval_run(model, eval_run_path, eval_stream, eval_csv);
        }
        if (*stream_cmd) return cmd_stream(load_model(stream_model_path), stream_input, stream_fast);
        if (*gen_cmd)
            return cmd_gen(gen_spec_path, gen_out_dir, gen_seed, gen_seed_opt->count() > 0,
                           gen_emit_spec);
        if (*inspect_cmd) return cmd_inspect(load_model(inspect_model_path), inspect_csv);
        if (*tune_cmd) return cmd_tune(tune_manifest, tune_fraction, tune_seed);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_data;
    }
    return exit_usage;
}
