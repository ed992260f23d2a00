#include "terrain/pipeline.hpp"

#include <algorithm>
#include <set>

namespace terrain {

void PipelineConfig::validate() const {
    if (window_size < 1) throw DomainError("config: window_size must be >= 1");
    if (feature_count < 1) throw DomainError("config: feature_count must be >= 1");
    if (!(variance_threshold > 0.0 && variance_threshold <= 1.0))
        throw DomainError("config: variance_threshold must be in (0, 1]");
    if (k < 1) throw DomainError("config: k must be >= 1");
    if (!(rate_hz > 0.0)) throw DomainError("config: rate_hz must be positive");
}

ChannelRegistry TrainedModel::selected_channels() const {
    ChannelRegistry out;
    out.reserve(selection.ordered_features.size());
    for (int idx : selection.ordered_features) out.push_back(channels[static_cast<std::size_t>(idx)]);
    return out;
}

std::vector<std::string> TrainedModel::selected_names() const {
    std::vector<std::string> out;
    for (const auto& ch : selected_channels()) out.push_back(ch.name);
    return out;
}

void TrainedModel::check_dimensions() const {
    const auto fail = [](const std::string& what) { throw ModelError("model: " + what); };

    if (format_version != current_format_version)
        throw VersionError("model: unsupported format_version " + std::to_string(format_version));
    try {
        config.validate();
    } catch (const DomainError& e) {
        fail(e.what());
    }
    if (channels.empty()) fail("empty channel registry");

    const Index n_channels = static_cast<Index>(channels.size());
    const Index n_selected = static_cast<Index>(selection.ordered_features.size());
    if (n_selected < 1) fail("no selected features");
    if (selection.scores.size() != selection.ordered_features.size())
        fail("selection scores do not match selected feature count");
    std::set<int> seen;
    for (int idx : selection.ordered_features) {
        if (idx < 0 || idx >= n_channels)
            fail("selected feature index " + std::to_string(idx) + " outside registry of " +
                 std::to_string(n_channels));
        if (!seen.insert(idx).second) fail("duplicate selected feature index " + std::to_string(idx));
    }

    if (standardizer.dim() != n_selected)
        fail("standardizer dimension " + std::to_string(standardizer.dim()) +
             " != selected feature count " + std::to_string(n_selected));
    if (standardizer.stds.size() != n_selected ||
        static_cast<Index>(standardizer.constant.size()) != n_selected)
        fail("standardizer fields disagree on dimension");
    for (Index i = 0; i < n_selected; ++i)
        if (!(standardizer.stds(i) > 0.0)) fail("standardizer std must be positive as stored");

    if (pca.input_dim() != n_selected)
        fail("pca input dimension " + std::to_string(pca.input_dim()) +
             " != selected feature count " + std::to_string(n_selected));
    if (pca.components.rows() != pca.components.cols()) fail("pca component matrix not square");
    if (pca.eigenvalues.size() != pca.input_dim() ||
        pca.explained_variance_ratio.size() != pca.input_dim())
        fail("pca spectra do not match input dimension");
    if (pca.retained < 1 || pca.retained > pca.input_dim())
        fail("pca retained count " + std::to_string(pca.retained) + " outside [1, " +
             std::to_string(pca.input_dim()) + "]");

    if (knn.dim() != pca.retained)
        fail("knn dimension " + std::to_string(knn.dim()) + " != retained components " +
             std::to_string(pca.retained));
    if (static_cast<Index>(knn.labels.size()) != knn.size())
        fail("knn labels do not match point count");
    if (knn.k != config.k) fail("knn k disagrees with config");
    if (knn.size() < knn.k) fail("knn has fewer points than k");
}

TrainedModel train(const ChannelRegistry& channels, const std::vector<LabeledRun>& runs,
                   const PipelineConfig& config, TrainDiagnostics* diagnostics) {
    config.validate();
    if (channels.empty()) throw TrainingError("training needs a non-empty channel registry");
    if (runs.empty()) throw TrainingError("training needs at least one run");

    const WindowParams params{config.window_size, config.window_size};
    std::vector<FeatureVector> windows;
    for (const auto& run : runs) {
        if (run.label.empty())
            throw TrainingError("run '" + run.source_id + "' is unlabeled");
        auto w = extract_windows(run, params, channels);
        windows.insert(windows.end(), std::make_move_iterator(w.begin()),
                       std::make_move_iterator(w.end()));
    }
    return train_from_windows(channels, windows, config, diagnostics);
}

TrainedModel train_from_windows(const ChannelRegistry& channels,
                                const std::vector<FeatureVector>& windows,
                                const PipelineConfig& config, TrainDiagnostics* diagnostics) {
    config.validate();
    if (channels.empty()) throw TrainingError("training needs a non-empty channel registry");

    std::map<TerrainLabel, int> per_label;
    for (const auto& w : windows) ++per_label[w.label];
    if (diagnostics) diagnostics->windows_per_label = per_label;
    if (per_label.size() < 2)
        throw TrainingError("training needs >= 2 terrain labels, got " +
                            std::to_string(per_label.size()));
    const int min_windows = std::max(2, config.k);
    for (const auto& [label, n] : per_label)
        if (n < min_windows)
            throw TrainingError("label '" + label + "' has " + std::to_string(n) +
                                " windows; need >= " + std::to_string(min_windows));

    const FeatureMatrix matrix = FeatureMatrix::from_windows(windows);
    int count = config.feature_count;
    if (count > static_cast<int>(matrix.cols())) {
        count = static_cast<int>(matrix.cols());
        if (diagnostics)
            diagnostics->warnings.push_back(
                "feature_count " + std::to_string(config.feature_count) + " exceeds the " +
                std::to_string(matrix.cols()) + " available features; capped");
    }

    TrainedModel model;
    model.config = config;
    model.channels = channels;
    model.selection = mrmr_select(matrix, count);

    Matrix selected(matrix.rows(), count);
    for (int j = 0; j < count; ++j)
        selected.col(j) = matrix.values.col(model.selection.ordered_features[static_cast<std::size_t>(j)]);

    model.standardizer = fit_standardizer(selected);
    const Matrix standardized = apply_standardizer_rows(model.standardizer, selected);
    model.pca = select_components(pca_fit(standardized), config.variance_threshold);

    // training points go through the same per-row path queries use
    model.knn.k = config.k;
    model.knn.labels = matrix.labels;
    model.knn.points.resize(matrix.rows(), model.pca.retained);
    for (Index i = 0; i < matrix.rows(); ++i) {
        const Vector z = apply_standardizer(model.standardizer, selected.row(i).transpose());
        model.knn.points.row(i) = pca_transform(model.pca, z).transpose();
    }

    model.check_dimensions();
    return model;
}

namespace {

// Features of one window restricted to the model's selected channels.
Vector selected_window_features(const TrainedModel& model, const ChannelRegistry& selected,
                                const Eigen::Ref<const Matrix>& frames, Index start) {
    const int n_sel = static_cast<int>(selected.size());
    Matrix block(model.config.window_size, n_sel);
    for (int j = 0; j < n_sel; ++j) {
        const Index ch = model.selection.ordered_features[static_cast<std::size_t>(j)];
        block.col(j) = frames.block(start, ch, model.config.window_size, 1);
    }
    return window_features(block, selected);
}

Prediction classify_features(const TrainedModel& model, const Vector& features) {
    const Vector z = apply_standardizer(model.standardizer, features);
    return knn_classify(model.knn, pca_transform(model.pca, z));
}

} // namespace

Prediction classify_window(const TrainedModel& model,
                           const Eigen::Ref<const Vector>& full_features) {
    if (full_features.size() != static_cast<Index>(model.channels.size()))
        throw SchemaError("classify_window: feature vector has " +
                          std::to_string(full_features.size()) + " entries, registry has " +
                          std::to_string(model.channels.size()));
    Vector selected(static_cast<Index>(model.selection.ordered_features.size()));
    for (Index j = 0; j < selected.size(); ++j)
        selected(j) = full_features(model.selection.ordered_features[static_cast<std::size_t>(j)]);
    return classify_features(model, selected);
}

ClassifyResult classify_run(const TrainedModel& model, const LabeledRun& run, int stride) {
    model.check_dimensions();
    if (stride < 1) throw DomainError("classify_run: stride must be >= 1");
    if (run.channel_count() != static_cast<Index>(model.channels.size()))
        throw SchemaError("run '" + run.source_id + "' has " + std::to_string(run.channel_count()) +
                          " channels, model expects " + std::to_string(model.channels.size()));

    const ChannelRegistry selected = model.selected_channels();
    const WindowParams params{model.config.window_size, stride};
    const Index n_windows = window_count(run.frame_count(), params);

    ClassifyResult result;
    result.predictions.reserve(static_cast<std::size_t>(n_windows));
    for (Index m = 0; m < n_windows; ++m) {
        const Index start = m * stride;
        const Vector features = selected_window_features(model, selected, run.frames, start);
        WindowPrediction wp;
        wp.window_index = static_cast<int>(m);
        wp.end_frame = start + model.config.window_size - 1;
        wp.prediction = classify_features(model, features);
        result.predictions.push_back(std::move(wp));
    }
    if (!run.label.empty())
        result.truth.assign(static_cast<std::size_t>(n_windows), run.label);
    return result;
}

ClassifyResult classify_offline(const TrainedModel& model, const LabeledRun& run) {
    return classify_run(model, run, model.config.window_size);
}

namespace {
const TrainedModel& checked(const TrainedModel& model) {
    model.check_dimensions();
    return model;
}
} // namespace

StreamClassifier::StreamClassifier(const TrainedModel& model)
    : model_(&checked(model)),
      selected_(model.selected_channels()),
      gathered_(static_cast<Index>(model.selection.ordered_features.size())),
      buffer_(model.config.window_size, static_cast<Index>(model.selection.ordered_features.size())) {}

std::optional<Prediction> StreamClassifier::push(const Eigen::Ref<const Vector>& frame_values) {
    if (frame_values.size() != static_cast<Index>(model_->channels.size()))
        throw SchemaError("frame " + std::to_string(frames_seen_) + ": width " +
                          std::to_string(frame_values.size()) + " does not match registry size " +
                          std::to_string(model_->channels.size()));
    // only the selected channels are buffered
    for (Index j = 0; j < gathered_.size(); ++j)
        gathered_(j) = frame_values(model_->selection.ordered_features[static_cast<std::size_t>(j)]);
    buffer_.push(gathered_);
    ++frames_seen_;

    const auto fv = buffer_.features(selected_);
    if (!fv) return std::nullopt;
    return classify_features(*model_, fv->values);
}

std::optional<Prediction> StreamClassifier::push(const FrameRecord& frame) {
    return push(frame.values);
}

ClassifyResult classify_stream(const TrainedModel& model, const LabeledRun& run) {
    if (run.channel_count() != static_cast<Index>(model.channels.size()))
        throw SchemaError("run '" + run.source_id + "' has " + std::to_string(run.channel_count()) +
                          " channels, model expects " + std::to_string(model.channels.size()));
    StreamClassifier classifier(model);
    ClassifyResult result;
    int window_index = 0;
    for (Index t = 0; t < run.frame_count(); ++t) {
        const auto pred = classifier.push(run.frames.row(t).transpose());
        if (!pred) continue;
        WindowPrediction wp;
        wp.window_index = window_index++;
        wp.end_frame = t;
        wp.prediction = *pred;
        result.predictions.push_back(std::move(wp));
    }
    if (!run.label.empty())
        result.truth.assign(result.predictions.size(), run.label);
    return result;
}

} // namespace terrain
