#pragma once

#include "terrain/classifier.hpp"
#include "terrain/dataset.hpp"
#include "terrain/features.hpp"
#include "terrain/reduction.hpp"
#include "terrain/selection.hpp"

#include <optional>
#include <string>
#include <vector>

namespace terrain {

// The four tunable stages plus the nominal sample rate.
struct PipelineConfig {
    int window_size = 9;              // frames per window (0.54 s at 16.7 Hz)
    int feature_count = 22;           // features kept by mRMR, capped at availability
    double variance_threshold = 0.65; // cumulative explained-variance cutoff
    int k = 5;                        // KNN neighbours
    double rate_hz = 16.7;

    void validate() const;
};

// Everything the online phase needs, produced by the offline phase.
struct TrainedModel {
    static constexpr int current_format_version = 1;

    int format_version = current_format_version;
    PipelineConfig config;
    ChannelRegistry channels;       // full registry the model was trained against
    SelectionResult selection;      // channel indices in selection order
    Standardizer standardizer;      // over selected features, selection order
    PcaModel pca;
    KnnModel knn;

    // Registry restricted to the selected channels, in selection order.
    ChannelRegistry selected_channels() const;
    std::vector<std::string> selected_names() const;

    // Throws ModelError naming the first stage whose dimensions do not chain.
    void check_dimensions() const;
};

struct TrainDiagnostics {
    std::vector<std::string> warnings;
    std::map<TerrainLabel, int> windows_per_label;
};

// Offline phase: windows (S = N) -> mRMR -> standardize -> PCA -> KNN points.
// Fully deterministic in its inputs.
TrainedModel train(const ChannelRegistry& channels, const std::vector<LabeledRun>& runs,
                   const PipelineConfig& config, TrainDiagnostics* diagnostics = nullptr);

// Same pipeline starting from already-extracted labeled windows (full-width
// feature vectors, one entry per registry channel).
TrainedModel train_from_windows(const ChannelRegistry& channels,
                                const std::vector<FeatureVector>& windows,
                                const PipelineConfig& config,
                                TrainDiagnostics* diagnostics = nullptr);

// Classifies one full-width feature vector (all registry channels); the model
// picks out its selected features.
Prediction classify_window(const TrainedModel& model,
                           const Eigen::Ref<const Vector>& full_features);

struct WindowPrediction {
    int window_index = 0;
    Index end_frame = 0;  // last frame covered by the window
    Prediction prediction;
};

struct ClassifyResult {
    std::vector<WindowPrediction> predictions;
    std::vector<TerrainLabel> truth;  // per window; empty when the run is unlabeled
};

// Batch classification with an explicit stride; classify_offline uses S = N.
ClassifyResult classify_run(const TrainedModel& model, const LabeledRun& run, int stride);
ClassifyResult classify_offline(const TrainedModel& model, const LabeledRun& run);

// Online phase: keeps the last N frames of the selected channels only and
// emits one prediction per frame once warm. Not for concurrent mutation.
class StreamClassifier {
public:
    explicit StreamClassifier(const TrainedModel& model);

    // Frame values in full registry order. Returns a prediction once N frames
    // are buffered; empty during warm-up.
    std::optional<Prediction> push(const Eigen::Ref<const Vector>& frame_values);
    std::optional<Prediction> push(const FrameRecord& frame);

    long frames_seen() const { return frames_seen_; }

private:
    const TrainedModel* model_;
    ChannelRegistry selected_;
    Vector gathered_;
    StreamBuffer buffer_;
    long frames_seen_ = 0;
};

// Streaming pass over a whole frame sequence; equals classify_run at S = 1.
ClassifyResult classify_stream(const TrainedModel& model, const LabeledRun& run);

} // namespace terrain
