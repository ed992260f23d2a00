#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

namespace terrain {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Terrain class identifier, e.g. "concrete", "grass", "rocks".
using TerrainLabel = std::string;

// How a channel's window is summarized into one feature value.
enum class FeatureMode { Energy, Mean };

const char* to_string(FeatureMode mode);
FeatureMode feature_mode_from_string(const std::string& s);

struct ChannelSpec {
    std::string name;
    FeatureMode mode = FeatureMode::Energy;
};

using ChannelRegistry = std::vector<ChannelSpec>;

// One sample instant: a timestamp plus one value per registered channel.
struct FrameRecord {
    double timestamp = 0.0;
    Vector values;
};

// One recorded walk over a single terrain at a nominal constant speed.
// Rows of `frames` are sample instants, columns follow the channel registry
// the run was loaded/generated against.
struct LabeledRun {
    TerrainLabel label;          // empty = unlabeled
    double nominal_speed = 0.0;  // m/s
    double rate_hz = 16.7;
    Vector timestamps;           // non-decreasing, one per frame
    Matrix frames;               // frame_count x channel_count
    std::string source_id;

    Index frame_count() const { return frames.rows(); }
    Index channel_count() const { return frames.cols(); }
};

struct DatasetManifest {
    ChannelRegistry channels;
    std::vector<TerrainLabel> labels;
    std::vector<std::string> run_paths;  // resolved relative to the manifest file
    double rate_hz = 16.7;
};

} // namespace terrain
