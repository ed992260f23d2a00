#pragma once

#include "terrain/dataset.hpp"
#include "terrain/types.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace terrain {

// Per-terrain signal model: each channel emits offset + Gaussian noise.
// Rougher terrain is emulated with larger noise (more window energy); the
// mean-mode channels carry terrain-dependent offsets instead.
struct TerrainSynthSpec {
    TerrainLabel label;
    Vector noise_std;  // one per channel, >= 0
    Vector offset;     // one per channel
};

struct SyntheticSpec {
    ChannelRegistry channels;  // must include at least one Mean-mode channel
    double rate_hz = 16.7;
    std::uint64_t seed = 0;
    double nominal_speed = 1.0;
    double train_seconds = 30.0;
    double test_seconds = 60.0;
    std::vector<TerrainSynthSpec> terrains;
    std::vector<TerrainLabel> mixed_sequence;  // empty = no mixed recording
    double mixed_seconds_per_segment = 10.0;

    void validate() const;
};

// A spec with three terrains over six channels (five energy-mode, one
// mean-mode "ground penetration" with distinct per-terrain offsets).
SyntheticSpec default_synthetic_spec(std::uint64_t seed);

struct SyntheticDataset {
    DatasetManifest manifest;            // references the training runs
    std::vector<LabeledRun> train_runs;  // one per terrain
    std::vector<LabeledRun> test_runs;   // one per terrain, held out
    std::vector<LabeledRun> mixed_segments;
};

// Deterministic in the spec (the seed fixes all randomness).
SyntheticDataset generate_synthetic(const SyntheticSpec& spec);

// Writes manifest.json, runs/*.csv and, when a mixed sequence is specified,
// sequence.json listing the segment files in order.
SyntheticDataset write_synthetic(const SyntheticSpec& spec, const std::filesystem::path& out_dir);

SyntheticSpec load_synthetic_spec(const std::filesystem::path& path);
void save_synthetic_spec(const SyntheticSpec& spec, const std::filesystem::path& path);

// Ordered list of per-segment run files making up a mixed recording.
std::vector<std::string> load_sequence(const std::filesystem::path& path);
void save_sequence(const std::vector<std::string>& segment_paths, const std::filesystem::path& path);

} // namespace terrain
