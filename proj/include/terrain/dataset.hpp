#pragma once

#include "terrain/errors.hpp"
#include "terrain/types.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace terrain {

// Run file layout:
//   # label=<name>          (optional; absent = unlabeled run)
//   # speed=<m/s>           (optional, default 0)
//   # rate_hz=<float>       (optional, default 16.7)
//   timestamp,<ch1>,<ch2>,...
//   <t>,<v1>,<v2>,...
// Columns may appear in any order; frames are reordered to registry order.
LabeledRun load_run(const std::filesystem::path& path, const ChannelRegistry& registry);
LabeledRun read_run(std::istream& in, const ChannelRegistry& registry, const std::string& source_id);

void save_run(const LabeledRun& run, const ChannelRegistry& registry,
              const std::filesystem::path& path);
void write_run(std::ostream& out, const LabeledRun& run, const ChannelRegistry& registry);

// Structural checks shared by the loader and manifest validation.
// Throws SchemaError / DataError on the first violation.
void validate_run(const LabeledRun& run, const ChannelRegistry& registry);

DatasetManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

// Loads every run referenced by the manifest, in manifest order.
std::vector<LabeledRun> load_runs(const DatasetManifest& manifest);

// One human-readable diagnostic per invariant violation; empty means consistent.
std::vector<std::string> validate_manifest(const DatasetManifest& manifest,
                                           const std::vector<LabeledRun>& runs);

// Disjoint, exhaustive index sets over windows, stratified by label.
struct Split {
    std::vector<int> train;
    std::vector<int> validation;
};

// `fraction` is the validation share. Indices refer to positions in
// `window_labels`. Every label needs >= 2 windows so both sides see it.
Split split_train_validation(const std::vector<TerrainLabel>& window_labels, double fraction,
                             std::uint64_t seed);

} // namespace terrain
