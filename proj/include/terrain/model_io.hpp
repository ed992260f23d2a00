#pragma once

#include "terrain/pipeline.hpp"

#include <filesystem>
#include <string>

namespace terrain {

// Single versioned JSON document; numbers round-trip exactly. Serialization is
// deterministic: identical models produce byte-identical files.
std::string model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const std::string& text);

void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

} // namespace terrain
