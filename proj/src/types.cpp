#include "terrain/types.hpp"

#include "terrain/errors.hpp"

namespace terrain {

const char* to_string(FeatureMode mode) {
    return mode == FeatureMode::Energy ? "energy" : "mean";
}

FeatureMode feature_mode_from_string(const std::string& s) {
    if (s == "energy") return FeatureMode::Energy;
    if (s == "mean") return FeatureMode::Mean;
    throw FormatError("unknown feature_mode '" + s + "' (expected 'energy' or 'mean')");
}

} // namespace terrain
