#include "terrain/synthetic.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>

namespace terrain {

namespace {

using json = nlohmann::ordered_json;

Index frames_for(double seconds, double rate_hz) {
    return static_cast<Index>(std::llround(seconds * rate_hz));
}

LabeledRun make_run(const SyntheticSpec& spec, const TerrainSynthSpec& terrain, Index n_frames,
                    const std::string& source_id, std::mt19937_64& rng) {
    LabeledRun run;
    run.label = terrain.label;
    run.nominal_speed = spec.nominal_speed;
    run.rate_hz = spec.rate_hz;
    run.source_id = source_id;
    const Index width = static_cast<Index>(spec.channels.size());
    run.timestamps.resize(n_frames);
    run.frames.resize(n_frames, width);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (Index i = 0; i < n_frames; ++i) {
        run.timestamps(i) = static_cast<double>(i) / spec.rate_hz;
        for (Index c = 0; c < width; ++c)
            run.frames(i, c) = terrain.offset(c) + terrain.noise_std(c) * gauss(rng);
    }
    return run;
}

const TerrainSynthSpec& terrain_by_label(const SyntheticSpec& spec, const TerrainLabel& label) {
    for (const auto& t : spec.terrains)
        if (t.label == label) return t;
    throw DomainError("synthetic: mixed sequence references unknown terrain '" + label + "'");
}

} // namespace

void SyntheticSpec::validate() const {
    if (channels.empty()) throw DomainError("synthetic: channel registry is empty");
    if (!(rate_hz > 0.0)) throw DomainError("synthetic: rate_hz must be positive");
    if (terrains.empty()) throw DomainError("synthetic: need at least one terrain");
    if (frames_for(train_seconds, rate_hz) < 1 || frames_for(test_seconds, rate_hz) < 1)
        throw DomainError("synthetic: run lengths must cover at least one frame");

    const bool has_mean_channel = std::any_of(channels.begin(), channels.end(), [](const ChannelSpec& c) {
        return c.mode == FeatureMode::Mean;
    });
    if (!has_mean_channel)
        throw DomainError("synthetic: registry needs at least one mean-mode channel");

    std::set<TerrainLabel> seen;
    for (const auto& t : terrains) {
        if (t.label.empty()) throw DomainError("synthetic: empty terrain label");
        if (!seen.insert(t.label).second)
            throw DomainError("synthetic: duplicate terrain '" + t.label + "'");
        if (t.noise_std.size() != static_cast<Index>(channels.size()) ||
            t.offset.size() != static_cast<Index>(channels.size()))
            throw DomainError("synthetic: terrain '" + t.label +
                              "' parameter count does not match channel count");
        if ((t.noise_std.array() < 0.0).any())
            throw DomainError("synthetic: terrain '" + t.label + "' has a negative noise std");
        if (!t.noise_std.allFinite() || !t.offset.allFinite())
            throw DomainError("synthetic: terrain '" + t.label + "' has non-finite parameters");
    }
    for (const auto& label : mixed_sequence) terrain_by_label(*this, label);
    if (!mixed_sequence.empty() && frames_for(mixed_seconds_per_segment, rate_hz) < 1)
        throw DomainError("synthetic: mixed segments must cover at least one frame");
}

SyntheticSpec default_synthetic_spec(std::uint64_t seed) {
    SyntheticSpec spec;
    spec.seed = seed;
    spec.channels = {{"imu_accel_z", FeatureMode::Energy},
                     {"hip_torque", FeatureMode::Energy},
                     {"knee_torque", FeatureMode::Energy},
                     {"foot_force_z", FeatureMode::Energy},
                     {"body_vibration", FeatureMode::Energy},
                     {"ground_penetration", FeatureMode::Mean}};

    const auto terrain = [](const std::string& label, double scale, double pen_offset,
                            double pen_std) {
        TerrainSynthSpec t;
        t.label = label;
        t.noise_std = Vector(6);
        t.noise_std << 0.20 * scale, 0.25 * scale, 0.30 * scale, 0.35 * scale, 0.20 * scale, pen_std;
        t.offset = Vector(6);
        t.offset << 0.0, 0.1, -0.1, 9.8, 0.0, pen_offset;
        return t;
    };
    // noise scale drives window energy apart; penetration offset separates the
    // mean-mode channel
    spec.terrains = {terrain("concrete", 1.0, 0.02, 0.02),
                     terrain("grass", 3.0, 0.35, 0.04),
                     terrain("rocks", 8.0, 0.90, 0.06)};
    spec.mixed_sequence = {"concrete", "grass", "rocks"};
    return spec;
}

SyntheticDataset generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);

    SyntheticDataset out;
    out.manifest.channels = spec.channels;
    out.manifest.rate_hz = spec.rate_hz;
    for (const auto& t : spec.terrains) out.manifest.labels.push_back(t.label);

    const Index train_frames = frames_for(spec.train_seconds, spec.rate_hz);
    const Index test_frames = frames_for(spec.test_seconds, spec.rate_hz);
    for (const auto& t : spec.terrains) {
        out.train_runs.push_back(make_run(spec, t, train_frames, "train_" + t.label + ".csv", rng));
        out.test_runs.push_back(make_run(spec, t, test_frames, "test_" + t.label + ".csv", rng));
    }
    const Index mixed_frames = frames_for(spec.mixed_seconds_per_segment, spec.rate_hz);
    for (std::size_t i = 0; i < spec.mixed_sequence.size(); ++i) {
        const auto& t = terrain_by_label(spec, spec.mixed_sequence[i]);
        out.mixed_segments.push_back(make_run(spec, t, mixed_frames,
                                              "mixed_" + std::to_string(i) + "_" + t.label + ".csv",
                                              rng));
    }
    return out;
}

SyntheticDataset write_synthetic(const SyntheticSpec& spec, const std::filesystem::path& out_dir) {
    SyntheticDataset data = generate_synthetic(spec);
    const auto runs_dir = out_dir / "runs";
    std::filesystem::create_directories(runs_dir);

    const auto write = [&](const LabeledRun& run) {
        const auto path = runs_dir / run.source_id;
        save_run(run, spec.channels, path);
        return path.string();
    };
    for (const auto& run : data.train_runs) data.manifest.run_paths.push_back(write(run));
    for (const auto& run : data.test_runs) write(run);

    std::vector<std::string> segment_paths;
    for (const auto& run : data.mixed_segments) segment_paths.push_back(write(run));
    if (!segment_paths.empty()) save_sequence(segment_paths, out_dir / "sequence.json");

    save_manifest(data.manifest, out_dir / "manifest.json");
    return data;
}

SyntheticSpec load_synthetic_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open synthetic spec '" + path.string() + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw FormatError("synthetic spec '" + path.string() + "': " + e.what());
    }

    SyntheticSpec spec;
    try {
        spec.rate_hz = doc.value("rate_hz", 16.7);
        spec.seed = doc.value("seed", std::uint64_t{0});
        spec.nominal_speed = doc.value("nominal_speed", 1.0);
        spec.train_seconds = doc.value("train_seconds", 30.0);
        spec.test_seconds = doc.value("test_seconds", 60.0);
        spec.mixed_seconds_per_segment = doc.value("mixed_seconds_per_segment", 10.0);
        for (const auto& ch : doc.at("channels")) {
            ChannelSpec c;
            c.name = ch.at("name").get<std::string>();
            c.mode = feature_mode_from_string(ch.value("feature_mode", "energy"));
            spec.channels.push_back(std::move(c));
        }
        for (const auto& t : doc.at("terrains")) {
            TerrainSynthSpec terrain;
            terrain.label = t.at("label").get<std::string>();
            const auto stds = t.at("noise_std").get<std::vector<double>>();
            const auto offsets = t.at("offset").get<std::vector<double>>();
            terrain.noise_std = Eigen::Map<const Vector>(stds.data(), static_cast<Index>(stds.size()));
            terrain.offset = Eigen::Map<const Vector>(offsets.data(), static_cast<Index>(offsets.size()));
            spec.terrains.push_back(std::move(terrain));
        }
        if (doc.contains("mixed_sequence"))
            spec.mixed_sequence = doc["mixed_sequence"].get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw FormatError("synthetic spec '" + path.string() + "': " + e.what());
    }
    return spec;
}

void save_synthetic_spec(const SyntheticSpec& spec, const std::filesystem::path& path) {
    json doc;
    doc["rate_hz"] = spec.rate_hz;
    doc["seed"] = spec.seed;
    doc["nominal_speed"] = spec.nominal_speed;
    doc["train_seconds"] = spec.train_seconds;
    doc["test_seconds"] = spec.test_seconds;
    doc["mixed_seconds_per_segment"] = spec.mixed_seconds_per_segment;
    doc["channels"] = json::array();
    for (const auto& ch : spec.channels)
        doc["channels"].push_back({{"name", ch.name}, {"feature_mode", to_string(ch.mode)}});
    doc["terrains"] = json::array();
    for (const auto& t : spec.terrains) {
        json terrain;
        terrain["label"] = t.label;
        terrain["noise_std"] = std::vector<double>(t.noise_std.data(),
                                                   t.noise_std.data() + t.noise_std.size());
        terrain["offset"] = std::vector<double>(t.offset.data(), t.offset.data() + t.offset.size());
        doc["terrains"].push_back(std::move(terrain));
    }
    doc["mixed_sequence"] = spec.mixed_sequence;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write synthetic spec '" + path.string() + "'");
    out << doc.dump(2) << "\n";
}

std::vector<std::string> load_sequence(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open sequence file '" + path.string() + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw FormatError("sequence file '" + path.string() + "': " + e.what());
    }
    std::vector<std::string> segments;
    try {
        const auto base = path.parent_path();
        for (const auto& s : doc.at("segments"))
            segments.push_back((base / s.get<std::string>()).string());
    } catch (const json::exception& e) {
        throw FormatError("sequence file '" + path.string() + "': " + e.what());
    }
    if (segments.empty()) throw FormatError("sequence file '" + path.string() + "' lists no segments");
    return segments;
}

void save_sequence(const std::vector<std::string>& segment_paths, const std::filesystem::path& path) {
    json doc;
    doc["segments"] = json::array();
    const auto base = path.parent_path();
    for (const auto& p : segment_paths)
        doc["segments"].push_back(std::filesystem::path(p).lexically_proximate(base).generic_string());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write sequence file '" + path.string() + "'");
    out << doc.dump(2) << "\n";
}

} // namespace terrain
