#include "terrain/dataset.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

namespace terrain {

namespace {

using json = nlohmann::ordered_json;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string::size_type start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(trim(line.substr(start)));
            break;
        }
        fields.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return fields;
}

double parse_double(const std::string& text, const std::string& where) {
    const std::string t = trim(text);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc{} || ptr != t.data() + t.size())
        throw DataError(where + ": cannot parse number '" + text + "'");
    return value;
}

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace

LabeledRun read_run(std::istream& in, const ChannelRegistry& registry, const std::string& source_id) {
    LabeledRun run;
    run.source_id = source_id;

    std::string line;
    bool have_header = false;
    std::vector<Index> column_to_channel;  // data column -> registry index

    // metadata block then the column header row
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw FormatError(source_id + ": malformed metadata line '" + line + "'");
            const std::string key = trim(line.substr(1, eq - 1));
            const std::string value = trim(line.substr(eq + 1));
            if (key == "label") run.label = value;
            else if (key == "speed") run.nominal_speed = parse_double(value, source_id + ": speed");
            else if (key == "rate_hz") run.rate_hz = parse_double(value, source_id + ": rate_hz");
            // unknown keys are ignored so the format can grow
            continue;
        }

        const auto fields = split_fields(line);
        if (fields.empty() || fields[0] != "timestamp")
            throw FormatError(source_id + ": header row must start with 'timestamp'");
        if (fields.size() != registry.size() + 1)
            throw SchemaError(source_id + ": header lists " + std::to_string(fields.size() - 1) +
                              " channels, registry has " + std::to_string(registry.size()));
        column_to_channel.resize(fields.size() - 1);
        std::set<std::string> seen;
        for (std::size_t col = 1; col < fields.size(); ++col) {
            if (!seen.insert(fields[col]).second)
                throw SchemaError(source_id + ": duplicate channel '" + fields[col] + "' in header");
            const auto it = std::find_if(registry.begin(), registry.end(),
                                         [&](const ChannelSpec& c) { return c.name == fields[col]; });
            if (it == registry.end())
                throw SchemaError(source_id + ": channel '" + fields[col] + "' not in registry");
            column_to_channel[col - 1] = static_cast<Index>(it - registry.begin());
        }
        have_header = true;
        break;
    }
    if (!have_header) throw FormatError(source_id + ": missing column header row");

    std::vector<double> timestamps;
    std::vector<double> values;  // row-major, registry order
    const Index width = static_cast<Index>(registry.size());
    int row = 0;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        ++row;
        const std::string where = source_id + ": row " + std::to_string(row);
        const auto fields = split_fields(line);
        if (fields.size() != registry.size() + 1)
            throw SchemaError(where + ": expected " + std::to_string(registry.size() + 1) +
                              " fields, got " + std::to_string(fields.size()));
        const double t = parse_double(fields[0], where);
        if (!std::isfinite(t)) throw DataError(where + ": non-finite timestamp");
        if (!timestamps.empty() && t < timestamps.back())
            throw DataError(where + ": timestamp decreases");
        timestamps.push_back(t);

        values.resize(values.size() + static_cast<std::size_t>(width));
        double* dst = values.data() + values.size() - static_cast<std::size_t>(width);
        for (std::size_t col = 1; col < fields.size(); ++col) {
            const double v = parse_double(fields[col], where);
            if (!std::isfinite(v)) throw DataError(where + ": non-finite value '" + fields[col] + "'");
            dst[column_to_channel[col - 1]] = v;
        }
    }
    if (timestamps.empty()) throw DataError(source_id + ": run has no data rows");

    const Index n = static_cast<Index>(timestamps.size());
    run.timestamps = Eigen::Map<const Vector>(timestamps.data(), n);
    run.frames = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        values.data(), n, width);
    return run;
}

LabeledRun load_run(const std::filesystem::path& path, const ChannelRegistry& registry) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open run file '" + path.string() + "'");
    return read_run(in, registry, path.filename().string());
}

void write_run(std::ostream& out, const LabeledRun& run, const ChannelRegistry& registry) {
    if (run.channel_count() != static_cast<Index>(registry.size()))
        throw SchemaError("run width does not match registry");
    if (!run.label.empty()) out << "# label=" << run.label << "\n";
    out << "# speed=" << format_double(run.nominal_speed) << "\n";
    out << "# rate_hz=" << format_double(run.rate_hz) << "\n";
    out << "timestamp";
    for (const auto& ch : registry) out << ',' << ch.name;
    out << "\n";
    for (Index i = 0; i < run.frame_count(); ++i) {
        out << format_double(run.timestamps(i));
        for (Index c = 0; c < run.channel_count(); ++c) out << ',' << format_double(run.frames(i, c));
        out << "\n";
    }
}

void save_run(const LabeledRun& run, const ChannelRegistry& registry,
              const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write run file '" + path.string() + "'");
    write_run(out, run, registry);
}

void validate_run(const LabeledRun& run, const ChannelRegistry& registry) {
    if (run.frame_count() == 0) throw DataError(run.source_id + ": run has no frames");
    if (run.channel_count() != static_cast<Index>(registry.size()))
        throw SchemaError(run.source_id + ": frame width " + std::to_string(run.channel_count()) +
                          " does not match registry size " + std::to_string(registry.size()));
    if (run.timestamps.size() != run.frame_count())
        throw SchemaError(run.source_id + ": timestamp count does not match frame count");
    if (!run.frames.allFinite() || !run.timestamps.allFinite())
        throw DataError(run.source_id + ": non-finite value");
    for (Index i = 1; i < run.timestamps.size(); ++i)
        if (run.timestamps(i) < run.timestamps(i - 1))
            throw DataError(run.source_id + ": timestamps decrease at frame " + std::to_string(i));
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open manifest '" + path.string() + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw FormatError("manifest '" + path.string() + "': " + e.what());
    }

    DatasetManifest m;
    try {
        m.rate_hz = doc.value("rate_hz", 16.7);
        for (const auto& ch : doc.at("channels")) {
            ChannelSpec spec;
            spec.name = ch.at("name").get<std::string>();
            spec.mode = feature_mode_from_string(ch.value("feature_mode", "energy"));
            m.channels.push_back(std::move(spec));
        }
        for (const auto& l : doc.at("labels")) m.labels.push_back(l.get<std::string>());
        const auto base = path.parent_path();
        for (const auto& r : doc.at("runs"))
            m.run_paths.push_back((base / r.get<std::string>()).string());
    } catch (const json::exception& e) {
        throw FormatError("manifest '" + path.string() + "': " + e.what());
    }
    return m;
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
    json doc;
    doc["rate_hz"] = manifest.rate_hz;
    doc["channels"] = json::array();
    for (const auto& ch : manifest.channels)
        doc["channels"].push_back({{"name", ch.name}, {"feature_mode", to_string(ch.mode)}});
    doc["labels"] = manifest.labels;
    doc["runs"] = json::array();
    const auto base = path.parent_path();
    for (const auto& r : manifest.run_paths)
        doc["runs"].push_back(std::filesystem::path(r).lexically_proximate(base).generic_string());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write manifest '" + path.string() + "'");
    out << doc.dump(2) << "\n";
}

std::vector<LabeledRun> load_runs(const DatasetManifest& manifest) {
    std::vector<LabeledRun> runs;
    runs.reserve(manifest.run_paths.size());
    for (const auto& p : manifest.run_paths) runs.push_back(load_run(p, manifest.channels));
    return runs;
}

std::vector<std::string> validate_manifest(const DatasetManifest& manifest,
                                           const std::vector<LabeledRun>& runs) {
    std::vector<std::string> diags;

    std::set<std::string> label_set;
    for (const auto& l : manifest.labels) {
        if (l.empty()) diags.push_back("empty label in label list");
        if (!label_set.insert(l).second) diags.push_back("duplicate label '" + l + "'");
    }
    std::set<std::string> channel_set;
    for (const auto& ch : manifest.channels) {
        if (ch.name.empty()) diags.push_back("empty channel name");
        if (!channel_set.insert(ch.name).second)
            diags.push_back("duplicate channel '" + ch.name + "'");
    }

    for (const auto& run : runs) {
        const std::string who = run.source_id.empty() ? "run" : "run '" + run.source_id + "'";
        if (label_set.find(run.label) == label_set.end())
            diags.push_back(who + " labeled '" + run.label + "' which is not in the label list");
        if (run.channel_count() != static_cast<Index>(manifest.channels.size()))
            diags.push_back(who + " has " + std::to_string(run.channel_count()) +
                            "-wide frames against a " + std::to_string(manifest.channels.size()) +
                            "-channel registry");
        if (run.frame_count() == 0) diags.push_back(who + " has no frames");
    }
    return diags;
}

Split split_train_validation(const std::vector<TerrainLabel>& window_labels, double fraction,
                             std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0)) throw DomainError("fraction must be in (0, 1)");

    // canonical label order keeps the split independent of window ordering quirks
    std::map<TerrainLabel, std::vector<int>> by_label;
    for (std::size_t i = 0; i < window_labels.size(); ++i)
        by_label[window_labels[i]].push_back(static_cast<int>(i));

    std::mt19937_64 rng(seed);
    Split split;
    for (auto& [label, indices] : by_label) {
        const int n = static_cast<int>(indices.size());
        if (n < 2)
            throw StratificationError("label '" + label + "' has " + std::to_string(n) +
                                      " window(s); need at least 2 to stratify");
        std::shuffle(indices.begin(), indices.end(), rng);
        const int want = static_cast<int>(std::llround(fraction * n));
        const int n_validation = std::clamp(want, 1, n - 1);
        split.validation.insert(split.validation.end(), indices.begin(), indices.begin() + n_validation);
        split.train.insert(split.train.end(), indices.begin() + n_validation, indices.end());
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.validation.begin(), split.validation.end());
    return split;
}

} // namespace terrain
