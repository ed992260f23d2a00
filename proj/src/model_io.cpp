#include "terrain/model_io.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace terrain {

namespace {

using json = nlohmann::ordered_json;

json vector_to_json(const Vector& v) {
    json arr = json::array();
    for (Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Index i = 0; i < m.rows(); ++i) rows.push_back(vector_to_json(m.row(i).transpose()));
    return rows;
}

Vector vector_from_json(const json& arr) {
    Vector v(static_cast<Index>(arr.size()));
    Index i = 0;
    for (const auto& x : arr) v(i++) = x.get<double>();
    return v;
}

Matrix matrix_from_json(const json& rows) {
    if (rows.empty()) return Matrix(0, 0);
    Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
    Index i = 0;
    for (const auto& row : rows) {
        if (static_cast<Index>(row.size()) != m.cols())
            throw ModelError("model: ragged matrix rows");
        Index j = 0;
        for (const auto& x : row) m(i, j++) = x.get<double>();
        ++i;
    }
    return m;
}

} // namespace

std::string model_to_json(const TrainedModel& model) {
    json doc;
    doc["format_version"] = model.format_version;
    doc["config"] = {{"window_size", model.config.window_size},
                     {"feature_count", model.config.feature_count},
                     {"variance_threshold", model.config.variance_threshold},
                     {"k", model.config.k},
                     {"rate_hz", model.config.rate_hz}};
    doc["channels"] = json::array();
    for (const auto& ch : model.channels)
        doc["channels"].push_back({{"name", ch.name}, {"feature_mode", to_string(ch.mode)}});
    doc["selection"] = {{"features", model.selection.ordered_features},
                        {"scores", json::array()}};
    for (double s : model.selection.scores)
        doc["selection"]["scores"].push_back(std::isfinite(s) ? json(s) : json("inf"));
    doc["standardizer"] = {{"mean", vector_to_json(model.standardizer.means)},
                           {"std", vector_to_json(model.standardizer.stds)},
                           {"constant", model.standardizer.constant}};
    doc["pca"] = {{"components", matrix_to_json(model.pca.components)},
                  {"eigenvalues", vector_to_json(model.pca.eigenvalues)},
                  {"explained_variance_ratio", vector_to_json(model.pca.explained_variance_ratio)},
                  {"retained", model.pca.retained}};
    doc["knn"] = {{"k", model.knn.k},
                  {"labels", model.knn.labels},
                  {"points", matrix_to_json(model.knn.points)}};
    return doc.dump(2) + "\n";
}

TrainedModel model_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ModelError(std::string("model: unparseable JSON: ") + e.what());
    }

    TrainedModel model;
    try {
        model.format_version = doc.at("format_version").get<int>();
        if (model.format_version != TrainedModel::current_format_version)
            throw VersionError("model: format_version " + std::to_string(model.format_version) +
                               " is not supported (expected " +
                               std::to_string(TrainedModel::current_format_version) + ")");

        const auto& cfg = doc.at("config");
        model.config.window_size = cfg.at("window_size").get<int>();
        model.config.feature_count = cfg.at("feature_count").get<int>();
        model.config.variance_threshold = cfg.at("variance_threshold").get<double>();
        model.config.k = cfg.at("k").get<int>();
        model.config.rate_hz = cfg.at("rate_hz").get<double>();

        for (const auto& ch : doc.at("channels")) {
            ChannelSpec spec;
            spec.name = ch.at("name").get<std::string>();
            spec.mode = feature_mode_from_string(ch.at("feature_mode").get<std::string>());
            model.channels.push_back(std::move(spec));
        }

        const auto& sel = doc.at("selection");
        model.selection.ordered_features = sel.at("features").get<std::vector<int>>();
        for (const auto& s : sel.at("scores"))
            model.selection.scores.push_back(
                s.is_string() ? std::numeric_limits<double>::infinity() : s.get<double>());

        const auto& std_doc = doc.at("standardizer");
        model.standardizer.means = vector_from_json(std_doc.at("mean"));
        model.standardizer.stds = vector_from_json(std_doc.at("std"));
        model.standardizer.constant = std_doc.at("constant").get<std::vector<bool>>();

        const auto& pca = doc.at("pca");
        model.pca.components = matrix_from_json(pca.at("components"));
        model.pca.eigenvalues = vector_from_json(pca.at("eigenvalues"));
        model.pca.explained_variance_ratio = vector_from_json(pca.at("explained_variance_ratio"));
        model.pca.retained = pca.at("retained").get<int>();

        const auto& knn = doc.at("knn");
        model.knn.k = knn.at("k").get<int>();
        model.knn.labels = knn.at("labels").get<std::vector<std::string>>();
        model.knn.points = matrix_from_json(knn.at("points"));
    } catch (const json::exception& e) {
        throw ModelError(std::string("model: ") + e.what());
    } catch (const FormatError& e) {
        throw ModelError(e.what());
    }

    model.check_dimensions();  // throws ModelError naming the inconsistency
    return model;
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ModelError("cannot write model file '" + path.string() + "'");
    out << model_to_json(model);
}

TrainedModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ModelError("cannot open model file '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return model_from_json(buffer.str());
}

} // namespace terrain
