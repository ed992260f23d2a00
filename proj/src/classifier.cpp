#include "terrain/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>

namespace terrain {

void KnnModel::validate() const {
    if (k < 1) throw DomainError("knn: k must be >= 1");
    if (size() < k)
        throw DomainError("knn: " + std::to_string(size()) + " training points but k = " +
                          std::to_string(k));
    if (static_cast<Index>(labels.size()) != size())
        throw SchemaError("knn: label count does not match point count");
    if (!points.allFinite()) throw DataError("knn: non-finite training point");
}

double Prediction::confidence() const {
    const auto it = votes.find(label);
    int total = 0;
    for (const auto& [l, n] : votes) total += n;
    if (total == 0) return 0.0;
    return it == votes.end() ? 0.0 : static_cast<double>(it->second) / total;
}

Prediction knn_classify(const KnnModel& model, const Eigen::Ref<const Vector>& query) {
    model.validate();
    if (query.size() != model.dim())
        throw SchemaError("knn: query has " + std::to_string(query.size()) +
                          " dimensions, model has " + std::to_string(model.dim()));

    const Index n = model.size();
    std::vector<std::pair<double, Index>> by_distance(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        const double d2 = (model.points.row(i).transpose() - query).squaredNorm();
        by_distance[static_cast<std::size_t>(i)] = {d2, i};
    }
    // pair ordering gives the index tie-break at equal distances
    std::sort(by_distance.begin(), by_distance.end());

    Prediction pred;
    for (int j = 0; j < model.k; ++j)
        ++pred.votes[model.labels[static_cast<std::size_t>(by_distance[static_cast<std::size_t>(j)].second)]];
    pred.max_distance = std::sqrt(by_distance[static_cast<std::size_t>(model.k - 1)].first);

    int top = 0;
    for (const auto& [label, count] : pred.votes) top = std::max(top, count);
    // vote tie: nearest neighbour whose label is among the tied labels
    for (int j = 0; j < model.k; ++j) {
        const auto& label = model.labels[static_cast<std::size_t>(by_distance[static_cast<std::size_t>(j)].second)];
        if (pred.votes[label] == top) {
            pred.label = label;
            break;
        }
    }
    return pred;
}

std::pair<ConfusionMatrix, double> evaluate(const std::vector<TerrainLabel>& predictions,
                                            const std::vector<TerrainLabel>& truth,
                                            const std::vector<TerrainLabel>& classes) {
    if (predictions.size() != truth.size())
        throw SchemaError("evaluate: " + std::to_string(predictions.size()) + " predictions vs " +
                          std::to_string(truth.size()) + " truth labels");
    if (predictions.empty()) throw SchemaError("evaluate: empty sequences");

    ConfusionMatrix cm;
    cm.classes = classes;
    cm.counts = Eigen::MatrixXi::Zero(static_cast<Index>(classes.size()),
                                      static_cast<Index>(classes.size()));
    const auto class_index = [&](const TerrainLabel& l) {
        const auto it = std::find(classes.begin(), classes.end(), l);
        if (it == classes.end()) throw SchemaError("evaluate: label '" + l + "' not in class list");
        return static_cast<Index>(it - classes.begin());
    };
    for (std::size_t i = 0; i < truth.size(); ++i)
        ++cm.counts(class_index(truth[i]), class_index(predictions[i]));

    const double accuracy = static_cast<double>(cm.trace()) / cm.total();
    return {std::move(cm), accuracy};
}

std::vector<TransitionLag> transition_lag(const std::vector<TerrainLabel>& predictions,
                                          const std::vector<TerrainLabel>& truth) {
    if (predictions.size() != truth.size())
        throw SchemaError("transition_lag: sequence lengths differ");
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(truth.size());

    std::vector<TransitionLag> lags;
    for (std::ptrdiff_t t = 1; t < n; ++t) {
        if (truth[static_cast<std::size_t>(t)] == truth[static_cast<std::size_t>(t - 1)]) continue;
        TransitionLag entry;
        entry.index = t;
        entry.matched = false;
        entry.lag = n - t;  // sentinel: never matched
        for (std::ptrdiff_t u = t; u < n; ++u) {
            if (predictions[static_cast<std::size_t>(u)] == truth[static_cast<std::size_t>(t)]) {
                entry.lag = u - t;
                entry.matched = true;
                break;
            }
        }
        lags.push_back(entry);
    }
    return lags;
}

double accuracy_excluding_transitions(const std::vector<TerrainLabel>& predictions,
                                      const std::vector<TerrainLabel>& truth,
                                      std::ptrdiff_t margin) {
    if (predictions.size() != truth.size())
        throw SchemaError("accuracy_excluding_transitions: sequence lengths differ");
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(truth.size());

    std::vector<bool> excluded(truth.size(), false);
    for (std::ptrdiff_t t = 1; t < n; ++t) {
        if (truth[static_cast<std::size_t>(t)] == truth[static_cast<std::size_t>(t - 1)]) continue;
        for (std::ptrdiff_t u = t; u < std::min(n, t + margin); ++u)
            excluded[static_cast<std::size_t>(u)] = true;
    }

    int kept = 0, correct = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (excluded[i]) continue;
        ++kept;
        if (predictions[i] == truth[i]) ++correct;
    }
    if (kept == 0) return -1.0;
    return static_cast<double>(correct) / kept;
}

void print_report(std::ostream& out, const ConfusionMatrix& matrix, double accuracy) {
    std::size_t width = 9;
    for (const auto& c : matrix.classes) width = std::max(width, c.size() + 2);

    out << std::setw(static_cast<int>(width)) << "true\\pred";
    for (const auto& c : matrix.classes) out << std::setw(static_cast<int>(width)) << c;
    out << "\n";
    for (Index i = 0; i < matrix.counts.rows(); ++i) {
        out << std::setw(static_cast<int>(width)) << matrix.classes[static_cast<std::size_t>(i)];
        for (Index j = 0; j < matrix.counts.cols(); ++j)
            out << std::setw(static_cast<int>(width)) << matrix.counts(i, j);
        out << "\n";
    }
    out << "accuracy: " << std::fixed << std::setprecision(4) << accuracy
        << std::defaultfloat << " (" << matrix.trace() << "/" << matrix.total() << ")\n";
}

void write_confusion_csv(std::ostream& out, const ConfusionMatrix& matrix) {
    out << "true\\pred";
    for (const auto& c : matrix.classes) out << ',' << c;
    out << "\n";
    for (Index i = 0; i < matrix.counts.rows(); ++i) {
        out << matrix.classes[static_cast<std::size_t>(i)];
        for (Index j = 0; j < matrix.counts.cols(); ++j) out << ',' << matrix.counts(i, j);
        out << "\n";
    }
}

} // namespace terrain
