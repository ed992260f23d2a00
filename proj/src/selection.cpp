#include "terrain/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>

namespace terrain {

FeatureMatrix FeatureMatrix::from_windows(const std::vector<FeatureVector>& windows) {
    FeatureMatrix m;
    if (windows.empty()) return m;
    const Index cols = windows.front().values.size();
    m.values.resize(static_cast<Index>(windows.size()), cols);
    m.labels.reserve(windows.size());
    for (std::size_t i = 0; i < windows.size(); ++i) {
        if (windows[i].values.size() != cols)
            throw SchemaError("window " + std::to_string(i) + " has inconsistent feature count");
        m.values.row(static_cast<Index>(i)) = windows[i].values.transpose();
        m.labels.push_back(windows[i].label);
    }
    return m;
}

std::pair<std::vector<int>, std::vector<TerrainLabel>> FeatureMatrix::class_ids() const {
    std::map<TerrainLabel, int> id_of;
    for (const auto& l : labels) id_of.emplace(l, 0);
    std::vector<TerrainLabel> names;
    names.reserve(id_of.size());
    for (auto& [name, id] : id_of) {
        id = static_cast<int>(names.size());
        names.push_back(name);
    }
    std::vector<int> ids;
    ids.reserve(labels.size());
    for (const auto& l : labels) ids.push_back(id_of[l]);
    return {std::move(ids), std::move(names)};
}

void FeatureMatrix::validate() const {
    if (static_cast<Index>(labels.size()) != values.rows())
        throw SchemaError("label count does not match row count");
    if (!values.allFinite()) throw DomainError("feature matrix contains non-finite values");
    std::map<TerrainLabel, int> counts;
    for (const auto& l : labels) ++counts[l];
    if (counts.size() < 2) throw DomainError("feature matrix needs >= 2 distinct labels");
    for (const auto& [label, n] : counts)
        if (n < 2)
            throw DomainError("label '" + label + "' has " + std::to_string(n) +
                              " row(s); need >= 2");
}

double f_statistic(const Eigen::Ref<const Vector>& column, const std::vector<int>& class_ids) {
    const Index n = column.size();
    if (static_cast<Index>(class_ids.size()) != n)
        throw DomainError("f_statistic: label count does not match value count");

    int n_classes = 0;
    for (int id : class_ids) n_classes = std::max(n_classes, id + 1);
    if (n_classes < 2) throw DomainError("f_statistic: need >= 2 classes");

    std::vector<int> counts(static_cast<std::size_t>(n_classes), 0);
    std::vector<double> sums(static_cast<std::size_t>(n_classes), 0.0);
    for (Index i = 0; i < n; ++i) {
        const int id = class_ids[static_cast<std::size_t>(i)];
        if (id < 0) throw DomainError("f_statistic: negative class id");
        ++counts[static_cast<std::size_t>(id)];
        sums[static_cast<std::size_t>(id)] += column(i);
    }
    for (int c = 0; c < n_classes; ++c)
        if (counts[static_cast<std::size_t>(c)] < 2)
            throw DomainError("f_statistic: class " + std::to_string(c) +
                              " has fewer than 2 samples");
    if (n <= n_classes) throw DomainError("f_statistic: need more samples than classes");

    // sequential accumulation keeps scores reproducible across platforms
    double total = 0.0;
    for (Index i = 0; i < n; ++i) total += column(i);
    const double grand = total / static_cast<double>(n);
    double ss_between = 0.0;
    for (int c = 0; c < n_classes; ++c) {
        const double mean_c = sums[static_cast<std::size_t>(c)] / counts[static_cast<std::size_t>(c)];
        const double d = mean_c - grand;
        ss_between += counts[static_cast<std::size_t>(c)] * d * d;
    }
    double ss_within = 0.0;
    for (Index i = 0; i < n; ++i) {
        const int id = class_ids[static_cast<std::size_t>(i)];
        const double mean_c = sums[static_cast<std::size_t>(id)] / counts[static_cast<std::size_t>(id)];
        const double d = column(i) - mean_c;
        ss_within += d * d;
    }

    if (ss_between == 0.0) return 0.0;
    if (ss_within == 0.0) return std::numeric_limits<double>::infinity();
    const double ms_between = ss_between / (n_classes - 1);
    const double ms_within = ss_within / (static_cast<double>(n) - n_classes);
    return ms_between / ms_within;
}

double f_statistic(const Eigen::Ref<const Vector>& column, const std::vector<TerrainLabel>& labels) {
    std::map<TerrainLabel, int> id_of;
    for (const auto& l : labels) id_of.emplace(l, 0);
    int next = 0;
    for (auto& [name, id] : id_of) id = next++;
    std::vector<int> ids;
    ids.reserve(labels.size());
    for (const auto& l : labels) ids.push_back(id_of[l]);
    return f_statistic(column, ids);
}

double pearson(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) {
    if (a.size() != b.size()) throw DomainError("pearson: length mismatch");
    const Index n = a.size();
    if (n < 2) throw DomainError("pearson: need >= 2 samples");

    double sa = 0.0, sb = 0.0;
    for (Index i = 0; i < n; ++i) {
        sa += a(i);
        sb += b(i);
    }
    const double ma = sa / static_cast<double>(n);
    const double mb = sb / static_cast<double>(n);
    double num = 0.0, da = 0.0, db = 0.0;
    for (Index i = 0; i < n; ++i) {
        const double xa = a(i) - ma;
        const double xb = b(i) - mb;
        num += xa * xb;
        da += xa * xa;
        db += xb * xb;
    }
    if (da == 0.0 || db == 0.0) return 0.0;
    return std::clamp(num / std::sqrt(da * db), -1.0, 1.0);
}

double fcq_score(int candidate, const std::vector<int>& selected, const FeatureMatrix& matrix) {
    if (candidate < 0 || candidate >= matrix.cols())
        throw DomainError("fcq_score: candidate column out of range");
    if (std::find(selected.begin(), selected.end(), candidate) != selected.end())
        throw DomainError("fcq_score: candidate already selected");

    const auto [ids, names] = matrix.class_ids();
    const double f = f_statistic(matrix.values.col(candidate), ids);
    if (selected.empty()) return f;

    double abs_rho_sum = 0.0;
    for (int s : selected)
        abs_rho_sum += std::abs(pearson(matrix.values.col(s), matrix.values.col(candidate)));
    const double denom = std::max(abs_rho_sum / static_cast<double>(selected.size()),
                                  fcq_denominator_floor);
    return f / denom;
}

SelectionResult mrmr_select(const FeatureMatrix& matrix, int count) {
    matrix.validate();
    const int n_features = static_cast<int>(matrix.cols());
    if (count < 1 || count > n_features)
        throw DomainError("mrmr_select: count " + std::to_string(count) + " out of range [1, " +
                          std::to_string(n_features) + "]");

    const auto [ids, names] = matrix.class_ids();
    std::vector<double> relevance(static_cast<std::size_t>(n_features));
    for (int i = 0; i < n_features; ++i)
        relevance[static_cast<std::size_t>(i)] = f_statistic(matrix.values.col(i), ids);

    // running sum of |rho(selected, candidate)| so each greedy step is O(features)
    std::vector<double> abs_rho_sum(static_cast<std::size_t>(n_features), 0.0);
    std::vector<bool> taken(static_cast<std::size_t>(n_features), false);

    SelectionResult result;
    for (int step = 0; step < count; ++step) {
        int best = -1;
        double best_score = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < n_features; ++i) {
            if (taken[static_cast<std::size_t>(i)]) continue;
            double score;
            if (step == 0) {
                score = relevance[static_cast<std::size_t>(i)];
            } else {
                const double denom = std::max(abs_rho_sum[static_cast<std::size_t>(i)] / step,
                                              fcq_denominator_floor);
                score = relevance[static_cast<std::size_t>(i)] / denom;
            }
            if (score > best_score) {  // strict: ties keep the lower index
                best_score = score;
                best = i;
            }
        }
        taken[static_cast<std::size_t>(best)] = true;
        result.ordered_features.push_back(best);
        result.scores.push_back(best_score);
        for (int i = 0; i < n_features; ++i) {
            if (taken[static_cast<std::size_t>(i)]) continue;
            abs_rho_sum[static_cast<std::size_t>(i)] +=
                std::abs(pearson(matrix.values.col(best), matrix.values.col(i)));
        }
    }
    return result;
}

void write_selection_csv(std::ostream& out, const SelectionResult& result,
                         const std::vector<std::string>& feature_names) {
    out << "step,feature,score\n";
    for (std::size_t i = 0; i < result.ordered_features.size(); ++i) {
        const int idx = result.ordered_features[i];
        const std::string name = idx >= 0 && static_cast<std::size_t>(idx) < feature_names.size()
                                     ? feature_names[static_cast<std::size_t>(idx)]
                                     : "feature_" + std::to_string(idx);
        out << i << ',' << name << ',' << result.scores[i] << "\n";
    }
}

} // namespace terrain
