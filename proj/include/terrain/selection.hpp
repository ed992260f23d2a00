#pragma once

#include "terrain/errors.hpp"
#include "terrain/features.hpp"
#include "terrain/types.hpp"

#include <iosfwd>
#include <vector>

namespace terrain {

// Windows-by-features matrix with one class label per row.
struct FeatureMatrix {
    Matrix values;                     // rows = windows, cols = features
    std::vector<TerrainLabel> labels;  // one per row

    static FeatureMatrix from_windows(const std::vector<FeatureVector>& windows);

    Index rows() const { return values.rows(); }
    Index cols() const { return values.cols(); }

    // Dense class ids in sorted-label order plus the label list itself.
    std::pair<std::vector<int>, std::vector<TerrainLabel>> class_ids() const;

    // Throws DomainError unless: finite, >= 2 distinct labels, >= 2 rows per label.
    void validate() const;
};

// Features in greedy selection order with the winning FCQ score per step.
struct SelectionResult {
    std::vector<int> ordered_features;
    std::vector<double> scores;
};

// One-way ANOVA F across classes: [between-SS/(c-1)] / [within-SS/(n-c)].
// Returns 0 when the between-group SS is zero, +infinity when groups are
// perfectly separated (within-SS zero, between-SS positive).
double f_statistic(const Eigen::Ref<const Vector>& column, const std::vector<int>& class_ids);
double f_statistic(const Eigen::Ref<const Vector>& column, const std::vector<TerrainLabel>& labels);

// Pearson correlation; 0 when either input has zero variance.
double pearson(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b);

// Relevance/redundancy quotient for a candidate feature given the already
// selected set: F(Y, X_i) / mean_{s in selected} |rho(X_s, X_i)|.
// With nothing selected the score is the bare F-statistic. The denominator is
// floored at fcq_denominator_floor so uncorrelated candidates stay finite.
inline constexpr double fcq_denominator_floor = 1e-12;

double fcq_score(int candidate, const std::vector<int>& selected, const FeatureMatrix& matrix);

// Greedy forward selection of `count` features by maximal FCQ score.
// Ties (including two +infinity scores) break toward the lower column index.
SelectionResult mrmr_select(const FeatureMatrix& matrix, int count);

// Diagnostic dump: step,feature,score
void write_selection_csv(std::ostream& out, const SelectionResult& result,
                         const std::vector<std::string>& feature_names);

} // namespace terrain
