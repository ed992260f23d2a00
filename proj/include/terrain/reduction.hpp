#pragma once

#include "terrain/errors.hpp"
#include "terrain/types.hpp"

#include <vector>

namespace terrain {

// Per-feature z-score parameters. Zero-variance columns are stored with
// std = 1 and flagged so they pass through as plain deviations from the mean.
struct Standardizer {
    Vector means;
    Vector stds;                 // strictly positive as stored
    std::vector<bool> constant;  // true where the fitted column had zero variance

    Index dim() const { return means.size(); }
};

// Column means and population standard deviations. Needs >= 2 rows.
Standardizer fit_standardizer(const Eigen::Ref<const Matrix>& matrix);

Vector apply_standardizer(const Standardizer& s, const Eigen::Ref<const Vector>& row);
Matrix apply_standardizer_rows(const Standardizer& s, const Eigen::Ref<const Matrix>& rows);

// Principal components of a standardized training matrix. Components are rows
// of an orthonormal basis sorted by eigenvalue descending; each component's
// largest-magnitude entry is made positive so model files reproduce exactly.
struct PcaModel {
    Matrix components;                 // input_dim x input_dim, row i pairs with eigenvalues(i)
    Vector eigenvalues;                // non-increasing, negatives clamped to 0
    Vector explained_variance_ratio;   // sums to 1 over all components
    int retained = 0;                  // 0 until select_components sets it

    Index input_dim() const { return components.cols(); }
};

// Eigen-decomposition of the sample covariance (n-1 normalization).
PcaModel pca_fit(const Eigen::Ref<const Matrix>& standardized);

// Keeps the smallest prefix of components whose cumulative explained-variance
// ratio reaches `threshold` in (0, 1]; always keeps at least one.
PcaModel select_components(PcaModel model, double threshold);

// Projection onto the retained components. Input must already be standardized;
// centering happened in the standardizer.
Vector pca_transform(const PcaModel& model, const Eigen::Ref<const Vector>& row);
Matrix pca_transform_rows(const PcaModel& model, const Eigen::Ref<const Matrix>& rows);

// Maps a reduced vector back to the standardized space.
Vector pca_inverse(const PcaModel& model, const Eigen::Ref<const Vector>& reduced);

} // namespace terrain
