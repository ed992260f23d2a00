#include "terrain/reduction.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>

namespace terrain {

Standardizer fit_standardizer(const Eigen::Ref<const Matrix>& matrix) {
    const Index rows = matrix.rows();
    if (rows < 2) throw DomainError("fit_standardizer: need >= 2 rows");

    Standardizer s;
    s.means = matrix.colwise().mean();
    const Matrix centered = matrix.rowwise() - s.means.transpose();
    const Vector variance = centered.array().square().colwise().sum() / static_cast<double>(rows);
    s.stds = variance.array().sqrt();
    s.constant.assign(static_cast<std::size_t>(matrix.cols()), false);
    for (Index c = 0; c < matrix.cols(); ++c) {
        if (s.stds(c) == 0.0) {
            s.stds(c) = 1.0;
            s.constant[static_cast<std::size_t>(c)] = true;
        }
    }
    return s;
}

Vector apply_standardizer(const Standardizer& s, const Eigen::Ref<const Vector>& row) {
    if (row.size() != s.dim())
        throw SchemaError("apply_standardizer: row has " + std::to_string(row.size()) +
                          " features, standardizer has " + std::to_string(s.dim()));
    return (row - s.means).cwiseQuotient(s.stds);
}

Matrix apply_standardizer_rows(const Standardizer& s, const Eigen::Ref<const Matrix>& rows) {
    if (rows.cols() != s.dim())
        throw SchemaError("apply_standardizer: matrix has " + std::to_string(rows.cols()) +
                          " features, standardizer has " + std::to_string(s.dim()));
    Matrix out = rows.rowwise() - s.means.transpose();
    out.array().rowwise() /= s.stds.transpose().array();
    return out;
}

PcaModel pca_fit(const Eigen::Ref<const Matrix>& standardized) {
    if (!standardized.allFinite()) throw DataError("pca_fit: non-finite input");
    const Index rows = standardized.rows();
    const Index dim = standardized.cols();
    if (rows < 2) throw DomainError("pca_fit: need >= 2 rows");
    if (dim < 1) throw DomainError("pca_fit: need >= 1 column");

    const Matrix centered = standardized.rowwise() - standardized.colwise().mean();
    const Matrix covariance = centered.transpose() * centered / static_cast<double>(rows - 1);

    Eigen::SelfAdjointEigenSolver<Matrix> solver(covariance);
    if (solver.info() != Eigen::Success) throw DataError("pca_fit: eigen-decomposition failed");

    // solver returns ascending eigenvalues; flip to descending
    PcaModel model;
    model.eigenvalues.resize(dim);
    model.components.resize(dim, dim);
    for (Index i = 0; i < dim; ++i) {
        const Index src = dim - 1 - i;
        model.eigenvalues(i) = std::max(solver.eigenvalues()(src), 0.0);
        model.components.row(i) = solver.eigenvectors().col(src).transpose();
    }

    // sign convention: largest-magnitude entry of each component is positive
    for (Index i = 0; i < dim; ++i) {
        Index arg_max = 0;
        double best = std::abs(model.components(i, 0));
        for (Index j = 1; j < dim; ++j) {
            const double mag = std::abs(model.components(i, j));
            if (mag > best) {
                best = mag;
                arg_max = j;
            }
        }
        if (model.components(i, arg_max) < 0.0) model.components.row(i) = -model.components.row(i);
    }

    const double total = model.eigenvalues.sum();
    if (total > 0.0) {
        model.explained_variance_ratio = model.eigenvalues / total;
    } else {
        // all-constant input: no variance to apportion, spread the ratio evenly
        model.explained_variance_ratio = Vector::Constant(dim, 1.0 / static_cast<double>(dim));
    }
    return model;
}

PcaModel select_components(PcaModel model, double threshold) {
    if (!(threshold > 0.0 && threshold <= 1.0))
        throw DomainError("select_components: threshold must be in (0, 1]");
    if (model.input_dim() == 0) throw DomainError("select_components: model not fitted");

    const Index dim = model.input_dim();
    Index retained = dim;
    double cumulative = 0.0;
    for (Index i = 0; i < dim; ++i) {
        cumulative += model.explained_variance_ratio(i);
        if (cumulative >= threshold) {
            retained = i + 1;
            break;
        }
    }
    model.retained = static_cast<int>(retained);
    return model;
}

Vector pca_transform(const PcaModel& model, const Eigen::Ref<const Vector>& row) {
    if (model.retained < 1) throw DomainError("pca_transform: retained component count not set");
    if (row.size() != model.input_dim())
        throw SchemaError("pca_transform: row has " + std::to_string(row.size()) +
                          " features, model expects " + std::to_string(model.input_dim()));
    return model.components.topRows(model.retained) * row;
}

Matrix pca_transform_rows(const PcaModel& model, const Eigen::Ref<const Matrix>& rows) {
    if (model.retained < 1) throw DomainError("pca_transform: retained component count not set");
    if (rows.cols() != model.input_dim())
        throw SchemaError("pca_transform: matrix has " + std::to_string(rows.cols()) +
                          " features, model expects " + std::to_string(model.input_dim()));
    return rows * model.components.topRows(model.retained).transpose();
}

Vector pca_inverse(const PcaModel& model, const Eigen::Ref<const Vector>& reduced) {
    if (model.retained < 1) throw DomainError("pca_inverse: retained component count not set");
    if (reduced.size() != model.retained)
        throw SchemaError("pca_inverse: vector has " + std::to_string(reduced.size()) +
                          " entries, model retains " + std::to_string(model.retained));
    return model.components.topRows(model.retained).transpose() * reduced;
}

} // namespace terrain
