#pragma once

#include "terrain/errors.hpp"
#include "terrain/types.hpp"

#include <cstddef>
#include <iosfwd>
#include <map>
#include <vector>

namespace terrain {

// Training points in the reduced space. Brute-force search: the training sets
// this targets are a few hundred points in a handful of dimensions.
struct KnnModel {
    Matrix points;                     // rows = training windows
    std::vector<TerrainLabel> labels;  // one per point
    int k = 5;

    Index dim() const { return points.cols(); }
    Index size() const { return points.rows(); }
    void validate() const;
};

struct Prediction {
    TerrainLabel label;
    std::map<TerrainLabel, int> votes;  // neighbour counts, sum to k
    double max_distance = 0.0;          // Euclidean distance to the k-th neighbour

    double confidence() const;  // top vote share, votes[label] / k
};

// Exact k-nearest by Euclidean distance. Equal distances at the k-th rank
// break toward the lower training-point index; vote ties go to the label of
// the nearest neighbour among the tied labels.
Prediction knn_classify(const KnnModel& model, const Eigen::Ref<const Vector>& query);

struct ConfusionMatrix {
    std::vector<TerrainLabel> classes;
    Eigen::MatrixXi counts;  // counts(i, j) = true class i predicted as class j

    int total() const { return counts.sum(); }
    int trace() const { return counts.diagonal().sum(); }
};

// Confusion matrix plus accuracy = trace / total over the given class order.
std::pair<ConfusionMatrix, double> evaluate(const std::vector<TerrainLabel>& predictions,
                                            const std::vector<TerrainLabel>& truth,
                                            const std::vector<TerrainLabel>& classes);

struct TransitionLag {
    std::ptrdiff_t index = 0;  // frame where the truth label changes
    std::ptrdiff_t lag = 0;    // frames until the prediction matches; remaining
                               // length when it never does
    bool matched = true;
};

// One entry per truth transition. Truth is expected piecewise-constant.
std::vector<TransitionLag> transition_lag(const std::vector<TerrainLabel>& predictions,
                                          const std::vector<TerrainLabel>& truth);

// Accuracy ignoring frames within `margin` frames after any truth transition.
// Returns -1 when every frame falls in a transition zone.
double accuracy_excluding_transitions(const std::vector<TerrainLabel>& predictions,
                                      const std::vector<TerrainLabel>& truth,
                                      std::ptrdiff_t margin);

void print_report(std::ostream& out, const ConfusionMatrix& matrix, double accuracy);
void write_confusion_csv(std::ostream& out, const ConfusionMatrix& matrix);

} // namespace terrain
