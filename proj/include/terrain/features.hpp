#pragma once

#include "terrain/errors.hpp"
#include "terrain/types.hpp"

#include <optional>
#include <vector>

namespace terrain {

// Windowing scheme: window m (0-based) covers frames [m*stride, m*stride + window_size).
// Training uses stride == window_size (non-overlapping), streaming uses stride == 1.
struct WindowParams {
    int window_size = 9;  // N
    int stride = 9;       // S

    void validate() const {
        if (window_size < 1) throw DomainError("window_size must be >= 1");
        if (stride < 1) throw DomainError("stride must be >= 1");
    }
};

// Mean of one window. Sequential accumulation: the streaming and batch paths
// must produce bit-identical values, so no reordered/vectorized reduction here.
template <typename Derived>
typename Derived::Scalar moving_mean(const Eigen::MatrixBase<Derived>& x) {
    using Scalar = typename Derived::Scalar;
    const Index n = x.size();
    if (n == 0) throw DomainError("moving_mean: empty segment");
    Scalar sum = Scalar(0);
    for (Index i = 0; i < n; ++i) sum += x(i);
    return sum / static_cast<Scalar>(n);
}

// Sum of squared deviations from the window mean. Not divided by N: window
// size scales the feature, which standardization later absorbs.
template <typename Derived>
typename Derived::Scalar signal_energy(const Eigen::MatrixBase<Derived>& x) {
    using Scalar = typename Derived::Scalar;
    const Index n = x.size();
    if (n == 0) throw DomainError("signal_energy: empty segment");
    const Scalar mean = moving_mean(x);
    Scalar sum = Scalar(0);
    for (Index i = 0; i < n; ++i) {
        const Scalar d = x(i) - mean;
        sum += d * d;
    }
    return sum;
}

// Per-window feature values (energy or mean per channel) plus the label they
// inherit from the run they were cut from.
struct FeatureVector {
    Vector values;       // one per channel
    TerrainLabel label;  // empty = unlabeled
    int window_index = 0;
};

// One feature value per channel for an N-frame block (rows = frames in
// arrival order, columns follow `channels`).
Vector window_features(const Eigen::Ref<const Matrix>& block, const ChannelRegistry& channels);

// Cuts a run into windows and summarizes each. Windows that would extend past
// the final frame are dropped; a run shorter than N frames yields zero windows.
std::vector<FeatureVector> extract_windows(const LabeledRun& run, const WindowParams& params,
                                           const ChannelRegistry& channels);

// Number of windows extract_windows produces for a run of `frames` frames.
inline Index window_count(Index frames, const WindowParams& params) {
    if (frames < params.window_size) return 0;
    return (frames - params.window_size) / params.stride + 1;
}

// Fixed-capacity ring of the most recent frames, oldest evicted first.
// Single-owner mutation; may be handed between threads, not shared.
class StreamBuffer {
public:
    StreamBuffer(int capacity, Index width);

    void push(const FrameRecord& frame);
    void push(const Eigen::Ref<const Vector>& values);

    int size() const { return count_; }
    int capacity() const { return static_cast<int>(ring_.rows()); }
    Index width() const { return ring_.cols(); }
    bool full() const { return count_ == capacity(); }

    // Buffered frames in arrival order, oldest first. Requires full().
    Matrix window() const;

    // One feature per channel over the buffered window, identical to batch
    // extraction over the same frames. Empty while warming up (< N frames).
    std::optional<FeatureVector> features(const ChannelRegistry& channels) const;

private:
    Matrix ring_;   // capacity x width, row `head_` is the next write slot
    int head_ = 0;
    int count_ = 0;
};

} // namespace terrain
