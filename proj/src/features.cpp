#include "terrain/features.hpp"

namespace terrain {

Vector window_features(const Eigen::Ref<const Matrix>& block, const ChannelRegistry& channels) {
    if (block.cols() != static_cast<Index>(channels.size()))
        throw SchemaError("window block has " + std::to_string(block.cols()) +
                          " columns, registry has " + std::to_string(channels.size()));
    Vector out(block.cols());
    for (Index c = 0; c < block.cols(); ++c) {
        out(c) = channels[static_cast<std::size_t>(c)].mode == FeatureMode::Mean
                     ? moving_mean(block.col(c))
                     : signal_energy(block.col(c));
    }
    return out;
}

std::vector<FeatureVector> extract_windows(const LabeledRun& run, const WindowParams& params,
                                           const ChannelRegistry& channels) {
    params.validate();
    if (run.channel_count() != static_cast<Index>(channels.size()))
        throw SchemaError("run '" + run.source_id + "' has " + std::to_string(run.channel_count()) +
                          " channels, registry has " + std::to_string(channels.size()));

    const Index n_windows = window_count(run.frame_count(), params);
    std::vector<FeatureVector> out;
    out.reserve(static_cast<std::size_t>(n_windows));
    for (Index m = 0; m < n_windows; ++m) {
        const Index start = m * params.stride;
        FeatureVector fv;
        fv.values = window_features(run.frames.middleRows(start, params.window_size), channels);
        fv.label = run.label;
        fv.window_index = static_cast<int>(m);
        out.push_back(std::move(fv));
    }
    return out;
}

StreamBuffer::StreamBuffer(int capacity, Index width) {
    if (capacity < 1) throw DomainError("StreamBuffer capacity must be >= 1");
    if (width < 1) throw DomainError("StreamBuffer width must be >= 1");
    ring_.resize(capacity, width);
}

void StreamBuffer::push(const FrameRecord& frame) {
    push(frame.values);
}

void StreamBuffer::push(const Eigen::Ref<const Vector>& values) {
    if (values.size() != ring_.cols())
        throw SchemaError("frame width " + std::to_string(values.size()) +
                          " does not match buffer width " + std::to_string(ring_.cols()));
    ring_.row(head_) = values.transpose();
    head_ = (head_ + 1) % capacity();
    if (count_ < capacity()) ++count_;
}

Matrix StreamBuffer::window() const {
    if (!full()) throw DomainError("StreamBuffer::window: buffer not full");
    const int n = capacity();
    Matrix out(n, ring_.cols());
    // head_ is the oldest row once the ring is full
    for (int i = 0; i < n; ++i) out.row(i) = ring_.row((head_ + i) % n);
    return out;
}

std::optional<FeatureVector> StreamBuffer::features(const ChannelRegistry& channels) const {
    if (!full()) return std::nullopt;
    FeatureVector fv;
    fv.values = window_features(window(), channels);
    return fv;
}

} // namespace terrain
