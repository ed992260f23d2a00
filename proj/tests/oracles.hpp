// Brute-force reference implementations used to check the library. These are
// written against plain std::vector loops on purpose: they must stay
// independent of the implementation paths they verify.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace oracle {

inline double mean(const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

// sum over the window of (x_k - window mean)^2
inline double energy(const std::vector<double>& x) {
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s;
}

// window m (1-indexed) covers samples (m-1)*stride + 1 ... (m-1)*stride + n;
// windows running past the end are dropped
inline std::vector<std::vector<double>> cut_windows(const std::vector<double>& x, int n, int stride) {
    std::vector<std::vector<double>> windows;
    for (std::size_t start = 0; start + static_cast<std::size_t>(n) <= x.size();
         start += static_cast<std::size_t>(stride))
        windows.emplace_back(x.begin() + static_cast<std::ptrdiff_t>(start),
                             x.begin() + static_cast<std::ptrdiff_t>(start) + n);
    return windows;
}

inline double f_statistic(const std::vector<double>& x, const std::vector<int>& classes) {
    int n_classes = 0;
    for (int c : classes) n_classes = std::max(n_classes, c + 1);
    std::vector<double> sum(static_cast<std::size_t>(n_classes), 0.0);
    std::vector<int> count(static_cast<std::size_t>(n_classes), 0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        sum[static_cast<std::size_t>(classes[i])] += x[i];
        ++count[static_cast<std::size_t>(classes[i])];
    }
    const double grand = mean(x);
    double ssb = 0.0;
    for (int c = 0; c < n_classes; ++c) {
        const double d = sum[static_cast<std::size_t>(c)] / count[static_cast<std::size_t>(c)] - grand;
        ssb += count[static_cast<std::size_t>(c)] * d * d;
    }
    double ssw = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d =
            x[i] - sum[static_cast<std::size_t>(classes[i])] / count[static_cast<std::size_t>(classes[i])];
        ssw += d * d;
    }
    if (ssb == 0.0) return 0.0;
    if (ssw == 0.0) return std::numeric_limits<double>::infinity();
    const double n = static_cast<double>(x.size());
    return (ssb / (n_classes - 1)) / (ssw / (n - n_classes));
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const double ma = mean(a), mb = mean(b);
    double num = 0.0, da = 0.0, db = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - ma) * (b[i] - mb);
        da += (a[i] - ma) * (a[i] - ma);
        db += (b[i] - mb) * (b[i] - mb);
    }
    if (da == 0.0 || db == 0.0) return 0.0;
    return num / std::sqrt(da * db);
}

// exhaustive greedy FCQ selection, recomputed from scratch each step
inline std::vector<int> mrmr(const std::vector<std::vector<double>>& columns,
                             const std::vector<int>& classes, int count) {
    const int n_cols = static_cast<int>(columns.size());
    std::vector<int> selected;
    std::vector<bool> taken(static_cast<std::size_t>(n_cols), false);
    for (int step = 0; step < count; ++step) {
        int best = -1;
        double best_score = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < n_cols; ++i) {
            if (taken[static_cast<std::size_t>(i)]) continue;
            const double f = f_statistic(columns[static_cast<std::size_t>(i)], classes);
            double score;
            if (selected.empty()) {
                score = f;
            } else {
                double rho = 0.0;
                for (int s : selected)
                    rho += std::abs(pearson(columns[static_cast<std::size_t>(s)],
                                            columns[static_cast<std::size_t>(i)]));
                score = f / std::max(rho / static_cast<double>(selected.size()), 1e-12);
            }
            if (score > best_score) {
                best_score = score;
                best = i;
            }
        }
        taken[static_cast<std::size_t>(best)] = true;
        selected.push_back(best);
    }
    return selected;
}

// exhaustive distance sort; ties on distance break toward the lower index,
// vote ties go to the nearest neighbour holding a tied label
inline std::string knn(const std::vector<std::vector<double>>& points,
                       const std::vector<std::string>& labels, int k,
                       const std::vector<double>& query) {
    const std::size_t n = points.size();
    std::vector<std::pair<double, std::size_t>> dist(n);
    for (std::size_t i = 0; i < n; ++i) {
        double d = 0.0;
        for (std::size_t j = 0; j < query.size(); ++j) {
            const double t = points[i][j] - query[j];
            d += t * t;
        }
        dist[i] = {d, i};
    }
    std::sort(dist.begin(), dist.end());
    std::map<std::string, int> votes;
    for (int j = 0; j < k; ++j) ++votes[labels[dist[static_cast<std::size_t>(j)].second]];
    int top = 0;
    for (const auto& [l, c] : votes) top = std::max(top, c);
    for (int j = 0; j < k; ++j) {
        const auto& l = labels[dist[static_cast<std::size_t>(j)].second];
        if (votes[l] == top) return l;
    }
    throw std::logic_error("unreachable");
}

// smallest prefix whose ratio sum reaches the threshold; all of them if the
// cumulative sum never gets there
inline int retained_components(const std::vector<double>& ratios, double threshold) {
    double cumulative = 0.0;
    for (std::size_t i = 0; i < ratios.size(); ++i) {
        cumulative += ratios[i];
        if (cumulative >= threshold) return static_cast<int>(i) + 1;
    }
    return static_cast<int>(ratios.size());
}

} // namespace oracle
