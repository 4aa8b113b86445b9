#pragma once

// Brute-force reference implementations used by the test suites. Each one
// trades efficiency for obviousness so test expectations do not depend on
// the very code paths under test.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "mobsim/features.hpp"
#include "mobsim/topology.hpp"
#include "mobsim/trace.hpp"

namespace oracle {

// Nearest-4 adjacency via full sort on (distance^2, id).
inline std::array<std::int32_t, 4> neighbors(const std::vector<mobsim::Cell>& cells,
                                             std::size_t of_index) {
    const auto& c = cells[of_index];
    std::vector<std::pair<double, std::int32_t>> order;
    for (std::size_t j = 0; j < cells.size(); ++j) {
        if (j == of_index) continue;
        const double dx = cells[j].x_m - c.x_m, dy = cells[j].y_m - c.y_m;
        order.emplace_back(dx * dx + dy * dy, cells[j].id);
    }
    std::sort(order.begin(), order.end());
    std::array<std::int32_t, 4> out{-1, -1, -1, -1};
    for (std::size_t j = 0; j < 4 && j < order.size(); ++j) out[j] = order[j].second;
    return out;
}

// Strongest-signal attachment via exhaustive scan, no pruning.
inline mobsim::AttachResult attach(const mobsim::Topology& topo, double x, double y,
                                   const std::vector<double>& load_fractions) {
    mobsim::AttachResult out;
    out.signal = -1.0;
    for (std::size_t i = 0; i < topo.size(); ++i) {
        const auto& c = topo.cells()[i];
        const double d = std::hypot(x - c.x_m, y - c.y_m);
        const double s = topo.signal(d, load_fractions[i]);
        // Strict > keeps the first (lowest id; cells are id-sorted) on ties.
        if (s > out.signal) {
            out.index = static_cast<std::int32_t>(i);
            out.signal = s;
        }
    }
    return out;
}

// Exhaustive optimal 2-partition by summed squared distance to cluster means.
// Feasible for n <= ~20 points.
inline double best_two_cluster_inertia(const std::vector<std::vector<double>>& pts) {
    const std::size_t n = pts.size();
    const std::size_t d = pts[0].size();
    double best = std::numeric_limits<double>::infinity();
    // Point 0 stays in cluster 0; enumerate membership of the rest.
    for (std::uint64_t mask = 0; mask < (1ULL << (n - 1)); ++mask) {
        std::vector<double> mean0(d, 0.0), mean1(d, 0.0);
        std::size_t n0 = 0, n1 = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const bool in1 = i > 0 && ((mask >> (i - 1)) & 1);
            auto& mean = in1 ? mean1 : mean0;
            (in1 ? n1 : n0)++;
            for (std::size_t j = 0; j < d; ++j) mean[j] += pts[i][j];
        }
        if (n0 == 0 || n1 == 0) continue;
        for (std::size_t j = 0; j < d; ++j) {
            mean0[j] /= static_cast<double>(n0);
            mean1[j] /= static_cast<double>(n1);
        }
        double inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const bool in1 = i > 0 && ((mask >> (i - 1)) & 1);
            const auto& mean = in1 ? mean1 : mean0;
            for (std::size_t j = 0; j < d; ++j) {
                const double diff = pts[i][j] - mean[j];
                inertia += diff * diff;
            }
        }
        best = std::min(best, inertia);
    }
    return best;
}

// Best depth-1 exact split: weighted gini over every feature and every
// midpoint between adjacent distinct values. Returns the split plus the
// majority label on each side.
struct Stump {
    std::size_t feature = 0;
    double threshold = 0.0;
    double score = std::numeric_limits<double>::infinity();
    std::int32_t left_label = 0;
    std::int32_t right_label = 0;

    std::int32_t predict(const std::vector<double>& row) const {
        return row[feature] < threshold ? left_label : right_label;
    }
};

inline std::int32_t majority(const std::vector<std::int32_t>& labels) {
    std::map<std::int32_t, std::size_t> counts;
    for (const auto y : labels) ++counts[y];
    std::int32_t best = labels.front();
    std::size_t best_n = 0;
    for (const auto& [y, n] : counts)
        if (n > best_n) {
            best = y;
            best_n = n;
        }
    return best;
}

inline double gini_cost(const std::vector<std::int32_t>& labels) {
    if (labels.empty()) return 0.0;
    std::map<std::int32_t, std::size_t> counts;
    for (const auto y : labels) ++counts[y];
    double ssq = 0.0;
    for (const auto& [y, n] : counts) ssq += static_cast<double>(n) * n;
    const auto n = static_cast<double>(labels.size());
    return n - ssq / n;  // n * gini impurity
}

inline Stump best_stump(const std::vector<std::vector<double>>& X,
                        const std::vector<std::int32_t>& y) {
    Stump best;
    const std::size_t n_features = X[0].size();
    for (std::size_t f = 0; f < n_features; ++f) {
        std::vector<double> values;
        for (const auto& row : X) values.push_back(row[f]);
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        for (std::size_t i = 0; i + 1 < values.size(); ++i) {
            const double thr = values[i] + 0.5 * (values[i + 1] - values[i]);
            std::vector<std::int32_t> yl, yr;
            for (std::size_t r = 0; r < X.size(); ++r)
                (X[r][f] < thr ? yl : yr).push_back(y[r]);
            const double score = gini_cost(yl) + gini_cost(yr);
            if (score < best.score) {
                best = {f, thr, score, majority(yl), majority(yr)};
            }
        }
    }
    return best;
}

// History features for the i-th event of a single trace, straight from the
// definition: the previous up-to-4 events, newest first.
struct History {
    std::array<std::int32_t, 4> cells{-1, -1, -1, -1};
    std::array<std::int64_t, 4> times{-1, -1, -1, -1};
};

inline History history_at(const std::vector<mobsim::AttachmentEvent>& events,
                          std::size_t i) {
    History h;
    std::size_t slot = 0;
    for (std::size_t back = 1; back <= 4 && back <= i; ++back, ++slot) {
        h.cells[slot] = events[i - back].cell_id;
        h.times[slot] = events[i - back].t_min % 1440;
    }
    return h;
}

// Most-attached cell over [0, boundary), dwell clipped at the boundary.
// Ties break toward the lowest cell id.
inline std::int32_t home_cell(const std::vector<mobsim::AttachmentEvent>& events,
                              std::int64_t boundary_min) {
    std::map<std::int32_t, std::int64_t> dwell;
    for (const auto& e : events) {
        if (e.t_min >= boundary_min) continue;
        const std::int64_t end = std::min(e.t_min + e.timeslot_min, boundary_min);
        dwell[e.cell_id] += end - e.t_min;
    }
    std::int32_t best = -1;
    std::int64_t best_dwell = -1;
    for (const auto& [cell, d] : dwell)
        if (d > best_dwell) {
            best = cell;
            best_dwell = d;
        }
    return best;
}

// Scratch directory, removed on destruction.
struct TempDir {
    std::filesystem::path dir;

    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        dir = std::filesystem::temp_directory_path() /
              (tag + "_" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(dir);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(dir, ec);
    }
    std::string str() const { return dir.string(); }
    std::string operator/(const std::string& name) const { return (dir / name).string(); }
};

}  // namespace oracle
