#pragma once

// KMeans (K=2) separation of adversarial from legitimate attachment events.
//
// Events are clustered on a small standardized feature set (minute-of-day
// and dwell by default). The cluster with the lower dwell variance is
// quarantined: jump attacks keep a constant dwell, legitimate traffic does
// not. Restarts, assignment, and centroid updates are all deterministic for
// a given seed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "mobsim/features.hpp"
#include "mobsim/parallel.hpp"
#include "mobsim/rng.hpp"
#include "mobsim/trace.hpp"

namespace mobsim {

struct ClusteringConfig {
    std::int32_t k = 2;
    std::int32_t n_init = 10;
    std::int32_t max_iter = 300;
    double tol = 1e-4;  // max centroid shift, standardized units
    std::uint64_t seed = 0;
    // Columns to cluster on; subset of
    // {target_time, timeslot, signal, cell_change_rate}.
    std::vector<std::string> features{"target_time", "timeslot"};
    // How the malicious cluster is chosen by defense_filter.
    enum class MaliciousRule { lowest_timeslot_variance, smallest_cluster };
    MaliciousRule rule = MaliciousRule::lowest_timeslot_variance;

    void validate() const {
        if (k < 1) throw std::invalid_argument("k must be >= 1");
        if (n_init < 1) throw std::invalid_argument("n_init must be >= 1");
        if (max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
        if (tol < 0.0) throw std::invalid_argument("tolerance must be >= 0");
        if (features.empty()) throw std::invalid_argument("feature set is empty");
        for (const auto& f : features)
            if (f != "target_time" && f != "timeslot" && f != "signal" &&
                f != "cell_change_rate")
                throw std::invalid_argument("unknown clustering feature '" + f + "'");
    }
};

// --- Standardization -----------------------------------------------------------

struct Scaler {
    std::vector<double> mean;
    std::vector<double> stddev;  // 0 marks a constant column

    // x -> (x - mean) / stddev, constant columns -> 0.
    FeatureMatrix apply(const FeatureMatrix& rows) const {
        if (rows.n_cols != mean.size())
            throw std::invalid_argument("scaler dimension mismatch");
        FeatureMatrix out = rows;
        for (std::size_t r = 0; r < out.n_rows; ++r)
            for (std::size_t c = 0; c < out.n_cols; ++c) {
                double& v = out.values[r * out.n_cols + c];
                v = stddev[c] > 0.0 ? (v - mean[c]) / stddev[c] : 0.0;
            }
        return out;
    }
};

struct Standardized {
    FeatureMatrix rows;
    Scaler scaler;
};

inline Standardized standardize(const FeatureMatrix& rows) {
    if (rows.n_rows == 0) throw std::invalid_argument("cannot standardize empty data");
    Scaler scaler;
    scaler.mean.assign(rows.n_cols, 0.0);
    scaler.stddev.assign(rows.n_cols, 0.0);
    for (std::size_t c = 0; c < rows.n_cols; ++c) {
        double sum = 0.0;
        for (std::size_t r = 0; r < rows.n_rows; ++r) sum += rows.at(r, c);
        scaler.mean[c] = sum / static_cast<double>(rows.n_rows);
        double ss = 0.0;
        for (std::size_t r = 0; r < rows.n_rows; ++r) {
            const double d = rows.at(r, c) - scaler.mean[c];
            ss += d * d;
        }
        const double var = ss / static_cast<double>(rows.n_rows);
        scaler.stddev[c] = var > 0.0 ? std::sqrt(var) : 0.0;
    }
    return {scaler.apply(rows), scaler};
}

// --- KMeans -----------------------------------------------------------------------

struct ClusterReport {
    std::vector<std::int32_t> assignments;
    std::vector<std::vector<double>> centroids;  // standardized space
    std::vector<std::size_t> cluster_sizes;
    double inertia = 0.0;                   // summed squared distances
    std::vector<double> inertia_history;    // winning restart, per iteration
    std::int32_t best_restart = -1;
    std::int32_t iterations = 0;
    // Filled by defense_filter:
    std::int32_t quarantined_cluster = -1;
    std::vector<double> timeslot_variance;  // raw minutes^2, per cluster
    double purity = -1.0;                   // -1 when no truth labels given
};

namespace detail {

inline double sq_dist(const double* a, const double* b, std::size_t d) {
    double s = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
        const double diff = a[c] - b[c];
        s += diff * diff;
    }
    return s;
}

struct LloydRun {
    std::vector<std::int32_t> assignments;
    std::vector<std::vector<double>> centroids;
    std::vector<std::size_t> sizes;
    double inertia = std::numeric_limits<double>::infinity();
    std::vector<double> history;
    std::int32_t iterations = 0;
};

// Weighted D^2 seeding, then Lloyd until the centroids stop moving.
inline LloydRun lloyd_once(const FeatureMatrix& X, std::size_t k, std::int32_t max_iter,
                           double tol, Rng rng) {
    const std::size_t n = X.n_rows;
    const std::size_t d = X.n_cols;
    LloydRun run;
    run.centroids.assign(k, std::vector<double>(d, 0.0));

    std::vector<double> d2(n, std::numeric_limits<double>::infinity());
    {
        const std::size_t first = static_cast<std::size_t>(rng.below(n));
        for (std::size_t c = 0; c < d; ++c) run.centroids[0][c] = X.at(first, c);
        for (std::size_t j = 1; j < k; ++j) {
            double total = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                d2[i] = std::min(d2[i], sq_dist(X.row(i), run.centroids[j - 1].data(), d));
                total += d2[i];
            }
            std::size_t pick = 0;
            if (total > 0.0) {
                const double u = rng.uniform() * total;
                double acc = 0.0;
                pick = n - 1;
                for (std::size_t i = 0; i < n; ++i) {
                    acc += d2[i];
                    if (acc > u) {
                        pick = i;
                        break;
                    }
                }
            } else {
                pick = static_cast<std::size_t>(rng.below(n));
            }
            for (std::size_t c = 0; c < d; ++c) run.centroids[j][c] = X.at(pick, c);
        }
    }

    run.assignments.assign(n, 0);
    run.sizes.assign(k, 0);
    std::vector<std::vector<double>> next(k, std::vector<double>(d, 0.0));
    for (std::int32_t iter = 0; iter < max_iter; ++iter) {
        // Assignment; ties go to the lowest cluster index.
        for (std::size_t i = 0; i < n; ++i) {
            std::int32_t best = 0;
            double best_d = sq_dist(X.row(i), run.centroids[0].data(), d);
            for (std::size_t j = 1; j < k; ++j) {
                const double dist = sq_dist(X.row(i), run.centroids[j].data(), d);
                if (dist < best_d) {
                    best_d = dist;
                    best = static_cast<std::int32_t>(j);
                }
            }
            run.assignments[i] = best;
        }
        std::fill(run.sizes.begin(), run.sizes.end(), 0);
        for (const std::int32_t a : run.assignments) ++run.sizes[static_cast<std::size_t>(a)];

        // An empty cluster captures the point farthest from its centroid.
        for (std::size_t j = 0; j < k; ++j) {
            if (run.sizes[j] > 0) continue;
            double worst = -1.0;
            std::size_t worst_i = 0;
            for (std::size_t i = 0; i < n; ++i) {
                const auto a = static_cast<std::size_t>(run.assignments[i]);
                if (run.sizes[a] <= 1) continue;  // don't empty another cluster
                const double dist = sq_dist(X.row(i), run.centroids[a].data(), d);
                if (dist > worst) {
                    worst = dist;
                    worst_i = i;
                }
            }
            if (worst < 0.0) continue;  // fewer distinct points than clusters
            --run.sizes[static_cast<std::size_t>(run.assignments[worst_i])];
            run.assignments[worst_i] = static_cast<std::int32_t>(j);
            ++run.sizes[j];
        }

        // New centroids, accumulated in point-index order.
        for (auto& c : next) std::fill(c.begin(), c.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            auto& acc = next[static_cast<std::size_t>(run.assignments[i])];
            for (std::size_t c = 0; c < d; ++c) acc[c] += X.at(i, c);
        }
        double shift = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            if (run.sizes[j] == 0) continue;  // keep stale centroid
            for (std::size_t c = 0; c < d; ++c)
                next[j][c] /= static_cast<double>(run.sizes[j]);
            shift = std::max(shift, std::sqrt(sq_dist(next[j].data(),
                                                      run.centroids[j].data(), d)));
            run.centroids[j] = next[j];
        }

        double inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            inertia += sq_dist(
                X.row(i),
                run.centroids[static_cast<std::size_t>(run.assignments[i])].data(), d);
        run.history.push_back(inertia);
        run.inertia = inertia;
        run.iterations = iter + 1;
        if (shift < tol) break;
    }
    return run;
}

}  // namespace detail

// Best of n_init seeded restarts; ties resolve to the lowest restart index.
inline ClusterReport kmeans(const FeatureMatrix& points, const ClusteringConfig& cfg) {
    cfg.validate();
    const auto k = static_cast<std::size_t>(cfg.k);
    if (points.n_rows < k)
        throw std::invalid_argument("fewer points than clusters");
    for (const double v : points.values)
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite feature value");

    std::vector<detail::LloydRun> runs(static_cast<std::size_t>(cfg.n_init));
    for_ranges(runs.size(), 1, [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r)
            runs[r] = detail::lloyd_once(points, k, cfg.max_iter, cfg.tol,
                                         substream(cfg.seed, "kmeans-restart", r));
    });
    std::size_t best = 0;
    for (std::size_t r = 1; r < runs.size(); ++r)
        if (runs[r].inertia < runs[best].inertia) best = r;

    ClusterReport report;
    report.assignments = std::move(runs[best].assignments);
    report.centroids = std::move(runs[best].centroids);
    report.cluster_sizes = std::move(runs[best].sizes);
    report.inertia = runs[best].inertia;
    report.inertia_history = std::move(runs[best].history);
    report.best_restart = static_cast<std::int32_t>(best);
    report.iterations = runs[best].iterations;
    return report;
}

// Fraction of events whose cluster's majority truth label matches their own.
inline double cluster_purity(const std::vector<std::int32_t>& assignments,
                             const std::vector<std::string>& truth, std::size_t k) {
    if (assignments.size() != truth.size())
        throw std::invalid_argument("assignment/truth size mismatch");
    if (assignments.empty()) throw std::invalid_argument("empty purity input");
    std::vector<std::map<std::string, std::size_t>> counts(k);
    for (std::size_t i = 0; i < assignments.size(); ++i)
        ++counts[static_cast<std::size_t>(assignments[i])][truth[i]];
    std::size_t agree = 0;
    for (const auto& cluster : counts) {
        std::size_t majority = 0;
        for (const auto& [label, c] : cluster) majority = std::max(majority, c);
        agree += majority;
    }
    return static_cast<double>(agree) / static_cast<double>(assignments.size());
}

// --- Quarantine filter ---------------------------------------------------------

struct DefenseResult {
    std::vector<std::size_t> kept;         // indices into the input events
    std::vector<std::size_t> quarantined;  // indices into the input events
    ClusterReport report;
};

// Per-(imsi, day) event counts; the cell_change_rate clustering feature.
inline std::unordered_map<std::uint64_t, std::int32_t> daily_event_counts(
    const std::vector<AttachmentEvent>& events) {
    std::unordered_map<std::uint64_t, std::int32_t> counts;
    for (const auto& e : events) {
        const std::uint64_t key =
            (static_cast<std::uint64_t>(e.imsi) << 32) |
            static_cast<std::uint64_t>(static_cast<std::uint32_t>(e.t_min / 1440));
        ++counts[key];
    }
    return counts;
}

inline FeatureMatrix clustering_features(const std::vector<AttachmentEvent>& events,
                                         const std::vector<std::string>& names) {
    const auto counts = daily_event_counts(events);
    FeatureMatrix m;
    m.n_rows = events.size();
    m.n_cols = names.size();
    m.values.resize(m.n_rows * m.n_cols);
    for (std::size_t i = 0; i < events.size(); ++i) {
        const auto& e = events[i];
        for (std::size_t c = 0; c < names.size(); ++c) {
            double v = 0.0;
            if (names[c] == "target_time") v = static_cast<double>(e.t_min % 1440);
            else if (names[c] == "timeslot") v = static_cast<double>(e.timeslot_min);
            else if (names[c] == "signal") v = e.signal;
            else if (names[c] == "cell_change_rate") {
                const std::uint64_t key =
                    (static_cast<std::uint64_t>(e.imsi) << 32) |
                    static_cast<std::uint64_t>(static_cast<std::uint32_t>(e.t_min / 1440));
                v = static_cast<double>(counts.at(key));
            } else {
                throw std::invalid_argument("unknown clustering feature '" + names[c] + "'");
            }
            m.values[i * m.n_cols + c] = v;
        }
    }
    return m;
}

// Clusters the events, flags the malicious cluster, and splits the input.
// truth, when given, maps imsi -> truth label and enables purity scoring.
inline DefenseResult defense_filter(
    const std::vector<AttachmentEvent>& events, const ClusteringConfig& cfg,
    const std::unordered_map<std::uint32_t, std::string>* truth = nullptr) {
    cfg.validate();
    if (cfg.k != 2)
        throw std::invalid_argument("the quarantine filter requires k = 2");
    if (events.size() < 2) throw std::invalid_argument("need at least 2 events");

    const FeatureMatrix raw = clustering_features(events, cfg.features);
    const Standardized std_rows = standardize(raw);
    ClusterReport report = kmeans(std_rows.rows, cfg);

    // Raw dwell variance per cluster decides which side is quarantined.
    report.timeslot_variance.assign(2, 0.0);
    std::array<double, 2> mean{0.0, 0.0};
    std::array<std::size_t, 2> n{0, 0};
    for (std::size_t i = 0; i < events.size(); ++i) {
        const auto a = static_cast<std::size_t>(report.assignments[i]);
        mean[a] += static_cast<double>(events[i].timeslot_min);
        ++n[a];
    }
    for (std::size_t j = 0; j < 2; ++j)
        if (n[j] > 0) mean[j] /= static_cast<double>(n[j]);
    for (std::size_t i = 0; i < events.size(); ++i) {
        const auto a = static_cast<std::size_t>(report.assignments[i]);
        const double dmean = static_cast<double>(events[i].timeslot_min) - mean[a];
        report.timeslot_variance[a] += dmean * dmean;
    }
    for (std::size_t j = 0; j < 2; ++j)
        if (n[j] > 0) report.timeslot_variance[j] /= static_cast<double>(n[j]);

    if (cfg.rule == ClusteringConfig::MaliciousRule::smallest_cluster) {
        report.quarantined_cluster = n[0] < n[1] ? 0 : (n[1] < n[0] ? 1 : 0);
    } else {
        report.quarantined_cluster =
            report.timeslot_variance[0] < report.timeslot_variance[1]
                ? 0
                : (report.timeslot_variance[1] < report.timeslot_variance[0] ? 1 : 0);
    }

    if (truth) {
        std::vector<std::string> labels;
        labels.reserve(events.size());
        for (const auto& e : events) {
            const auto it = truth->find(e.imsi);
            labels.push_back(it != truth->end() ? it->second : std::string("unknown"));
        }
        report.purity = cluster_purity(report.assignments, labels, 2);
    }

    DefenseResult result;
    for (std::size_t i = 0; i < events.size(); ++i) {
        if (report.assignments[i] == report.quarantined_cluster)
            result.quarantined.push_back(i);
        else
            result.kept.push_back(i);
    }
    result.report = std::move(report);
    return result;
}

}  // namespace mobsim
