#pragma once

// Adversarial trace generators.
//
// Jump attacks: k cloned devices share one IMSI and sit at k fixed cells;
// exactly one clone is attached at a time and the active index advances
// cyclically every dwell minutes, so the operator sees a single UE teleport
// between cells on a fixed period.
//
// Basket walk: n distinct-IMSI devices are carried together along one
// polyline at walking speed, producing identical traces modulo IMSI.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "mobsim/mobility.hpp"
#include "mobsim/rng.hpp"
#include "mobsim/topology.hpp"
#include "mobsim/trace.hpp"

namespace mobsim {

struct JumpAttackConfig {
    std::size_t n_ues = 0;      // acquired devices
    std::size_t k = 2;          // clones per set: 2, 5, or 10
    std::int64_t dwell_min = 5; // active period per clone
    // Optional explicit cells per set; when empty, cells are drawn uniformly
    // without replacement per set.
    std::vector<std::vector<std::int32_t>> cell_assignment;
    // Draw consecutive cells from opposite ends of the coverage area so the
    // implied velocity between jumps is maximized.
    bool distant_cells = false;

    void validate(const Topology& topo) const {
        if (k < 2) throw std::invalid_argument("clone sets need k >= 2");
        if (dwell_min < 1) throw std::invalid_argument("dwell must be >= 1 minute");
        if (n_ues % k != 0)
            throw std::invalid_argument("n_ues must be divisible by k");
        if (topo.size() < k)
            throw std::invalid_argument("topology has fewer than k cells");
        if (!cell_assignment.empty()) {
            if (cell_assignment.size() != n_ues / k)
                throw std::invalid_argument("cell_assignment must list one set per n_ues/k");
            for (const auto& set : cell_assignment) {
                if (set.size() != k)
                    throw std::invalid_argument("each assignment set needs exactly k cells");
                auto sorted = set;
                std::sort(sorted.begin(), sorted.end());
                if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
                    throw std::invalid_argument("assignment set repeats a cell");
                for (const std::int32_t id : set) (void)topo.index_of(id);
            }
        }
    }
};

struct GMapsConfig {
    std::size_t n_ues = 0;
    std::vector<Vec2> path;           // >= 2 waypoints inside bounds
    double walk_speed_m_per_min = 84; // ~1.4 m/s
    std::int64_t start_minute = 0;

    void validate(const Topology& topo) const {
        if (path.size() < 2) throw std::invalid_argument("path needs at least 2 waypoints");
        if (walk_speed_m_per_min <= 0.0)
            throw std::invalid_argument("walk speed must be positive");
        if (start_minute < 0) throw std::invalid_argument("start minute must be >= 0");
        const Bounds& b = topo.bounds();
        for (const Vec2& p : path)
            if (p.x < b.min_x || p.x > b.max_x || p.y < b.min_y || p.y > b.max_y)
                throw std::invalid_argument("path waypoint outside bounds");
        double length = 0.0;
        for (std::size_t i = 1; i < path.size(); ++i) length += dist(path[i - 1], path[i]);
        if (length <= 0.0) throw std::invalid_argument("path has zero length");
    }
};

struct AdversarialEventCount {
    std::size_t sets = 0;
    std::size_t events = 0;
    std::size_t idle_per_set = 0;
};

// (n_ues / k) sets, each emitting one record per dwell period.
inline AdversarialEventCount adversarial_event_count(const JumpAttackConfig& cfg,
                                                     std::int64_t duration_min) {
    if (cfg.k < 2) throw std::invalid_argument("clone sets need k >= 2");
    if (cfg.dwell_min < 1) throw std::invalid_argument("dwell must be >= 1 minute");
    if (cfg.n_ues % cfg.k != 0)
        throw std::invalid_argument("n_ues must be divisible by k");
    AdversarialEventCount out;
    out.sets = cfg.n_ues / cfg.k;
    out.events = out.sets * static_cast<std::size_t>(duration_min / cfg.dwell_min);
    out.idle_per_set = cfg.k - 1;
    return out;
}

namespace detail {

inline std::uint32_t draw_imsi(Rng& rng, std::unordered_set<std::uint32_t>& taken) {
    for (;;) {
        const auto imsi = static_cast<std::uint32_t>(rng() >> 32);
        if (taken.insert(imsi).second) return imsi;
    }
}

// Clones sit a short random offset from their cell site; the recorded signal
// is the zero-load signal at that offset, fixed for the clone's lifetime.
inline double clone_signal(const Topology& topo, Rng& rng) {
    const double r = rng.uniform(50.0, 400.0);
    (void)rng.uniform();  // direction; isotropic, only the radius matters here
    return topo.signal(r, 0.0);
}

// Cells sorted by their projection onto the main diagonal; used to pick
// geographically-opposed pools for distant assignments.
inline std::vector<std::int32_t> cells_by_diagonal(const Topology& topo) {
    std::vector<std::pair<double, std::int32_t>> proj;
    proj.reserve(topo.size());
    for (const Cell& c : topo.cells()) proj.emplace_back(c.x_m + c.y_m, c.id);
    std::sort(proj.begin(), proj.end());
    std::vector<std::int32_t> ids;
    ids.reserve(proj.size());
    for (const auto& [p, id] : proj) ids.push_back(id);
    return ids;
}

}  // namespace detail

// One RawTrace per set, sharing the set's IMSI. Records appear at
// t = 0, dwell, 2*dwell, ... with cells cycling through the set's k cells.
// taken_imsis, when given, is extended and guarantees no collision with a
// legitimate population.
inline std::vector<RawTrace> jump_attack_traces(
    const JumpAttackConfig& cfg, const Topology& topo, std::int64_t duration_min,
    Rng& rng, std::unordered_set<std::uint32_t>* taken_imsis = nullptr) {
    cfg.validate(topo);
    if (duration_min < 1) throw std::invalid_argument("duration must be >= 1 minute");
    const std::size_t n_sets = cfg.n_ues / cfg.k;
    std::unordered_set<std::uint32_t> local_taken;
    auto& taken = taken_imsis ? *taken_imsis : local_taken;

    std::vector<std::int32_t> lo_pool, hi_pool;
    if (cfg.distant_cells) {
        const auto ordered = detail::cells_by_diagonal(topo);
        // Opposite 15% tails of the diagonal, at least k/2+1 cells each.
        const std::size_t tail =
            std::max<std::size_t>(cfg.k / 2 + 1,
                                  static_cast<std::size_t>(static_cast<double>(ordered.size()) * 0.15));
        if (ordered.size() < 2 * tail)
            throw std::invalid_argument("too few cells for distant assignment");
        lo_pool.assign(ordered.begin(), ordered.begin() + static_cast<std::ptrdiff_t>(tail));
        hi_pool.assign(ordered.end() - static_cast<std::ptrdiff_t>(tail), ordered.end());
    }

    const std::uint64_t base = rng();
    std::vector<RawTrace> traces(n_sets);
    for (std::size_t s = 0; s < n_sets; ++s) {
        Rng set_rng = substream(base, "jump-set", s);
        RawTrace& trace = traces[s];
        trace.imsi = detail::draw_imsi(set_rng, taken);

        std::vector<std::int32_t> cells;
        if (!cfg.cell_assignment.empty()) {
            cells = cfg.cell_assignment[s];
        } else if (cfg.distant_cells) {
            // Alternate pools so every consecutive jump crosses the plane.
            auto lo = lo_pool, hi = hi_pool;
            set_rng.shuffle(lo);
            set_rng.shuffle(hi);
            std::size_t li = 0, hi_i = 0;
            for (std::size_t c = 0; c < cfg.k; ++c)
                cells.push_back(c % 2 == 0 ? lo[li++] : hi[hi_i++]);
        } else {
            // Uniform without replacement over all cells.
            std::vector<std::int32_t> ids;
            ids.reserve(topo.size());
            for (const Cell& c : topo.cells()) ids.push_back(c.id);
            for (std::size_t c = 0; c < cfg.k; ++c) {
                const std::size_t j =
                    c + static_cast<std::size_t>(set_rng.below(ids.size() - c));
                std::swap(ids[c], ids[j]);
                cells.push_back(ids[c]);
            }
        }

        std::vector<double> signals;
        signals.reserve(cfg.k);
        for (std::size_t c = 0; c < cfg.k; ++c)
            signals.push_back(detail::clone_signal(topo, set_rng));

        const std::int64_t periods = duration_min / cfg.dwell_min;
        trace.records.reserve(static_cast<std::size_t>(periods));
        for (std::int64_t j = 0; j < periods; ++j) {
            const std::size_t c = static_cast<std::size_t>(j) % cfg.k;
            trace.records.push_back({j * cfg.dwell_min, cells[c], signals[c]});
        }
    }
    return traces;
}

// The shared trajectory position after m minutes of walking: arc length
// v*m folded onto [0, L] (ping-pong traversal).
inline Vec2 gmaps_position(const std::vector<Vec2>& path, double walk_speed,
                           std::int64_t minutes_walked) {
    std::vector<double> cum{0.0};
    for (std::size_t i = 1; i < path.size(); ++i)
        cum.push_back(cum.back() + dist(path[i - 1], path[i]));
    const double total = cum.back();
    double s = std::fmod(walk_speed * static_cast<double>(minutes_walked), 2.0 * total);
    if (s > total) s = 2.0 * total - s;
    const auto it = std::upper_bound(cum.begin(), cum.end(), s);
    const std::size_t seg = std::min(path.size() - 2,
                                     static_cast<std::size_t>(it - cum.begin() - 1));
    const double seg_len = cum[seg + 1] - cum[seg];
    const double f = seg_len > 0.0 ? (s - cum[seg]) / seg_len : 0.0;
    return {path[seg].x + f * (path[seg + 1].x - path[seg].x),
            path[seg].y + f * (path[seg + 1].y - path[seg].y)};
}

// All UEs share the walk; attachment is evaluated at zero load, so every
// trace is identical except for its IMSI.
inline std::vector<RawTrace> gmaps_traces(
    const GMapsConfig& cfg, const Topology& topo, std::int64_t duration_min,
    Rng& rng, std::unordered_set<std::uint32_t>* taken_imsis = nullptr) {
    cfg.validate(topo);
    if (duration_min <= cfg.start_minute)
        throw std::invalid_argument("duration ends before the walk starts");
    std::unordered_set<std::uint32_t> local_taken;
    auto& taken = taken_imsis ? *taken_imsis : local_taken;

    std::vector<AttachmentRecord> shared;
    std::int32_t prev_cell = -1;
    for (std::int64_t t = cfg.start_minute; t < duration_min; ++t) {
        const Vec2 p = gmaps_position(cfg.path, cfg.walk_speed_m_per_min,
                                      t - cfg.start_minute);
        const AttachResult r = topo.attach(p.x, p.y);
        const std::int32_t cell = topo.cells()[static_cast<std::size_t>(r.index)].id;
        if (cell != prev_cell) {
            shared.push_back({t, cell, r.signal});
            prev_cell = cell;
        }
    }

    std::vector<RawTrace> traces(cfg.n_ues);
    for (auto& trace : traces) {
        trace.imsi = detail::draw_imsi(rng, taken);
        trace.records = shared;
    }
    std::sort(traces.begin(), traces.end(),
              [](const RawTrace& a, const RawTrace& b) { return a.imsi < b.imsi; });
    return traces;
}

// Default basket-walk path: a 3 km segment centered on the cell with the
// most sites within 1.5 km, clipped to bounds.
inline std::vector<Vec2> default_gmaps_path(const Topology& topo, double length_m = 3000.0) {
    const Cell* densest = &topo.cells().front();
    std::size_t best_count = 0;
    for (const Cell& c : topo.cells()) {
        std::size_t count = 0;
        for (const Cell& o : topo.cells()) {
            const double d = std::hypot(c.x_m - o.x_m, c.y_m - o.y_m);
            if (d <= 1500.0) ++count;
        }
        if (count > best_count || (count == best_count && c.id < densest->id)) {
            best_count = count;
            densest = &c;
        }
    }
    const Bounds& b = topo.bounds();
    Vec2 from{b.clamp_x(densest->x_m - length_m / 2.0), b.clamp_y(densest->y_m)};
    Vec2 to{b.clamp_x(densest->x_m + length_m / 2.0), b.clamp_y(densest->y_m)};
    if (dist(from, to) <= 0.0) to.x = b.clamp_x(from.x + 1.0);
    return {from, to};
}

}  // namespace mobsim
