#pragma once

// Base-station topology: cell sites on a plane, nearest-neighbor adjacency,
// and the load-aware signal model used for attachment decisions.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mobsim/csv.hpp"
#include "mobsim/rng.hpp"

namespace mobsim {

struct Cell {
    std::int32_t id = 0;
    double x_m = 0.0;
    double y_m = 0.0;
    std::int32_t capacity = 1;
};

struct Bounds {
    double min_x = 0.0;
    double min_y = 0.0;
    double max_x = 0.0;
    double max_y = 0.0;

    double width() const { return max_x - min_x; }
    double height() const { return max_y - min_y; }
    double diagonal() const { return std::hypot(width(), height()); }

    bool valid() const { return max_x > min_x && max_y > min_y; }

    double clamp_x(double x) const { return std::clamp(x, min_x, max_x); }
    double clamp_y(double y) const { return std::clamp(y, min_y, max_y); }
};

struct AttachResult {
    std::int32_t index = -1;  // position in cells()
    double signal = 0.0;
};

class Topology {
public:
    Topology(std::vector<Cell> cells, Bounds bounds, double d0_m = 500.0,
             double beta = 0.5)
        : cells_(std::move(cells)), bounds_(bounds), d0_m_(d0_m), beta_(beta) {
        if (cells_.empty()) throw std::invalid_argument("topology needs at least one cell");
        if (!bounds_.valid()) throw std::invalid_argument("topology bounds are inverted or empty");
        if (d0_m_ <= 0.0) throw std::invalid_argument("d0_m must be positive");
        if (beta_ < 0.0) throw std::invalid_argument("beta must be non-negative");
        std::sort(cells_.begin(), cells_.end(),
                  [](const Cell& a, const Cell& b) { return a.id < b.id; });
        for (std::size_t i = 1; i < cells_.size(); ++i)
            if (cells_[i].id == cells_[i - 1].id)
                throw std::invalid_argument("duplicate cell id " + std::to_string(cells_[i].id));
        for (const Cell& c : cells_)
            if (c.capacity < 1)
                throw std::invalid_argument("cell " + std::to_string(c.id) +
                                            " has capacity < 1");
        build_neighbors();
    }

    // n cells placed uniformly in bounds, ids 0..n-1.
    static Topology generate(std::size_t n, Bounds bounds, std::int32_t capacity,
                             Rng& rng, double d0_m = 500.0, double beta = 0.5) {
        if (n == 0) throw std::invalid_argument("cannot generate empty topology");
        if (!bounds.valid()) throw std::invalid_argument("topology bounds are inverted or empty");
        std::vector<Cell> cells;
        cells.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            Cell c;
            c.id = static_cast<std::int32_t>(i);
            c.x_m = rng.uniform(bounds.min_x, bounds.max_x);
            c.y_m = rng.uniform(bounds.min_y, bounds.max_y);
            c.capacity = capacity;
            cells.push_back(c);
        }
        return Topology(std::move(cells), bounds, d0_m, beta);
    }

    const std::vector<Cell>& cells() const { return cells_; }
    std::size_t size() const { return cells_.size(); }
    const Bounds& bounds() const { return bounds_; }
    double d0_m() const { return d0_m_; }
    double beta() const { return beta_; }

    std::int32_t index_of(std::int32_t cell_id) const {
        const auto it = std::lower_bound(
            cells_.begin(), cells_.end(), cell_id,
            [](const Cell& c, std::int32_t id) { return c.id < id; });
        if (it == cells_.end() || it->id != cell_id)
            throw std::out_of_range("unknown cell id " + std::to_string(cell_id));
        return static_cast<std::int32_t>(it - cells_.begin());
    }

    // Up to four nearest cells by Euclidean distance, nearest first.
    // Distance ties break toward the lower cell id. Missing slots are -1.
    const std::array<std::int32_t, 4>& neighbors_of(std::int32_t cell_id) const {
        return neighbors_[static_cast<std::size_t>(index_of(cell_id))];
    }

    // Signal strength of a cell at distance d_m carrying the given load
    // fraction. The fraction is clamped to [0, 1] before the penalty.
    double signal(double d_m, double load_fraction) const {
        const double lf = std::clamp(load_fraction, 0.0, 1.0);
        return (1.0 / (1.0 + d_m / d0_m_)) * (1.0 - beta_ * lf);
    }

    double load_fraction(std::int32_t index, std::int32_t attached_count) const {
        const auto& c = cells_[static_cast<std::size_t>(index)];
        return static_cast<double>(attached_count) / static_cast<double>(c.capacity);
    }

    // Strongest-signal cell for a point. loads[i] is the attached count of
    // cells()[i]; pass an empty span for a zero-load evaluation. Signal ties
    // resolve to the lowest cell id.
    AttachResult attach(double x_m, double y_m,
                        std::span<const std::int32_t> loads = {}) const {
        if (!loads.empty() && loads.size() != cells_.size())
            throw std::invalid_argument("loads size does not match cell count");
        static thread_local std::vector<double> d2_scratch_;
        d2_scratch_.resize(cells_.size());
        double d2_min = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < cells_.size(); ++i) {
            const double dx = x_m - cells_[i].x_m;
            const double dy = y_m - cells_[i].y_m;
            d2_scratch_[i] = dx * dx + dy * dy;
            d2_min = std::min(d2_min, d2_scratch_[i]);
        }
        // A fully loaded cell keeps a (1 - beta) share of its raw signal, so
        // any winner must lie within (d0 + d_min) / (1 - beta) - d0 of the
        // point. When beta >= 1 the bound is useless and every cell is tried.
        double cutoff2 = std::numeric_limits<double>::infinity();
        if (beta_ < 1.0) {
            const double cutoff = (d0_m_ + std::sqrt(d2_min)) / (1.0 - beta_) - d0_m_;
            cutoff2 = cutoff * cutoff;
        }
        AttachResult best;
        best.signal = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < cells_.size(); ++i) {
            if (d2_scratch_[i] > cutoff2) continue;
            const double lf =
                loads.empty() ? 0.0 : load_fraction(static_cast<std::int32_t>(i), loads[i]);
            const double s = signal(std::sqrt(d2_scratch_[i]), lf);
            if (s > best.signal) {
                best.signal = s;
                best.index = static_cast<std::int32_t>(i);
            }
        }
        return best;
    }

    // Upper bound on the distance from any point in bounds to its nearest
    // cell, via grid sampling plus half a grid diagonal of slack.
    double cover_radius(std::size_t grid_points = 257) const {
        grid_points = std::max<std::size_t>(grid_points, 2);
        const double step_x = bounds_.width() / static_cast<double>(grid_points - 1);
        const double step_y = bounds_.height() / static_cast<double>(grid_points - 1);
        double worst2 = 0.0;
        for (std::size_t gy = 0; gy < grid_points; ++gy) {
            const double y = bounds_.min_y + step_y * static_cast<double>(gy);
            for (std::size_t gx = 0; gx < grid_points; ++gx) {
                const double x = bounds_.min_x + step_x * static_cast<double>(gx);
                double best2 = std::numeric_limits<double>::infinity();
                for (const Cell& c : cells_) {
                    const double dx = x - c.x_m;
                    const double dy = y - c.y_m;
                    best2 = std::min(best2, dx * dx + dy * dy);
                }
                worst2 = std::max(worst2, best2);
            }
        }
        return std::sqrt(worst2) + 0.5 * std::hypot(step_x, step_y);
    }

    void write_csv(const std::string& path) const {
        std::string out = "cell_id,x_m,y_m,capacity\n";
        for (const Cell& c : cells_) {
            out += std::to_string(c.id);
            out += ',';
            out += csv::format_double(c.x_m);
            out += ',';
            out += csv::format_double(c.y_m);
            out += ',';
            out += std::to_string(c.capacity);
            out += '\n';
        }
        csv::write_text(path, out);
    }

    // Loads cells from CSV. When bounds are not supplied, the tight bounding
    // box of the sites is used.
    static Topology read_csv(const std::string& path, double d0_m = 500.0,
                             double beta = 0.5, const Bounds* bounds = nullptr) {
        const auto lines = csv::read_lines(path);
        if (lines.empty()) throw std::runtime_error("empty topology file " + path);
        if (csv::split(lines[0]) !=
            std::vector<std::string>{"cell_id", "x_m", "y_m", "capacity"})
            throw std::runtime_error("bad topology header in " + path);
        std::vector<Cell> cells;
        for (std::size_t i = 1; i < lines.size(); ++i) {
            const auto fields = csv::split(lines[i]);
            if (fields.size() != 4)
                throw std::runtime_error("bad topology row in " + path + ": " + lines[i]);
            Cell c;
            c.id = static_cast<std::int32_t>(csv::parse_int(fields[0], "cell_id"));
            c.x_m = csv::parse_double(fields[1], "x_m");
            c.y_m = csv::parse_double(fields[2], "y_m");
            c.capacity = static_cast<std::int32_t>(csv::parse_int(fields[3], "capacity"));
            cells.push_back(c);
        }
        Bounds b;
        if (bounds) {
            b = *bounds;
        } else {
            b.min_x = b.min_y = std::numeric_limits<double>::infinity();
            b.max_x = b.max_y = -std::numeric_limits<double>::infinity();
            for (const Cell& c : cells) {
                b.min_x = std::min(b.min_x, c.x_m);
                b.max_x = std::max(b.max_x, c.x_m);
                b.min_y = std::min(b.min_y, c.y_m);
                b.max_y = std::max(b.max_y, c.y_m);
            }
            // Degenerate boxes (single site, collinear sites) get padding so
            // the bounds stay usable for mobility.
            if (!(b.max_x > b.min_x)) b.max_x = b.min_x + 1.0;
            if (!(b.max_y > b.min_y)) b.max_y = b.min_y + 1.0;
        }
        return Topology(std::move(cells), b, d0_m, beta);
    }

private:
    void build_neighbors() {
        neighbors_.assign(cells_.size(), {-1, -1, -1, -1});
        std::vector<std::pair<double, std::int32_t>> order;
        for (std::size_t i = 0; i < cells_.size(); ++i) {
            order.clear();
            for (std::size_t j = 0; j < cells_.size(); ++j) {
                if (j == i) continue;
                const double dx = cells_[i].x_m - cells_[j].x_m;
                const double dy = cells_[i].y_m - cells_[j].y_m;
                order.emplace_back(dx * dx + dy * dy, cells_[j].id);
            }
            const std::size_t take = std::min<std::size_t>(4, order.size());
            std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take),
                              order.end());
            for (std::size_t k = 0; k < take; ++k) neighbors_[i][k] = order[k].second;
        }
    }

    std::vector<Cell> cells_;
    Bounds bounds_;
    double d0_m_;
    double beta_;
    std::vector<std::array<std::int32_t, 4>> neighbors_;
};

}  // namespace mobsim
