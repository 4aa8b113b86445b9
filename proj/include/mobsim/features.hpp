#pragma once

// Event-based feature engineering: turns IMSI-keyed traces into per-event
// rows carrying attachment history, daily rhythm counts, and topology
// context, plus the day-based train/test split.
//
// Enrichment is per-IMSI pure: a row depends only on its own IMSI's events,
// the topology, and the binning, never on other IMSIs.

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "mobsim/csv.hpp"
#include "mobsim/parallel.hpp"
#include "mobsim/topology.hpp"
#include "mobsim/trace.hpp"

namespace mobsim {

// Dwell-time bins. upper_edges are inclusive upper bounds in minutes; values
// above the last edge fall into one final open bin.
struct TimeslotBinning {
    std::vector<std::int64_t> upper_edges{2, 5, 15, 30, 60, 180};

    void validate() const {
        if (upper_edges.empty()) throw std::invalid_argument("binning needs at least one edge");
        if (upper_edges.front() < 1)
            throw std::invalid_argument("first bin edge must be >= 1");
        for (std::size_t i = 1; i < upper_edges.size(); ++i)
            if (upper_edges[i] <= upper_edges[i - 1])
                throw std::invalid_argument("bin edges must be strictly increasing");
    }

    std::size_t n_bins() const { return upper_edges.size() + 1; }

    std::int32_t bin_of(std::int64_t timeslot_min) const {
        for (std::size_t i = 0; i < upper_edges.size(); ++i)
            if (timeslot_min <= upper_edges[i]) return static_cast<std::int32_t>(i);
        return static_cast<std::int32_t>(upper_edges.size());
    }
};

// 0 early_morn [0,360), 1 morning [360,660), 2 noon [660,900),
// 3 evening [900,1200), 4 night [1200,1440).
inline std::int32_t time_of_day_bin(std::int64_t minute_of_day) {
    if (minute_of_day < 0 || minute_of_day >= 1440)
        throw std::out_of_range("minute of day outside [0, 1440)");
    if (minute_of_day < 360) return 0;
    if (minute_of_day < 660) return 1;
    if (minute_of_day < 900) return 2;
    if (minute_of_day < 1200) return 3;
    return 4;
}

struct EnrichedEvent {
    std::array<std::int32_t, 4> enode{-1, -1, -1, -1};  // previous cells, newest first
    std::array<std::int32_t, 4> time{-1, -1, -1, -1};   // their minutes of day
    std::int32_t target_time = 0;                       // this event's minute of day
    double sig_st = 0.0;
    std::uint32_t imsi = 0;
    std::int32_t home_enb = -1;
    std::array<std::int32_t, 5> tod_counts{0, 0, 0, 0, 0};  // this IMSI, this day
    std::array<std::int32_t, 4> neigh{-1, -1, -1, -1};      // adjacency of current cell
    std::int32_t label_location = -1;
    std::int32_t label_timeslot_bin = -1;
    std::int32_t day = 0;
    bool train_split = true;
    std::string truth_label;

    std::int64_t timestamp() const {
        return static_cast<std::int64_t>(day) * 1440 + target_time;
    }
};

inline constexpr std::array<const char*, 21> kFeatureNames = {
    "enode_1", "enode_2", "enode_3", "enode_4", "time_1",   "time_2",  "time_3",
    "time_4",  "target_time", "sig_st", "imsi", "home_enb", "early_morn",
    "morning", "noon",    "evening", "night",   "neigh_1",  "neigh_2", "neigh_3",
    "neigh_4"};

inline double feature_value(const EnrichedEvent& e, std::size_t column) {
    switch (column) {
        case 0: case 1: case 2: case 3:
            return e.enode[column];
        case 4: case 5: case 6: case 7:
            return e.time[column - 4];
        case 8: return e.target_time;
        case 9: return e.sig_st;
        case 10: return static_cast<double>(e.imsi);
        case 11: return e.home_enb;
        case 12: case 13: case 14: case 15: case 16:
            return e.tod_counts[column - 12];
        case 17: case 18: case 19: case 20:
            return e.neigh[column - 17];
        default: throw std::out_of_range("feature column out of range");
    }
}

inline std::uint64_t feature_schema_hash() {
    std::string joined;
    for (const char* name : kFeatureNames) {
        joined += name;
        joined += ',';
    }
    return fnv1a64(joined);
}

struct FeatureMatrix {
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<double> values;  // row-major

    double at(std::size_t row, std::size_t col) const {
        return values[row * n_cols + col];
    }
    const double* row(std::size_t r) const { return values.data() + r * n_cols; }
};

inline FeatureMatrix make_feature_matrix(const std::vector<EnrichedEvent>& rows) {
    FeatureMatrix m;
    m.n_rows = rows.size();
    m.n_cols = kFeatureNames.size();
    m.values.resize(m.n_rows * m.n_cols);
    for (std::size_t r = 0; r < m.n_rows; ++r)
        for (std::size_t c = 0; c < m.n_cols; ++c)
            m.values[r * m.n_cols + c] = feature_value(rows[r], c);
    return m;
}

inline std::vector<AttachmentEvent> to_events(const RawTrace& trace,
                                              std::int64_t horizon_min) {
    return events_from_trace(trace, horizon_min);
}

// Enriches one IMSI's events. boundary_min bounds the window used for
// home_enb so no test-day information reaches a training feature.
inline std::vector<EnrichedEvent> enrich_trace(
    const RawTrace& trace, const Topology& topo, const TimeslotBinning& binning,
    std::int64_t horizon_min, std::int64_t boundary_min, const std::string& truth_label) {
    const auto events = events_from_trace(trace, horizon_min);

    // home_enb: cell holding the largest attached duration inside the
    // training window; duration of straddling events is clipped at the
    // boundary. Ties go to the lower cell id.
    std::map<std::int32_t, std::int64_t> durations;
    for (const auto& e : events) {
        const std::int64_t end = std::min(e.t_min + e.timeslot_min, boundary_min);
        if (e.t_min < boundary_min && end > e.t_min) durations[e.cell_id] += end - e.t_min;
    }
    std::int32_t home = -1;
    std::int64_t best = 0;
    for (const auto& [cell, dur] : durations)
        if (dur > best) {
            best = dur;
            home = cell;
        }

    std::map<std::int32_t, std::array<std::int32_t, 5>> day_counts;
    for (const auto& e : events) {
        const auto day = static_cast<std::int32_t>(e.t_min / 1440);
        auto& counts = day_counts.try_emplace(day).first->second;
        ++counts[static_cast<std::size_t>(time_of_day_bin(e.t_min % 1440))];
    }

    std::vector<EnrichedEvent> rows;
    rows.reserve(events.size());
    for (std::size_t i = 0; i < events.size(); ++i) {
        const auto& e = events[i];
        EnrichedEvent row;
        for (std::size_t h = 0; h < 4; ++h) {
            if (i > h) {
                const auto& prev = events[i - 1 - h];
                row.enode[h] = prev.cell_id;
                row.time[h] = static_cast<std::int32_t>(prev.t_min % 1440);
            }
        }
        row.target_time = static_cast<std::int32_t>(e.t_min % 1440);
        row.sig_st = e.signal;
        row.imsi = e.imsi;
        row.home_enb = home;
        row.day = static_cast<std::int32_t>(e.t_min / 1440);
        row.tod_counts = day_counts.at(row.day);
        row.neigh = topo.neighbors_of(e.cell_id);
        row.label_location = e.cell_id;
        row.label_timeslot_bin = binning.bin_of(e.timeslot_min);
        row.train_split = e.t_min < boundary_min;
        row.truth_label = truth_label;
        rows.push_back(std::move(row));
    }
    return rows;
}

// Enriches every trace in the dataset; output is sorted by IMSI then
// timestamp. Per-trace work is independent, so traces are processed in
// parallel ranges and concatenated in canonical order.
inline std::vector<EnrichedEvent> enrich(const Dataset& ds, const Topology& topo,
                                         const TimeslotBinning& binning,
                                         std::int64_t boundary_day,
                                         unsigned n_threads = 1) {
    binning.validate();
    const std::int64_t boundary_min = boundary_day * 1440;
    if (boundary_min <= 0 || boundary_min >= ds.horizon_min)
        throw std::invalid_argument("split boundary outside horizon");
    std::vector<std::vector<EnrichedEvent>> per_trace(ds.traces.size());
    for_ranges(ds.traces.size(), n_threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const auto& trace = ds.traces[i];
            const auto label_it = ds.labels.find(trace.imsi);
            if (label_it == ds.labels.end())
                throw std::runtime_error("missing truth label for " + imsi_to_hex(trace.imsi));
            per_trace[i] = enrich_trace(trace, topo, binning, ds.horizon_min,
                                        boundary_min, label_it->second);
        }
    });
    std::vector<EnrichedEvent> rows;
    rows.reserve(ds.total_events());
    for (auto& chunk : per_trace)
        for (auto& row : chunk) rows.push_back(std::move(row));
    return rows;
}

struct SplitCounts {
    std::size_t train = 0;
    std::size_t test = 0;
};

inline SplitCounts split_counts(const std::vector<EnrichedEvent>& rows) {
    SplitCounts c;
    for (const auto& r : rows) (r.train_split ? c.train : c.test)++;
    return c;
}

inline void require_both_sides(const std::vector<EnrichedEvent>& rows) {
    const SplitCounts c = split_counts(rows);
    if (c.train == 0) throw std::runtime_error("train split is empty");
    if (c.test == 0) throw std::runtime_error("test split is empty");
}

// --- Enriched CSV -------------------------------------------------------------

inline constexpr const char* kEnrichedHeader =
    "enode_1,enode_2,enode_3,enode_4,time_1,time_2,time_3,time_4,target_time,"
    "sig_st,imsi,home_enb,early_morn,morning,noon,evening,night,neigh_1,neigh_2,"
    "neigh_3,neigh_4,label_location,label_timeslot_bin,day,split,truth_label";

inline void write_enriched_csv(const std::vector<EnrichedEvent>& rows,
                               const std::string& path) {
    std::string out = kEnrichedHeader;
    out += '\n';
    for (const auto& r : rows) {
        for (std::size_t h = 0; h < 4; ++h) {
            out += std::to_string(r.enode[h]);
            out += ',';
        }
        for (std::size_t h = 0; h < 4; ++h) {
            out += std::to_string(r.time[h]);
            out += ',';
        }
        out += std::to_string(r.target_time);
        out += ',';
        out += csv::format_double(r.sig_st);
        out += ',';
        out += imsi_to_hex(r.imsi);
        out += ',';
        out += std::to_string(r.home_enb);
        out += ',';
        for (std::size_t b = 0; b < 5; ++b) {
            out += std::to_string(r.tod_counts[b]);
            out += ',';
        }
        for (std::size_t h = 0; h < 4; ++h) {
            out += std::to_string(r.neigh[h]);
            out += ',';
        }
        out += std::to_string(r.label_location);
        out += ',';
        out += std::to_string(r.label_timeslot_bin);
        out += ',';
        out += std::to_string(r.day);
        out += ',';
        out += r.train_split ? "train" : "test";
        out += ',';
        out += r.truth_label;
        out += '\n';
    }
    csv::write_text(path, out);
}

inline std::vector<EnrichedEvent> read_enriched_csv(const std::string& path) {
    const auto lines = csv::read_lines(path);
    if (lines.empty()) throw std::runtime_error("empty enriched file " + path);
    if (lines[0] != kEnrichedHeader)
        throw std::runtime_error("bad enriched header in " + path);
    std::vector<EnrichedEvent> rows;
    rows.reserve(lines.size() - 1);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto f = csv::split(lines[i]);
        if (f.size() != 26)
            throw std::runtime_error("bad enriched row in " + path + ": " + lines[i]);
        EnrichedEvent r;
        for (std::size_t h = 0; h < 4; ++h)
            r.enode[h] = static_cast<std::int32_t>(csv::parse_int(f[h], "enode"));
        for (std::size_t h = 0; h < 4; ++h)
            r.time[h] = static_cast<std::int32_t>(csv::parse_int(f[4 + h], "time"));
        r.target_time = static_cast<std::int32_t>(csv::parse_int(f[8], "target_time"));
        r.sig_st = csv::parse_double(f[9], "sig_st");
        r.imsi = hex_to_imsi(f[10]);
        r.home_enb = static_cast<std::int32_t>(csv::parse_int(f[11], "home_enb"));
        for (std::size_t b = 0; b < 5; ++b)
            r.tod_counts[b] = static_cast<std::int32_t>(csv::parse_int(f[12 + b], "tod_count"));
        for (std::size_t h = 0; h < 4; ++h)
            r.neigh[h] = static_cast<std::int32_t>(csv::parse_int(f[17 + h], "neigh"));
        r.label_location = static_cast<std::int32_t>(csv::parse_int(f[21], "label_location"));
        r.label_timeslot_bin =
            static_cast<std::int32_t>(csv::parse_int(f[22], "label_timeslot_bin"));
        r.day = static_cast<std::int32_t>(csv::parse_int(f[23], "day"));
        if (f[24] == "train") r.train_split = true;
        else if (f[24] == "test") r.train_split = false;
        else throw std::runtime_error("bad split value in " + path + ": " + f[24]);
        r.truth_label = f[25];
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace mobsim
