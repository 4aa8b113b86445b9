#pragma once

// Attachment traces and their on-disk formats.
//
// A trace records one UE's serving cell over time as change points: an entry
// at minute 0 and one per handover. Traces serialize to JSON Lines, with
// sidecar CSVs for truth labels and population tags. The physics scanner
// flags traces whose consecutive attachments are too far apart to reach at
// legitimate speed.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "mobsim/csv.hpp"
#include "mobsim/topology.hpp"

namespace mobsim {

namespace truth {
inline constexpr const char* kLegit = "legit";
inline constexpr const char* kTuple = "tuple";
inline constexpr const char* kQuintuple = "quintuple";
inline constexpr const char* kDecuple = "decuple";
inline constexpr const char* kGmaps = "gmaps";
}  // namespace truth

inline std::string imsi_to_hex(std::uint32_t imsi) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%08x", imsi);
    return std::string(buf);
}

inline std::uint32_t hex_to_imsi(std::string_view s) {
    if (s.size() != 8) throw std::runtime_error("imsi must be 8 hex digits: '" + std::string(s) + "'");
    std::uint32_t v = 0;
    for (char ch : s) {
        v <<= 4;
        if (ch >= '0' && ch <= '9') v |= static_cast<std::uint32_t>(ch - '0');
        else if (ch >= 'a' && ch <= 'f') v |= static_cast<std::uint32_t>(ch - 'a' + 10);
        else throw std::runtime_error("imsi must be lowercase hex: '" + std::string(s) + "'");
    }
    return v;
}

struct AttachmentRecord {
    std::int64_t t_min = 0;
    std::int32_t cell_id = -1;
    double signal = 0.0;
};

struct RawTrace {
    std::uint32_t imsi = 0;
    std::vector<AttachmentRecord> records;
};

// One attachment with its dwell time. timeslot_min is the minutes until the
// next attachment change; the last event is clipped to the horizon.
struct AttachmentEvent {
    std::uint32_t imsi = 0;
    std::int64_t t_min = 0;
    std::int32_t cell_id = -1;
    double signal = 0.0;
    std::int64_t timeslot_min = 0;
};

inline std::vector<AttachmentEvent> events_from_trace(const RawTrace& trace,
                                                      std::int64_t horizon_min) {
    std::vector<AttachmentEvent> events;
    events.reserve(trace.records.size());
    for (std::size_t i = 0; i < trace.records.size(); ++i) {
        const auto& r = trace.records[i];
        AttachmentEvent e;
        e.imsi = trace.imsi;
        e.t_min = r.t_min;
        e.cell_id = r.cell_id;
        e.signal = r.signal;
        // Dwell never extends past the observation horizon, even when a
        // hand-fed trace carries records beyond it.
        const std::int64_t next =
            i + 1 < trace.records.size()
                ? std::min(trace.records[i + 1].t_min, horizon_min)
                : horizon_min;
        e.timeslot_min = std::max<std::int64_t>(0, next - r.t_min);
        events.push_back(e);
    }
    return events;
}

struct Dataset {
    std::vector<RawTrace> traces;  // kept sorted by imsi
    std::unordered_map<std::uint32_t, std::string> labels;       // imsi -> truth label
    std::unordered_map<std::uint32_t, std::string> populations;  // imsi -> generator tag
    std::int64_t horizon_min = 0;

    void sort_canonical() {
        std::sort(traces.begin(), traces.end(),
                  [](const RawTrace& a, const RawTrace& b) { return a.imsi < b.imsi; });
        for (std::size_t i = 1; i < traces.size(); ++i)
            if (traces[i].imsi == traces[i - 1].imsi)
                throw std::runtime_error("duplicate imsi " + imsi_to_hex(traces[i].imsi));
    }

    void merge(Dataset other) {
        for (auto& t : other.traces) traces.push_back(std::move(t));
        for (auto& [imsi, label] : other.labels) {
            if (auto it = labels.find(imsi); it != labels.end() && it->second != label)
                throw std::runtime_error("conflicting labels for " + imsi_to_hex(imsi));
            labels[imsi] = label;
        }
        for (auto& [imsi, pop] : other.populations) populations[imsi] = pop;
        horizon_min = std::max(horizon_min, other.horizon_min);
        sort_canonical();
    }

    const RawTrace* find(std::uint32_t imsi) const {
        const auto it = std::lower_bound(
            traces.begin(), traces.end(), imsi,
            [](const RawTrace& t, std::uint32_t v) { return t.imsi < v; });
        if (it == traces.end() || it->imsi != imsi) return nullptr;
        return &*it;
    }

    std::size_t total_events() const {
        std::size_t n = 0;
        for (const auto& t : traces) n += t.records.size();
        return n;
    }
};

// --- JSON Lines trace format ----------------------------------------------
//
// One object per line:
//   {"imsi":"09ccc864","enodeb_path":{"0":163,"185":348},
//    "signal_strength":{"0":0.189,"185":0.186}}
// Map keys are minute timestamps as decimal strings, written in time order.

inline void write_traces_jsonl(const std::vector<RawTrace>& traces,
                               const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (const auto& trace : traces) {
        nlohmann::ordered_json j;
        j["imsi"] = imsi_to_hex(trace.imsi);
        nlohmann::ordered_json path_map = nlohmann::ordered_json::object();
        nlohmann::ordered_json sig_map = nlohmann::ordered_json::object();
        for (const auto& r : trace.records) {
            const std::string key = std::to_string(r.t_min);
            path_map[key] = r.cell_id;
            sig_map[key] = r.signal;
        }
        j["enodeb_path"] = std::move(path_map);
        j["signal_strength"] = std::move(sig_map);
        out << j.dump() << '\n';
    }
    if (!out) throw std::runtime_error("write failed for " + path);
}

inline std::vector<RawTrace> read_traces_jsonl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<RawTrace> traces;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const std::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": bad JSON: " + e.what());
        }
        RawTrace trace;
        trace.imsi = hex_to_imsi(j.at("imsi").get<std::string>());
        const auto& path_map = j.at("enodeb_path");
        const auto& sig_map = j.at("signal_strength");
        if (path_map.size() != sig_map.size())
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": enodeb_path and signal_strength disagree");
        for (const auto& [key, value] : path_map.items()) {
            AttachmentRecord r;
            r.t_min = csv::parse_int(key, "timestamp");
            r.cell_id = value.get<std::int32_t>();
            if (!sig_map.contains(key))
                throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                         ": missing signal for t=" + key);
            r.signal = sig_map.at(key).get<double>();
            trace.records.push_back(r);
        }
        std::sort(trace.records.begin(), trace.records.end(),
                  [](const AttachmentRecord& a, const AttachmentRecord& b) {
                      return a.t_min < b.t_min;
                  });
        for (std::size_t i = 1; i < trace.records.size(); ++i)
            if (trace.records[i].t_min == trace.records[i - 1].t_min)
                throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                         ": duplicate timestamp");
        traces.push_back(std::move(trace));
    }
    return traces;
}

// --- Label and population sidecars ------------------------------------------

inline void write_label_csv(const std::unordered_map<std::uint32_t, std::string>& map,
                            const std::string& path, const std::string& value_column) {
    std::vector<std::uint32_t> keys;
    keys.reserve(map.size());
    for (const auto& [imsi, _] : map) keys.push_back(imsi);
    std::sort(keys.begin(), keys.end());
    std::string out = "imsi," + value_column + "\n";
    for (const std::uint32_t imsi : keys) {
        out += imsi_to_hex(imsi);
        out += ',';
        out += map.at(imsi);
        out += '\n';
    }
    csv::write_text(path, out);
}

inline std::unordered_map<std::uint32_t, std::string> read_label_csv(
    const std::string& path, const std::string& value_column) {
    const auto lines = csv::read_lines(path);
    if (lines.empty()) throw std::runtime_error("empty label file " + path);
    if (csv::split(lines[0]) != std::vector<std::string>{"imsi", value_column})
        throw std::runtime_error("bad header in " + path + " (want imsi," + value_column + ")");
    std::unordered_map<std::uint32_t, std::string> map;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto fields = csv::split(lines[i]);
        if (fields.size() != 2)
            throw std::runtime_error("bad row in " + path + ": " + lines[i]);
        const std::uint32_t imsi = hex_to_imsi(fields[0]);
        if (!map.emplace(imsi, fields[1]).second)
            throw std::runtime_error("duplicate imsi in " + path + ": " + fields[0]);
    }
    return map;
}

inline void write_labels_csv(const Dataset& ds, const std::string& path) {
    write_label_csv(ds.labels, path, "label");
}

inline void write_populations_csv(const Dataset& ds, const std::string& path) {
    write_label_csv(ds.populations, path, "population");
}

// --- Physics plausibility ----------------------------------------------------
//
// Two consecutive attachments at sites c1, c2 spaced dt minutes apart are
// reachable by a legitimate UE only if
//   dist(c1, c2) <= v_max * dt + 2 * endpoint_slack,
// where endpoint_slack bounds how far a UE can sit from its serving site.

// Upper bound on UE-to-serving-site distance given the cover radius and the
// worst load fraction any cell reaches. Follows from attach maximizing the
// signal: the serving site cannot be much farther than the nearest site.
inline double endpoint_slack_m(const Topology& topo, double max_load_fraction,
                               double cover_radius_m) {
    const double denom = 1.0 - topo.beta() * std::clamp(max_load_fraction, 0.0, 1.0);
    if (denom <= 0.0) return topo.bounds().diagonal();
    return (topo.d0_m() + cover_radius_m) / denom - topo.d0_m();
}

inline bool trace_violates_physics(const RawTrace& trace, const Topology& topo,
                                   double v_max_m_per_min, double endpoint_slack) {
    for (std::size_t i = 1; i < trace.records.size(); ++i) {
        const auto& a = topo.cells()[static_cast<std::size_t>(
            topo.index_of(trace.records[i - 1].cell_id))];
        const auto& b = topo.cells()[static_cast<std::size_t>(
            topo.index_of(trace.records[i].cell_id))];
        const double dist = std::hypot(a.x_m - b.x_m, a.y_m - b.y_m);
        const double dt =
            static_cast<double>(trace.records[i].t_min - trace.records[i - 1].t_min);
        if (dist > v_max_m_per_min * dt + 2.0 * endpoint_slack) return true;
    }
    return false;
}

struct PhysicsScan {
    std::vector<std::uint32_t> flagged;
    std::size_t scanned = 0;
};

inline PhysicsScan scan_physics(const Dataset& ds, const Topology& topo,
                                double v_max_m_per_min, double endpoint_slack) {
    PhysicsScan scan;
    scan.scanned = ds.traces.size();
    for (const auto& trace : ds.traces)
        if (trace_violates_physics(trace, topo, v_max_m_per_min, endpoint_slack))
            scan.flagged.push_back(trace.imsi);
    return scan;
}

}  // namespace mobsim
