#pragma once

// Discrete-time engine: steps every legitimate UE minute-by-minute, attaches
// each to the strongest cell, and records attachment changes. Cell loads
// seen at tick t are the attachment counts of tick t-1, so one tick is a
// single deterministic pass with no fixed-point solve.

#include <algorithm>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "mobsim/mobility.hpp"
#include "mobsim/parallel.hpp"
#include "mobsim/rng.hpp"
#include "mobsim/topology.hpp"
#include "mobsim/trace.hpp"

namespace mobsim {

namespace population {
inline constexpr const char* kWp = "wp";
inline constexpr const char* kRwp = "rwp";
inline constexpr const char* kGm = "gm";
}  // namespace population

struct PopulationSpec {
    std::string name;  // one of population::k*
    std::size_t count = 0;
    WpParams wp;
    RwpParams rwp;
    GmParams gm;
};

struct EngineStats {
    double max_load_fraction = 0.0;
    double max_model_speed_m_per_min = 0.0;
    std::vector<std::pair<std::string, std::size_t>> events_per_population;
};

struct EngineResult {
    Dataset dataset;
    EngineStats stats;
};

namespace detail {

struct UeSlot {
    std::unique_ptr<MobilityModel> model;
    std::uint32_t imsi = 0;
    std::string population;
    std::int32_t cell_index = -1;  // index into topology cells
    std::vector<AttachmentRecord> records;
};

inline std::unique_ptr<MobilityModel> make_model(const PopulationSpec& spec,
                                                 const Bounds& bounds, Rng rng) {
    if (spec.name == population::kWp)
        return std::make_unique<WpModel>(spec.wp, bounds, rng);
    if (spec.name == population::kRwp)
        return std::make_unique<RwpModel>(spec.rwp, bounds, rng);
    if (spec.name == population::kGm)
        return std::make_unique<GmModel>(spec.gm, bounds, rng);
    throw std::invalid_argument("unknown population '" + spec.name + "'");
}

}  // namespace detail

// Simulates all legitimate populations over duration_min minutes. Each UE
// owns an RNG substream keyed by (population, index), and within a tick UEs
// are independent given the previous tick's loads, so the result does not
// depend on n_threads.
inline EngineResult run_legit(
    const Topology& topo, const std::vector<PopulationSpec>& populations,
    std::int64_t duration_min, std::uint64_t master_seed, unsigned n_threads = 1,
    std::unordered_set<std::uint32_t>* taken_imsis = nullptr) {
    if (duration_min < 1) throw std::invalid_argument("duration must be >= 1 minute");
    std::unordered_set<std::uint32_t> local_taken;
    auto& taken = taken_imsis ? *taken_imsis : local_taken;

    std::vector<detail::UeSlot> ues;
    EngineStats stats;
    for (const auto& spec : populations) {
        for (std::size_t i = 0; i < spec.count; ++i) {
            detail::UeSlot slot;
            slot.model = detail::make_model(spec, topo.bounds(),
                                            substream(master_seed, "ue/" + spec.name, i));
            Rng id_rng = substream(master_seed, "imsi/" + spec.name, i);
            for (;;) {
                const auto imsi = static_cast<std::uint32_t>(id_rng() >> 32);
                if (taken.insert(imsi).second) {
                    slot.imsi = imsi;
                    break;
                }
            }
            slot.population = spec.name;
            ues.push_back(std::move(slot));
        }
        if (spec.count > 0) {
            detail::UeSlot& probe = ues.back();
            stats.max_model_speed_m_per_min = std::max(
                stats.max_model_speed_m_per_min, probe.model->max_speed_m_per_min());
        }
    }

    std::vector<std::int32_t> loads_prev(topo.size(), 0);
    std::vector<std::int32_t> loads_next(topo.size(), 0);
    std::vector<std::int32_t> tick_cells(ues.size(), -1);

    for (std::int64_t t = 0; t < duration_min; ++t) {
        for_ranges(ues.size(), n_threads, [&](std::size_t begin, std::size_t end) {
            for (std::size_t u = begin; u < end; ++u) {
                const Vec2 pos = ues[u].model->advance(t);
                const AttachResult r = topo.attach(pos.x, pos.y, loads_prev);
                tick_cells[u] = r.index;
                if (r.index != ues[u].cell_index) {
                    ues[u].records.push_back(
                        {t, topo.cells()[static_cast<std::size_t>(r.index)].id, r.signal});
                    ues[u].cell_index = r.index;
                }
            }
        });
        std::fill(loads_next.begin(), loads_next.end(), 0);
        for (const std::int32_t c : tick_cells) ++loads_next[static_cast<std::size_t>(c)];
        for (std::size_t i = 0; i < loads_next.size(); ++i)
            stats.max_load_fraction =
                std::max(stats.max_load_fraction,
                         topo.load_fraction(static_cast<std::int32_t>(i), loads_next[i]));
        std::swap(loads_prev, loads_next);
    }

    EngineResult result;
    result.dataset.horizon_min = duration_min;
    for (const auto& spec : populations) {
        std::size_t events = 0;
        for (const auto& ue : ues)
            if (ue.population == spec.name) events += ue.records.size();
        stats.events_per_population.emplace_back(spec.name, events);
    }
    for (auto& ue : ues) {
        RawTrace trace;
        trace.imsi = ue.imsi;
        trace.records = std::move(ue.records);
        result.dataset.labels[ue.imsi] = truth::kLegit;
        result.dataset.populations[ue.imsi] = ue.population;
        result.dataset.traces.push_back(std::move(trace));
    }
    result.dataset.sort_canonical();
    result.stats = stats;
    return result;
}

}  // namespace mobsim
