#include <catch2/catch_amalgamated.hpp>

#include <unordered_set>

#include "mobsim/attack.hpp"
#include "mobsim/simulate.hpp"
#include "support/oracles.hpp"

using namespace mobsim;

namespace {

std::vector<PopulationSpec> small_mix(std::size_t count) {
    std::vector<PopulationSpec> pops(3);
    pops[0].name = population::kWp;
    pops[1].name = population::kRwp;
    pops[2].name = population::kGm;
    for (auto& p : pops) p.count = count;
    return pops;
}

Topology small_topo(std::uint64_t seed = 1) {
    Rng rng(seed);
    return Topology::generate(25, Bounds{0, 0, 5000, 5000}, 100, rng);
}

}  // namespace

TEST_CASE("engine emits canonical traces with an initial attachment") {
    const Topology topo = small_topo();
    const auto result = run_legit(topo, small_mix(4), 2 * 1440, 99);
    REQUIRE(result.dataset.traces.size() == 12);
    for (std::size_t i = 0; i < result.dataset.traces.size(); ++i) {
        const auto& t = result.dataset.traces[i];
        REQUIRE_FALSE(t.records.empty());
        CHECK(t.records.front().t_min == 0);
        for (std::size_t r = 1; r < t.records.size(); ++r) {
            REQUIRE(t.records[r].t_min > t.records[r - 1].t_min);
            REQUIRE(t.records[r].cell_id != t.records[r - 1].cell_id);
        }
        if (i > 0) CHECK(t.imsi > result.dataset.traces[i - 1].imsi);
        CHECK(result.dataset.labels.at(t.imsi) == truth::kLegit);
    }
}

TEST_CASE("per-population event totals add up") {
    const Topology topo = small_topo();
    const auto result = run_legit(topo, small_mix(3), 1440, 5);
    std::size_t sum = 0;
    for (const auto& [pop, n] : result.stats.events_per_population) sum += n;
    CHECK(sum == result.dataset.total_events());
    CHECK(result.stats.events_per_population.size() == 3);
    CHECK(result.stats.max_load_fraction >= 0.0);
    CHECK(result.stats.max_model_speed_m_per_min >= 500.0);  // the commuter
}

TEST_CASE("equal seeds reproduce the dataset exactly") {
    const Topology topo = small_topo();
    const auto a = run_legit(topo, small_mix(3), 1440, 7);
    const auto b = run_legit(topo, small_mix(3), 1440, 7);
    REQUIRE(a.dataset.traces.size() == b.dataset.traces.size());
    for (std::size_t i = 0; i < a.dataset.traces.size(); ++i) {
        const auto& ta = a.dataset.traces[i];
        const auto& tb = b.dataset.traces[i];
        REQUIRE(ta.imsi == tb.imsi);
        REQUIRE(ta.records.size() == tb.records.size());
        for (std::size_t r = 0; r < ta.records.size(); ++r) {
            REQUIRE(ta.records[r].t_min == tb.records[r].t_min);
            REQUIRE(ta.records[r].cell_id == tb.records[r].cell_id);
            REQUIRE(ta.records[r].signal == tb.records[r].signal);
        }
    }
}

TEST_CASE("thread count does not change the result") {
    const Topology topo = small_topo();
    const auto a = run_legit(topo, small_mix(5), 1440, 13, 1);
    const auto b = run_legit(topo, small_mix(5), 1440, 13, 4);
    REQUIRE(a.dataset.traces.size() == b.dataset.traces.size());
    for (std::size_t i = 0; i < a.dataset.traces.size(); ++i) {
        const auto& ta = a.dataset.traces[i];
        const auto& tb = b.dataset.traces[i];
        REQUIRE(ta.imsi == tb.imsi);
        REQUIRE(ta.records.size() == tb.records.size());
        for (std::size_t r = 0; r < ta.records.size(); ++r)
            REQUIRE(ta.records[r].signal == tb.records[r].signal);
    }
    CHECK(a.stats.max_load_fraction == b.stats.max_load_fraction);
}

TEST_CASE("different seeds give different traffic") {
    const Topology topo = small_topo();
    const auto a = run_legit(topo, small_mix(3), 1440, 1);
    const auto b = run_legit(topo, small_mix(3), 1440, 2);
    bool any_difference = a.dataset.total_events() != b.dataset.total_events();
    if (!any_difference) {
        for (std::size_t i = 0; i < a.dataset.traces.size() && !any_difference; ++i)
            any_difference = a.dataset.traces[i].imsi != b.dataset.traces[i].imsi ||
                             a.dataset.traces[i].records.front().cell_id !=
                                 b.dataset.traces[i].records.front().cell_id;
    }
    CHECK(any_difference);
}

TEST_CASE("legitimate traces pass the physics scan") {
    const Topology topo = small_topo(42);
    const auto result = run_legit(topo, small_mix(4), 1440, 21);
    const double v_max = result.stats.max_model_speed_m_per_min;
    const double slack =
        endpoint_slack_m(topo, result.stats.max_load_fraction, topo.cover_radius());
    const auto legit_scan = scan_physics(result.dataset, topo, v_max, slack);
    CHECK(legit_scan.scanned == 12);
    CHECK(legit_scan.flagged.empty());
}

TEST_CASE("jump traces across a far cell pair fail the physics scan") {
    // 9 km between the assigned cells; 500 m/min over a 5 min dwell plus
    // generous endpoint slack cannot cover it.
    const Topology topo({{0, 0, 0, 10}, {1, 9000, 0, 10}, {2, 4000, 300, 10}},
                        Bounds{0, -100, 9100, 400});
    JumpAttackConfig jc;
    jc.n_ues = 2;
    jc.k = 2;
    jc.cell_assignment = {{0, 1}};
    Rng rng(5);
    Dataset adv;
    adv.horizon_min = 1440;
    adv.traces = jump_attack_traces(jc, topo, 1440, rng);
    for (const auto& t : adv.traces) adv.labels[t.imsi] = truth::kTuple;
    adv.sort_canonical();
    const auto scan = scan_physics(adv, topo, 500.0, 1000.0);
    CHECK(scan.flagged.size() == adv.traces.size());
}

TEST_CASE("engine rejects unknown population names") {
    const Topology topo = small_topo();
    std::vector<PopulationSpec> pops(1);
    pops[0].name = "teleporter";
    pops[0].count = 1;
    CHECK_THROWS(run_legit(topo, pops, 100, 1));
}
