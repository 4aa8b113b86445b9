#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "mobsim/features.hpp"
#include "mobsim/rng.hpp"
#include "support/oracles.hpp"

using namespace mobsim;

namespace {

// Five cells with hand-checkable adjacency.
Topology hand_topology() {
    std::vector<Cell> cells{
        {0, 0.0, 0.0, 10},    {1, 1000.0, 0.0, 10}, {2, 2500.0, 0.0, 10},
        {3, 0.0, 1200.0, 10}, {4, 4000.0, 0.0, 10},
    };
    return Topology(std::move(cells), Bounds{-100.0, -100.0, 5000.0, 2000.0});
}

RawTrace hand_trace() {
    RawTrace t;
    t.imsi = 7;
    t.records = {
        {0, 0, 0.9}, {100, 1, 0.8},   {400, 0, 0.7},
        {1430, 2, 0.6}, {1500, 1, 0.55}, {2000, 4, 0.5},
    };
    return t;
}

Dataset single_trace_dataset(RawTrace trace, std::int64_t horizon) {
    Dataset ds;
    ds.labels[trace.imsi] = "legit";
    ds.populations[trace.imsi] = "hand";
    ds.traces.push_back(std::move(trace));
    ds.horizon_min = horizon;
    return ds;
}

}  // namespace

TEST_CASE("timeslot bins follow the inclusive upper edges") {
    const TimeslotBinning b;
    b.validate();
    CHECK(b.n_bins() == 7);
    const std::pair<std::int64_t, std::int32_t> table[] = {
        {0, 0},  {1, 0},  {2, 0},  {3, 1},   {5, 1},   {6, 2},      {15, 2},
        {16, 3}, {30, 3}, {31, 4}, {60, 4},  {61, 5},  {180, 5},    {181, 6},
        {999, 6}, {100000, 6},
    };
    for (const auto& [slot, bin] : table) {
        INFO("timeslot " << slot);
        CHECK(b.bin_of(slot) == bin);
    }
}

TEST_CASE("timeslot binning validation") {
    TimeslotBinning b;
    b.upper_edges = {};
    CHECK_THROWS_AS(b.validate(), std::invalid_argument);
    b.upper_edges = {0, 5};
    CHECK_THROWS_AS(b.validate(), std::invalid_argument);
    b.upper_edges = {2, 2};
    CHECK_THROWS_AS(b.validate(), std::invalid_argument);
    b.upper_edges = {5, 2};
    CHECK_THROWS_AS(b.validate(), std::invalid_argument);
    b.upper_edges = {10};
    b.validate();
    CHECK(b.n_bins() == 2);
    CHECK(b.bin_of(10) == 0);
    CHECK(b.bin_of(11) == 1);
}

TEST_CASE("time of day bins split at 360, 660, 900, 1200") {
    CHECK(time_of_day_bin(0) == 0);
    CHECK(time_of_day_bin(359) == 0);
    CHECK(time_of_day_bin(360) == 1);
    CHECK(time_of_day_bin(659) == 1);
    CHECK(time_of_day_bin(660) == 2);
    CHECK(time_of_day_bin(899) == 2);
    CHECK(time_of_day_bin(900) == 3);
    CHECK(time_of_day_bin(1199) == 3);
    CHECK(time_of_day_bin(1200) == 4);
    CHECK(time_of_day_bin(1439) == 4);
    CHECK_THROWS_AS(time_of_day_bin(-1), std::out_of_range);
    CHECK_THROWS_AS(time_of_day_bin(1440), std::out_of_range);
}

TEST_CASE("hand-computed enrichment of a two-day trace") {
    const Topology topo = hand_topology();
    const Dataset ds = single_trace_dataset(hand_trace(), 2880);
    const auto rows = enrich(ds, topo, TimeslotBinning{}, 1);
    REQUIRE(rows.size() == 6);

    // Every row shares the per-trace context.
    for (const auto& r : rows) {
        CHECK(r.imsi == 7);
        CHECK(r.home_enb == 0);  // cell 0 holds 1140 of the first 1440 minutes
        CHECK(r.truth_label == "legit");
    }

    const std::array<std::int32_t, 4> none{-1, -1, -1, -1};
    CHECK(rows[0].enode == none);
    CHECK(rows[0].time == none);
    CHECK(rows[0].target_time == 0);
    CHECK(rows[0].sig_st == 0.9);
    CHECK(rows[0].neigh == std::array<std::int32_t, 4>{1, 3, 2, 4});
    CHECK(rows[0].label_location == 0);
    CHECK(rows[0].label_timeslot_bin == 5);  // dwell 100
    CHECK(rows[0].day == 0);
    CHECK(rows[0].train_split);
    CHECK(rows[0].tod_counts == std::array<std::int32_t, 5>{2, 1, 0, 0, 1});

    CHECK(rows[1].enode == std::array<std::int32_t, 4>{0, -1, -1, -1});
    CHECK(rows[1].time == std::array<std::int32_t, 4>{0, -1, -1, -1});
    CHECK(rows[1].label_timeslot_bin == 6);  // dwell 300
    CHECK(rows[1].neigh == std::array<std::int32_t, 4>{0, 2, 3, 4});

    CHECK(rows[2].enode == std::array<std::int32_t, 4>{1, 0, -1, -1});
    CHECK(rows[2].time == std::array<std::int32_t, 4>{100, 0, -1, -1});

    // Straddles the split boundary but starts inside it.
    CHECK(rows[3].enode == std::array<std::int32_t, 4>{0, 1, 0, -1});
    CHECK(rows[3].time == std::array<std::int32_t, 4>{400, 100, 0, -1});
    CHECK(rows[3].target_time == 1430);
    CHECK(rows[3].label_location == 2);
    CHECK(rows[3].label_timeslot_bin == 5);  // dwell 70
    CHECK(rows[3].day == 0);
    CHECK(rows[3].train_split);

    CHECK(rows[4].enode == std::array<std::int32_t, 4>{2, 0, 1, 0});
    CHECK(rows[4].time == std::array<std::int32_t, 4>{1430, 400, 100, 0});
    CHECK(rows[4].target_time == 60);
    CHECK(rows[4].day == 1);
    CHECK_FALSE(rows[4].train_split);
    CHECK(rows[4].tod_counts == std::array<std::int32_t, 5>{1, 1, 0, 0, 0});
    CHECK(rows[4].timestamp() == 1500);

    CHECK(rows[5].enode == std::array<std::int32_t, 4>{1, 2, 0, 1});
    CHECK(rows[5].time == std::array<std::int32_t, 4>{60, 1430, 400, 100});
    CHECK(rows[5].target_time == 560);
    CHECK(rows[5].label_location == 4);
    CHECK(rows[5].label_timeslot_bin == 6);  // dwell runs to the horizon
    CHECK(rows[5].neigh == std::array<std::int32_t, 4>{2, 1, 0, 3});
    CHECK_FALSE(rows[5].train_split);
}

TEST_CASE("home cell ties break toward the lower id") {
    RawTrace t;
    t.imsi = 9;
    // Cells 0 and 1 both hold exactly 700 training minutes.
    t.records = {{0, 1, 0.5}, {700, 0, 0.5}, {1400, 2, 0.5}};
    const Topology topo = hand_topology();
    const Dataset ds = single_trace_dataset(t, 2880);
    const auto rows = enrich(ds, topo, TimeslotBinning{}, 1);
    REQUIRE_FALSE(rows.empty());
    CHECK(rows[0].home_enb == 0);
    CHECK(oracle::home_cell(events_from_trace(ds.traces[0], 2880), 1440) == 0);
}

TEST_CASE("history windows and day counts match the definition on a long trace") {
    const Topology topo = hand_topology();
    RawTrace t;
    t.imsi = 0x12345678u;
    Rng rng(42);
    std::int64_t now = 0;
    std::int32_t cell = 0;
    while (now < 4 * 1440) {
        t.records.push_back({now, cell, rng.uniform(0.2, 0.9)});
        now += rng.range(1, 240);
        cell = static_cast<std::int32_t>((cell + rng.range(1, 4)) % 5);
    }
    const std::int64_t horizon = 4 * 1440;
    const Dataset ds = single_trace_dataset(t, horizon);
    const auto events = events_from_trace(ds.traces[0], horizon);
    const auto rows = enrich(ds, topo, TimeslotBinning{}, 2);
    REQUIRE(rows.size() == events.size());

    for (std::size_t i = 0; i < rows.size(); ++i) {
        INFO("event " << i);
        const auto h = oracle::history_at(events, i);
        CHECK(rows[i].enode == h.cells);
        for (std::size_t s = 0; s < 4; ++s)
            CHECK(rows[i].time[s] == static_cast<std::int32_t>(h.times[s]));
        CHECK(rows[i].neigh == topo.neighbors_of(events[i].cell_id));
        CHECK(rows[i].train_split == (events[i].t_min < 2 * 1440));

        // Recount this day's events per time-of-day bin from scratch.
        std::array<std::int32_t, 5> counts{0, 0, 0, 0, 0};
        for (const auto& e : events)
            if (e.t_min / 1440 == rows[i].day)
                ++counts[static_cast<std::size_t>(time_of_day_bin(e.t_min % 1440))];
        CHECK(rows[i].tod_counts == counts);
    }
    CHECK(rows.front().home_enb == oracle::home_cell(events, 2 * 1440));
}

TEST_CASE("enrichment is per-trace pure and deterministic") {
    const Topology topo = hand_topology();
    Dataset merged;
    merged.horizon_min = 2880;

    RawTrace a = hand_trace();
    RawTrace b;
    b.imsi = 100;
    b.records = {{0, 3, 0.4}, {50, 4, 0.3}, {1600, 2, 0.6}};
    RawTrace c;
    c.imsi = 2;
    c.records = {{0, 2, 0.5}, {1441, 3, 0.5}};
    for (const auto& t : {a, b, c}) {
        merged.traces.push_back(t);
        merged.labels[t.imsi] = "legit";
    }
    merged.sort_canonical();

    const auto all = enrich(merged, topo, TimeslotBinning{}, 1, 3);
    const auto again = enrich(merged, topo, TimeslotBinning{}, 1, 1);
    REQUIRE(all.size() == again.size());

    const auto same_row = [](const EnrichedEvent& x, const EnrichedEvent& y) {
        return x.enode == y.enode && x.time == y.time && x.target_time == y.target_time &&
               x.sig_st == y.sig_st && x.imsi == y.imsi && x.home_enb == y.home_enb &&
               x.tod_counts == y.tod_counts && x.neigh == y.neigh &&
               x.label_location == y.label_location &&
               x.label_timeslot_bin == y.label_timeslot_bin && x.day == y.day &&
               x.train_split == y.train_split && x.truth_label == y.truth_label;
    };
    for (std::size_t i = 0; i < all.size(); ++i) CHECK(same_row(all[i], again[i]));

    // A trace's rows do not depend on which other traces share the dataset.
    for (const auto& t : {a, b, c}) {
        const auto alone = enrich(single_trace_dataset(t, 2880), topo, TimeslotBinning{}, 1);
        std::vector<EnrichedEvent> from_merged;
        for (const auto& r : all)
            if (r.imsi == t.imsi) from_merged.push_back(r);
        REQUIRE(alone.size() == from_merged.size());
        for (std::size_t i = 0; i < alone.size(); ++i)
            CHECK(same_row(alone[i], from_merged[i]));
    }
}

TEST_CASE("enrichment validates labels and the split boundary") {
    const Topology topo = hand_topology();
    Dataset ds = single_trace_dataset(hand_trace(), 2880);

    CHECK_THROWS_AS(enrich(ds, topo, TimeslotBinning{}, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(enrich(ds, topo, TimeslotBinning{}, 2, 1), std::invalid_argument);

    ds.labels.clear();
    CHECK_THROWS_AS(enrich(ds, topo, TimeslotBinning{}, 1, 1), std::runtime_error);
}

TEST_CASE("split helpers count and gate both sides") {
    const Topology topo = hand_topology();
    const auto rows = enrich(single_trace_dataset(hand_trace(), 2880), topo,
                             TimeslotBinning{}, 1);
    const auto counts = split_counts(rows);
    CHECK(counts.train == 4);
    CHECK(counts.test == 2);
    require_both_sides(rows);

    std::vector<EnrichedEvent> train_only;
    std::vector<EnrichedEvent> test_only;
    for (const auto& r : rows) (r.train_split ? train_only : test_only).push_back(r);
    CHECK_THROWS_AS(require_both_sides(train_only), std::runtime_error);
    CHECK_THROWS_AS(require_both_sides(test_only), std::runtime_error);
}

TEST_CASE("feature matrix mirrors feature_value over all columns") {
    const Topology topo = hand_topology();
    const auto rows = enrich(single_trace_dataset(hand_trace(), 2880), topo,
                             TimeslotBinning{}, 1);
    const auto m = make_feature_matrix(rows);
    CHECK(m.n_rows == rows.size());
    CHECK(m.n_cols == kFeatureNames.size());
    for (std::size_t r = 0; r < m.n_rows; ++r) {
        for (std::size_t c = 0; c < m.n_cols; ++c) {
            CHECK(m.at(r, c) == feature_value(rows[r], c));
            CHECK(m.row(r)[c] == m.at(r, c));
        }
    }
    CHECK(feature_value(rows[0], 10) == 7.0);  // imsi column
    CHECK_THROWS_AS(feature_value(rows[0], 21), std::out_of_range);
}

TEST_CASE("feature schema hash pins the column layout") {
    // Typed out independently of kFeatureNames so reorders and renames fail.
    const std::string joined =
        "enode_1,enode_2,enode_3,enode_4,time_1,time_2,time_3,time_4,"
        "target_time,sig_st,imsi,home_enb,early_morn,morning,noon,evening,"
        "night,neigh_1,neigh_2,neigh_3,neigh_4,";
    CHECK(feature_schema_hash() == fnv1a64(joined));
}

TEST_CASE("enriched rows survive a CSV round-trip") {
    const Topology topo = hand_topology();
    Dataset ds = single_trace_dataset(hand_trace(), 2880);
    RawTrace other;
    other.imsi = 0xdeadbeefu;
    other.records = {{0, 4, 0.123456789012345}, {2100, 3, 0.5}};
    ds.labels[other.imsi] = "tuple";
    ds.populations[other.imsi] = "tuple";
    ds.traces.push_back(other);
    ds.sort_canonical();

    const auto rows = enrich(ds, topo, TimeslotBinning{}, 1);
    oracle::TempDir tmp("features_csv");
    const auto path = tmp / "enriched.csv";
    write_enriched_csv(rows, path);
    const auto back = read_enriched_csv(path);
    REQUIRE(back.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        INFO("row " << i);
        CHECK(back[i].enode == rows[i].enode);
        CHECK(back[i].time == rows[i].time);
        CHECK(back[i].target_time == rows[i].target_time);
        CHECK(back[i].sig_st == rows[i].sig_st);
        CHECK(back[i].imsi == rows[i].imsi);
        CHECK(back[i].home_enb == rows[i].home_enb);
        CHECK(back[i].tod_counts == rows[i].tod_counts);
        CHECK(back[i].neigh == rows[i].neigh);
        CHECK(back[i].label_location == rows[i].label_location);
        CHECK(back[i].label_timeslot_bin == rows[i].label_timeslot_bin);
        CHECK(back[i].day == rows[i].day);
        CHECK(back[i].train_split == rows[i].train_split);
        CHECK(back[i].truth_label == rows[i].truth_label);
    }

    CHECK_THROWS(read_enriched_csv(tmp / "missing.csv"));
    csv::write_text(tmp / "bad.csv", "not,the,header\n1,2,3\n");
    CHECK_THROWS(read_enriched_csv(tmp / "bad.csv"));
}
