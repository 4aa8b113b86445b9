#pragma once

// Scenario configuration and the file-mediated pipeline:
//   simulate -> attack -> featurize -> train -> eval -> defend
// plus the attack-size sweep and report emission. Every stage reads its
// inputs from the output directory and writes its artifacts back, so any
// valid prefix of stages can run across separate invocations.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "mobsim/attack.hpp"
#include "mobsim/csv.hpp"
#include "mobsim/defense.hpp"
#include "mobsim/features.hpp"
#include "mobsim/predict.hpp"
#include "mobsim/report.hpp"
#include "mobsim/simulate.hpp"
#include "mobsim/topology.hpp"
#include "mobsim/trace.hpp"

namespace mobsim {

struct TopologyConfig {
    std::size_t n_cells = 200;
    Bounds bounds{0.0, 0.0, 14000.0, 14000.0};
    std::int32_t capacity = 1000;
    double d0_m = 500.0;
    double beta = 0.5;
    std::string csv_path;  // when set, cells are loaded instead of generated
};

struct AttackScenario {
    std::string type = "none";  // none | tuple | quintuple | decuple | gmaps
    std::size_t n_ues = 0;
    std::int64_t dwell_min = 5;
    bool distant_cells = false;
    double walk_speed_m_per_min = 84.0;
    std::vector<Vec2> path;  // empty = default path through the densest region
    std::int64_t start_minute = 0;
};

inline std::size_t jump_k_for(const std::string& type) {
    if (type == "tuple") return 2;
    if (type == "quintuple") return 5;
    if (type == "decuple") return 10;
    throw std::invalid_argument("unknown jump attack type '" + type + "'");
}

struct ScenarioConfig {
    std::uint64_t seed = 1;
    std::int64_t duration_days = 5;
    std::int64_t train_days = 4;
    TopologyConfig topology;
    std::vector<PopulationSpec> populations;
    AttackScenario attack;
    TimeslotBinning binning;
    EnsembleSpec ensemble;
    ClusteringConfig defense;
    std::vector<std::string> sweep_attacks{"tuple", "quintuple", "decuple", "gmaps"};
    std::vector<std::size_t> sweep_n_ues{0, 25, 50, 100, 200};

    std::int64_t horizon_min() const { return duration_days * 1440; }
    std::int64_t boundary_min() const { return train_days * 1440; }

    void validate() const {
        if (duration_days < 2)
            throw std::invalid_argument("duration must be at least 2 days");
        if (train_days < 1 || train_days >= duration_days)
            throw std::invalid_argument("train_days must leave at least one test day");
        if (populations.empty())
            throw std::invalid_argument("at least one population is required");
        binning.validate();
        ensemble.validate();
        defense.validate();
    }
};

// --- JSON (de)serialization ------------------------------------------------------

namespace detail {

inline PopulationSpec default_population(const std::string& name) {
    PopulationSpec p;
    p.name = name;
    p.count = 500;
    return p;
}

}  // namespace detail

inline ScenarioConfig default_scenario() {
    ScenarioConfig cfg;
    cfg.populations = {detail::default_population(population::kWp),
                       detail::default_population(population::kRwp),
                       detail::default_population(population::kGm)};
    return cfg;
}

inline nlohmann::json scenario_to_json(const ScenarioConfig& cfg) {
    nlohmann::json j;
    j["seed"] = cfg.seed;
    j["duration_days"] = cfg.duration_days;
    j["train_days"] = cfg.train_days;
    j["topology"] = {
        {"n_cells", cfg.topology.n_cells},
        {"bounds_m", {cfg.topology.bounds.min_x, cfg.topology.bounds.min_y,
                      cfg.topology.bounds.max_x, cfg.topology.bounds.max_y}},
        {"capacity", cfg.topology.capacity},
        {"d0_m", cfg.topology.d0_m},
        {"beta", cfg.topology.beta},
        {"csv", cfg.topology.csv_path}};
    nlohmann::json pops = nlohmann::json::object();
    for (const auto& p : cfg.populations) {
        nlohmann::json jp;
        jp["count"] = p.count;
        if (p.name == population::kWp) {
            jp["commute_speed_m_per_min"] = p.wp.commute_speed_m_per_min;
            jp["depart_home_window_min"] = {p.wp.depart_home_lo_min, p.wp.depart_home_hi_min};
            jp["depart_office_window_min"] = {p.wp.depart_office_lo_min,
                                              p.wp.depart_office_hi_min};
        } else if (p.name == population::kRwp) {
            jp["move_probability"] = p.rwp.move_probability;
            jp["speed_range_m_per_min"] = {p.rwp.speed_lo_m_per_min, p.rwp.speed_hi_m_per_min};
        } else if (p.name == population::kGm) {
            jp["mean_speed_m_per_min"] = p.gm.mean_speed_m_per_min;
            jp["speed_stddev"] = p.gm.speed_stddev;
            jp["direction_stddev"] = p.gm.direction_stddev;
            jp["alpha"] = p.gm.alpha;
            jp["max_speed_m_per_min"] = p.gm.max_speed_m_per_min;
        }
        pops[p.name] = jp;
    }
    j["populations"] = pops;
    nlohmann::json path = nlohmann::json::array();
    for (const auto& p : cfg.attack.path) path.push_back({p.x, p.y});
    j["attack"] = {{"type", cfg.attack.type},
                   {"n_ues", cfg.attack.n_ues},
                   {"dwell_min", cfg.attack.dwell_min},
                   {"distant_cells", cfg.attack.distant_cells},
                   {"walk_speed_m_per_min", cfg.attack.walk_speed_m_per_min},
                   {"path_m", path},
                   {"start_minute", cfg.attack.start_minute}};
    j["binning"] = {{"timeslot_upper_edges_min", cfg.binning.upper_edges}};
    j["ensemble"] = {{"n_trees", cfg.ensemble.n_trees},
                     {"max_depth", cfg.ensemble.max_depth},
                     {"min_samples_split", cfg.ensemble.min_samples_split},
                     {"min_samples_leaf", cfg.ensemble.min_samples_leaf},
                     {"mtry", cfg.ensemble.mtry},
                     {"bootstrap", cfg.ensemble.bootstrap},
                     {"exact_thresholds", cfg.ensemble.exact_thresholds}};
    j["defense"] = {
        {"k", cfg.defense.k},
        {"n_init", cfg.defense.n_init},
        {"max_iter", cfg.defense.max_iter},
        {"tol", cfg.defense.tol},
        {"features", cfg.defense.features},
        {"rule", cfg.defense.rule == ClusteringConfig::MaliciousRule::smallest_cluster
                     ? "smallest_cluster"
                     : "lowest_timeslot_variance"}};
    j["sweep"] = {{"attacks", cfg.sweep_attacks}, {"n_ues", cfg.sweep_n_ues}};
    return j;
}

inline ScenarioConfig scenario_from_json(const nlohmann::json& j) {
    ScenarioConfig cfg = default_scenario();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("duration_days")) cfg.duration_days = j.at("duration_days").get<std::int64_t>();
    if (j.contains("train_days")) cfg.train_days = j.at("train_days").get<std::int64_t>();
    if (j.contains("topology")) {
        const auto& t = j.at("topology");
        if (t.contains("n_cells")) cfg.topology.n_cells = t.at("n_cells").get<std::size_t>();
        if (t.contains("bounds_m")) {
            const auto b = t.at("bounds_m").get<std::vector<double>>();
            if (b.size() != 4)
                throw std::invalid_argument("bounds_m must be [min_x,min_y,max_x,max_y]");
            cfg.topology.bounds = {b[0], b[1], b[2], b[3]};
        }
        if (t.contains("capacity")) cfg.topology.capacity = t.at("capacity").get<std::int32_t>();
        if (t.contains("d0_m")) cfg.topology.d0_m = t.at("d0_m").get<double>();
        if (t.contains("beta")) cfg.topology.beta = t.at("beta").get<double>();
        if (t.contains("csv") && !t.at("csv").is_null())
            cfg.topology.csv_path = t.at("csv").get<std::string>();
    }
    if (j.contains("populations")) {
        cfg.populations.clear();
        const auto& pops = j.at("populations");
        for (const char* name : {population::kWp, population::kRwp, population::kGm}) {
            if (!pops.contains(name)) continue;
            const auto& jp = pops.at(name);
            PopulationSpec p = detail::default_population(name);
            if (jp.contains("count")) p.count = jp.at("count").get<std::size_t>();
            if (p.name == population::kWp) {
                if (jp.contains("commute_speed_m_per_min"))
                    p.wp.commute_speed_m_per_min = jp.at("commute_speed_m_per_min").get<double>();
                if (jp.contains("depart_home_window_min")) {
                    const auto w = jp.at("depart_home_window_min").get<std::vector<double>>();
                    if (w.size() != 2) throw std::invalid_argument("bad departure window");
                    p.wp.depart_home_lo_min = w[0];
                    p.wp.depart_home_hi_min = w[1];
                }
                if (jp.contains("depart_office_window_min")) {
                    const auto w = jp.at("depart_office_window_min").get<std::vector<double>>();
                    if (w.size() != 2) throw std::invalid_argument("bad departure window");
                    p.wp.depart_office_lo_min = w[0];
                    p.wp.depart_office_hi_min = w[1];
                }
            } else if (p.name == population::kRwp) {
                if (jp.contains("move_probability"))
                    p.rwp.move_probability = jp.at("move_probability").get<double>();
                if (jp.contains("speed_range_m_per_min")) {
                    const auto w = jp.at("speed_range_m_per_min").get<std::vector<double>>();
                    if (w.size() != 2) throw std::invalid_argument("bad speed range");
                    p.rwp.speed_lo_m_per_min = w[0];
                    p.rwp.speed_hi_m_per_min = w[1];
                }
            } else if (p.name == population::kGm) {
                if (jp.contains("mean_speed_m_per_min"))
                    p.gm.mean_speed_m_per_min = jp.at("mean_speed_m_per_min").get<double>();
                if (jp.contains("speed_stddev"))
                    p.gm.speed_stddev = jp.at("speed_stddev").get<double>();
                if (jp.contains("direction_stddev"))
                    p.gm.direction_stddev = jp.at("direction_stddev").get<double>();
                if (jp.contains("alpha")) p.gm.alpha = jp.at("alpha").get<double>();
                if (jp.contains("max_speed_m_per_min"))
                    p.gm.max_speed_m_per_min = jp.at("max_speed_m_per_min").get<double>();
            }
            if (p.count > 0) cfg.populations.push_back(p);
        }
    }
    if (j.contains("attack")) {
        const auto& a = j.at("attack");
        if (a.contains("type")) cfg.attack.type = a.at("type").get<std::string>();
        if (a.contains("n_ues")) cfg.attack.n_ues = a.at("n_ues").get<std::size_t>();
        if (a.contains("dwell_min")) cfg.attack.dwell_min = a.at("dwell_min").get<std::int64_t>();
        if (a.contains("distant_cells"))
            cfg.attack.distant_cells = a.at("distant_cells").get<bool>();
        if (a.contains("walk_speed_m_per_min"))
            cfg.attack.walk_speed_m_per_min = a.at("walk_speed_m_per_min").get<double>();
        if (a.contains("path_m") && a.at("path_m").is_array()) {
            cfg.attack.path.clear();
            for (const auto& p : a.at("path_m")) {
                const auto v = p.get<std::vector<double>>();
                if (v.size() != 2) throw std::invalid_argument("path_m points must be [x,y]");
                cfg.attack.path.push_back({v[0], v[1]});
            }
        }
        if (a.contains("start_minute"))
            cfg.attack.start_minute = a.at("start_minute").get<std::int64_t>();
    }
    if (j.contains("binning")) {
        const auto& b = j.at("binning");
        if (b.contains("timeslot_upper_edges_min"))
            cfg.binning.upper_edges =
                b.at("timeslot_upper_edges_min").get<std::vector<std::int64_t>>();
    }
    if (j.contains("ensemble")) {
        const auto& e = j.at("ensemble");
        if (e.contains("n_trees")) cfg.ensemble.n_trees = e.at("n_trees").get<std::int32_t>();
        if (e.contains("max_depth")) cfg.ensemble.max_depth = e.at("max_depth").get<std::int32_t>();
        if (e.contains("min_samples_split"))
            cfg.ensemble.min_samples_split = e.at("min_samples_split").get<std::int32_t>();
        if (e.contains("min_samples_leaf"))
            cfg.ensemble.min_samples_leaf = e.at("min_samples_leaf").get<std::int32_t>();
        if (e.contains("mtry")) cfg.ensemble.mtry = e.at("mtry").get<std::int32_t>();
        if (e.contains("bootstrap")) cfg.ensemble.bootstrap = e.at("bootstrap").get<bool>();
        if (e.contains("exact_thresholds"))
            cfg.ensemble.exact_thresholds = e.at("exact_thresholds").get<bool>();
    }
    if (j.contains("defense")) {
        const auto& d = j.at("defense");
        if (d.contains("k")) cfg.defense.k = d.at("k").get<std::int32_t>();
        if (d.contains("n_init")) cfg.defense.n_init = d.at("n_init").get<std::int32_t>();
        if (d.contains("max_iter")) cfg.defense.max_iter = d.at("max_iter").get<std::int32_t>();
        if (d.contains("tol")) cfg.defense.tol = d.at("tol").get<double>();
        if (d.contains("features"))
            cfg.defense.features = d.at("features").get<std::vector<std::string>>();
        if (d.contains("rule")) {
            const auto rule = d.at("rule").get<std::string>();
            if (rule == "smallest_cluster")
                cfg.defense.rule = ClusteringConfig::MaliciousRule::smallest_cluster;
            else if (rule == "lowest_timeslot_variance")
                cfg.defense.rule = ClusteringConfig::MaliciousRule::lowest_timeslot_variance;
            else
                throw std::invalid_argument("unknown defense rule '" + rule + "'");
        }
    }
    if (j.contains("sweep")) {
        const auto& s = j.at("sweep");
        if (s.contains("attacks"))
            cfg.sweep_attacks = s.at("attacks").get<std::vector<std::string>>();
        if (s.contains("n_ues"))
            cfg.sweep_n_ues = s.at("n_ues").get<std::vector<std::size_t>>();
    }
    cfg.validate();
    return cfg;
}

inline ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw std::runtime_error("bad JSON in " + path + ": " + e.what());
    }
    return scenario_from_json(j);
}

// Hash of the canonical re-serialized config, so formatting differences in
// the user's file do not change the hash.
inline std::string config_hash_hex(const ScenarioConfig& cfg) {
    const std::string dump = scenario_to_json(cfg).dump();
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(dump)));
    return std::string(buf);
}

// --- Pipeline ---------------------------------------------------------------------

class Pipeline {
public:
    Pipeline(ScenarioConfig cfg, std::string out_dir, unsigned threads = 1)
        : cfg_(std::move(cfg)), out_(std::move(out_dir)), threads_(threads) {
        cfg_.validate();
        std::filesystem::create_directories(out_);
    }

    const ScenarioConfig& config() const { return cfg_; }
    std::string path(const std::string& name) const { return out_ + "/" + name; }

    // --- simulate ---------------------------------------------------------------

    void simulate() {
        const Topology topo = build_topology();
        topo.write_csv(path("topology.csv"));
        std::unordered_set<std::uint32_t> taken;
        EngineResult result = run_legit(topo, cfg_.populations, cfg_.horizon_min(),
                                        cfg_.seed, threads_, &taken);
        write_traces_jsonl(result.dataset.traces, path("traces.jsonl"));
        write_labels_csv(result.dataset, path("labels.csv"));
        write_populations_csv(result.dataset, path("populations.csv"));
        nlohmann::json stage;
        stage["duration_min"] = cfg_.horizon_min();
        stage["n_traces"] = result.dataset.traces.size();
        stage["max_load_fraction"] = result.stats.max_load_fraction;
        nlohmann::json events = nlohmann::json::object();
        for (const auto& [pop, n] : result.stats.events_per_population) events[pop] = n;
        stage["events_per_population"] = events;
        update_manifest("simulate", stage);
    }

    // --- attack -----------------------------------------------------------------

    void attack() {
        const Topology topo = load_topology();
        Dataset adv = make_attack_dataset(topo, cfg_.attack, "attack");
        write_traces_jsonl(adv.traces, path("adversarial.jsonl"));
        write_labels_csv(adv, path("adversarial_labels.csv"));
        write_populations_csv(adv, path("adversarial_populations.csv"));
        nlohmann::json stage;
        stage["type"] = cfg_.attack.type;
        stage["n_ues"] = cfg_.attack.n_ues;
        stage["n_traces"] = adv.traces.size();
        stage["n_events"] = adv.total_events();
        update_manifest("attack", stage);
    }

    // --- featurize --------------------------------------------------------------

    void featurize() {
        const Topology topo = load_topology();
        Dataset merged = load_legit_dataset();
        merged.merge(load_adversarial_dataset());
        const auto rows = enrich(merged, topo, cfg_.binning, cfg_.train_days, threads_);

        nlohmann::json stage;
        for (const auto& pop : cfg_.populations) {
            std::vector<EnrichedEvent> pop_rows;
            for (const auto& r : rows) {
                const auto it = merged.populations.find(r.imsi);
                if (it != merged.populations.end() && it->second == pop.name &&
                    r.truth_label == truth::kLegit)
                    pop_rows.push_back(r);
            }
            require_both_sides(pop_rows);
            write_enriched_csv(pop_rows, path("enriched_" + pop.name + ".csv"));
            stage["rows_" + pop.name] = pop_rows.size();
        }
        std::vector<EnrichedEvent> adv_rows;
        for (const auto& r : rows)
            if (r.truth_label != truth::kLegit) adv_rows.push_back(r);
        write_enriched_csv(adv_rows, path("enriched_adversarial.csv"));
        stage["rows_adversarial"] = adv_rows.size();
        update_manifest("featurize", stage);
    }

    // --- train --------------------------------------------------------------------

    void train() {
        std::filesystem::create_directories(path("models"));
        nlohmann::json stage;
        for (const auto& pop : cfg_.populations) {
            const auto rows = read_enriched_csv(path("enriched_" + pop.name + ".csv"));
            std::vector<EnrichedEvent> train_rows;
            for (const auto& r : rows)
                if (r.train_split) train_rows.push_back(r);
            if (train_rows.empty())
                throw std::runtime_error("no training rows for " + pop.name);
            EnsembleSpec spec = cfg_.ensemble;
            spec.seed = substream(cfg_.seed, "train/" + pop.name)();
            const TrainedPredictor model =
                train_predictor(train_rows, spec, pop.name, threads_);
            save_model(model, path("models/" + pop.name + ".model"));
            stage["train_rows_" + pop.name] = train_rows.size();
            stage["location_nodes_" + pop.name] = model.location_head.total_nodes();
            stage["timeslot_nodes_" + pop.name] = model.timeslot_head.total_nodes();
        }
        update_manifest("train", stage);
    }

    // --- eval ----------------------------------------------------------------------

    void eval(bool retrain_with_adversarial = false) {
        std::filesystem::create_directories(path("eval"));
        const auto adv_rows_all = read_enriched_csv(path("enriched_adversarial.csv"));
        std::vector<EnrichedEvent> adv_test;
        for (const auto& r : adv_rows_all)
            if (!r.train_split) adv_test.push_back(r);

        std::string csv_out =
            "population,scope,n,n_location_correct,n_both_correct,accuracy\n";
        std::string txt_out;
        for (const auto& pop : cfg_.populations) {
            const TrainedPredictor model = load_model(path("models/" + pop.name + ".model"));
            const auto rows = read_enriched_csv(path("enriched_" + pop.name + ".csv"));
            std::vector<EnrichedEvent> legit_test;
            for (const auto& r : rows)
                if (!r.train_split) legit_test.push_back(r);
            if (legit_test.empty())
                throw std::runtime_error("no test rows for " + pop.name);

            const AccuracyReport legit = evaluate(model, legit_test, threads_);
            append_scope(csv_out, pop.name, "legit", legit);
            txt_out += summary_line(pop.name, "legit", legit);

            if (!adv_test.empty()) {
                const AccuracyReport adv = evaluate(model, adv_test, threads_);
                append_scope(csv_out, pop.name, "adversarial", adv);
                txt_out += summary_line(pop.name, "adversarial", adv);

                std::vector<EnrichedEvent> mixed = legit_test;
                mixed.insert(mixed.end(), adv_test.begin(), adv_test.end());
                const AccuracyReport mix = evaluate(model, mixed, threads_);
                verify_decomposition(mix);
                if (mix.n_both_correct != legit.n_both_correct + adv.n_both_correct)
                    throw std::logic_error("mixed accuracy does not decompose");
                append_scope(csv_out, pop.name, "mixed", mix);
                txt_out += summary_line(pop.name, "mixed", mix);
            }
        }
        csv::write_text(path("eval/accuracy.csv"), csv_out);
        csv::write_text(path("eval/accuracy.txt"), txt_out);
        nlohmann::json stage;
        stage["retrain_with_adversarial"] = retrain_with_adversarial;
        if (retrain_with_adversarial) retrain_experiment();
        update_manifest("eval", stage);
    }

    // --- defend ----------------------------------------------------------------------

    void defend() {
        std::filesystem::create_directories(path("defense"));
        Dataset merged = load_legit_dataset();
        merged.merge(load_adversarial_dataset());
        const auto events = window_events(merged, cfg_.boundary_min(), cfg_.horizon_min());
        if (events.size() < 2)
            throw std::runtime_error("not enough test-window events to cluster");
        ClusteringConfig dcfg = cfg_.defense;
        dcfg.seed = substream(cfg_.seed, "defense")();
        const DefenseResult result = defense_filter(events, dcfg, &merged.labels);

        // Quarantine files carry the enriched rows of the clustered events.
        std::unordered_set<std::uint64_t> quarantined_keys;
        for (const std::size_t i : result.quarantined)
            quarantined_keys.insert(event_key(events[i].imsi, events[i].t_min));
        std::vector<EnrichedEvent> kept_rows, quarantined_rows;
        for (const auto& pop : cfg_.populations)
            partition_rows(read_enriched_csv(path("enriched_" + pop.name + ".csv")),
                           quarantined_keys, kept_rows, quarantined_rows);
        partition_rows(read_enriched_csv(path("enriched_adversarial.csv")),
                       quarantined_keys, kept_rows, quarantined_rows);
        write_enriched_csv(kept_rows, path("defense/kept.csv"));
        write_enriched_csv(quarantined_rows, path("defense/quarantined.csv"));

        nlohmann::json report;
        report["features"] = dcfg.features;
        report["inertia"] = result.report.inertia;
        report["iterations"] = result.report.iterations;
        report["best_restart"] = result.report.best_restart;
        report["centroids"] = result.report.centroids;
        report["cluster_sizes"] = result.report.cluster_sizes;
        report["quarantined_cluster"] = result.report.quarantined_cluster;
        report["timeslot_variance"] = result.report.timeslot_variance;
        report["purity"] = result.report.purity;
        report["kept_events"] = result.kept.size();
        report["quarantined_events"] = result.quarantined.size();
        csv::write_text(path("defense/report.json"), report.dump(2) + "\n");
        update_manifest("defend", report);
    }

    // --- sweep ------------------------------------------------------------------------

    void sweep() {
        std::filesystem::create_directories(path("report"));
        const Topology topo = load_topology();
        const Dataset legit = load_legit_dataset();
        std::unordered_set<std::uint32_t> base_taken;
        for (const auto& t : legit.traces) base_taken.insert(t.imsi);

        std::map<std::string, TrainedPredictor> models;
        std::map<std::string, std::vector<EnrichedEvent>> legit_test;
        for (const auto& pop : cfg_.populations) {
            models[pop.name] = load_model(path("models/" + pop.name + ".model"));
            const auto rows = read_enriched_csv(path("enriched_" + pop.name + ".csv"));
            auto& test = legit_test[pop.name];
            for (const auto& r : rows)
                if (!r.train_split) test.push_back(r);
        }

        std::string out =
            "mobility,attack,n_ues,accuracy_mixed,accuracy_legit,accuracy_adversarial\n";
        for (const auto& attack_type : cfg_.sweep_attacks) {
            for (const std::size_t n : cfg_.sweep_n_ues) {
                std::vector<EnrichedEvent> adv_test;
                if (n > 0) {
                    AttackScenario spec = cfg_.attack;
                    spec.type = attack_type;
                    spec.n_ues = n;
                    // Jump attacks need whole clone sets; partial sets are
                    // spare devices and generate nothing.
                    if (attack_type != "gmaps")
                        spec.n_ues = n - n % jump_k_for(attack_type);
                    if (spec.n_ues == 0) continue;
                    auto taken = base_taken;
                    Dataset adv = make_attack_dataset(topo, spec,
                                                      "sweep/" + attack_type + "/" +
                                                          std::to_string(n),
                                                      &taken);
                    const auto rows =
                        enrich(adv, topo, cfg_.binning, cfg_.train_days, threads_);
                    for (const auto& r : rows)
                        if (!r.train_split) adv_test.push_back(r);
                }
                for (const auto& pop : cfg_.populations) {
                    const AccuracyReport legit_rep =
                        evaluate(models.at(pop.name), legit_test.at(pop.name), threads_);
                    double mixed_acc = legit_rep.accuracy();
                    std::string adv_field;
                    if (!adv_test.empty()) {
                        const AccuracyReport adv_rep =
                            evaluate(models.at(pop.name), adv_test, threads_);
                        adv_field = csv::format_double(adv_rep.accuracy(), 6);
                        std::vector<EnrichedEvent> mixed = legit_test.at(pop.name);
                        mixed.insert(mixed.end(), adv_test.begin(), adv_test.end());
                        const AccuracyReport mix = evaluate(models.at(pop.name), mixed, threads_);
                        verify_decomposition(mix);
                        mixed_acc = mix.accuracy();
                    }
                    out += pop.name + "," + attack_type + "," + std::to_string(n) + "," +
                           csv::format_double(mixed_acc, 6) + "," +
                           csv::format_double(legit_rep.accuracy(), 6) + "," + adv_field +
                           "\n";
                }
            }
        }
        csv::write_text(path("report/sweep.csv"), out);
        nlohmann::json stage;
        stage["attacks"] = cfg_.sweep_attacks;
        stage["n_ues"] = cfg_.sweep_n_ues;
        update_manifest("sweep", stage);
    }

    // --- report ------------------------------------------------------------------------

    void report() {
        std::filesystem::create_directories(path("report"));
        if (!std::filesystem::exists(path("eval/accuracy.csv")))
            throw std::runtime_error("eval artifacts missing; run eval first");
        const auto lines = csv::read_lines(path("eval/accuracy.csv"));
        std::string baseline = "mobility,n_test_events,accuracy\n";
        std::map<std::string, double> baseline_acc;
        for (std::size_t i = 1; i < lines.size(); ++i) {
            const auto f = csv::split(lines[i]);
            if (f.size() != 6 || f[1] != "legit") continue;
            baseline += f[0] + "," + f[2] + "," + f[5] + "\n";
            baseline_acc[f[0]] = csv::parse_double(f[5], "accuracy");
        }
        csv::write_text(path("report/baseline.csv"), baseline);

        if (!std::filesystem::exists(path("report/sweep.csv"))) {
            std::string out =
                "mobility,attack,n_ues,accuracy_mixed,accuracy_legit,accuracy_adversarial\n";
            for (const auto& [pop, acc] : baseline_acc)
                out += pop + ",none,0," + csv::format_double(acc, 6) + "," +
                       csv::format_double(acc, 6) + ",\n";
            csv::write_text(path("report/sweep.csv"), out);
        }

        // One chart per mobility: mixed accuracy vs adversarial UE count.
        const auto sweep_lines = csv::read_lines(path("report/sweep.csv"));
        std::map<std::string, std::map<std::string, std::vector<std::pair<double, double>>>>
            per_pop;
        for (std::size_t i = 1; i < sweep_lines.size(); ++i) {
            const auto f = csv::split(sweep_lines[i]);
            if (f.size() != 6) continue;
            per_pop[f[0]][f[1]].emplace_back(csv::parse_double(f[2], "n_ues"),
                                             csv::parse_double(f[3], "accuracy_mixed"));
        }
        for (auto& [pop, by_attack] : per_pop) {
            std::vector<ChartSeries> series;
            for (auto& [attack_name, points] : by_attack) {
                std::sort(points.begin(), points.end());
                series.push_back({attack_name, points});
            }
            write_svg_chart(path("report/accuracy_" + pop + ".svg"),
                            "Prediction accuracy under attack (" + pop + ")",
                            "adversarial UEs", "accuracy", series);
        }
        update_manifest("report", nlohmann::json::object());
    }

private:
    Topology build_topology() const {
        if (!cfg_.topology.csv_path.empty())
            return Topology::read_csv(cfg_.topology.csv_path, cfg_.topology.d0_m,
                                      cfg_.topology.beta, &cfg_.topology.bounds);
        Rng rng = substream(cfg_.seed, "topology");
        return Topology::generate(cfg_.topology.n_cells, cfg_.topology.bounds,
                                  cfg_.topology.capacity, rng, cfg_.topology.d0_m,
                                  cfg_.topology.beta);
    }

    Topology load_topology() const {
        require_file(path("topology.csv"), "simulate");
        return Topology::read_csv(path("topology.csv"), cfg_.topology.d0_m,
                                  cfg_.topology.beta, &cfg_.topology.bounds);
    }

    Dataset load_legit_dataset() const {
        require_file(path("traces.jsonl"), "simulate");
        Dataset ds;
        ds.traces = read_traces_jsonl(path("traces.jsonl"));
        ds.labels = read_label_csv(path("labels.csv"), "label");
        ds.populations = read_label_csv(path("populations.csv"), "population");
        ds.horizon_min = cfg_.horizon_min();
        ds.sort_canonical();
        return ds;
    }

    Dataset load_adversarial_dataset() const {
        require_file(path("adversarial.jsonl"), "attack");
        Dataset ds;
        ds.traces = read_traces_jsonl(path("adversarial.jsonl"));
        ds.labels = read_label_csv(path("adversarial_labels.csv"), "label");
        ds.populations = read_label_csv(path("adversarial_populations.csv"), "population");
        ds.horizon_min = cfg_.horizon_min();
        ds.sort_canonical();
        return ds;
    }

    // Attack generation shares one code path for the configured attack, the
    // sweep points, and tests. rng_tag isolates each use's substream.
    Dataset make_attack_dataset(const Topology& topo, const AttackScenario& spec,
                                const std::string& rng_tag,
                                std::unordered_set<std::uint32_t>* taken = nullptr) {
        Dataset ds;
        ds.horizon_min = cfg_.horizon_min();
        if (spec.type == "none" || spec.n_ues == 0) return ds;
        Rng rng = substream(cfg_.seed, rng_tag);
        std::vector<RawTrace> traces;
        if (spec.type == "gmaps") {
            GMapsConfig gc;
            gc.n_ues = spec.n_ues;
            gc.path = spec.path.empty() ? default_gmaps_path(topo) : spec.path;
            gc.walk_speed_m_per_min = spec.walk_speed_m_per_min;
            gc.start_minute = spec.start_minute;
            traces = gmaps_traces(gc, topo, cfg_.horizon_min(), rng, taken);
        } else {
            JumpAttackConfig jc;
            jc.n_ues = spec.n_ues;
            jc.k = jump_k_for(spec.type);
            jc.dwell_min = spec.dwell_min;
            jc.distant_cells = spec.distant_cells;
            traces = jump_attack_traces(jc, topo, cfg_.horizon_min(), rng, taken);
        }
        for (const auto& t : traces) {
            ds.labels[t.imsi] = spec.type;
            ds.populations[t.imsi] = spec.type;
        }
        ds.traces = std::move(traces);
        ds.sort_canonical();
        return ds;
    }

    static std::uint64_t event_key(std::uint32_t imsi, std::int64_t t_min) {
        return (static_cast<std::uint64_t>(imsi) << 32) |
               static_cast<std::uint64_t>(static_cast<std::uint32_t>(t_min));
    }

    static std::vector<AttachmentEvent> window_events(const Dataset& ds,
                                                      std::int64_t from_min,
                                                      std::int64_t to_min) {
        std::vector<AttachmentEvent> out;
        for (const auto& trace : ds.traces)
            for (const auto& e : events_from_trace(trace, ds.horizon_min))
                if (e.t_min >= from_min && e.t_min < to_min) out.push_back(e);
        return out;
    }

    static void partition_rows(const std::vector<EnrichedEvent>& rows,
                               const std::unordered_set<std::uint64_t>& quarantined_keys,
                               std::vector<EnrichedEvent>& kept,
                               std::vector<EnrichedEvent>& quarantined) {
        for (const auto& r : rows) {
            if (r.train_split) continue;  // the filter operates on the test window
            if (quarantined_keys.count(event_key(r.imsi, r.timestamp())))
                quarantined.push_back(r);
            else
                kept.push_back(r);
        }
    }

    // Baseline vs poisoned vs defended retraining, scored on legitimate
    // test events only.
    void retrain_experiment() {
        const auto adv_rows = read_enriched_csv(path("enriched_adversarial.csv"));
        std::vector<EnrichedEvent> adv_train;
        for (const auto& r : adv_rows)
            if (r.train_split) adv_train.push_back(r);

        Dataset merged = load_legit_dataset();
        merged.merge(load_adversarial_dataset());
        const auto train_events = window_events(merged, 0, cfg_.boundary_min());
        ClusteringConfig dcfg = cfg_.defense;
        dcfg.seed = substream(cfg_.seed, "defense-train")();
        const DefenseResult filt = defense_filter(train_events, dcfg, &merged.labels);
        std::unordered_set<std::uint64_t> kept_keys;
        for (const std::size_t i : filt.kept)
            kept_keys.insert(event_key(train_events[i].imsi, train_events[i].t_min));

        std::string out = "population,variant,n_train,n_test,accuracy\n";
        for (const auto& pop : cfg_.populations) {
            const auto rows = read_enriched_csv(path("enriched_" + pop.name + ".csv"));
            std::vector<EnrichedEvent> legit_train, legit_test;
            for (const auto& r : rows)
                (r.train_split ? legit_train : legit_test).push_back(r);

            std::vector<EnrichedEvent> poisoned = legit_train;
            poisoned.insert(poisoned.end(), adv_train.begin(), adv_train.end());
            std::vector<EnrichedEvent> defended;
            for (const auto& r : poisoned)
                if (kept_keys.count(event_key(r.imsi, r.timestamp()))) defended.push_back(r);
            if (defended.empty()) defended = legit_train;

            EnsembleSpec spec = cfg_.ensemble;
            spec.seed = substream(cfg_.seed, "train/" + pop.name)();
            const TrainedPredictor base = train_predictor(legit_train, spec, pop.name, threads_);
            const TrainedPredictor pois = train_predictor(poisoned, spec, pop.name, threads_);
            const TrainedPredictor def = train_predictor(defended, spec, pop.name, threads_);

            const auto acc = [&](const TrainedPredictor& m) {
                return evaluate(m, legit_test, threads_).accuracy();
            };
            out += pop.name + ",baseline," + std::to_string(legit_train.size()) + "," +
                   std::to_string(legit_test.size()) + "," +
                   csv::format_double(acc(base), 6) + "\n";
            out += pop.name + ",poisoned," + std::to_string(poisoned.size()) + "," +
                   std::to_string(legit_test.size()) + "," +
                   csv::format_double(acc(pois), 6) + "\n";
            out += pop.name + ",defended," + std::to_string(defended.size()) + "," +
                   std::to_string(legit_test.size()) + "," +
                   csv::format_double(acc(def), 6) + "\n";
        }
        csv::write_text(path("eval/retrain.csv"), out);
    }

    static void append_scope(std::string& out, const std::string& pop,
                             const std::string& scope, const AccuracyReport& r) {
        out += pop + "," + scope + "," + std::to_string(r.n) + "," +
               std::to_string(r.n_location_correct) + "," +
               std::to_string(r.n_both_correct) + "," +
               csv::format_double(r.accuracy(), 6) + "\n";
    }

    static std::string summary_line(const std::string& pop, const std::string& scope,
                                    const AccuracyReport& r) {
        return pop + " " + scope + ": " + csv::format_double(r.accuracy(), 4) + " (" +
               std::to_string(r.n_both_correct) + "/" + std::to_string(r.n) +
               " events, location-only " + csv::format_double(r.location_accuracy(), 4) +
               ")\n";
    }

    void require_file(const std::string& file, const std::string& producing_stage) const {
        if (!std::filesystem::exists(file))
            throw std::runtime_error(file + " missing; run the " + producing_stage +
                                     " stage first");
    }

    void update_manifest(const std::string& stage, const nlohmann::json& payload) {
        nlohmann::json manifest;
        const std::string file = path("manifest.json");
        if (std::filesystem::exists(file)) {
            std::ifstream in(file, std::ios::binary);
            try {
                in >> manifest;
            } catch (...) {
                manifest = nlohmann::json::object();
            }
        }
        manifest["config_hash"] = config_hash_hex(cfg_);
        manifest["seed"] = cfg_.seed;
        manifest["config"] = scenario_to_json(cfg_);
        manifest["stages"][stage] = payload;
        csv::write_text(file, manifest.dump(2) + "\n");
    }

    ScenarioConfig cfg_;
    std::string out_;
    unsigned threads_;
};

}  // namespace mobsim
