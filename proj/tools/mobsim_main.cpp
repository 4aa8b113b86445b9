// Command line front end. Every stage reads and writes files under --out,
// so stages can run in one invocation (run) or across several.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mobsim/experiment.hpp"

namespace {

void run_stage(mobsim::Pipeline& pipeline, const std::string& stage, bool retrain) {
    if (stage == "simulate") {
        pipeline.simulate();
    } else if (stage == "attack") {
        pipeline.attack();
    } else if (stage == "featurize") {
        pipeline.featurize();
    } else if (stage == "train") {
        pipeline.train();
    } else if (stage == "eval") {
        pipeline.eval(retrain);
    } else if (stage == "defend") {
        pipeline.defend();
    } else if (stage == "sweep") {
        pipeline.sweep();
    } else if (stage == "report") {
        pipeline.report();
    } else {
        throw std::logic_error("unknown stage " + stage);
    }
    std::printf("[%s] done\n", stage.c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mobility trace simulator and attack evaluation toolkit"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    unsigned threads = 1;
    bool retrain = false;
    auto* seed_opt =
        app.add_option("--seed", seed, "Master seed (overrides the config file)");
    app.add_option("--config", config_path, "Scenario config JSON")
        ->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "Output directory for all artifacts");
    app.add_option("--threads", threads, "Worker threads (results are identical)")
        ->check(CLI::Range(1u, 256u));
    app.add_flag("--retrain-with-adversarial", retrain,
                 "During eval, retrain on poisoned and on defended training sets");

    const std::vector<std::pair<std::string, std::string>> stages = {
        {"simulate", "Generate the topology and legitimate mobility traces"},
        {"attack", "Generate adversarial traces for the configured attack"},
        {"featurize", "Enrich merged traces into the model-ready event table"},
        {"train", "Train one location/timeslot predictor per mobility population"},
        {"eval", "Score predictors on legitimate, adversarial and mixed events"},
        {"defend", "Cluster test-window events and quarantine the malicious side"},
        {"sweep", "Re-attack at several sizes and record accuracy degradation"},
        {"report", "Emit baseline/sweep tables and accuracy charts"},
    };
    for (const auto& [name, help] : stages) app.add_subcommand(name, help);
    auto* run_cmd = app.add_subcommand("run", "Run every stage in order");

    CLI11_PARSE(app, argc, argv);

    try {
        mobsim::ScenarioConfig cfg = config_path.empty()
                                         ? mobsim::default_scenario()
                                         : mobsim::load_scenario(config_path);
        if (seed_opt->count() > 0) cfg.seed = seed;
        mobsim::Pipeline pipeline(cfg, out_dir, threads);
        if (app.got_subcommand(run_cmd)) {
            for (const auto& [name, _] : stages) run_stage(pipeline, name, retrain);
        } else {
            for (const auto& [name, _] : stages)
                if (app.got_subcommand(name)) run_stage(pipeline, name, retrain);
        }
    } catch (const std::exception& e) {
        const nlohmann::json err = {{"error", e.what()}};
        std::fprintf(stderr, "%s\n", err.dump().c_str());
        return 1;
    }
    return 0;
}
