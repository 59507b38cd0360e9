#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sclm/datagen.hpp"
#include "sclm/evaluation.hpp"
#include "sclm/io.hpp"
#include "sclm/rng.hpp"
#include "sclm/scorers.hpp"
#include "sclm/simulate.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct GlobalOptions {
    std::string config_path;
    uint64_t seed = 0;
    std::string out_dir = "out";
    bool offline = false;
    json config = json::object();

    void load_config() {
        if (config_path.empty()) return;
        config = json::parse(sclm::read_text_file(config_path));
        if (config.contains("seed")) seed = config["seed"].get<uint64_t>();
        if (config.contains("out_dir")) out_dir = config["out_dir"].get<std::string>();
        if (config.contains("offline")) offline = config["offline"].get<bool>();
    }

    // Offline unless a transcript or http endpoint is configured.
    bool effective_offline() const {
        return offline || (!config.contains("transcript") && !config.contains("http"));
    }

    std::shared_ptr<sclm::LlmTransport> make_transport() const {
        if (effective_offline()) return std::make_shared<sclm::MockTransport>();
        if (config.contains("transcript"))
            return std::make_shared<sclm::TranscriptReplayTransport>(
                sclm::TranscriptReplayTransport::from_file(
                    config["transcript"].get<std::string>()));
        sclm::HttpTransportConfig http;
        if (config.contains("http")) {
            const json& h = config["http"];
            if (h.contains("host")) http.host = h["host"].get<std::string>();
            if (h.contains("port")) http.port = h["port"].get<int>();
            if (h.contains("path")) http.path = h["path"].get<std::string>();
            if (h.contains("model")) http.model = h["model"].get<std::string>();
            if (h.contains("api_key_env")) http.api_key_env = h["api_key_env"].get<std::string>();
            if (h.contains("temperature")) http.temperature = h["temperature"].get<double>();
            if (h.contains("min_interval_ms")) http.min_interval_ms = h["min_interval_ms"].get<int>();
            if (h.contains("timeout_seconds")) http.timeout_seconds = h["timeout_seconds"].get<int>();
        }
        return std::make_shared<sclm::HttpTransport>(http);
    }
};

std::string out_path(const GlobalOptions& global, const std::string& name) {
    fs::create_directories(global.out_dir);
    return (fs::path(global.out_dir) / name).string();
}

sclm::GeneratorConfig make_generator_config(const GlobalOptions& global, int proposals, int rounds,
                                            int sim_seeds, const std::string& backend) {
    sclm::GeneratorConfig cfg;
    cfg.proposals_per_round = proposals;
    cfg.rounds = rounds;
    cfg.simulation_seeds = sim_seeds;
    cfg.master_seed = global.seed;
    cfg.backend = (backend == "llm" && !global.effective_offline()) ? sclm::BackendKind::Llm
                                                                    : sclm::BackendKind::Template;
    cfg.transport = global.make_transport();
    cfg.reflect_strategy = sclm::ReflectStrategy::Llm;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Social-welfare reward design for restless multi-armed bandits"};
    app.require_subcommand(1);
    app.fallthrough();  // global options may follow the subcommand

    GlobalOptions global;
    app.add_option("--config", global.config_path, "JSON config file");
    app.add_option("--seed", global.seed, "master seed");
    app.add_option("--out-dir", global.out_dir, "output directory");
    app.add_flag("--offline", global.offline, "template backend and mock LLM only");

    // gen-data
    auto* gen_data = app.add_subcommand("gen-data", "generate synthetic RMAB instances");
    int gd_dataset = 0, gd_arms = 100, gd_instances = 5, gd_budget = 10, gd_horizon = 12;
    double gd_discount = 0.9;
    bool gd_real_world = false;
    gen_data->add_option("--dataset", gd_dataset, "dataset id 1..3, 0 for all");
    gen_data->add_option("--arms", gd_arms);
    gen_data->add_option("--instances", gd_instances);
    gen_data->add_option("--budget", gd_budget);
    gen_data->add_option("--horizon", gd_horizon);
    gen_data->add_option("--discount", gd_discount);
    gen_data->add_flag("--real-world", gd_real_world, "real-world analogue schema");

    // whittle
    auto* whittle_cmd = app.add_subcommand("whittle", "Whittle indices for an instance");
    std::string wh_instance, wh_reward = "state";
    whittle_cmd->add_option("--instance", wh_instance)->required();
    whittle_cmd->add_option("--reward", wh_reward, "reward expression");

    // simulate
    auto* simulate_cmd = app.add_subcommand("simulate", "run the top-K index policy");
    std::string sm_instance, sm_reward = "state";
    int sm_seeds = 10;
    simulate_cmd->add_option("--instance", sm_instance)->required();
    simulate_cmd->add_option("--reward", sm_reward, "reward expression steering the policy");
    simulate_cmd->add_option("--seeds", sm_seeds, "Monte-Carlo seeds");

    // propose
    auto* propose_cmd = app.add_subcommand("propose", "evolutionary candidate generation");
    std::string pr_instance, pr_prompt, pr_backend = "template";
    int pr_rounds = 5, pr_proposals = 4, pr_sim_seeds = 10;
    propose_cmd->add_option("--instance", pr_instance)->required();
    propose_cmd->add_option("--prompt", pr_prompt, "e.g. prioritize:low:Feature A")->required();
    propose_cmd->add_option("--rounds", pr_rounds);
    propose_cmd->add_option("--proposals", pr_proposals);
    propose_cmd->add_option("--sim-seeds", pr_sim_seeds);
    propose_cmd->add_option("--backend", pr_backend)->check(CLI::IsMember({"template", "llm"}));

    // adjudicate
    auto* adjudicate_cmd = app.add_subcommand("adjudicate", "score a pool and select by p-mean welfare");
    std::string ad_instance, ad_pool, ad_prompt, ad_welfare = "utilitarian", ad_scorer = "sim";
    int ad_sim_seeds = 10;
    adjudicate_cmd->add_option("--instance", ad_instance)->required();
    adjudicate_cmd->add_option("--pool", ad_pool, "pool.jsonl from propose")->required();
    adjudicate_cmd->add_option("--prompt", ad_prompt)->required();
    adjudicate_cmd->add_option("--welfare", ad_welfare)
        ->check(CLI::IsMember({"utilitarian", "nash", "egalitarian"}));
    adjudicate_cmd->add_option("--scorer", ad_scorer)->check(CLI::IsMember({"sim", "llm"}));
    adjudicate_cmd->add_option("--sim-seeds", ad_sim_seeds);

    // evaluate
    auto* evaluate_cmd = app.add_subcommand("evaluate", "score a reward function against a prompt");
    std::string ev_instance, ev_reward, ev_prompt;
    int ev_sim_seeds = 10;
    evaluate_cmd->add_option("--instance", ev_instance)->required();
    evaluate_cmd->add_option("--reward", ev_reward)->required();
    evaluate_cmd->add_option("--prompt", ev_prompt)->required();
    evaluate_cmd->add_option("--sim-seeds", ev_sim_seeds);

    // run-matrix
    auto* matrix_cmd = app.add_subcommand("run-matrix", "full method x cell experiment grid");
    std::vector<std::string> mx_methods;
    int mx_arms = 100, mx_instances = 5, mx_budget = 10, mx_horizon = 12, mx_threads = 0;
    int mx_rounds = 5, mx_proposals = 4, mx_sim_seeds = 10;
    double mx_discount = 0.9;
    bool mx_singular = false;
    matrix_cmd->add_option("--methods", mx_methods)->delimiter(',');
    matrix_cmd->add_option("--arms", mx_arms);
    matrix_cmd->add_option("--instances", mx_instances);
    matrix_cmd->add_option("--budget", mx_budget);
    matrix_cmd->add_option("--horizon", mx_horizon);
    matrix_cmd->add_option("--discount", mx_discount);
    matrix_cmd->add_option("--rounds", mx_rounds);
    matrix_cmd->add_option("--proposals", mx_proposals);
    matrix_cmd->add_option("--sim-seeds", mx_sim_seeds);
    matrix_cmd->add_option("--threads", mx_threads);
    matrix_cmd->add_flag("--singular", mx_singular, "include the singular prompt suite");

    // report
    auto* report_cmd = app.add_subcommand("report", "re-aggregate persisted per-cell records");
    std::string rp_cells;
    report_cmd->add_option("--cells", rp_cells, "cells.jsonl from run-matrix")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        global.load_config();

        if (*gen_data) {
            sclm::DatasetConfig cfg;
            cfg.n_arms = gd_arms;
            cfg.n_instances = gd_instances;
            cfg.budget = gd_budget;
            cfg.horizon = gd_horizon;
            cfg.discount = gd_discount;
            cfg.real_world = gd_real_world;
            cfg.master_seed = global.seed;
            json manifest{{"seed", global.seed}, {"datasets", json::array()}};
            std::vector<int> ids = gd_dataset ? std::vector<int>{gd_dataset}
                                              : std::vector<int>{1, 2, 3};
            for (int id : ids) {
                cfg.weights = sclm::dataset_weights(id);
                json entry{{"dataset", id}, {"instances", json::array()}};
                for (int k = 0; k < cfg.n_instances; ++k) {
                    uint64_t seed = sclm::derive_seed(global.seed,
                                                      static_cast<uint64_t>(id) * 1000 + k);
                    sclm::RmabInstance instance = sclm::generate_instance(cfg, seed);
                    std::string name = "dataset" + std::to_string(id) + "_instance" +
                                       std::to_string(k) + ".json";
                    std::string path = out_path(global, name);
                    sclm::save_instance(instance, path);
                    entry["instances"].push_back(
                        {{"file", name}, {"seed", seed}, {"checksum", sclm::file_checksum(path)}});
                }
                manifest["datasets"].push_back(std::move(entry));
            }
            sclm::write_text_file(out_path(global, "manifest.json"), manifest.dump(2) + "\n");
            std::cout << "wrote " << ids.size() * cfg.n_instances << " instances to "
                      << global.out_dir << "\n";
        } else if (*whittle_cmd) {
            sclm::RmabInstance instance = sclm::load_instance(wh_instance);
            auto expr = sclm::dsl::RewardExpression::parse(wh_reward,
                                                           instance.schema.total_buckets());
            sclm::RewardTable table = sclm::dsl::to_reward_table(expr, instance);
            sclm::WhittleCache cache;
            json arms = json::array();
            for (int i = 0; i < instance.n_arms(); ++i) {
                bool indexable = true;
                auto idx = cache.indices(instance.arms[static_cast<size_t>(i)],
                                         table.values[static_cast<size_t>(i)], instance.discount,
                                         {}, &indexable);
                arms.push_back({{"arm", i}, {"state0", idx[0]}, {"state1", idx[1]},
                                {"indexable", indexable}});
            }
            json out{{"reward", expr.source()}, {"indices", arms}};
            sclm::write_text_file(out_path(global, "whittle.json"), out.dump(2) + "\n");
            std::cout << out.dump(2) << "\n";
        } else if (*simulate_cmd) {
            sclm::RmabInstance instance = sclm::load_instance(sm_instance);
            auto expr = sclm::dsl::RewardExpression::parse(sm_reward,
                                                           instance.schema.total_buckets());
            std::vector<uint64_t> seeds = sclm::simulation_seeds(global.seed, sm_seeds);
            sclm::WhittleCache cache;
            auto result = sclm::simulate(instance, sclm::dsl::to_reward_table(expr, instance),
                                         {sclm::dsl::to_reward_table(expr, instance)}, seeds,
                                         &cache);
            sclm::write_utility_csv(result.distribution, out_path(global, "utility.csv"));
            json out{{"reward", expr.source()},
                     {"discounted_total", result.totals[0]},
                     {"total_utility", result.distribution.total_utility}};
            std::cout << out.dump(2) << "\n";
        } else if (*propose_cmd) {
            sclm::RmabInstance instance = sclm::load_instance(pr_instance);
            sclm::PreferencePrompt prompt = sclm::parse_prompt_spec(pr_prompt, instance.schema);
            sclm::GeneratorConfig cfg =
                make_generator_config(global, pr_proposals, pr_rounds, pr_sim_seeds, pr_backend);
            sclm::WhittleCache cache;
            sclm::CandidatePool pool = sclm::evolve(instance, prompt, cfg, &cache);
            sclm::write_pool_jsonl(pool, out_path(global, "pool.jsonl"));
            std::cout << "pool of " << pool.candidates.size() << " candidates, DLM pick "
                      << pool.dlm_choice << ", " << pool.failures.size() << " failures\n";
        } else if (*adjudicate_cmd) {
            sclm::RmabInstance instance = sclm::load_instance(ad_instance);
            sclm::PreferencePrompt prompt = sclm::parse_prompt_spec(ad_prompt, instance.schema);
            std::vector<uint64_t> seeds = sclm::simulation_seeds(global.seed, ad_sim_seeds);
            sclm::WhittleCache cache;

            sclm::CandidatePool pool;
            for (auto& rec : sclm::load_pool_jsonl(ad_pool, instance.schema.total_buckets())) {
                sclm::Candidate cand{rec.id, rec.expr, rec.round, rec.proposal_index, {}, rec.monotone};
                cand.distribution =
                    sclm::simulate(instance, sclm::dsl::to_reward_table(rec.expr, instance), {},
                                   seeds, &cache)
                        .distribution;
                pool.candidates.push_back(std::move(cand));
            }
            auto default_dist =
                sclm::simulate(instance, sclm::default_reward_table(instance.n_arms()), {}, seeds,
                               &cache)
                    .distribution;

            sclm::GeneratorConfig gen_cfg =
                make_generator_config(global, 4, 5, ad_sim_seeds, "template");
            sclm::ProxyRewardCache proxies(gen_cfg);
            sclm::ScoringContext ctx{instance, &cache, seeds, {}};
            auto transport = global.make_transport();
            sclm::ScoreMatrix matrix = sclm::build_score_matrix(
                pool, prompt, ad_scorer == "llm" ? sclm::ScorerModel::Llm : sclm::ScorerModel::Simulator,
                ctx, &proxies, transport.get(), default_dist);
            sclm::WelfareFunction welfare = sclm::WelfareFunction::preset(ad_welfare);
            sclm::SelectionResult selection = sclm::select(matrix, welfare);

            sclm::write_score_matrix_csv(matrix, out_path(global, "score_matrix.csv"));
            json report = sclm::selection_report_json(matrix, selection, welfare);
            report["chosen_source"] =
                pool.candidates[static_cast<size_t>(selection.chosen)].expr.source();
            sclm::write_text_file(out_path(global, "selection.json"), report.dump(2) + "\n");
            std::cout << report.dump(2) << "\n";
        } else if (*evaluate_cmd) {
            sclm::RmabInstance instance = sclm::load_instance(ev_instance);
            sclm::PreferencePrompt prompt = sclm::parse_prompt_spec(ev_prompt, instance.schema);
            auto expr = sclm::dsl::RewardExpression::parse(ev_reward,
                                                           instance.schema.total_buckets());
            std::vector<uint64_t> seeds = sclm::simulation_seeds(global.seed, ev_sim_seeds);
            sclm::WhittleCache cache;
            sclm::ScoringContext ctx{instance, &cache, seeds, {}};
            sclm::EvaluationScores scores = sclm::evaluate_choice(expr, prompt, ctx);
            json clauses = json::array();
            for (const auto& pct : scores.clause_pct) clauses.push_back({pct[0], pct[1], pct[2]});
            json out{{"reward", expr.source()},
                     {"clause_pct", clauses},
                     {"sum_pct", {scores.sum_pct[0], scores.sum_pct[1], scores.sum_pct[2]}},
                     {"min_pct", {scores.min_pct[0], scores.min_pct[1], scores.min_pct[2]}},
                     {"unintended_shift", scores.unintended_shift},
                     {"utility_drop_pct", scores.utility_drop_pct}};
            sclm::write_text_file(out_path(global, "evaluation.json"), out.dump(2) + "\n");
            std::cout << out.dump(2) << "\n";
        } else if (*matrix_cmd) {
            sclm::RunMatrixConfig cfg;
            cfg.dataset.n_arms = mx_arms;
            cfg.dataset.n_instances = mx_instances;
            cfg.dataset.budget = mx_budget;
            cfg.dataset.horizon = mx_horizon;
            cfg.dataset.discount = mx_discount;
            cfg.generator =
                make_generator_config(global, mx_proposals, mx_rounds, mx_sim_seeds, "llm");
            if (!mx_methods.empty()) cfg.methods = mx_methods;
            cfg.master_seed = global.seed;
            cfg.offline = global.effective_offline();
            cfg.include_singular = mx_singular;
            cfg.threads = mx_threads;
            sclm::RunMatrixResult result = sclm::run_matrix(cfg);
            sclm::write_run_outputs(result, global.out_dir);
            std::cout << result.report.dump(2) << "\n";
        } else if (*report_cmd) {
            auto records = sclm::load_records_jsonl(rp_cells);
            json report = sclm::aggregate_records(records);
            sclm::write_text_file(out_path(global, "report.json"), report.dump(2) + "\n");
            std::cout << report.dump(2) << "\n";
        }
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 0;
}
