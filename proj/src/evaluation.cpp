#include "sclm/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "sclm/emd.hpp"
#include "sclm/io.hpp"
#include "sclm/rng.hpp"
#include "sclm/simulate.hpp"

namespace sclm {

const char* const kPromptEnggReflectionTemplate =
    "You are an expert in reward design for restless bandit resource allocation.\n"
    "Task objective: {GOAL}\n\n"
    "Candidate reward functions and the utility distributions they produced:\n\n"
    "{CANDIDATES}"
    "Think step by step about which distribution best matches the objective: {GOAL} Then commit "
    "to a single choice. Provide your answer EXACTLY IN the following format: 'The best reward "
    "function is at number: [FUNCTION NUMBER]'.";

namespace {

double group_total(const std::vector<double>& totals, Direction direction, int k) {
    int n = static_cast<int>(totals.size());
    k = std::min(k, n);
    double sum = 0.0;
    for (int j = 0; j < k; ++j)
        sum += direction == Direction::Low ? totals[static_cast<size_t>(j)]
                                           : totals[static_cast<size_t>(n - 1 - j)];
    return sum;
}

double pct_change(double value, double baseline) {
    if (baseline == 0.0) return 0.0;
    return (value - baseline) / baseline * 100.0;
}

}  // namespace

EvaluationScores evaluate_choice(const dsl::RewardExpression& chosen,
                                 const PreferencePrompt& prompt, const ScoringContext& ctx) {
    const RmabInstance& instance = ctx.instance;
    UtilityFeatureDistribution dist =
        simulate(instance, dsl::to_reward_table(chosen, instance), {}, ctx.seeds, ctx.cache,
                 ctx.solver)
            .distribution;
    UtilityFeatureDistribution base = simulate(instance, default_reward_table(instance.n_arms()),
                                               {}, ctx.seeds, ctx.cache, ctx.solver)
                                          .distribution;

    EvaluationScores scores;
    for (const auto& clause : prompt.clauses) {
        if (clause.kind != ClauseKind::Prioritize) continue;
        int ci = instance.schema.category_index(clause.category);
        std::array<double, 3> pct{};
        for (int k = 1; k <= 3; ++k)
            pct[static_cast<size_t>(k - 1)] =
                pct_change(group_total(dist.totals[static_cast<size_t>(ci)], clause.direction, k),
                           group_total(base.totals[static_cast<size_t>(ci)], clause.direction, k));
        scores.clause_pct.push_back(pct);
    }
    for (int k = 0; k < 3; ++k) {
        double sum = 0.0;
        double mn = scores.clause_pct.empty() ? 0.0 : scores.clause_pct[0][static_cast<size_t>(k)];
        for (const auto& pct : scores.clause_pct) {
            sum += pct[static_cast<size_t>(k)];
            mn = std::min(mn, pct[static_cast<size_t>(k)]);
        }
        scores.sum_pct[static_cast<size_t>(k)] = sum;
        scores.min_pct[static_cast<size_t>(k)] = mn;
    }

    int untouched = 0;
    double shift_sum = 0.0;
    for (const auto& cat : instance.schema.categories) {
        bool referenced = std::any_of(prompt.clauses.begin(), prompt.clauses.end(),
                                      [&](const PreferenceClause& c) {
                                          return c.kind != ClauseKind::MaximizeUtility &&
                                                 c.category == cat.name;
                                      });
        if (referenced) continue;
        shift_sum += utility_distribution_diff(dist, base, cat.name);
        ++untouched;
    }
    scores.unintended_shift = untouched ? shift_sum / untouched : 0.0;
    scores.utility_drop_pct = pct_change(dist.total_utility, base.total_utility);
    return scores;
}

MethodSpec parse_method(const std::string& name) {
    MethodSpec spec;
    spec.name = name;
    std::string base = name;
    auto strip_suffix = [&](const std::string& suffix, MethodSpec::Extension ext) {
        if (base.size() > suffix.size() && base.ends_with(suffix)) {
            base.resize(base.size() - suffix.size());
            spec.extension = ext;
        }
    };
    strip_suffix("-ExtendedPrompt-Fair", MethodSpec::Extension::Fair);
    strip_suffix("-ExtendedPrompt-Util", MethodSpec::Extension::Util);

    auto welfare_tail = [&](const std::string& prefix) -> bool {
        if (!base.starts_with(prefix)) return false;
        std::string preset = base.substr(prefix.size());
        spec.welfare = WelfareFunction::preset(preset);  // throws on unknown preset
        return true;
    };
    if (welfare_tail("SCLM-SIM-")) {
        spec.base = MethodSpec::Base::SclmSim;
    } else if (welfare_tail("SCLM-LLM-")) {
        spec.base = MethodSpec::Base::SclmLlm;
    } else if (base == "DLM") {
        spec.base = MethodSpec::Base::Dlm;
    } else if (base == "DLM-PromptEngg") {
        spec.base = MethodSpec::Base::DlmPromptEngg;
    } else if (base == "LLM-Zeroshot") {
        spec.base = MethodSpec::Base::Zeroshot;
    } else if (base == "SCLM-Full") {
        spec.base = MethodSpec::Base::SclmFull;
        spec.welfare = WelfareFunction::utilitarian();
    } else {
        throw std::invalid_argument("unknown method: " + name);
    }
    return spec;
}

std::vector<CellPlan> plan_cells(int n_datasets, int n_instances, int n_prompts) {
    std::vector<CellPlan> cells;
    cells.reserve(static_cast<size_t>(n_datasets) * n_instances * n_prompts);
    for (int d = 0; d < n_datasets; ++d)
        for (int i = 0; i < n_instances; ++i)
            for (int p = 0; p < n_prompts; ++p) cells.push_back({d + 1, i, p});
    return cells;
}

namespace {

struct CellContext {
    const RunMatrixConfig& cfg;
    const std::vector<MethodSpec>& methods;
    const std::vector<PreferencePrompt>& prompts;
    int n_prompts;
};

// Effective prompt per method: extensions and SCLM-Full rewrite the clause
// list the generator and adjudicator see; evaluation stays on the base prompt.
PreferencePrompt effective_prompt(const PreferencePrompt& base, const MethodSpec& spec,
                                  const FeatureSchema& schema) {
    PreferencePrompt prompt = base;
    if (spec.base == MethodSpec::Base::SclmFull) return extend_util(extend_fair(prompt, schema));
    if (spec.extension == MethodSpec::Extension::Fair) return extend_fair(prompt, schema);
    if (spec.extension == MethodSpec::Extension::Util) return extend_util(prompt);
    return prompt;
}

void run_instance_task(const CellContext& ctx, int dataset, int instance_index,
                       const RmabInstance& instance, std::vector<EvaluationRecord>& records,
                       std::vector<PoolScatterPoint>& scatter) {
    const RunMatrixConfig& cfg = ctx.cfg;
    WhittleCache cache;
    std::shared_ptr<LlmTransport> transport =
        cfg.offline ? std::make_shared<MockTransport>() : cfg.generator.transport;
    if (!transport) throw std::invalid_argument("run_matrix: online mode needs a transport");

    GeneratorConfig proxy_cfg = cfg.generator;
    proxy_cfg.backend = cfg.offline ? BackendKind::Template : cfg.generator.backend;
    proxy_cfg.transport = transport;
    proxy_cfg.master_seed = derive_seed(
        cfg.master_seed, 0xF0000000ULL + static_cast<uint64_t>(dataset * 100 + instance_index));
    ProxyRewardCache proxies(proxy_cfg);

    for (int p = 0; p < ctx.n_prompts; ++p) {
        const PreferencePrompt& base_prompt = ctx.prompts[static_cast<size_t>(p)];
        int cell_index =
            ((dataset - 1) * cfg.dataset.n_instances + instance_index) * ctx.n_prompts + p;
        uint64_t cell_master =
            derive_seed(cfg.master_seed, 0xCE110000ULL + static_cast<uint64_t>(cell_index));

        GeneratorConfig gen = proxy_cfg;
        gen.master_seed = cell_master;
        gen.reflect_strategy = ReflectStrategy::Llm;

        std::vector<uint64_t> seeds = simulation_seeds(cell_master, gen.simulation_seeds);
        ScoringContext score_ctx{instance, &cache, seeds, gen.solver};
        UtilityFeatureDistribution default_dist =
            simulate(instance, default_reward_table(instance.n_arms()), {}, seeds, &cache,
                     gen.solver)
                .distribution;

        // Pools shared across methods that see the same prompt and reflection
        // template; score matrices shared across welfare presets.
        std::map<std::string, CandidatePool> pools;
        std::map<std::string, ScoreMatrix> matrices;
        auto pool_for = [&](const PreferencePrompt& prompt,
                            const std::string& reflection) -> CandidatePool& {
            std::string key = prompt.key() + "|" + (reflection.empty() ? "std" : "engg");
            auto it = pools.find(key);
            if (it != pools.end()) return it->second;
            GeneratorConfig local = gen;
            local.reflection_template = reflection;
            return pools.emplace(key, evolve(instance, prompt, local, &cache)).first->second;
        };

        for (size_t m = 0; m < ctx.methods.size(); ++m) {
            const MethodSpec& spec = ctx.methods[m];
            PreferencePrompt prompt = effective_prompt(base_prompt, spec, instance.schema);
            std::string reflection =
                spec.base == MethodSpec::Base::DlmPromptEngg ? kPromptEnggReflectionTemplate : "";
            CandidatePool& pool = pool_for(prompt, reflection);
            if (pool.candidates.empty())
                throw std::runtime_error("run_matrix: empty candidate pool for " + prompt.key());

            int chosen = 0;
            switch (spec.base) {
                case MethodSpec::Base::Dlm:
                case MethodSpec::Base::DlmPromptEngg:
                    chosen = pool.dlm_choice;
                    break;
                case MethodSpec::Base::Zeroshot:
                    chosen = 0;
                    break;
                case MethodSpec::Base::SclmSim:
                case MethodSpec::Base::SclmLlm:
                case MethodSpec::Base::SclmFull: {
                    bool llm_scores = spec.base == MethodSpec::Base::SclmLlm;
                    std::string mkey = prompt.key() + "|" + (llm_scores ? "llm" : "sim");
                    auto it = matrices.find(mkey);
                    if (it == matrices.end())
                        it = matrices
                                 .emplace(mkey,
                                          build_score_matrix(
                                              pool, prompt,
                                              llm_scores ? ScorerModel::Llm : ScorerModel::Simulator,
                                              score_ctx, &proxies, transport.get(), default_dist))
                                 .first;
                    chosen = select(it->second, spec.welfare).chosen;
                    break;
                }
            }
            if (chosen < 0 || chosen >= static_cast<int>(pool.candidates.size()))
                throw std::runtime_error("run_matrix: invalid pick for " + spec.name);

            EvaluationRecord record;
            record.method = spec.name;
            record.dataset = dataset;
            record.instance_index = instance_index;
            record.prompt_index = p;
            record.prompt_key = base_prompt.key();
            record.chosen_source = pool.candidates[static_cast<size_t>(chosen)].expr.source();
            record.scores =
                evaluate_choice(pool.candidates[static_cast<size_t>(chosen)].expr, base_prompt,
                                score_ctx);
            records[static_cast<size_t>(cell_index) * ctx.methods.size() + m] = std::move(record);
        }

        auto sim_matrix = matrices.find(base_prompt.key() + "|sim");
        if (sim_matrix != matrices.end() && sim_matrix->second.n_clauses() == 2) {
            const ScoreMatrix& matrix = sim_matrix->second;
            std::vector<int> front = pareto_front(matrix);
            for (int j = 0; j < matrix.n_candidates(); ++j)
                scatter.push_back({dataset, instance_index, p, j, matrix.scores[0][static_cast<size_t>(j)],
                                   matrix.scores[1][static_cast<size_t>(j)],
                                   std::find(front.begin(), front.end(), j) != front.end()});
        }
    }
}

nlohmann::json stat_json(const std::vector<double>& values) {
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= values.empty() ? 1.0 : static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    double stderr_ = values.size() > 1
                         ? std::sqrt(var / static_cast<double>(values.size() - 1)) /
                               std::sqrt(static_cast<double>(values.size()))
                         : 0.0;
    return {{"mean", mean}, {"stderr", stderr_}};
}

}  // namespace

nlohmann::json aggregate_records(const std::vector<EvaluationRecord>& records) {
    std::map<std::string, std::vector<const EvaluationRecord*>> by_method;
    for (const auto& r : records) by_method[r.method].push_back(&r);

    nlohmann::json methods = nlohmann::json::object();
    for (const auto& [name, rs] : by_method) {
        nlohmann::json entry{{"cells", rs.size()}};
        for (int k = 0; k < 3; ++k) {
            std::vector<double> sums, mins;
            for (const auto* r : rs) {
                sums.push_back(r->scores.sum_pct[static_cast<size_t>(k)]);
                mins.push_back(r->scores.min_pct[static_cast<size_t>(k)]);
            }
            std::string kk = "k" + std::to_string(k + 1);
            entry["sum_pct_change"][kk] = stat_json(sums);
            entry["min_pct_change"][kk] = stat_json(mins);
        }
        std::vector<double> shifts, drops;
        for (const auto* r : rs) {
            shifts.push_back(r->scores.unintended_shift);
            drops.push_back(r->scores.utility_drop_pct);
        }
        entry["unintended_shift"] = stat_json(shifts);
        entry["utility_drop_pct"] = stat_json(drops);
        methods[name] = std::move(entry);
    }
    return nlohmann::json{{"methods", methods}, {"records", records.size()}};
}

RunMatrixResult run_matrix(const RunMatrixConfig& cfg) {
    std::vector<MethodSpec> methods;
    for (const auto& name : cfg.methods) methods.push_back(parse_method(name));
    if (methods.empty()) throw std::invalid_argument("run_matrix: no methods");

    DatasetConfig dataset_cfg = cfg.dataset;
    dataset_cfg.master_seed = derive_seed(cfg.master_seed, 0xDA7AULL);
    DatasetSuite suite = dataset_suite(dataset_cfg);

    FeatureSchema schema = suite.instances[0][0].schema;
    std::vector<PreferencePrompt> prompts = composite_prompts(schema);
    if (cfg.include_singular) {
        auto singular = singular_prompts(schema);
        prompts.insert(prompts.end(), singular.begin(), singular.end());
    }

    int n_datasets = static_cast<int>(suite.instances.size());
    int n_prompts = static_cast<int>(prompts.size());
    int n_tasks = n_datasets * dataset_cfg.n_instances;

    RunMatrixResult result;
    result.records.resize(static_cast<size_t>(n_tasks) * n_prompts * methods.size());
    std::vector<std::vector<PoolScatterPoint>> task_scatter(static_cast<size_t>(n_tasks));

    CellContext ctx{cfg, methods, prompts, n_prompts};
    std::atomic<int> next_task{0};
    std::atomic<bool> failed{false};
    std::string failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        for (int task = next_task.fetch_add(1); task < n_tasks; task = next_task.fetch_add(1)) {
            if (failed.load()) return;
            int d = task / dataset_cfg.n_instances;
            int i = task % dataset_cfg.n_instances;
            try {
                run_instance_task(ctx, d + 1, i, suite.instances[static_cast<size_t>(d)][static_cast<size_t>(i)],
                                  result.records, task_scatter[static_cast<size_t>(task)]);
            } catch (const std::exception& ex) {
                std::lock_guard lock(failure_mutex);
                failure = ex.what();
                failed.store(true);
                return;
            }
        }
    };

    int n_threads = cfg.threads > 0 ? cfg.threads
                                    : std::max(1u, std::thread::hardware_concurrency());
    n_threads = std::min(n_threads, n_tasks);
    std::vector<std::thread> threads;
    for (int t = 0; t < n_threads; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (failed.load()) throw std::runtime_error("run_matrix: " + failure);

    for (auto& points : task_scatter)
        result.scatter.insert(result.scatter.end(), points.begin(), points.end());
    result.report = aggregate_records(result.records);
    return result;
}

namespace {

nlohmann::json record_to_json(const EvaluationRecord& r) {
    nlohmann::json clauses = nlohmann::json::array();
    for (const auto& pct : r.scores.clause_pct) clauses.push_back({pct[0], pct[1], pct[2]});
    return nlohmann::json{{"method", r.method},
                          {"dataset", r.dataset},
                          {"instance", r.instance_index},
                          {"prompt", r.prompt_index},
                          {"prompt_key", r.prompt_key},
                          {"chosen", r.chosen_source},
                          {"clause_pct", clauses},
                          {"sum_pct", {r.scores.sum_pct[0], r.scores.sum_pct[1], r.scores.sum_pct[2]}},
                          {"min_pct", {r.scores.min_pct[0], r.scores.min_pct[1], r.scores.min_pct[2]}},
                          {"unintended_shift", r.scores.unintended_shift},
                          {"utility_drop_pct", r.scores.utility_drop_pct}};
}

EvaluationRecord record_from_json(const nlohmann::json& j) {
    EvaluationRecord r;
    r.method = j.at("method").get<std::string>();
    r.dataset = j.at("dataset").get<int>();
    r.instance_index = j.at("instance").get<int>();
    r.prompt_index = j.at("prompt").get<int>();
    r.prompt_key = j.at("prompt_key").get<std::string>();
    r.chosen_source = j.at("chosen").get<std::string>();
    for (const auto& pct : j.at("clause_pct"))
        r.scores.clause_pct.push_back({pct.at(0).get<double>(), pct.at(1).get<double>(),
                                       pct.at(2).get<double>()});
    for (int k = 0; k < 3; ++k) {
        r.scores.sum_pct[static_cast<size_t>(k)] = j.at("sum_pct").at(k).get<double>();
        r.scores.min_pct[static_cast<size_t>(k)] = j.at("min_pct").at(k).get<double>();
    }
    r.scores.unintended_shift = j.at("unintended_shift").get<double>();
    r.scores.utility_drop_pct = j.at("utility_drop_pct").get<double>();
    return r;
}

}  // namespace

void write_run_outputs(const RunMatrixResult& result, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    std::filesystem::path dir(out_dir);

    std::string cells_jsonl;
    for (const auto& r : result.records) cells_jsonl += record_to_json(r).dump() + "\n";
    write_text_file((dir / "cells.jsonl").string(), cells_jsonl);

    std::string csv =
        "method,dataset,instance,prompt,prompt_key,chosen,"
        "sum_pct_k1,sum_pct_k2,sum_pct_k3,min_pct_k1,min_pct_k2,min_pct_k3,"
        "unintended_shift,utility_drop_pct\n";
    for (const auto& r : result.records) {
        csv += r.method + "," + std::to_string(r.dataset) + "," + std::to_string(r.instance_index) +
               "," + std::to_string(r.prompt_index) + "," + r.prompt_key + ",\"" + r.chosen_source +
               "\"";
        for (int k = 0; k < 3; ++k) csv += "," + format_double(r.scores.sum_pct[static_cast<size_t>(k)]);
        for (int k = 0; k < 3; ++k) csv += "," + format_double(r.scores.min_pct[static_cast<size_t>(k)]);
        csv += "," + format_double(r.scores.unintended_shift) + "," +
               format_double(r.scores.utility_drop_pct) + "\n";
    }
    write_text_file((dir / "cells.csv").string(), csv);

    std::string scatter = "dataset,instance,prompt,candidate,score_a,score_b,on_front\n";
    for (const auto& pt : result.scatter)
        scatter += std::to_string(pt.dataset) + "," + std::to_string(pt.instance_index) + "," +
                   std::to_string(pt.prompt_index) + "," + std::to_string(pt.candidate) + "," +
                   format_double(pt.score_a) + "," + format_double(pt.score_b) + "," +
                   (pt.on_front ? "1" : "0") + "\n";
    write_text_file((dir / "pareto_scatter.csv").string(), scatter);

    write_text_file((dir / "report.json").string(), result.report.dump(2) + "\n");
}

std::vector<EvaluationRecord> load_records_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open records file: " + path);
    std::vector<EvaluationRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        records.push_back(record_from_json(nlohmann::json::parse(line)));
    }
    return records;
}

}  // namespace sclm
