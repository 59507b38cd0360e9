#pragma once

#include <array>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sclm/datagen.hpp"
#include "sclm/scorers.hpp"

namespace sclm {

struct EvaluationScores {
    // % change of utility generated by the top/bottom-k buckets of each
    // prioritized category, k in {1,2,3} (index k-1).
    std::vector<std::array<double, 3>> clause_pct;
    std::array<double, 3> sum_pct{};
    std::array<double, 3> min_pct{};
    double unintended_shift = 0.0;  // mean EMD over non-prompted categories
    double utility_drop_pct = 0.0;  // % change of total utility vs the default policy
};

struct EvaluationRecord {
    std::string method;
    int dataset = 0;
    int instance_index = 0;
    int prompt_index = 0;
    std::string prompt_key;
    std::string chosen_source;
    EvaluationScores scores;
};

// Scores a chosen reward function against every prioritization clause of the
// prompt, on the same seeds as the default-policy baseline.
EvaluationScores evaluate_choice(const dsl::RewardExpression& chosen,
                                 const PreferencePrompt& prompt, const ScoringContext& ctx);

struct MethodSpec {
    enum class Base { SclmSim, SclmLlm, Dlm, DlmPromptEngg, Zeroshot, SclmFull };
    enum class Extension { None, Fair, Util };

    std::string name;
    Base base = Base::Dlm;
    WelfareFunction welfare = WelfareFunction::utilitarian();
    Extension extension = Extension::None;
};

// Accepts SCLM-SIM-{utilitarian,nash,egalitarian}, SCLM-LLM-{...}, DLM,
// DLM-PromptEngg, LLM-Zeroshot, SCLM-Full, each optionally suffixed with
// -ExtendedPrompt-Fair or -ExtendedPrompt-Util.
MethodSpec parse_method(const std::string& name);

struct RunMatrixConfig {
    DatasetConfig dataset;  // desk-scale defaults; n_instances per dataset
    GeneratorConfig generator;
    std::vector<std::string> methods{"SCLM-SIM-utilitarian", "SCLM-SIM-egalitarian", "DLM"};
    uint64_t master_seed = 0;
    bool offline = true;        // template backend + mock LLM transport
    bool include_singular = false;  // add the 6 singular prompts to the 12 composite
    int threads = 0;            // 0: hardware concurrency
};

struct CellPlan {
    int dataset;         // 1..3
    int instance_index;  // within dataset
    int prompt_index;    // into the prompt suite
};

std::vector<CellPlan> plan_cells(int n_datasets, int n_instances, int n_prompts);

// Alternative reflection template used by the DLM-PromptEngg baseline; also
// shipped as assets/reflection_promptengg.txt.
extern const char* const kPromptEnggReflectionTemplate;

struct PoolScatterPoint {
    int dataset, instance_index, prompt_index, candidate;
    double score_a, score_b;
    bool on_front;
};

struct RunMatrixResult {
    std::vector<EvaluationRecord> records;  // ordered by (cell, method)
    std::vector<PoolScatterPoint> scatter;  // simulator-score scatter for 2-clause prompts
    nlohmann::json report;
};

RunMatrixResult run_matrix(const RunMatrixConfig& cfg);

// Pure fold over per-cell records; run_matrix's report equals this.
nlohmann::json aggregate_records(const std::vector<EvaluationRecord>& records);

void write_run_outputs(const RunMatrixResult& result, const std::string& out_dir);
std::vector<EvaluationRecord> load_records_jsonl(const std::string& path);

}  // namespace sclm
