#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sclm/generator.hpp"
#include "sclm/types.hpp"
#include "sclm/welfare.hpp"

namespace sclm {

inline constexpr int kInstanceSchemaVersion = 1;

std::string format_double(double v);  // shortest round-trip text

nlohmann::json instance_to_json(const RmabInstance& instance);
RmabInstance instance_from_json(const nlohmann::json& j);
void save_instance(const RmabInstance& instance, const std::string& path);
RmabInstance load_instance(const std::string& path);

// CSV: category,bucket,utility
void write_utility_csv(const UtilityFeatureDistribution& dist, const std::string& path);

// JSON-lines, one {id, source, round, proposal_index, monotone_flag} per candidate.
void write_pool_jsonl(const CandidatePool& pool, const std::string& path);

struct PoolRecord {
    int id;
    dsl::RewardExpression expr;
    int round;
    int proposal_index;
    bool monotone;
};
std::vector<PoolRecord> load_pool_jsonl(const std::string& path, int n_features);

// CSV with one row per candidate: raw and normalized layers per clause.
void write_score_matrix_csv(const ScoreMatrix& matrix, const std::string& path);

nlohmann::json selection_report_json(const ScoreMatrix& matrix, const SelectionResult& selection,
                                     const WelfareFunction& welfare);

uint64_t file_checksum(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace sclm
