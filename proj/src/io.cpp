#include "sclm/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sclm {

namespace {

nlohmann::json schema_to_json(const FeatureSchema& schema) {
    nlohmann::json cats = nlohmann::json::array();
    for (const auto& c : schema.categories)
        cats.push_back({{"name", c.name}, {"buckets", c.buckets}});
    return cats;
}

FeatureSchema schema_from_json(const nlohmann::json& j) {
    FeatureSchema schema;
    for (const auto& c : j)
        schema.categories.push_back(
            {c.at("name").get<std::string>(), c.at("buckets").get<std::vector<std::string>>()});
    return schema;
}

}  // namespace

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

nlohmann::json instance_to_json(const RmabInstance& instance) {
    nlohmann::json arms = nlohmann::json::array();
    for (const auto& arm : instance.arms) {
        nlohmann::json transitions = nlohmann::json::array();
        for (int s = 0; s < 2; ++s) {
            nlohmann::json actions = nlohmann::json::array();
            for (int a = 0; a < 2; ++a)
                actions.push_back({arm.transitions[s][a][0], arm.transitions[s][a][1]});
            transitions.push_back(actions);
        }
        nlohmann::json record{{"transitions", transitions},
                              {"features", std::vector<int>(arm.features.begin(), arm.features.end())}};
        if (!arm.raw_features.empty()) record["raw_features"] = arm.raw_features;
        arms.push_back(std::move(record));
    }
    return nlohmann::json{{"schema_version", kInstanceSchemaVersion},
                          {"N", instance.n_arms()},
                          {"K", instance.budget},
                          {"T", instance.horizon},
                          {"gamma", instance.discount},
                          {"feature_schema", schema_to_json(instance.schema)},
                          {"arms", arms}};
}

RmabInstance instance_from_json(const nlohmann::json& j) {
    if (j.at("schema_version").get<int>() != kInstanceSchemaVersion)
        throw std::runtime_error("unsupported instance schema_version");
    RmabInstance instance;
    instance.budget = j.at("K").get<int>();
    instance.horizon = j.at("T").get<int>();
    instance.discount = j.at("gamma").get<double>();
    instance.schema = schema_from_json(j.at("feature_schema"));
    for (const auto& record : j.at("arms")) {
        ArmModel arm;
        const auto& tr = record.at("transitions");
        for (int s = 0; s < 2; ++s)
            for (int a = 0; a < 2; ++a)
                for (int s2 = 0; s2 < 2; ++s2)
                    arm.transitions[s][a][s2] = tr.at(s).at(a).at(s2).get<double>();
        for (int v : record.at("features").get<std::vector<int>>())
            arm.features.push_back(static_cast<uint8_t>(v));
        if (record.contains("raw_features"))
            arm.raw_features = record.at("raw_features").get<std::vector<double>>();
        instance.arms.push_back(std::move(arm));
    }
    if (instance.n_arms() != j.at("N").get<int>())
        throw std::runtime_error("instance arm count does not match N");
    instance.validate();
    return instance;
}

void save_instance(const RmabInstance& instance, const std::string& path) {
    write_text_file(path, instance_to_json(instance).dump(2) + "\n");
}

RmabInstance load_instance(const std::string& path) {
    return instance_from_json(nlohmann::json::parse(read_text_file(path)));
}

void write_utility_csv(const UtilityFeatureDistribution& dist, const std::string& path) {
    std::string out = "category,bucket,utility\n";
    for (size_t ci = 0; ci < dist.schema.categories.size(); ++ci) {
        const auto& cat = dist.schema.categories[ci];
        for (size_t b = 0; b < cat.buckets.size(); ++b)
            out += cat.name + "," + cat.buckets[b] + "," + format_double(dist.totals[ci][b]) + "\n";
    }
    write_text_file(path, out);
}

void write_pool_jsonl(const CandidatePool& pool, const std::string& path) {
    std::string out;
    for (const auto& c : pool.candidates) {
        nlohmann::json record{{"id", c.id},
                              {"source", c.expr.source()},
                              {"round", c.round},
                              {"proposal_index", c.proposal_index},
                              {"monotone_flag", c.monotone}};
        out += record.dump() + "\n";
    }
    write_text_file(path, out);
}

std::vector<PoolRecord> load_pool_jsonl(const std::string& path, int n_features) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open pool file: " + path);
    std::vector<PoolRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto j = nlohmann::json::parse(line);
        records.push_back({j.at("id").get<int>(),
                           dsl::RewardExpression::parse(j.at("source").get<std::string>(), n_features),
                           j.at("round").get<int>(), j.at("proposal_index").get<int>(),
                           j.at("monotone_flag").get<bool>()});
    }
    return records;
}

void write_score_matrix_csv(const ScoreMatrix& matrix, const std::string& path) {
    std::string out = "candidate";
    for (const auto& label : matrix.clause_labels) out += ",raw:" + label;
    for (const auto& label : matrix.clause_labels) out += ",normalized:" + label;
    out += "\n";
    for (int j = 0; j < matrix.n_candidates(); ++j) {
        out += std::to_string(j);
        for (int i = 0; i < matrix.n_clauses(); ++i) out += "," + format_double(matrix.raw[i][j]);
        for (int i = 0; i < matrix.n_clauses(); ++i) out += "," + format_double(matrix.scores[i][j]);
        out += "\n";
    }
    write_text_file(path, out);
}

nlohmann::json selection_report_json(const ScoreMatrix& matrix, const SelectionResult& selection,
                                     const WelfareFunction& welfare) {
    nlohmann::json clauses = nlohmann::json::array();
    for (int i = 0; i < matrix.n_clauses(); ++i) {
        const auto& rec = matrix.records[i];
        clauses.push_back({{"clause", matrix.clause_labels[i]},
                           {"scorer", rec.scorer},
                           {"available", static_cast<bool>(matrix.available[i])},
                           {"score", matrix.scores[i][selection.chosen]},
                           {"positivity_shift", selection.shifts[i]},
                           {"minmax", rec.minmax},
                           {"constant_column", rec.constant},
                           {"fallback_raw", rec.fallback_raw}});
    }
    nlohmann::json ranking = nlohmann::json::array();
    for (const auto& [id, value] : selection.ranking)
        ranking.push_back({{"candidate", id}, {"welfare", value}});

    nlohmann::json pareto = nlohmann::json::array();
    if (matrix.n_clauses() == 2)
        for (int id : pareto_front(matrix)) pareto.push_back(id);

    return nlohmann::json{{"chosen", selection.chosen},
                          {"welfare", selection.welfare},
                          {"p", std::isinf(welfare.p) ? nlohmann::json("-inf") : nlohmann::json(welfare.p)},
                          {"clauses", clauses},
                          {"ranking", ranking},
                          {"pareto_front", pareto}};
}

uint64_t file_checksum(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file for checksum: " + path);
    uint64_t h = 0xcbf29ce484222325ULL;
    char buf[4096];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
        if (!in) break;
    }
    return h;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace sclm
