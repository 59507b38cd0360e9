#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "sclm/datagen.hpp"
#include "sclm/scorers.hpp"

using namespace sclm;
using namespace sclm::testing;

namespace {

ScoreMatrix make_matrix(std::vector<std::vector<double>> scores) {
    ScoreMatrix m;
    m.scores = scores;
    m.raw = scores;
    size_t l = scores.size();
    for (size_t i = 0; i < l; ++i) {
        m.clause_labels.push_back("clause" + std::to_string(i));
        m.records.emplace_back();
        m.available.push_back(true);
        m.weights.push_back(1.0);
    }
    return m;
}

// Brute-force re-implementation of the selection rule used as an oracle.
int brute_force_select(const ScoreMatrix& m, double p) {
    std::vector<double> shift(m.scores.size(), 0.0);
    for (size_t i = 0; i < m.scores.size(); ++i) {
        double mn = *std::min_element(m.scores[i].begin(), m.scores[i].end());
        if (mn <= 0.0) shift[i] = 1e-6 - mn;
    }
    int best = -1;
    double best_w = -1.0;
    for (int j = 0; j < m.n_candidates(); ++j) {
        std::vector<double> col;
        for (size_t i = 0; i < m.scores.size(); ++i) col.push_back(m.scores[i][static_cast<size_t>(j)] + shift[i]);
        double w = pmean(col, p);
        if (w > best_w) {
            best_w = w;
            best = j;
        }
    }
    return best;
}

}  // namespace

TEST_CASE("p-mean hand values") {
    CHECK(pmean(std::vector<double>{2, 4}, 1.0) == doctest::Approx(3.0));
    CHECK(pmean(std::vector<double>{1, 4}, 0.0) == doctest::Approx(2.0));
    CHECK(pmean(std::vector<double>{2, 5, 3}, -std::numeric_limits<double>::infinity()) ==
          doctest::Approx(2.0));
    CHECK(pmean(std::vector<double>{2, 8}, -1.0) == doctest::Approx(3.2));  // harmonic mean
    CHECK(pmean(std::vector<double>{5}, 0.5) == doctest::Approx(5.0));
}

TEST_CASE("weighted p-mean") {
    std::vector<double> v{1, 3}, w{3, 1};
    CHECK(pmean(v, w, 1.0) == doctest::Approx(1.5));
    CHECK(pmean(v, w, 0.0) == doctest::Approx(std::pow(3.0, 0.25)));
    // Zero-weight entries are ignored by the min.
    std::vector<double> w2{0, 1};
    CHECK(pmean(v, w2, -std::numeric_limits<double>::infinity()) == doctest::Approx(3.0));
}

TEST_CASE("p-mean input validation") {
    CHECK_THROWS(pmean(std::vector<double>{}, 1.0));
    CHECK_THROWS(pmean(std::vector<double>{1, 0}, 1.0));
    CHECK_THROWS(pmean(std::vector<double>{1, -2}, 0.0));
    CHECK_THROWS(pmean(std::vector<double>{1, 2}, 2.0));
    CHECK_THROWS(pmean(std::vector<double>{1, 2}, std::vector<double>{1}, 1.0));
    CHECK_THROWS(pmean(std::vector<double>{1, 2}, std::vector<double>{0, 0}, 1.0));
    CHECK_THROWS(pmean(std::vector<double>{1, 2}, std::vector<double>{-1, 2}, 1.0));
}

TEST_CASE("monotonicity across presets") {
    std::mt19937_64 rng(51);
    std::uniform_real_distribution<double> u(0.01, 5.0);
    const double ps[] = {1.0, 0.5, 0.0, -1.0, -std::numeric_limits<double>::infinity()};
    for (int trial = 0; trial < 500; ++trial) {
        size_t n = 1 + rng() % 6;
        std::vector<double> x(n), y(n);
        for (size_t i = 0; i < n; ++i) {
            x[i] = u(rng);
            y[i] = x[i] + u(rng) * 0.2;  // y >= x elementwise
        }
        for (double p : ps) CHECK(pmean(x, p) <= pmean(y, p) + 1e-12);
    }
}

TEST_CASE("homogeneity within 1e-9 and p-monotonicity") {
    std::mt19937_64 rng(52);
    std::uniform_real_distribution<double> u(0.01, 5.0);
    for (int trial = 0; trial < 500; ++trial) {
        size_t n = 1 + rng() % 6;
        std::vector<double> x(n), scaled(n);
        double lambda = u(rng);
        for (size_t i = 0; i < n; ++i) {
            x[i] = u(rng);
            scaled[i] = lambda * x[i];
        }
        for (double p : {1.0, 0.0, -1.0, -std::numeric_limits<double>::infinity()}) {
            double f = pmean(x, p);
            CHECK(std::abs(pmean(scaled, p) - lambda * f) <= 1e-9 * std::max(1.0, lambda * f));
        }
        double mn = *std::min_element(x.begin(), x.end());
        double mx = *std::max_element(x.begin(), x.end());
        double egal = pmean(x, -std::numeric_limits<double>::infinity());
        double nash = pmean(x, 0.0);
        double util = pmean(x, 1.0);
        CHECK(egal == doctest::Approx(mn));
        CHECK(egal <= nash + 1e-12);
        CHECK(nash <= util + 1e-12);
        CHECK(util <= mx + 1e-12);
    }
}

TEST_CASE("welfare presets") {
    CHECK(WelfareFunction::preset("utilitarian").p == 1.0);
    CHECK(WelfareFunction::preset("nash").p == 0.0);
    CHECK(std::isinf(WelfareFunction::preset("egalitarian").p));
    CHECK_THROWS(WelfareFunction::preset("leximin"));
}

TEST_CASE("select matches the brute-force oracle") {
    std::mt19937_64 rng(53);
    std::uniform_real_distribution<double> u(-0.2, 1.0);
    for (int trial = 0; trial < 300; ++trial) {
        size_t l = 1 + rng() % 4, n = 1 + rng() % 8;
        std::vector<std::vector<double>> scores(l, std::vector<double>(n));
        for (auto& row : scores)
            for (auto& v : row) v = u(rng);
        ScoreMatrix m = make_matrix(scores);
        for (double p : {1.0, 0.0, -1.0, -std::numeric_limits<double>::infinity()}) {
            WelfareFunction w{p, {}};
            SelectionResult sel = select(m, w);
            CHECK(sel.chosen == brute_force_select(m, p));
            CHECK(sel.ranking.size() == n);
            for (size_t k = 1; k < sel.ranking.size(); ++k)
                CHECK(sel.ranking[k - 1].second >= sel.ranking[k].second);
        }
    }
}

TEST_CASE("select ties break toward the lowest candidate id") {
    ScoreMatrix m = make_matrix({{0.5, 0.7, 0.7, 0.2}});
    SelectionResult sel = select(m, WelfareFunction::utilitarian());
    CHECK(sel.chosen == 1);
}

TEST_CASE("select applies the positivity shift and records it") {
    ScoreMatrix m = make_matrix({{-0.5, 0.0, 0.5}, {0.2, 0.4, 0.6}});
    SelectionResult sel = select(m, WelfareFunction::nash());
    CHECK(sel.shifts[0] == doctest::Approx(0.5 + 1e-6));
    CHECK(sel.shifts[1] == 0.0);
    CHECK(sel.chosen == 2);
}

TEST_CASE("select skips unavailable clause rows") {
    ScoreMatrix m = make_matrix({{0.9, 0.1}, {0.1, 0.9}});
    m.available[0] = false;
    SelectionResult sel = select(m, WelfareFunction::utilitarian());
    CHECK(sel.chosen == 1);  // only row 1 counts

    m.available[1] = false;
    CHECK_THROWS(select(m, WelfareFunction::utilitarian()));
}

TEST_CASE("egalitarian pick attains the pool-maximum min score") {
    std::mt19937_64 rng(54);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        size_t l = 2 + rng() % 3, n = 2 + rng() % 6;
        std::vector<std::vector<double>> scores(l, std::vector<double>(n));
        for (auto& row : scores)
            for (auto& v : row) v = u(rng);
        ScoreMatrix m = make_matrix(scores);
        SelectionResult sel = select(m, WelfareFunction::egalitarian());
        double best_min = -1.0;
        for (size_t j = 0; j < n; ++j) {
            double mn = 1e300;
            for (size_t i = 0; i < l; ++i) mn = std::min(mn, scores[i][j]);
            best_min = std::max(best_min, mn);
        }
        double chosen_min = 1e300;
        for (size_t i = 0; i < l; ++i)
            chosen_min = std::min(chosen_min, scores[i][static_cast<size_t>(sel.chosen)]);
        CHECK(chosen_min == doctest::Approx(best_min));
    }
}

TEST_CASE("relative regret is zero without noise and bounded under it") {
    std::mt19937_64 rng(55);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    const double ps[] = {1.0, 0.5, 0.0, -1.0, -std::numeric_limits<double>::infinity()};
    for (int trial = 0; trial < 300; ++trial) {
        size_t l = 1 + rng() % 5, n = 2 + rng() % 5;
        std::vector<std::vector<double>> s(l, std::vector<double>(n));
        for (auto& row : s)
            for (auto& v : row) v = u(rng);
        for (double p : ps) CHECK(relative_regret(s, s, p) == doctest::Approx(0.0));

        double alpha = 0.8;
        std::uniform_real_distribution<double> noise(alpha, 1.0 / alpha);
        std::vector<std::vector<double>> noisy = s;
        for (auto& row : noisy)
            for (auto& v : row) v *= noise(rng);
        for (double p : ps) {
            double regret = relative_regret(s, noisy, p);
            CHECK(regret >= -1e-12);
            CHECK(regret <= 1.0 - alpha * alpha + 1e-12);
        }
    }
}

TEST_CASE("pareto front keeps exactly the non-dominated candidates") {
    // Strict dominance removes the inner point; incomparable points all stay.
    ScoreMatrix dominated = make_matrix({{0.9, 0.5, 0.3}, {0.8, 0.4, 0.9}});
    CHECK(pareto_front(dominated) == std::vector<int>{0, 2});

    ScoreMatrix incomparable = make_matrix({{1.0, 0.0, 0.2}, {0.0, 1.0, 0.2}});
    CHECK(pareto_front(incomparable) == std::vector<int>{0, 1, 2});

    ScoreMatrix equal = make_matrix({{0.5, 0.5}, {0.5, 0.5}});
    CHECK(pareto_front(equal) == std::vector<int>{0, 1});

    ScoreMatrix three_rows = make_matrix({{1.0}, {1.0}, {1.0}});
    CHECK_THROWS(pareto_front(three_rows));
}

TEST_CASE("pareto front matches pairwise dominance on random matrices") {
    std::mt19937_64 rng(56);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        size_t n = 1 + rng() % 10;
        std::vector<std::vector<double>> s(2, std::vector<double>(n));
        for (auto& row : s)
            for (auto& v : row) v = u(rng);
        ScoreMatrix m = make_matrix(s);
        std::vector<int> expected;
        for (size_t j = 0; j < n; ++j) {
            bool dom = false;
            for (size_t k = 0; k < n && !dom; ++k)
                dom = k != j && s[0][k] >= s[0][j] && s[1][k] >= s[1][j] &&
                      (s[0][k] > s[0][j] || s[1][k] > s[1][j]);
            if (!dom) expected.push_back(static_cast<int>(j));
        }
        CHECK(pareto_front(m) == expected);
    }
}

TEST_CASE("minmax01 normalization") {
    NormalizationRecord rec;
    auto out = minmax01({2.0, 4.0, 3.0}, &rec, false);
    CHECK(out == std::vector<double>{0.0, 1.0, 0.5});
    CHECK(rec.raw_min == 2.0);
    CHECK(rec.raw_max == 4.0);
    CHECK(!rec.inverted);
    CHECK(!rec.constant);

    auto inv = minmax01({2.0, 4.0, 3.0}, &rec, true);
    CHECK(inv == std::vector<double>{1.0, 0.0, 0.5});
    CHECK(rec.inverted);

    auto flat = minmax01({3.0, 3.0, 3.0}, &rec, false);
    CHECK(flat == std::vector<double>{0.5, 0.5, 0.5});
    CHECK(rec.constant);
}

TEST_CASE("score matrix validation") {
    ScoreMatrix ragged = make_matrix({{1.0, 2.0}, {1.0}});
    CHECK_THROWS(ragged.validate());
    ScoreMatrix with_nan = make_matrix({{1.0, std::nan("")}});
    CHECK_THROWS(with_nan.validate());
}

namespace {

RmabInstance scorer_instance(uint64_t rng_seed) {
    std::mt19937_64 rng(rng_seed);
    RmabInstance instance;
    instance.schema = synthetic_schema(5);
    instance.budget = 3;
    instance.horizon = 6;
    instance.discount = 0.9;
    int total = instance.schema.total_buckets();
    for (int i = 0; i < 12; ++i) {
        ArmModel arm = random_arm(rng);
        arm.features.assign(static_cast<size_t>(total), 0);
        int off = 0;
        for (const auto& cat : instance.schema.categories) {
            arm.features[static_cast<size_t>(off + static_cast<int>(rng() % cat.buckets.size()))] = 1;
            off += static_cast<int>(cat.buckets.size());
        }
        instance.arms.push_back(std::move(arm));
    }
    instance.validate();
    return instance;
}

CandidatePool scored_pool(const RmabInstance& instance, const std::vector<std::string>& sources,
                          const std::vector<uint64_t>& seeds, WhittleCache& cache) {
    CandidatePool pool;
    for (size_t i = 0; i < sources.size(); ++i) {
        Candidate c;
        c.id = static_cast<int>(i);
        c.expr = dsl::RewardExpression::parse(sources[i], instance.schema.total_buckets());
        c.distribution =
            simulate(instance, dsl::to_reward_table(c.expr, instance), {}, seeds, &cache)
                .distribution;
        pool.candidates.push_back(std::move(c));
    }
    return pool;
}

}  // namespace

TEST_CASE("simulator score is zero for the default policy candidate") {
    RmabInstance instance = scorer_instance(61);
    WhittleCache cache;
    auto seeds = simulation_seeds(7, 5);
    CandidatePool pool =
        scored_pool(instance, {"state", "state + state*(2*agent_feats[0] + 1*agent_feats[1])"},
                    seeds, cache);
    ScoringContext ctx{instance, &cache, seeds, {}};
    PreferenceClause clause{ClauseKind::Prioritize, "Feature A", Direction::Low, 1.0};

    auto proxy = dsl::RewardExpression::parse("state", instance.schema.total_buckets());
    NormalizationRecord rec;
    auto raw = simulator_score(clause, pool, ctx, proxy, &rec);
    REQUIRE(raw.size() == 2);
    CHECK(raw[0] == doctest::Approx(0.0));  // identical policy and accounting
    CHECK(rec.scorer == "simulator");
    CHECK(!rec.fallback_raw);

    PreferenceClause noshift{ClauseKind::NoShift, "Feature A", Direction::Low, 1.0};
    CHECK_THROWS(simulator_score(noshift, pool, ctx, proxy));
}

TEST_CASE("llm score parses ratings and gives up after three bad replies") {
    RmabInstance instance = scorer_instance(62);
    WhittleCache cache;
    auto seeds = simulation_seeds(8, 4);
    CandidatePool pool = scored_pool(instance, {"state", "state + 1"}, seeds, cache);
    PreferenceClause clause{ClauseKind::Prioritize, "Feature B", Direction::High, 1.0};

    TranscriptReplayTransport t({"rating: 4", "I think rating: 2 fits"});
    auto ratings = llm_score(clause, pool, t);
    REQUIRE(ratings.size() == 2);
    CHECK(ratings[0] == 4);
    CHECK(ratings[1] == 2);

    TranscriptReplayTransport bad({"rating: 7", "rating: 0", "no number at all", "rating: 3"});
    auto partial = llm_score(clause, scored_pool(instance, {"state"}, seeds, cache), bad);
    REQUIRE(partial.size() == 1);
    CHECK(!partial[0].has_value());
}

TEST_CASE("build_score_matrix wires each clause kind to its scorer") {
    RmabInstance instance = scorer_instance(63);
    WhittleCache cache;
    auto seeds = simulation_seeds(9, 5);
    CandidatePool pool = scored_pool(
        instance,
        {"state", "state + state*(2*agent_feats[0] + 1*agent_feats[1])", "state + state*agent_feats[9]"},
        seeds, cache);
    auto default_dist =
        simulate(instance, default_reward_table(instance.n_arms()), {}, seeds, &cache).distribution;

    PreferencePrompt prompt;
    prompt.clauses.push_back({ClauseKind::Prioritize, "Feature A", Direction::Low, 1.0});
    prompt.clauses.push_back({ClauseKind::NoShift, "Feature C", Direction::Low, 1.0});
    prompt.clauses.push_back({ClauseKind::MaximizeUtility, "", Direction::Low, 1.0});

    GeneratorConfig gen;
    gen.rounds = 1;
    gen.proposals_per_round = 2;
    gen.master_seed = 5;
    ProxyRewardCache proxies(gen);
    ScoringContext ctx{instance, &cache, seeds, {}};

    ScoreMatrix m = build_score_matrix(pool, prompt, ScorerModel::Simulator, ctx, &proxies, nullptr,
                                       default_dist);
    REQUIRE(m.n_clauses() == 3);
    REQUIRE(m.n_candidates() == 3);
    CHECK(m.clause_labels[0] == "prioritize:low:Feature A");
    CHECK(m.clause_labels[1] == "noshift:Feature C");
    CHECK(m.clause_labels[2] == "maxutil");
    CHECK(m.records[0].scorer == "simulator");
    CHECK(m.records[1].scorer == "emd-shift");
    CHECK(m.records[2].scorer == "total-utility");
    for (int i = 1; i < 3; ++i)
        for (double v : m.scores[static_cast<size_t>(i)]) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    m.validate();

    SelectionResult sel = select(m, WelfareFunction::utilitarian());
    CHECK(sel.chosen >= 0);
}

TEST_CASE("persistent rating failures mark the clause column unavailable") {
    RmabInstance instance = scorer_instance(64);
    WhittleCache cache;
    auto seeds = simulation_seeds(10, 4);
    CandidatePool pool = scored_pool(instance, {"state", "state + 1"}, seeds, cache);
    auto default_dist =
        simulate(instance, default_reward_table(instance.n_arms()), {}, seeds, &cache).distribution;

    PreferencePrompt prompt;
    prompt.clauses.push_back({ClauseKind::Prioritize, "Feature A", Direction::Low, 1.0});
    prompt.clauses.push_back({ClauseKind::MaximizeUtility, "", Direction::Low, 1.0});

    std::vector<std::string> replies(6, "rating: 9");
    TranscriptReplayTransport transport(replies);
    ScoringContext ctx{instance, &cache, seeds, {}};
    ScoreMatrix m = build_score_matrix(pool, prompt, ScorerModel::Llm, ctx, nullptr, &transport,
                                       default_dist);
    CHECK(!m.available[0]);
    CHECK(m.available[1]);
    SelectionResult sel = select(m, WelfareFunction::utilitarian());
    CHECK(sel.chosen >= 0);  // selection proceeds on the remaining clause
}

TEST_CASE("proxy rewards are cached per clause") {
    RmabInstance instance = scorer_instance(65);
    WhittleCache cache;
    GeneratorConfig gen;
    gen.rounds = 2;
    gen.proposals_per_round = 2;
    gen.master_seed = 77;
    ProxyRewardCache proxies(gen);
    PreferenceClause clause{ClauseKind::Prioritize, "Feature A", Direction::Low, 1.0};
    const auto& first = proxies.proxy(clause, instance, &cache);
    const auto& second = proxies.proxy(clause, instance, &cache);
    CHECK(&first == &second);

    PreferenceClause other{ClauseKind::Prioritize, "Feature A", Direction::High, 1.0};
    const auto& high = proxies.proxy(other, instance, &cache);
    CHECK(&high != &first);
}
