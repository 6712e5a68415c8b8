#include <doctest.h>

#include <cmath>
#include <map>

#include "support.hpp"
#include "twentyq/errors.hpp"
#include "twentyq/questioner.hpp"

using namespace twentyq;
using testing::record;

namespace {

double entropy(const std::vector<double>& p) {
    double h = 0;
    for (double x : p) {
        if (x > 0) {
            h -= x * std::log2(x);
        }
    }
    return h;
}

/// H(prior) - sum over {yes, no} of P(a) * H(posterior | a), with
/// P(yes | has feature) = q and P(yes | lacks it) = 1 - q.
double brute_gain(const std::vector<double>& prior, const std::vector<bool>& has, double q) {
    double expected = 0;
    for (bool yes : {true, false}) {
        std::vector<double> post(prior.size());
        double mass = 0;
        for (std::size_t i = 0; i < prior.size(); ++i) {
            const double l = has[i] == yes ? q : 1 - q;
            post[i] = prior[i] * l;
            mass += post[i];
        }
        for (double& x : post) {
            x /= mass;
        }
        expected += mass * entropy(post);
    }
    return entropy(prior) - expected;
}

GuessDistribution two(const std::string& target, double p) {
    return GuessDistribution{{target, "zz_other"}, {p, 1.0 - p}};
}

Taxonomy four_entities() {
    // f1 splits 3/1, f2 splits 2/2
    return Taxonomy({record("a", Category::Birds, "11"), record("b", Category::Birds, "11"),
                     record("c", Category::Fish, "10"), record("d", Category::Fish, "00")});
}

}  // namespace

TEST_CASE("feature catalogue renders questions") {
    CHECK(feature_catalog().size() == kFeatureCount);
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        const auto q = question_for_feature(f);
        CHECK(q.rfind("Is your animal ", 0) == 0);
        CHECK(q.back() == '?');
    }
}

TEST_CASE("information gain matches a brute-force entropy computation") {
    const auto tax = four_entities();
    const auto s = make_questioner(tax, 0.0);
    CHECK(expected_information_gain(s, tax, 0) == doctest::Approx(brute_gain({.25, .25, .25, .25}, {1, 1, 1, 0}, 0.9)));
    CHECK(expected_information_gain(s, tax, 1) == doctest::Approx(brute_gain({.25, .25, .25, .25}, {1, 1, 0, 0}, 0.9)));
    CHECK(next_question(s, tax).feature == 1);

    auto skewed = s;
    skewed.distribution.probabilities = {0.4, 0.1, 0.3, 0.2};
    for (std::size_t f : {0u, 1u}) {
        const std::vector<bool> has = f == 0 ? std::vector<bool>{1, 1, 1, 0} : std::vector<bool>{1, 1, 0, 0};
        CHECK(expected_information_gain(skewed, tax, f) ==
              doctest::Approx(brute_gain(skewed.distribution.probabilities, has, 0.9)));
    }
}

TEST_CASE("question choice edge cases") {
    const Taxonomy pair({record("a", Category::Birds, "1"), record("b", Category::Fish, "0")});
    auto s = make_questioner(pair, 0.0);
    CHECK(next_question(s, pair).feature == 0);

    // all mass on one entity: no feature helps, lowest index wins
    s.distribution.probabilities = {1.0, 0.0};
    CHECK(next_question(s, pair).feature == 0);
    s.asked = {0, 1, 2};
    CHECK(next_question(s, pair).feature == 3);

    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        s.asked.insert(f);
    }
    CHECK_THROWS_AS(next_question(s, pair), StateError);
}

TEST_CASE("bayesian update") {
    const Taxonomy pair({record("a", Category::Birds, "1"), record("b", Category::Fish, "0")});
    const auto s = make_questioner(pair, 0.0);
    const auto yes = update(s, pair, 0, AnswerLabel::Yes);
    CHECK(yes.distribution.probability("a") == doctest::Approx(0.9));
    CHECK(yes.turn == 1);
    CHECK(yes.asked.count(0) == 1);
    CHECK_THROWS_AS(update(yes, pair, 0, AnswerLabel::No), UsageError);

    const auto idk = update(yes, pair, 1, AnswerLabel::Idk);
    CHECK(idk.distribution.probabilities == yes.distribution.probabilities);

    const auto probably = update(s, pair, 0, AnswerLabel::Probably);
    CHECK(probably.distribution.probability("a") == doctest::Approx(0.65));
    const auto probably_not = update(s, pair, 0, AnswerLabel::ProbablyNot);
    CHECK(probably_not.distribution.probability("a") == doctest::Approx(0.35));

    auto full_mix = make_questioner(pair, 0.0);
    full_mix.lambda = 1.0;
    const auto mixed = update(full_mix, pair, 0, AnswerLabel::Yes);
    CHECK(mixed.distribution.probability("a") == doctest::Approx(0.5));

    const auto recency = update(make_questioner(pair, 0.02), pair, 0, AnswerLabel::Yes);
    CHECK(recency.distribution.probability("a") == doctest::Approx(0.98 * 0.9 + 0.01));
}

TEST_CASE("zero mass resets to uniform") {
    const Taxonomy pair({record("a", Category::Birds, "1"), record("b", Category::Fish, "1")});
    AnswerLikelihoods certain;
    certain.yes_given_true = 1.0;
    const auto s = update(make_questioner(pair, 0.0, certain), pair, 0, AnswerLabel::No);
    CHECK_THROWS_AS(make_questioner(pair, 1.0), UsageError);
    CHECK(s.anomalies == 1);
    CHECK(s.distribution.probability("a") == doctest::Approx(0.5));
}

TEST_CASE("distribution stays normalised") {
    const auto& tax = testing::bundled_engine()->taxonomy();
    Rng rng(8);
    auto s = make_questioner(tax);
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        s = update(std::move(s), tax, f, random_answerer(rng));
        double sum = 0;
        for (double p : s.distribution.probabilities) {
            CHECK(p >= 0.0);
            sum += p;
        }
        CHECK(std::abs(sum - 1.0) < 1e-9);
        const auto list = s.distribution.guess_list();
        CHECK(list.size() <= kGuessListSize);
        for (std::size_t i = 0; i < list.size(); ++i) {
            CHECK(list[i].second >= kGuessListFloor);
            if (i > 0) {
                CHECK(list[i - 1].second >= list[i].second);
            }
        }
    }
}

TEST_CASE("guess threshold") {
    QuestionerState s;
    s.distribution = two("a", 0.81);
    s.turn = 5;
    CHECK(should_guess(s) == "a");
    s.distribution = two("a", 0.8);
    CHECK_FALSE(should_guess(s));
    s.distribution = two("a", 0.5);
    s.turn = 40;
    CHECK_FALSE(should_guess(s));
    s.turn = 80;
    CHECK(should_guess(s) == "a");
}

TEST_CASE("random answerer frequencies") {
    Rng rng(2024);
    std::map<AnswerLabel, int> counts;
    constexpr int kDraws = 100000;
    for (int i = 0; i < kDraws; ++i) {
        ++counts[random_answerer(rng)];
    }
    CHECK(std::abs(counts[AnswerLabel::Yes] / double(kDraws) - 0.425) <= 0.01);
    CHECK(std::abs(counts[AnswerLabel::No] / double(kDraws) - 0.425) <= 0.01);
    CHECK(std::abs(counts[AnswerLabel::Idk] / double(kDraws) - 0.05) <= 0.005);
    CHECK(std::abs(counts[AnswerLabel::Probably] / double(kDraws) - 0.05) <= 0.005);
    CHECK(std::abs(counts[AnswerLabel::ProbablyNot] / double(kDraws) - 0.05) <= 0.005);

    Rng a(5);
    Rng b(5);
    for (int i = 0; i < 100; ++i) {
        CHECK(random_answerer(a) == random_answerer(b));
    }
}

TEST_CASE("metrics on hand-made traces") {
    SUBCASE("never listed") {
        std::vector<TraceEntry> trace;
        for (std::uint32_t t = 1; t <= 5; ++t) {
            trace.push_back({t, two("x", 0.001)});
        }
        const auto m = compute_metrics(trace, "x");
        CHECK(m.best_guess_probability == 0.0);
        CHECK(m.detour_recovery_times.empty());
        CHECK(m.convergence_rate == 0.0);
    }
    SUBCASE("one detour") {
        std::vector<TraceEntry> trace = {{1, two("x", 0.001)}, {2, two("x", 0.001)}, {3, two("x", 0.02)},
                                         {4, two("x", 0.05)},  {5, two("x", 0.10)},  {6, two("x", 0.001)},
                                         {7, two("x", 0.001)}, {8, two("x", 0.001)}, {9, two("x", 0.001)},
                                         {10, two("x", 0.04)}};
        const auto m = compute_metrics(trace, "x");
        CHECK(m.detour_recovery_times == std::vector<std::uint32_t>{4});
        CHECK(m.mean_recovery == 4.0);
        CHECK(m.best_guess_probability == doctest::Approx(0.10));

        auto shifted = trace;
        for (auto& e : shifted) {
            e.turn += 17;
        }
        const auto ms = compute_metrics(shifted, "x");
        CHECK(ms.detour_recovery_times == m.detour_recovery_times);
        CHECK(ms.best_guess_probability == m.best_guess_probability);
    }
    SUBCASE("convergence") {
        std::vector<TraceEntry> trace;
        for (std::uint32_t t = 10; t <= 20; ++t) {
            trace.push_back({t, two("x", 0.10 + 0.07 * (t - 10))});
        }
        CHECK(compute_metrics(trace, "x").convergence_rate == doctest::Approx(0.07));
    }
    SUBCASE("lost at the end") {
        std::vector<TraceEntry> trace = {{1, two("x", 0.3)}, {2, two("x", 0.5)}, {3, two("x", 0.001)}};
        const auto m = compute_metrics(trace, "x");
        CHECK(m.convergence_rate == 0.0);
        CHECK(m.detour_recovery_times.empty());
        CHECK(m.best_guess_probability == doctest::Approx(0.5));
    }
}

TEST_CASE("oracle self-play") {
    const auto& tax = testing::bundled_engine()->taxonomy();
    SimulationOptions opts;
    opts.lambda = 0.0;
    for (const auto& r : tax.records()) {
        OracleAnswerer oracle(r);
        const auto result = simulate_game(oracle, r.name, tax, opts);
        CHECK(result.guess == r.name);
        CHECK(result.metrics.won);
        CHECK(result.metrics.turns <= kQuestionerTurnLimit);
        double prev = 0.0;
        for (const auto& t : result.turns) {
            const double p = t.distribution.probability(r.name);
            CHECK(p >= prev - 1e-12);
            prev = p;
        }
    }
}

TEST_CASE("random self-play is deterministic and rarely wins") {
    const auto& tax = testing::bundled_engine()->taxonomy();
    int wins = 0;
    constexpr int kGames = 400;
    for (int seed = 0; seed < kGames; ++seed) {
        RandomAnswerer a(static_cast<std::uint64_t>(seed));
        RandomAnswerer b(static_cast<std::uint64_t>(seed));
        const auto ra = simulate_game(a, "cheetah", tax);
        const auto rb = simulate_game(b, "cheetah", tax);
        CHECK(ra.guess == rb.guess);
        CHECK(ra.turns.size() == rb.turns.size());
        wins += ra.metrics.won ? 1 : 0;
    }
    // chance is 1/20; allow generous sampling noise
    CHECK(wins / double(kGames) < 0.15);
}

TEST_CASE("csv and json output") {
    MetricsReport m;
    m.won = true;
    m.turns = 9;
    m.best_guess_probability = 0.875;
    m.mean_recovery = 2.5;
    m.convergence_rate = 0.1;
    CHECK(kEvalCsvHeader == "target,seed,won,turns,best_guess_probability,mean_recovery,convergence_rate");
    const auto row = eval_csv_row("cheetah", 3, m);
    CHECK(row.rfind("cheetah,3,1,9,0.875", 0) == 0);
    CHECK(std::count(row.begin(), row.end(), ',') == 6);
    const auto j = metrics_to_json(m);
    CHECK(j["turns"] == 9);
    CHECK(j["won"] == true);
}
