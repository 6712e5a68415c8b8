#include "twentyq/questioner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "twentyq/errors.hpp"
#include "twentyq/game.hpp"

namespace twentyq {

namespace {

double entropy(const std::vector<double>& p) {
    double h = 0.0;
    for (const double x : p) {
        if (x > 0.0) {
            h -= x * std::log2(x);
        }
    }
    return h;
}

void normalize(std::vector<double>& p) {
    double total = 0.0;
    for (const double x : p) {
        total += x;
    }
    for (double& x : p) {
        x /= total;
    }
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace

const std::array<FeatureInfo, kFeatureCount>& feature_catalog() {
    static const std::array<FeatureInfo, kFeatureCount> catalog = {{
        {"hair", "covered in hair or fur"},
        {"feathers", "covered in feathers"},
        {"eggs", "an animal that lays eggs"},
        {"milk", "an animal that feeds its young on milk"},
        {"airborne", "able to fly"},
        {"aquatic", "an animal that lives in water"},
        {"predator", "a predator that hunts prey"},
        {"toothed", "an animal with teeth"},
        {"backbone", "an animal with a backbone"},
        {"breathes", "an animal that breathes air with lungs"},
        {"venomous", "venomous"},
        {"fins", "an animal with fins"},
        {"tail", "an animal with a tail"},
        {"domestic", "a domestic pet"},
        {"large", "a large animal"},
        {"spots", "an animal with spots"},
    }};
    return catalog;
}

std::string question_for_feature(std::size_t feature) {
    if (feature >= kFeatureCount) {
        throw UsageError("unknown feature " + std::to_string(feature));
    }
    return "Is your animal " + std::string(feature_catalog()[feature].phrase) + "?";
}

double AnswerLikelihoods::operator()(AnswerLabel answer, bool feature_value) const {
    switch (answer) {
        case AnswerLabel::Yes:
            return feature_value ? yes_given_true : 1.0 - yes_given_true;
        case AnswerLabel::No:
            return feature_value ? 1.0 - yes_given_true : yes_given_true;
        case AnswerLabel::Probably:
            return feature_value ? probably_given_true : 1.0 - probably_given_true;
        case AnswerLabel::ProbablyNot:
            return feature_value ? 1.0 - probably_given_true : probably_given_true;
        case AnswerLabel::Idk:
            return idk;
    }
    return idk;
}

double GuessDistribution::probability(std::string_view entity) const {
    for (std::size_t i = 0; i < entities.size(); ++i) {
        if (entities[i] == entity) {
            return probabilities[i];
        }
    }
    return 0.0;
}

std::vector<std::pair<std::string, double>> GuessDistribution::guess_list() const {
    std::vector<std::pair<std::string, double>> all;
    for (std::size_t i = 0; i < entities.size(); ++i) {
        if (probabilities[i] >= kGuessListFloor) {
            all.emplace_back(entities[i], probabilities[i]);
        }
    }
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) {
            return a.second > b.second;
        }
        return a.first < b.first;
    });
    if (all.size() > kGuessListSize) {
        all.resize(kGuessListSize);
    }
    return all;
}

bool GuessDistribution::in_guess_list(std::string_view entity) const {
    const auto list = guess_list();
    return std::any_of(list.begin(), list.end(), [&](const auto& e) { return e.first == entity; });
}

std::pair<std::string, double> GuessDistribution::argmax() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < probabilities.size(); ++i) {
        if (probabilities[i] > probabilities[best]) {
            best = i;
        }
    }
    return {entities.at(best), probabilities.at(best)};
}

QuestionerState make_questioner(const Taxonomy& taxonomy, double lambda, AnswerLikelihoods likelihoods) {
    if (taxonomy.size() == 0) {
        throw UsageError("questioner: empty taxonomy");
    }
    if (!(lambda >= 0.0 && lambda < 1.0)) {
        throw UsageError("questioner: lambda must lie in [0, 1)");
    }
    QuestionerState s;
    s.distribution.entities = taxonomy.names();
    s.distribution.probabilities.assign(taxonomy.size(), 1.0 / static_cast<double>(taxonomy.size()));
    s.lambda = lambda;
    s.likelihoods = likelihoods;
    return s;
}

double expected_information_gain(const QuestionerState& state, const Taxonomy& taxonomy, std::size_t feature) {
    const auto& p = state.distribution.probabilities;
    const double prior = entropy(p);
    double expected = 0.0;
    for (const AnswerLabel a : {AnswerLabel::Yes, AnswerLabel::No}) {
        std::vector<double> post(p.size());
        double mass = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            const bool value = taxonomy.at(state.distribution.entities[i]).features[feature];
            post[i] = p[i] * state.likelihoods(a, value);
            mass += post[i];
        }
        if (mass <= 0.0) {
            continue;
        }
        normalize(post);
        expected += mass * entropy(post);
    }
    return prior - expected;
}

QuestionChoice next_question(const QuestionerState& state, const Taxonomy& taxonomy) {
    if (state.turn >= kQuestionerTurnLimit) {
        throw StateError("questioner: turn limit reached");
    }
    std::optional<std::size_t> best;
    double best_gain = 0.0;
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        if (state.asked.contains(f)) {
            continue;
        }
        const double gain = expected_information_gain(state, taxonomy, f);
        if (!best || gain > best_gain + 1e-12) {
            best = f;
            best_gain = gain;
        }
    }
    if (!best) {
        throw StateError("questioner: every feature has been asked");
    }
    return QuestionChoice{*best, question_for_feature(*best)};
}

QuestionerState update(QuestionerState state, const Taxonomy& taxonomy, std::size_t feature, AnswerLabel answer) {
    if (feature >= kFeatureCount) {
        throw UsageError("update: unknown feature " + std::to_string(feature));
    }
    if (!state.asked.insert(feature).second) {
        throw UsageError("update: feature " + std::to_string(feature) + " was already asked");
    }
    auto& p = state.distribution.probabilities;
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const bool value = taxonomy.at(state.distribution.entities[i]).features[feature];
        p[i] *= state.likelihoods(answer, value);
        total += p[i];
    }
    const double uniform = 1.0 / static_cast<double>(p.size());
    if (!(total > 0.0) || !std::isfinite(total)) {
        std::fill(p.begin(), p.end(), uniform);
        ++state.anomalies;
    } else {
        for (double& x : p) {
            x /= total;
        }
    }
    for (double& x : p) {
        x = (1.0 - state.lambda) * x + state.lambda * uniform;
    }
    ++state.turn;
    return state;
}

std::optional<std::string> should_guess(const QuestionerState& state) {
    const auto [name, prob] = state.distribution.argmax();
    if (prob > kGuessThreshold || state.turn >= kQuestionerTurnLimit) {
        return name;
    }
    return std::nullopt;
}

AnswerLabel random_answerer(Rng& rng) {
    const double u = uniform_real(rng);
    if (u < 0.425) {
        return AnswerLabel::Yes;
    }
    if (u < 0.85) {
        return AnswerLabel::No;
    }
    if (u < 0.90) {
        return AnswerLabel::Probably;
    }
    if (u < 0.95) {
        return AnswerLabel::ProbablyNot;
    }
    return AnswerLabel::Idk;
}

AnswerLabel OracleAnswerer::answer(std::size_t feature, const std::string&) {
    return target_.features.at(feature) ? AnswerLabel::Yes : AnswerLabel::No;
}

AnswerLabel RandomAnswerer::answer(std::size_t, const std::string&) {
    return random_answerer(rng_);
}

AnswerLabel EngineAnswerer::answer(std::size_t, const std::string& question) {
    return session_.answer_question(question).answer;
}

MetricsReport compute_metrics(const std::vector<TraceEntry>& trace, std::string_view target) {
    MetricsReport m;
    if (trace.empty()) {
        return m;
    }
    std::vector<bool> present(trace.size());
    for (std::size_t i = 0; i < trace.size(); ++i) {
        present[i] = trace[i].distribution.in_guess_list(target);
        if (present[i]) {
            m.best_guess_probability = std::max(m.best_guess_probability, trace[i].distribution.probability(target));
        }
    }

    bool seen = false;
    bool absent = false;
    std::uint32_t absent_since = 0;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        if (present[i]) {
            if (absent) {
                m.detour_recovery_times.push_back(trace[i].turn - absent_since);
                absent = false;
            }
            seen = true;
        } else if (seen && !absent) {
            absent = true;
            absent_since = trace[i].turn;
        }
    }
    if (!m.detour_recovery_times.empty()) {
        double sum = 0.0;
        for (const auto t : m.detour_recovery_times) {
            sum += t;
        }
        m.mean_recovery = sum / static_cast<double>(m.detour_recovery_times.size());
    }

    if (present.back()) {
        std::size_t first = trace.size() - 1;
        while (first > 0 && present[first - 1]) {
            --first;
        }
        const auto& a = trace[first];
        const auto& b = trace.back();
        if (b.turn > a.turn) {
            m.convergence_rate = (b.distribution.probability(target) - a.distribution.probability(target)) /
                                 static_cast<double>(b.turn - a.turn);
        }
    }
    m.turns = trace.back().turn;
    return m;
}

SimulationResult simulate_game(Answerer& answerer, std::string_view target, const Taxonomy& taxonomy,
                               const SimulationOptions& options) {
    const auto& target_record = taxonomy.at(target);
    SimulationResult result;
    result.target = target_record.name;
    auto state = make_questioner(taxonomy, options.lambda, options.likelihoods);
    std::vector<TraceEntry> trace;
    std::size_t judged = 0;
    std::size_t judged_correct = 0;

    while (true) {
        if (auto g = should_guess(state)) {
            result.guess = *g;
            break;
        }
        if (state.asked.size() == kFeatureCount) {
            result.guess = state.distribution.argmax().first;
            break;
        }
        const auto choice = next_question(state, taxonomy);
        const double before = state.distribution.probability(target_record.name);
        const bool listed_before = state.distribution.in_guess_list(target_record.name);
        const AnswerLabel a = answerer.answer(choice.feature, choice.text);
        state = update(std::move(state), taxonomy, choice.feature, a);

        const double after = state.distribution.probability(target_record.name);
        if (listed_before && state.distribution.in_guess_list(target_record.name) &&
            (a == AnswerLabel::Yes || a == AnswerLabel::No)) {
            ++judged;
            judged_correct += after > before ? 1 : 0;
        }
        result.turns.push_back(SimulatedTurn{state.turn, choice.feature, choice.text, a, state.distribution});
        trace.push_back(TraceEntry{state.turn, state.distribution});
    }

    result.metrics = compute_metrics(trace, target_record.name);
    result.metrics.turns = state.turn;
    result.metrics.won = result.guess == target_record.name;
    result.anomalies = state.anomalies;
    if (judged > 0) {
        result.estimated_accuracy = static_cast<double>(judged_correct) / static_cast<double>(judged);
    }
    return result;
}

nlohmann::json simulated_turn_to_json(const SimulatedTurn& turn, std::string_view target) {
    nlohmann::json guesses = nlohmann::json::array();
    for (const auto& [name, p] : turn.distribution.guess_list()) {
        guesses.push_back({{"entity", name}, {"p", p}});
    }
    return {
        {"turn", turn.turn},
        {"feature", feature_catalog()[turn.feature].name},
        {"question", turn.question},
        {"answer", to_string(turn.answer)},
        {"target_probability", turn.distribution.probability(target)},
        {"guess_list", std::move(guesses)},
    };
}

nlohmann::json metrics_to_json(const MetricsReport& m) {
    return {
        {"won", m.won},
        {"turns", m.turns},
        {"best_guess_probability", m.best_guess_probability},
        {"detour_recovery_times", m.detour_recovery_times},
        {"mean_recovery", m.mean_recovery},
        {"convergence_rate", m.convergence_rate},
    };
}

std::string eval_csv_row(std::string_view target, std::uint64_t seed, const MetricsReport& m) {
    return std::string(target) + "," + std::to_string(seed) + "," + (m.won ? "1" : "0") + "," +
           std::to_string(m.turns) + "," + format_double(m.best_guess_probability) + "," +
           format_double(m.mean_recovery) + "," + format_double(m.convergence_rate);
}

}  // namespace twentyq
