#include "uelicit/decision_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "uelicit/error.hpp"
#include "hash.hpp"

namespace uelicit {

namespace {

template <typename T>
void check_dense(const std::vector<T>& items, const char* what)
{
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (items[i].id != i) {
            std::ostringstream msg;
            msg << what << " ids must be dense, unique and listed in order; found id " << items[i].id
                << " at position " << i;
            throw ValidationError(msg.str());
        }
    }
}

} // namespace

DecisionModel::DecisionModel(std::vector<Outcome> outcomes,
                             std::vector<History> histories,
                             std::vector<Strategy> strategies,
                             std::vector<double> prob,
                             OutcomeId best_anchor,
                             OutcomeId worst_anchor)
    : outcomes_(std::move(outcomes))
    , histories_(std::move(histories))
    , strategies_(std::move(strategies))
    , prob_(std::move(prob))
    , best_anchor_(best_anchor)
    , worst_anchor_(worst_anchor)
{
    if (outcomes_.size() < 2) throw ValidationError("model needs at least 2 outcomes");
    if (histories_.empty()) throw ValidationError("model needs at least 1 history");
    if (strategies_.size() < 2) throw ValidationError("model needs at least 2 strategies");

    check_dense(outcomes_, "outcome");
    check_dense(histories_, "history");
    check_dense(strategies_, "strategy");

    if (best_anchor_ >= outcomes_.size() || worst_anchor_ >= outcomes_.size())
        throw ValidationError("anchor outcome id out of range");
    if (best_anchor_ == worst_anchor_)
        throw ValidationError("best and worst anchors must be different outcomes");

    double prior_sum = 0.0;
    for (const auto& h : histories_) {
        if (!(h.prior >= 0.0 && h.prior <= 1.0))
            throw ValidationError("history '" + h.label + "' prior outside [0,1]");
        prior_sum += h.prior;
    }
    if (std::abs(prior_sum - 1.0) > kSumTolerance) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "history priors sum to " << prior_sum << ", expected 1";
        throw ValidationError(msg.str());
    }
    if (std::abs(prior_sum - 1.0) > kRenormalizeAbove)
        for (auto& h : histories_) h.prior /= prior_sum;

    const std::size_t D = outcomes_.size();
    const std::size_t H = histories_.size();
    const std::size_t S = strategies_.size();
    if (prob_.size() != S * H * D) {
        std::ostringstream msg;
        msg << "probability table has " << prob_.size() << " entries, expected " << S << "x" << H << "x" << D;
        throw ValidationError(msg.str());
    }
    for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t h = 0; h < H; ++h) {
            double* row = prob_.data() + (s * H + h) * D;
            double sum = 0.0;
            for (std::size_t o = 0; o < D; ++o) {
                if (!(row[o] >= 0.0 && row[o] <= 1.0)) {
                    std::ostringstream msg;
                    msg << "P(o=" << o << " | s=" << s << ", h=" << h << ") = " << row[o] << " outside [0,1]";
                    throw ValidationError(msg.str());
                }
                sum += row[o];
            }
            if (std::abs(sum - 1.0) > kSumTolerance) {
                std::ostringstream msg;
                msg.precision(17);
                msg << "distribution for (strategy " << s << ", history " << h << ") sums to " << sum
                    << ", expected 1";
                throw ValidationError(msg.str());
            }
            if (std::abs(sum - 1.0) > kRenormalizeAbove)
                for (std::size_t o = 0; o < D; ++o) row[o] /= sum;
        }
    }

    detail::Fnv1a hash;
    hash.add(D);
    hash.add(H);
    hash.add(S);
    for (double p : prob_) hash.add(p);
    for (const auto& h : histories_) hash.add(h.prior);
    hash.add(best_anchor_);
    hash.add(worst_anchor_);
    fingerprint_ = hash.value();
}

std::span<const double> DecisionModel::distribution(StrategyId s, HistoryId h) const
{
    check_strategy(s);
    check_history(h);
    const std::size_t D = outcomes_.size();
    return {prob_.data() + (s * histories_.size() + h) * D, D};
}

HistoryId DecisionModel::find_history(std::string_view selector) const
{
    for (const auto& h : histories_)
        if (h.label == selector) return h.id;
    if (!selector.empty() && std::all_of(selector.begin(), selector.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        const auto id = static_cast<HistoryId>(std::stoull(std::string(selector)));
        if (id < histories_.size()) return id;
    }
    throw NotFoundError("unknown history '" + std::string(selector) + "'");
}

void DecisionModel::check_history(HistoryId h) const
{
    if (h >= histories_.size())
        throw NotFoundError("history id " + std::to_string(h) + " out of range");
}

void DecisionModel::check_strategy(StrategyId s) const
{
    if (s >= strategies_.size())
        throw NotFoundError("strategy id " + std::to_string(s) + " out of range");
}

void DecisionModel::check_dimension(std::size_t n) const
{
    if (n != outcomes_.size()) {
        throw ValidationError("utility vector has " + std::to_string(n) + " entries, model has " +
                              std::to_string(outcomes_.size()) + " outcomes");
    }
}

double expected_utility(const DecisionModel& model, std::span<const double> u, StrategyId s, HistoryId h)
{
    model.check_dimension(u.size());
    const auto p = model.distribution(s, h);
    double eu = 0.0;
    for (std::size_t o = 0; o < p.size(); ++o) eu += p[o] * u[o];
    return eu;
}

std::vector<double> expected_utilities(const DecisionModel& model, std::span<const double> u, HistoryId h)
{
    model.check_dimension(u.size());
    model.check_history(h);
    std::vector<double> eu(model.strategy_count());
    for (StrategyId s = 0; s < eu.size(); ++s) eu[s] = expected_utility(model, u, s, h);
    return eu;
}

BestStrategy best_strategy(const DecisionModel& model, std::span<const double> u, HistoryId h)
{
    const auto eu = expected_utilities(model, u, h);
    BestStrategy best{0, eu[0]};
    for (StrategyId s = 1; s < eu.size(); ++s) {
        if (eu[s] > best.expected_utility) best = {s, eu[s]};
    }
    return best;
}

DecisionModel model_from_json(const nlohmann::json& doc)
{
    try {
        std::vector<Outcome> outcomes;
        for (const auto& o : doc.at("outcomes"))
            outcomes.push_back({o.at("id").get<std::size_t>(), o.at("label").get<std::string>(),
                                o.value("question_text", o.at("label").get<std::string>())});
        std::vector<History> histories;
        for (const auto& h : doc.at("histories"))
            histories.push_back({h.at("id").get<std::size_t>(), h.at("label").get<std::string>(),
                                 h.at("prior").get<double>()});
        std::vector<Strategy> strategies;
        for (const auto& s : doc.at("strategies"))
            strategies.push_back({s.at("id").get<std::size_t>(), s.at("label").get<std::string>(),
                                  s.value("description", std::string{})});

        auto by_id = [](auto& v) { std::sort(v.begin(), v.end(), [](auto& a, auto& b) { return a.id < b.id; }); };
        by_id(outcomes);
        by_id(histories);
        by_id(strategies);

        const auto& prob = doc.at("prob");
        if (!prob.is_array() || prob.size() != strategies.size())
            throw ValidationError("prob must have one entry per strategy");
        std::vector<double> flat;
        flat.reserve(strategies.size() * histories.size() * outcomes.size());
        for (std::size_t s = 0; s < prob.size(); ++s) {
            if (!prob[s].is_array() || prob[s].size() != histories.size())
                throw ValidationError("prob[" + std::to_string(s) + "] must have one row per history");
            for (std::size_t h = 0; h < prob[s].size(); ++h) {
                const auto& row = prob[s][h];
                if (!row.is_array() || row.size() != outcomes.size()) {
                    throw ValidationError("prob[" + std::to_string(s) + "][" + std::to_string(h) +
                                          "] must have one entry per outcome");
                }
                for (const auto& p : row) flat.push_back(p.get<double>());
            }
        }
        return DecisionModel(std::move(outcomes), std::move(histories), std::move(strategies), std::move(flat),
                             doc.at("best_anchor").get<OutcomeId>(), doc.at("worst_anchor").get<OutcomeId>());
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("model document: ") + e.what());
    }
}

nlohmann::json model_to_json(const DecisionModel& model)
{
    nlohmann::json doc;
    auto& outcomes = doc["outcomes"] = nlohmann::json::array();
    for (const auto& o : model.outcomes())
        outcomes.push_back({{"id", o.id}, {"label", o.label}, {"question_text", o.question_text}});
    auto& histories = doc["histories"] = nlohmann::json::array();
    for (const auto& h : model.histories())
        histories.push_back({{"id", h.id}, {"label", h.label}, {"prior", h.prior}});
    auto& strategies = doc["strategies"] = nlohmann::json::array();
    for (const auto& s : model.strategies())
        strategies.push_back({{"id", s.id}, {"label", s.label}, {"description", s.description}});
    auto& prob = doc["prob"] = nlohmann::json::array();
    for (StrategyId s = 0; s < model.strategy_count(); ++s) {
        auto per_history = nlohmann::json::array();
        for (HistoryId h = 0; h < model.history_count(); ++h) {
            const auto p = model.distribution(s, h);
            per_history.push_back(std::vector<double>(p.begin(), p.end()));
        }
        prob.push_back(std::move(per_history));
    }
    doc["best_anchor"] = model.best_anchor();
    doc["worst_anchor"] = model.worst_anchor();
    return doc;
}

DecisionModel load_model(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open model file " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return model_from_json(doc);
}

void save_model(const DecisionModel& model, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) throw Error("cannot write model file " + path.string());
    out << model_to_json(model).dump(1) << '\n';
}

} // namespace uelicit
