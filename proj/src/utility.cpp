#include "uelicit/utility.hpp"

#include <algorithm>
#include <cmath>

#include "uelicit/error.hpp"
#include "hash.hpp"

namespace uelicit {

void check_normalized(const UtilityFunction& u, OutcomeId best_anchor, OutcomeId worst_anchor)
{
    if (best_anchor >= u.values.size() || worst_anchor >= u.values.size())
        throw ValidationError("utility '" + u.id + "': anchor outside vector");
    for (std::size_t o = 0; o < u.values.size(); ++o) {
        if (!(u.values[o] >= 0.0 && u.values[o] <= 1.0))
            throw ValidationError("utility '" + u.id + "': value for outcome " + std::to_string(o) + " outside [0,1]");
    }
    if (u.values[best_anchor] != 1.0 || u.values[worst_anchor] != 0.0)
        throw ValidationError("utility '" + u.id + "': anchors must be exactly 1 (best) and 0 (worst)");
}

NormalizeResult normalize(std::span<const double> raw, OutcomeId best_anchor, OutcomeId worst_anchor, std::string id)
{
    if (best_anchor >= raw.size() || worst_anchor >= raw.size() || best_anchor == worst_anchor)
        throw ValidationError("normalize: invalid anchors");
    const double hi = raw[best_anchor];
    const double lo = raw[worst_anchor];
    if (!(hi > lo))
        throw ValidationError("normalize: best anchor must be strictly preferred to worst anchor");

    NormalizeResult result;
    result.function.id = std::move(id);
    result.function.values.resize(raw.size());
    const double span = hi - lo;
    for (std::size_t o = 0; o < raw.size(); ++o) {
        double v = (raw[o] - lo) / span;
        if (v < 0.0 || v > 1.0) {
            v = std::clamp(v, 0.0, 1.0);
            result.clamped.push_back(o);
        }
        result.function.values[o] = v;
    }
    result.function.values[best_anchor] = 1.0;
    result.function.values[worst_anchor] = 0.0;
    return result;
}

StrategyProfile StrategyProfile::of(const DecisionModel& model, std::span<const double> u, HistoryId h)
{
    StrategyProfile p;
    p.expected = expected_utilities(model, u, h);
    for (StrategyId s = 1; s < p.expected.size(); ++s)
        if (p.expected[s] > p.expected[p.best]) p.best = s;
    return p;
}

double utility_loss(const DecisionModel& model, std::span<const double> truth, std::span<const double> proto,
                    HistoryId h)
{
    return utility_loss(StrategyProfile::of(model, truth, h), StrategyProfile::of(model, proto, h));
}

double distance(const DecisionModel& model, std::span<const double> a, std::span<const double> b, HistoryId h)
{
    return distance(StrategyProfile::of(model, a, h), StrategyProfile::of(model, b, h));
}

double averaged_distance(const DecisionModel& model, std::span<const double> a, std::span<const double> b)
{
    double total = 0.0;
    for (const auto& h : model.histories()) total += h.prior * distance(model, a, b, h.id);
    return total;
}

UtilityDatabase::UtilityDatabase(std::size_t outcome_count, std::string source)
    : outcome_count_(outcome_count)
    , source_(std::move(source))
{
}

void UtilityDatabase::add(UtilityFunction u)
{
    if (u.values.size() != outcome_count_) {
        throw ValidationError("utility '" + u.id + "' has " + std::to_string(u.values.size()) +
                              " values, database dimension is " + std::to_string(outcome_count_));
    }
    if (u.id.empty()) throw ValidationError("utility function id must not be empty");
    if (!index_.emplace(u.id, functions_.size()).second)
        throw ValidationError("duplicate utility function id '" + u.id + "'");
    functions_.push_back(std::move(u));
}

std::size_t UtilityDatabase::index_of(const std::string& id) const
{
    const auto it = index_.find(id);
    if (it == index_.end()) throw NotFoundError("no utility function with id '" + id + "'");
    return it->second;
}

UtilityDatabase UtilityDatabase::subset(std::span<const std::size_t> indices) const
{
    UtilityDatabase out(outcome_count_, source_);
    out.functions_.reserve(indices.size());
    for (std::size_t i : indices) out.add(functions_.at(i));
    return out;
}

std::uint64_t UtilityDatabase::fingerprint() const noexcept
{
    detail::Fnv1a hash;
    hash.add(static_cast<std::uint64_t>(outcome_count_));
    for (const auto& u : functions_) {
        hash.add(std::string_view(u.id));
        for (double v : u.values) hash.add(v);
    }
    return hash.value();
}

bool operator==(const UtilityDatabase& a, const UtilityDatabase& b)
{
    if (a.outcome_count_ != b.outcome_count_ || a.functions_.size() != b.functions_.size()) return false;
    for (std::size_t i = 0; i < a.functions_.size(); ++i) {
        if (a.functions_[i].id != b.functions_[i].id || a.functions_[i].values != b.functions_[i].values) return false;
    }
    return true;
}

LossTable::LossTable(const DecisionModel& model, const UtilityDatabase& db, HistoryId h)
    : history_(h)
{
    model.check_history(h);
    model.check_dimension(db.outcome_count());
    profiles_.reserve(db.size());
    for (const auto& u : db) profiles_.push_back(StrategyProfile::of(model, u.values, h));
}

LossTable::LossTable(std::vector<StrategyProfile> profiles, HistoryId h)
    : profiles_(std::move(profiles))
    , history_(h)
{
}

LossTable LossTable::subset(std::span<const std::size_t> indices) const
{
    std::vector<StrategyProfile> picked;
    picked.reserve(indices.size());
    for (std::size_t i : indices) picked.push_back(profiles_.at(i));
    return LossTable(std::move(picked), history_);
}

} // namespace uelicit
