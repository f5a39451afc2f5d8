#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "uelicit/decision_model.hpp"

namespace uelicit {

// A normalized utility function: one value in [0,1] per outcome, with the best
// anchor pinned to 1 and the worst anchor to 0.
struct UtilityFunction
{
    std::string id;
    std::vector<double> values;

    std::span<const double> view() const noexcept { return values; }
};

void check_normalized(const UtilityFunction& u, OutcomeId best_anchor, OutcomeId worst_anchor);

struct NormalizeResult
{
    UtilityFunction function;
    std::vector<OutcomeId> clamped; // outcomes whose rescaled value fell outside [0,1]
};

// Maps raw utilities by u -> a*u + b (a > 0) so that the anchors land on 1 and 0,
// then clamps whatever still lies outside [0,1].
NormalizeResult normalize(std::span<const double> raw, OutcomeId best_anchor, OutcomeId worst_anchor,
                          std::string id = {});

// Utility loss of advising `truth` with the strategy that is optimal for
// `proto`: EU_truth(s*_truth) - EU_truth(s*_proto). Asymmetric. Inputs are
// not range-checked so positive rescalings can be evaluated.
double utility_loss(const DecisionModel& model, std::span<const double> truth, std::span<const double> proto,
                    HistoryId h);

// Symmetrized loss: (UL(a, b) + UL(b, a)) / 2. Not a metric.
double distance(const DecisionModel& model, std::span<const double> a, std::span<const double> b, HistoryId h);

// Prior-weighted average of `distance` over every history.
double averaged_distance(const DecisionModel& model, std::span<const double> a, std::span<const double> b);

/// Per-strategy expected utilities of one utility function under one history,
/// together with its optimal strategy. Computing these once per function makes
/// every pairwise loss O(1).
struct StrategyProfile
{
    std::vector<double> expected;
    StrategyId best = 0;

    static StrategyProfile of(const DecisionModel& model, std::span<const double> u, HistoryId h);
};

inline double utility_loss(const StrategyProfile& truth, const StrategyProfile& proto) noexcept
{
    return truth.expected[truth.best] - truth.expected[proto.best];
}

inline double distance(const StrategyProfile& a, const StrategyProfile& b) noexcept
{
    return (utility_loss(a, b) + utility_loss(b, a)) / 2.0;
}

class UtilityDatabase
{
public:
    UtilityDatabase() = default;
    explicit UtilityDatabase(std::size_t outcome_count, std::string source = {});

    // Throws ValidationError on dimension mismatch or duplicate id.
    void add(UtilityFunction u);

    std::size_t size() const noexcept { return functions_.size(); }
    bool empty() const noexcept { return functions_.empty(); }
    std::size_t outcome_count() const noexcept { return outcome_count_; }
    const std::string& source() const noexcept { return source_; }
    void set_source(std::string source) { source_ = std::move(source); }

    const UtilityFunction& operator[](std::size_t i) const { return functions_[i]; }
    const UtilityFunction& at(std::size_t i) const { return functions_.at(i); }
    const std::vector<UtilityFunction>& functions() const noexcept { return functions_; }
    auto begin() const noexcept { return functions_.begin(); }
    auto end() const noexcept { return functions_.end(); }

    // Index of the function with this id; throws NotFoundError.
    std::size_t index_of(const std::string& id) const;
    bool contains(const std::string& id) const { return index_.count(id) != 0; }

    UtilityDatabase subset(std::span<const std::size_t> indices) const;

    std::uint64_t fingerprint() const noexcept;

    friend bool operator==(const UtilityDatabase& a, const UtilityDatabase& b);

private:
    std::size_t outcome_count_ = 0;
    std::string source_;
    std::vector<UtilityFunction> functions_;
    std::unordered_map<std::string, std::size_t> index_;
};

/**
 * Strategy profiles of every function in a database for one history. All
 * clustering and evaluation code reads losses through this table.
 */
class LossTable
{
public:
    LossTable(const DecisionModel& model, const UtilityDatabase& db, HistoryId h);
    LossTable(std::vector<StrategyProfile> profiles, HistoryId h);

    std::size_t size() const noexcept { return profiles_.size(); }
    HistoryId history() const noexcept { return history_; }
    const StrategyProfile& profile(std::size_t i) const { return profiles_[i]; }

    double loss(std::size_t truth, std::size_t proto) const { return utility_loss(profiles_[truth], profiles_[proto]); }
    double distance(std::size_t i, std::size_t j) const { return uelicit::distance(profiles_[i], profiles_[j]); }

    LossTable subset(std::span<const std::size_t> indices) const;

private:
    std::vector<StrategyProfile> profiles_;
    HistoryId history_;
};

} // namespace uelicit
