#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace uelicit {

using OutcomeId = std::size_t;
using HistoryId = std::size_t;
using StrategyId = std::size_t;

struct Outcome
{
    OutcomeId id = 0;
    std::string label;
    std::string question_text;
};

struct History
{
    HistoryId id = 0;
    std::string label;
    double prior = 0.0;
};

struct Strategy
{
    StrategyId id = 0;
    std::string label;
    std::string description;
};

/**
 * A decision problem reduced to what the elicitation pipeline consumes: the
 * outcome distribution P(o | s, h) for every strategy and history, and the two
 * anchor outcomes that fix the utility scale.
 *
 * Immutable after construction. The constructor validates every invariant
 * (dense ids, row sums within 1e-9, anchors valid and distinct) and
 * renormalizes rows that are within tolerance.
 */
class DecisionModel
{
public:
    static constexpr double kSumTolerance = 1e-9;
    // Sums this close to 1 are kept as given so reloading a saved model is exact.
    static constexpr double kRenormalizeAbove = 1e-12;

    DecisionModel(std::vector<Outcome> outcomes,
                  std::vector<History> histories,
                  std::vector<Strategy> strategies,
                  std::vector<double> prob, // flattened [strategy][history][outcome]
                  OutcomeId best_anchor,
                  OutcomeId worst_anchor);

    std::size_t outcome_count() const noexcept { return outcomes_.size(); }
    std::size_t history_count() const noexcept { return histories_.size(); }
    std::size_t strategy_count() const noexcept { return strategies_.size(); }

    const std::vector<Outcome>& outcomes() const noexcept { return outcomes_; }
    const std::vector<History>& histories() const noexcept { return histories_; }
    const std::vector<Strategy>& strategies() const noexcept { return strategies_; }

    OutcomeId best_anchor() const noexcept { return best_anchor_; }
    OutcomeId worst_anchor() const noexcept { return worst_anchor_; }

    // P(. | s, h); throws ValidationError on invalid ids.
    std::span<const double> distribution(StrategyId s, HistoryId h) const;

    // Resolves a history by numeric id or by label.
    HistoryId find_history(std::string_view selector) const;

    void check_history(HistoryId h) const;
    void check_strategy(StrategyId s) const;
    void check_dimension(std::size_t n) const;

    // Content hash, stable across runs; used as a cache key.
    std::uint64_t fingerprint() const noexcept { return fingerprint_; }

private:
    std::vector<Outcome> outcomes_;
    std::vector<History> histories_;
    std::vector<Strategy> strategies_;
    std::vector<double> prob_;
    OutcomeId best_anchor_;
    OutcomeId worst_anchor_;
    std::uint64_t fingerprint_ = 0;
};

// sum_o P(o | s, h) u(o). No range check on u, so affine images of utilities
// can be evaluated directly.
double expected_utility(const DecisionModel& model, std::span<const double> u, StrategyId s, HistoryId h);

// Expected utility of every strategy, indexed by strategy id.
std::vector<double> expected_utilities(const DecisionModel& model, std::span<const double> u, HistoryId h);

struct BestStrategy
{
    StrategyId strategy = 0;
    double expected_utility = 0.0;
};

// argmax_s EU(s | h); ties go to the lowest strategy id.
BestStrategy best_strategy(const DecisionModel& model, std::span<const double> u, HistoryId h);

DecisionModel model_from_json(const nlohmann::json& doc);
nlohmann::json model_to_json(const DecisionModel& model);
DecisionModel load_model(const std::filesystem::path& path);
void save_model(const DecisionModel& model, const std::filesystem::path& path);

} // namespace uelicit
