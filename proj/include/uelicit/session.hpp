#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "uelicit/clustering.hpp"
#include "uelicit/decision_model.hpp"
#include "uelicit/tree.hpp"
#include "uelicit/utility.hpp"

namespace uelicit {

/**
 * Shared, immutable model and database plus per-history trees built on first
 * request. warm_up() builds every history up front.
 */
class TreeProvider
{
public:
    TreeProvider(std::shared_ptr<const DecisionModel> model, std::shared_ptr<const UtilityDatabase> db, std::size_t k,
                 double min_gap = kDefaultMinGap);

    const DecisionModel& model() const noexcept { return *model_; }
    const UtilityDatabase& db() const noexcept { return *db_; }
    std::size_t k() const noexcept { return k_; }
    double min_gap() const noexcept { return min_gap_; }

    std::shared_ptr<const ElicitationTree> tree(HistoryId h);
    std::shared_ptr<const Clustering> clustering(HistoryId h);
    void warm_up();
    std::size_t built() const;

private:
    std::shared_ptr<const DecisionModel> model_;
    std::shared_ptr<const UtilityDatabase> db_;
    std::size_t k_;
    double min_gap_;
    ClusteringCache clusterings_;
    mutable std::mutex mutex_;
    std::map<HistoryId, std::shared_ptr<const ElicitationTree>> trees_;
};

enum class SessionStatus
{
    in_progress,
    complete,
};

std::string to_string(SessionStatus status);

struct TranscriptEntry
{
    std::size_t node = 0;
    SplitQuestion question;
    bool answer = false;
};

struct SessionResult
{
    std::size_t label = 0;
    std::string prototype_id;
    std::vector<double> prototype_values;
    StrategyId strategy = 0;
    double expected_utility = 0.0; // of `strategy` under the prototype

    friend bool operator==(const SessionResult&, const SessionResult&) = default;
};

struct Session
{
    std::string id;
    HistoryId history = 0;
    std::size_t node = 0;
    std::vector<TranscriptEntry> transcript;
    SessionStatus status = SessionStatus::in_progress;
    std::optional<SessionResult> result;
};

struct QuestionView
{
    std::string session_id;
    std::size_t node = 0;
    SplitQuestion question;
    std::string text;
    std::vector<std::string> outcome_labels; // one for a feature question, two for a preference question
    std::size_t answered = 0;
    std::size_t max_depth = 0;
};

class SessionStore
{
public:
    explicit SessionStore(std::shared_ptr<TreeProvider> trees, std::uint64_t seed = std::random_device{}());

    TreeProvider& trees() noexcept { return *trees_; }

    // Throws NotFoundError for an unknown history.
    Session create(HistoryId h);
    Session create(std::string_view history_selector);

    Session get(const std::string& id) const;

    // StateError once the session is complete.
    QuestionView question(const std::string& id) const;

    // StateError on a complete session (state untouched); ConflictError when
    // another answer to the same session is still being applied.
    Session submit(const std::string& id, bool answer);

    // Drives a fresh session of history h with `answers`.
    Session replay(HistoryId h, const std::vector<bool>& answers);

    std::size_t size() const;

    // Sessions are stored as (id, history, answers) and rebuilt by replay on load.
    nlohmann::json snapshot() const;
    void restore(const nlohmann::json& snapshot);
    void save_snapshot(const std::filesystem::path& path) const;
    void load_snapshot(const std::filesystem::path& path);

private:
    struct Entry
    {
        std::mutex mutex;
        Session session;
        std::shared_ptr<const ElicitationTree> tree;
    };

    std::shared_ptr<Entry> find(const std::string& id) const;
    std::string next_id();
    void settle(Entry& entry) const;
    std::shared_ptr<Entry> open(HistoryId h, std::string id);

    std::shared_ptr<TreeProvider> trees_;
    mutable std::shared_mutex mutex_;
    std::map<std::string, std::shared_ptr<Entry>> sessions_;
    std::mutex rng_mutex_;
    std::mt19937_64 rng_;
};

nlohmann::json session_to_json(const Session& session, const DecisionModel& model);
nlohmann::json question_to_json(const QuestionView& view);
// Outcomes, histories and strategies with string ids.
nlohmann::json model_summary_json(const DecisionModel& model);

} // namespace uelicit
