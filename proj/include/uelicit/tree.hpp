#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "uelicit/clustering.hpp"
#include "uelicit/decision_model.hpp"
#include "uelicit/utility.hpp"

namespace uelicit {

enum class SplitKind
{
    preference, // is outcome `first` preferred to outcome `second`?
    feature,    // is outcome `first` preferred to the lottery [threshold, best; 1-threshold, worst]?
};

struct SplitQuestion
{
    SplitKind kind = SplitKind::preference;
    OutcomeId first = 0;
    OutcomeId second = 0; // preference only
    double threshold = 0.0; // feature only, strictly inside (0,1)

    static SplitQuestion preference(OutcomeId a, OutcomeId b);
    static SplitQuestion feature(OutcomeId o, double threshold);

    friend bool operator==(const SplitQuestion&, const SplitQuestion&) = default;
};

// Strict comparison: indifference answers "no".
bool answer(const SplitQuestion& q, std::span<const double> u);

// Plain-language rendering using the model's outcome labels and question texts.
std::string question_text(const SplitQuestion& q, const DecisionModel& model);

// Shannon entropy in bits of a label histogram. Throws on an empty histogram.
double entropy(std::span<const std::size_t> counts);

// I(parent) - P(yes) I(yes) - P(no) I(no) with empirical child weights.
// An empty child contributes nothing.
double gain(std::span<const std::size_t> parent, std::span<const std::size_t> yes, std::span<const std::size_t> no);

// Gain of `q` on labelled rows.
double gain(const std::vector<std::vector<double>>& rows, std::span<const std::size_t> labels,
            std::size_t label_count, const SplitQuestion& q);

// Every preference split (i < j, lexicographic), then for each outcome one
// feature split at the midpoint of each gap between consecutive distinct
// observed values whose width is at least `min_gap` (ascending thresholds).
std::vector<SplitQuestion> candidate_splits(const std::vector<std::vector<double>>& rows, double min_gap);

struct TrainingSet
{
    std::vector<std::vector<double>> rows;
    std::vector<std::size_t> labels;
    std::vector<std::string> prototype_ids; // indexed by label

    std::size_t label_count() const noexcept { return prototype_ids.size(); }

    static TrainingSet from(const UtilityDatabase& db, const Clustering& clustering);
};

struct LeafNode
{
    std::size_t label = 0;
    std::string prototype;
    std::vector<std::size_t> counts; // training examples per label
};

struct SplitNode
{
    SplitQuestion question;
    std::string text;
    std::size_t yes = 0;
    std::size_t no = 0;
};

using TreeNode = std::variant<SplitNode, LeafNode>;

struct TreeMetadata
{
    std::uint64_t db_hash = 0;
    std::size_t k = 0;
    double min_gap = 0.05;
    std::size_t training_size = 0;
};

// Nodes live in one vector; the root is node 0 and children are referenced by index.
class ElicitationTree
{
public:
    ElicitationTree(HistoryId history, std::vector<TreeNode> nodes, TreeMetadata metadata);

    HistoryId history() const noexcept { return history_; }
    const TreeMetadata& metadata() const noexcept { return metadata_; }
    std::size_t root() const noexcept { return 0; }
    std::size_t node_count() const noexcept { return nodes_.size(); }
    const TreeNode& node(std::size_t i) const { return nodes_.at(i); }
    bool is_leaf(std::size_t i) const { return std::holds_alternative<LeafNode>(node(i)); }
    std::size_t depth() const noexcept { return depth_; }
    std::size_t leaf_count() const noexcept;

private:
    HistoryId history_;
    std::vector<TreeNode> nodes_;
    TreeMetadata metadata_;
    std::size_t depth_ = 0;
};

inline constexpr double kDefaultMinGap = 0.05;

/**
 * Greedy top-down induction. At each node the candidate with the largest
 * entropy gain is taken; earlier candidates win ties, so preference splits
 * beat feature splits. Splitting stops when the node is pure or when no
 * candidate has positive gain, in which case the leaf takes the majority
 * label (lowest label on ties).
 */
ElicitationTree build_tree(const TrainingSet& training, const DecisionModel& model, HistoryId h,
                           double min_gap = kDefaultMinGap, TreeMetadata metadata = {});

struct Classification
{
    std::size_t label = 0;
    std::string prototype;
    std::size_t questions = 0;
    std::size_t leaf = 0;
};

using AnswerOracle = std::function<bool(const SplitQuestion&)>;

Classification classify(const ElicitationTree& tree, const AnswerOracle& oracle);
Classification classify(const ElicitationTree& tree, std::span<const double> u);

nlohmann::json split_to_json(const SplitQuestion& q, const std::string& text);
nlohmann::json tree_to_json(const ElicitationTree& tree);
ElicitationTree tree_from_json(const nlohmann::json& doc);

} // namespace uelicit
