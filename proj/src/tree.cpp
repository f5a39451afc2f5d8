#include "uelicit/tree.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "uelicit/error.hpp"

namespace uelicit {

namespace {

// Gains at or below this are treated as zero; entropy round-off on
// label-independent splits lands around 1e-16.
constexpr double kMinGain = 1e-12;

std::string format_probability(double p)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", p);
    return buf;
}

std::vector<std::size_t> histogram(std::span<const std::size_t> labels, std::span<const std::size_t> subset,
                                   std::size_t label_count)
{
    std::vector<std::size_t> counts(label_count, 0);
    for (std::size_t i : subset) counts.at(labels[i]) += 1;
    return counts;
}

std::vector<SplitQuestion> candidates_for(const std::vector<std::vector<double>>& rows,
                                          std::span<const std::size_t> subset, double min_gap)
{
    std::vector<SplitQuestion> out;
    if (subset.empty()) return out;
    const std::size_t D = rows[subset.front()].size();
    out.reserve(D * (D - 1) / 2 + D * subset.size());
    for (OutcomeId i = 0; i + 1 < D; ++i)
        for (OutcomeId j = i + 1; j < D; ++j) out.push_back(SplitQuestion::preference(i, j));

    std::vector<double> values;
    values.reserve(subset.size());
    for (OutcomeId f = 0; f < D; ++f) {
        values.clear();
        for (std::size_t i : subset) values.push_back(rows[i][f]);
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        for (std::size_t t = 0; t + 1 < values.size(); ++t) {
            if (values[t + 1] - values[t] >= min_gap)
                out.push_back(SplitQuestion::feature(f, (values[t] + values[t + 1]) / 2.0));
        }
    }
    return out;
}

class TreeBuilder
{
public:
    TreeBuilder(const TrainingSet& training, const DecisionModel& model, double min_gap)
        : training_(training)
        , model_(model)
        , min_gap_(min_gap)
    {
    }

    std::vector<TreeNode> build()
    {
        std::vector<std::size_t> all(training_.rows.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        grow(all);
        return std::move(nodes_);
    }

private:
    std::size_t grow(const std::vector<std::size_t>& subset)
    {
        const auto counts = histogram(training_.labels, subset, training_.label_count());
        const std::size_t index = nodes_.size();
        nodes_.emplace_back(LeafNode{});

        const auto nonzero = std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; });
        if (nonzero <= 1) {
            nodes_[index] = make_leaf(counts);
            return index;
        }

        const auto candidates = candidates_for(training_.rows, subset, min_gap_);
        double best_gain = kMinGain;
        const SplitQuestion* best = nullptr;
        std::vector<std::size_t> yes_counts(counts.size()), no_counts(counts.size());
        for (const auto& q : candidates) {
            std::fill(yes_counts.begin(), yes_counts.end(), 0);
            std::fill(no_counts.begin(), no_counts.end(), 0);
            for (std::size_t i : subset) {
                auto& bucket = answer(q, training_.rows[i]) ? yes_counts : no_counts;
                bucket[training_.labels[i]] += 1;
            }
            const double g = gain(counts, yes_counts, no_counts);
            if (g > best_gain) {
                best_gain = g;
                best = &q;
            }
        }
        if (best == nullptr) {
            nodes_[index] = make_leaf(counts);
            return index;
        }

        const SplitQuestion question = *best;
        std::vector<std::size_t> yes, no;
        for (std::size_t i : subset) (answer(question, training_.rows[i]) ? yes : no).push_back(i);

        const std::size_t yes_child = grow(yes);
        const std::size_t no_child = grow(no);
        nodes_[index] = SplitNode{question, question_text(question, model_), yes_child, no_child};
        return index;
    }

    LeafNode make_leaf(const std::vector<std::size_t>& counts) const
    {
        std::size_t label = 0;
        for (std::size_t l = 1; l < counts.size(); ++l)
            if (counts[l] > counts[label]) label = l;
        return LeafNode{label, training_.prototype_ids.at(label), counts};
    }

    const TrainingSet& training_;
    const DecisionModel& model_;
    double min_gap_;
    std::vector<TreeNode> nodes_;
};

std::size_t depth_from(const std::vector<TreeNode>& nodes, std::size_t i, std::size_t guard)
{
    if (guard > nodes.size()) throw ValidationError("tree contains a cycle");
    if (const auto* split = std::get_if<SplitNode>(&nodes[i]))
        return 1 + std::max(depth_from(nodes, split->yes, guard + 1), depth_from(nodes, split->no, guard + 1));
    return 0;
}

std::string kind_name(SplitKind kind)
{
    return kind == SplitKind::preference ? "preference" : "feature";
}

OutcomeId parse_outcome(const nlohmann::json& v)
{
    if (v.is_string()) return static_cast<OutcomeId>(std::stoull(v.get<std::string>()));
    return v.get<OutcomeId>();
}

nlohmann::json node_to_json(const ElicitationTree& tree, std::size_t i)
{
    const auto& node = tree.node(i);
    if (const auto* leaf = std::get_if<LeafNode>(&node))
        return {{"label", leaf->label}, {"prototype", leaf->prototype}, {"counts", leaf->counts}};
    const auto& split = std::get<SplitNode>(node);
    return {{"question", split_to_json(split.question, split.text)},
            {"yes", node_to_json(tree, split.yes)},
            {"no", node_to_json(tree, split.no)}};
}

std::size_t node_from_json(const nlohmann::json& j, std::vector<TreeNode>& nodes)
{
    const std::size_t index = nodes.size();
    nodes.emplace_back(LeafNode{});
    if (j.contains("question")) {
        const auto& q = j.at("question");
        const auto kind = q.at("kind").get<std::string>();
        SplitQuestion question;
        if (kind == "preference") {
            question = SplitQuestion::preference(parse_outcome(q.at("o_i")), parse_outcome(q.at("o_j")));
        } else if (kind == "feature") {
            question = SplitQuestion::feature(parse_outcome(q.at("o_i")), q.at("c").get<double>());
        } else {
            throw ParseError("unknown split kind '" + kind + "'");
        }
        const auto text = q.value("text", std::string{});
        const std::size_t yes = node_from_json(j.at("yes"), nodes);
        const std::size_t no = node_from_json(j.at("no"), nodes);
        nodes[index] = SplitNode{question, text, yes, no};
    } else {
        nodes[index] = LeafNode{j.at("label").get<std::size_t>(), j.at("prototype").get<std::string>(),
                                j.at("counts").get<std::vector<std::size_t>>()};
    }
    return index;
}

} // namespace

SplitQuestion SplitQuestion::preference(OutcomeId a, OutcomeId b)
{
    if (a == b) throw ValidationError("preference split needs two different outcomes");
    return {SplitKind::preference, a, b, 0.0};
}

SplitQuestion SplitQuestion::feature(OutcomeId o, double threshold)
{
    if (!(threshold > 0.0 && threshold < 1.0)) throw ValidationError("feature split threshold must lie in (0,1)");
    return {SplitKind::feature, o, 0, threshold};
}

bool answer(const SplitQuestion& q, std::span<const double> u)
{
    if (q.kind == SplitKind::preference) return u[q.first] > u[q.second];
    return u[q.first] > q.threshold;
}

std::string question_text(const SplitQuestion& q, const DecisionModel& model)
{
    const auto& outcomes = model.outcomes();
    const auto& a = outcomes.at(q.first);
    std::ostringstream text;
    if (q.kind == SplitKind::preference) {
        const auto& b = outcomes.at(q.second);
        text << "Is outcome \"" << a.label << "\" preferred to outcome \"" << b.label << "\"? "
             << "That is, would you rather face " << a.question_text << " than " << b.question_text << "?";
    } else {
        const auto& best = outcomes.at(model.best_anchor());
        const auto& worst = outcomes.at(model.worst_anchor());
        text << "Is outcome \"" << a.label << "\" preferred to a lottery giving \"" << best.label
             << "\" with probability " << format_probability(q.threshold) << " and \"" << worst.label
             << "\" with probability " << format_probability(1.0 - q.threshold) << "? "
             << "That is, would you rather face " << a.question_text << " for certain than take that gamble?";
    }
    return text.str();
}

double entropy(std::span<const std::size_t> counts)
{
    std::size_t total = 0;
    for (std::size_t c : counts) total += c;
    if (total == 0) throw ValidationError("entropy of an empty histogram");
    double h = 0.0;
    for (std::size_t c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / static_cast<double>(total);
        h -= p * std::log2(p);
    }
    return h;
}

double gain(std::span<const std::size_t> parent, std::span<const std::size_t> yes, std::span<const std::size_t> no)
{
    std::size_t n = 0, n_yes = 0, n_no = 0;
    for (std::size_t c : parent) n += c;
    for (std::size_t c : yes) n_yes += c;
    for (std::size_t c : no) n_no += c;
    if (n == 0) throw ValidationError("gain of an empty node");
    if (n_yes + n_no != n) throw ValidationError("split children do not partition the parent");
    double g = entropy(parent);
    if (n_yes > 0) g -= static_cast<double>(n_yes) / static_cast<double>(n) * entropy(yes);
    if (n_no > 0) g -= static_cast<double>(n_no) / static_cast<double>(n) * entropy(no);
    return g;
}

double gain(const std::vector<std::vector<double>>& rows, std::span<const std::size_t> labels,
            std::size_t label_count, const SplitQuestion& q)
{
    if (rows.size() != labels.size()) throw ValidationError("one label per row required");
    std::vector<std::size_t> parent(label_count, 0), yes(label_count, 0), no(label_count, 0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        parent.at(labels[i]) += 1;
        (answer(q, rows[i]) ? yes : no)[labels[i]] += 1;
    }
    return gain(parent, yes, no);
}

std::vector<SplitQuestion> candidate_splits(const std::vector<std::vector<double>>& rows, double min_gap)
{
    if (min_gap < 0.0) throw ValidationError("gap threshold must be non-negative");
    std::vector<std::size_t> all(rows.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return candidates_for(rows, all, min_gap);
}

TrainingSet TrainingSet::from(const UtilityDatabase& db, const Clustering& clustering)
{
    TrainingSet t;
    t.labels = label_database(db, clustering);
    t.rows.reserve(db.size());
    for (const auto& u : db) t.rows.push_back(u.values);
    for (const auto& c : clustering.clusters) t.prototype_ids.push_back(db.at(c.prototype).id);
    return t;
}

ElicitationTree::ElicitationTree(HistoryId history, std::vector<TreeNode> nodes, TreeMetadata metadata)
    : history_(history)
    , nodes_(std::move(nodes))
    , metadata_(metadata)
{
    if (nodes_.empty()) throw ValidationError("a tree needs at least one node");
    for (const auto& node : nodes_) {
        if (const auto* split = std::get_if<SplitNode>(&node)) {
            if (split->yes >= nodes_.size() || split->no >= nodes_.size() || split->yes == 0 || split->no == 0)
                throw ValidationError("split node child index out of range");
        }
    }
    depth_ = depth_from(nodes_, 0, 0);
}

std::size_t ElicitationTree::leaf_count() const noexcept
{
    return static_cast<std::size_t>(
        std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return std::holds_alternative<LeafNode>(n); }));
}

ElicitationTree build_tree(const TrainingSet& training, const DecisionModel& model, HistoryId h, double min_gap,
                           TreeMetadata metadata)
{
    if (training.rows.empty()) throw ValidationError("cannot build a tree from an empty training set");
    if (training.rows.size() != training.labels.size()) throw ValidationError("one label per training row required");
    if (min_gap < 0.0) throw ValidationError("gap threshold must be non-negative");
    model.check_history(h);
    for (const auto& row : training.rows) model.check_dimension(row.size());
    for (std::size_t label : training.labels)
        if (label >= training.label_count()) throw ValidationError("training label without a prototype");

    metadata.min_gap = min_gap;
    metadata.training_size = training.rows.size();
    if (metadata.k == 0) metadata.k = training.label_count();
    return ElicitationTree(h, TreeBuilder(training, model, min_gap).build(), metadata);
}

Classification classify(const ElicitationTree& tree, const AnswerOracle& oracle)
{
    Classification result;
    std::size_t current = tree.root();
    while (const auto* split = std::get_if<SplitNode>(&tree.node(current))) {
        current = oracle(split->question) ? split->yes : split->no;
        ++result.questions;
    }
    const auto& leaf = std::get<LeafNode>(tree.node(current));
    result.label = leaf.label;
    result.prototype = leaf.prototype;
    result.leaf = current;
    return result;
}

Classification classify(const ElicitationTree& tree, std::span<const double> u)
{
    return classify(tree, [u](const SplitQuestion& q) { return answer(q, u); });
}

nlohmann::json split_to_json(const SplitQuestion& q, const std::string& text)
{
    nlohmann::json j{{"kind", kind_name(q.kind)}, {"o_i", std::to_string(q.first)}};
    if (q.kind == SplitKind::preference)
        j["o_j"] = std::to_string(q.second);
    else
        j["c"] = q.threshold;
    j["text"] = text;
    return j;
}

nlohmann::json tree_to_json(const ElicitationTree& tree)
{
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(tree.metadata().db_hash));
    return {{"history", std::to_string(tree.history())},
            {"k", tree.metadata().k},
            {"gamma", tree.metadata().min_gap},
            {"training_size", tree.metadata().training_size},
            {"db_hash", hash},
            {"depth", tree.depth()},
            {"root", node_to_json(tree, tree.root())}};
}

ElicitationTree tree_from_json(const nlohmann::json& doc)
{
    try {
        TreeMetadata meta;
        meta.k = doc.value("k", std::size_t{0});
        meta.min_gap = doc.value("gamma", kDefaultMinGap);
        meta.training_size = doc.value("training_size", std::size_t{0});
        if (doc.contains("db_hash")) meta.db_hash = std::stoull(doc.at("db_hash").get<std::string>(), nullptr, 16);
        const auto history = parse_outcome(doc.at("history"));
        std::vector<TreeNode> nodes;
        node_from_json(doc.at("root"), nodes);
        return ElicitationTree(history, std::move(nodes), meta);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("tree document: ") + e.what());
    } catch (const std::logic_error& e) {
        throw ParseError(std::string("tree document: ") + e.what());
    }
}

} // namespace uelicit
