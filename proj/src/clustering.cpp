#include "uelicit/clustering.hpp"

#include <algorithm>
#include <limits>
#include <mutex>

#include "uelicit/error.hpp"

namespace uelicit {

DistanceMatrix pairwise_distances(const LossTable& losses)
{
    const std::size_t n = losses.size();
    DistanceMatrix d(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) d.set(i, j, losses.distance(i, j));
    return d;
}

GroupAverageLinkage::GroupAverageLinkage(DistanceMatrix base)
    : n_(base.size())
    , dist_(std::move(base))
    , active_(n_)
    , members_(n_)
{
    for (std::size_t i = 0; i < n_; ++i) {
        active_[i] = i;
        members_[i] = {i};
    }
}

std::vector<std::vector<std::size_t>> GroupAverageLinkage::clusters() const
{
    std::vector<std::vector<std::size_t>> out;
    out.reserve(active_.size());
    for (std::size_t slot : active_) out.push_back(members_[slot]);
    return out;
}

double GroupAverageLinkage::linkage(std::size_t a, std::size_t b) const
{
    if (std::find(active_.begin(), active_.end(), a) == active_.end() ||
        std::find(active_.begin(), active_.end(), b) == active_.end())
        throw NotFoundError("no active cluster with that smallest member");
    return dist_(a, b);
}

MergeStep GroupAverageLinkage::merge_closest()
{
    if (active_.size() < 2) throw StateError("nothing left to merge");

    std::size_t best_a = 0, best_b = 1;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t x = 0; x < active_.size(); ++x) {
        for (std::size_t y = x + 1; y < active_.size(); ++y) {
            const double d = dist_(active_[x], active_[y]);
            if (d < best) {
                best = d;
                best_a = x;
                best_b = y;
            }
        }
    }
    const std::size_t r = active_[best_a];
    const std::size_t s = active_[best_b];

    MergeStep step{members_[r], members_[s], best};

    const double size_r = static_cast<double>(members_[r].size());
    const double size_s = static_cast<double>(members_[s].size());
    for (std::size_t i : active_) {
        if (i == r || i == s) continue;
        dist_.set(i, r, (size_r * dist_(r, i) + size_s * dist_(s, i)) / (size_r + size_s));
    }

    auto& merged = members_[r];
    merged.insert(merged.end(), members_[s].begin(), members_[s].end());
    std::sort(merged.begin(), merged.end());
    members_[s].clear();
    active_.erase(active_.begin() + static_cast<std::ptrdiff_t>(best_b));
    return step;
}

PrototypeChoice select_prototype(std::span<const std::size_t> members, const LossTable& losses)
{
    if (members.empty()) throw ValidationError("cannot pick a prototype for an empty cluster");
    std::vector<double> scores;
    scores.reserve(members.size());
    for (std::size_t candidate : members) {
        double score = 0.0;
        for (std::size_t j : members) score += losses.loss(j, candidate);
        scores.push_back(score);
    }
    // Scores equal up to summation round-off count as ties; the earliest member wins.
    const double lowest = *std::min_element(scores.begin(), scores.end());
    std::size_t pick = 0;
    while (scores[pick] > lowest + kPrototypeTieTolerance) ++pick;
    return {members[pick], scores[pick]};
}

PrototypeChoice select_prototype(std::span<const std::size_t> members, const UtilityDatabase& db,
                                 const DecisionModel& model, HistoryId h)
{
    return select_prototype(members, LossTable(model, db, h));
}

Clustering hac(const LossTable& losses, std::size_t k)
{
    if (k < 1) throw ValidationError("k must be at least 1");
    if (losses.size() == 0) throw ValidationError("cannot cluster an empty database");

    Clustering result;
    result.history = losses.history();
    result.k_requested = k;
    result.distances = pairwise_distances(losses);

    GroupAverageLinkage linkage(result.distances);
    while (linkage.cluster_count() > k) result.merges.push_back(linkage.merge_closest());

    for (auto& members : linkage.clusters()) {
        const auto proto = select_prototype(members, losses);
        result.clusters.push_back({std::move(members), proto.index, proto.score});
    }
    return result;
}

Clustering hac(const UtilityDatabase& db, const DecisionModel& model, HistoryId h, std::size_t k)
{
    if (db.empty()) throw ValidationError("cannot cluster an empty database");
    return hac(LossTable(model, db, h), k);
}

std::vector<std::size_t> label_database(const UtilityDatabase& db, const Clustering& clustering)
{
    constexpr auto unset = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> labels(db.size(), unset);
    for (std::size_t c = 0; c < clustering.clusters.size(); ++c) {
        for (std::size_t i : clustering.clusters[c].members) {
            if (i >= db.size()) throw ValidationError("clustering refers to a function outside the database");
            if (labels[i] != unset) throw ValidationError("function " + db[i].id + " appears in two clusters");
            labels[i] = c;
        }
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == unset) throw NotFoundError("function " + db[i].id + " is absent from the clustering");
    }
    return labels;
}

nlohmann::json clustering_to_json(const Clustering& clustering, const UtilityDatabase& db)
{
    nlohmann::json doc;
    doc["history"] = std::to_string(clustering.history);
    doc["k"] = clustering.k_requested;
    auto& clusters = doc["clusters"] = nlohmann::json::array();
    for (std::size_t c = 0; c < clustering.clusters.size(); ++c) {
        const auto& cluster = clustering.clusters[c];
        nlohmann::json ids = nlohmann::json::array();
        for (std::size_t i : cluster.members) ids.push_back(db.at(i).id);
        clusters.push_back({{"label", c},
                            {"members", std::move(ids)},
                            {"prototype", db.at(cluster.prototype).id},
                            {"prototype_score", cluster.prototype_score}});
    }
    return doc;
}

std::shared_ptr<const Clustering> ClusteringCache::get(const UtilityDatabase& db, const DecisionModel& model,
                                                       HistoryId h, std::size_t k)
{
    const Key key{db.fingerprint(), model.fingerprint(), h, k};
    {
        std::shared_lock lock(mutex_);
        if (auto it = entries_.find(key); it != entries_.end()) return it->second;
    }
    auto computed = std::make_shared<const Clustering>(hac(db, model, h, k));
    std::unique_lock lock(mutex_);
    return entries_.try_emplace(key, std::move(computed)).first->second;
}

std::size_t ClusteringCache::size() const
{
    std::shared_lock lock(mutex_);
    return entries_.size();
}

} // namespace uelicit
