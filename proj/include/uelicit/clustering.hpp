#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <shared_mutex>
#include <span>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "uelicit/decision_model.hpp"
#include "uelicit/utility.hpp"

namespace uelicit {

// Dense symmetric matrix of pairwise distances.
class DistanceMatrix
{
public:
    DistanceMatrix() = default;
    explicit DistanceMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}

    std::size_t size() const noexcept { return n_; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * n_ + j]; }
    void set(std::size_t i, std::size_t j, double d) noexcept
    {
        data_[i * n_ + j] = d;
        data_[j * n_ + i] = d;
    }

private:
    std::size_t n_ = 0;
    std::vector<double> data_;
};

DistanceMatrix pairwise_distances(const LossTable& losses);

struct MergeStep
{
    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    double distance = 0.0;
};

/**
 * Group-average agglomeration over a fixed base distance matrix.
 *
 * Each active cluster occupies the slot of its smallest member, so slot order
 * is also the (min-member) order used for tie-breaking. After merging r and s
 * the distance to every other cluster i is updated with
 *   d(i, r+s) = (|r| d(i, r) + |s| d(i, s)) / (|r| + |s|),
 * which keeps d equal to the mean of all cross-pair base distances.
 */
class GroupAverageLinkage
{
public:
    explicit GroupAverageLinkage(DistanceMatrix base);

    std::size_t cluster_count() const noexcept { return active_.size(); }

    // Active clusters ordered by smallest member; members ascending.
    std::vector<std::vector<std::size_t>> clusters() const;

    // Maintained linkage between the clusters whose smallest members are a and b.
    double linkage(std::size_t a, std::size_t b) const;

    // Merges the closest pair. Ties go to the lexicographically smallest
    // (smaller min-member, larger min-member) pair.
    MergeStep merge_closest();

private:
    std::size_t n_;
    DistanceMatrix dist_;
    std::vector<std::size_t> active_; // slots in ascending order
    std::vector<std::vector<std::size_t>> members_;
};

struct Cluster
{
    std::vector<std::size_t> members; // database indices, ascending
    std::size_t prototype = 0;        // database index of the representative
    double prototype_score = 0.0;
};

struct Clustering
{
    HistoryId history = 0;
    std::size_t k_requested = 0;
    std::vector<Cluster> clusters; // ordered by smallest member
    DistanceMatrix distances;      // base pairwise distances
    std::vector<MergeStep> merges;
};

struct PrototypeChoice
{
    std::size_t index = 0;
    double score = 0.0;
};

// Member minimizing sum_j UL(member_j, candidate): the loss the cluster's
// members suffer when advised by the candidate. Ties (scores within
// kPrototypeTieTolerance of the minimum) go to the lowest index.
inline constexpr double kPrototypeTieTolerance = 1e-12;
PrototypeChoice select_prototype(std::span<const std::size_t> members, const LossTable& losses);

PrototypeChoice select_prototype(std::span<const std::size_t> members, const UtilityDatabase& db,
                                 const DecisionModel& model, HistoryId h);

// Agglomerates until exactly min(k, N) clusters remain.
Clustering hac(const LossTable& losses, std::size_t k);
Clustering hac(const UtilityDatabase& db, const DecisionModel& model, HistoryId h, std::size_t k);

// Cluster index for every function in `db`, in database order.
std::vector<std::size_t> label_database(const UtilityDatabase& db, const Clustering& clustering);

nlohmann::json clustering_to_json(const Clustering& clustering, const UtilityDatabase& db);

/**
 * Per-history clusterings keyed by (database, model, history, k). Readers
 * share a lock; computing a missing entry takes the writer lock.
 */
class ClusteringCache
{
public:
    std::shared_ptr<const Clustering> get(const UtilityDatabase& db, const DecisionModel& model, HistoryId h,
                                          std::size_t k);
    std::size_t size() const;

private:
    using Key = std::tuple<std::uint64_t, std::uint64_t, HistoryId, std::size_t>;
    mutable std::shared_mutex mutex_;
    std::map<Key, std::shared_ptr<const Clustering>> entries_;
};

} // namespace uelicit
