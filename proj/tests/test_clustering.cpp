#include <doctest.h>

#include <algorithm>
#include <limits>
#include <thread>

#include "support/support.hpp"
#include "uelicit/clustering.hpp"
#include "uelicit/error.hpp"

using namespace uelicit;
using support::abc;

namespace {

DistanceMatrix three_point_matrix()
{
    DistanceMatrix d(3);
    d.set(0, 1, 0.1);
    d.set(0, 2, 0.5);
    d.set(1, 2, 0.3);
    return d;
}

// Mean of all cross-pair base distances.
double mean_cross(const DistanceMatrix& base, const std::vector<std::size_t>& a, const std::vector<std::size_t>& b)
{
    double total = 0.0;
    for (std::size_t i : a)
        for (std::size_t j : b) total += base(i, j);
    return total / static_cast<double>(a.size() * b.size());
}

} // namespace

TEST_CASE("hand-traced three point agglomeration")
{
    GroupAverageLinkage link(three_point_matrix());
    const auto step = link.merge_closest();
    CHECK(step.left == std::vector<std::size_t>{0});
    CHECK(step.right == std::vector<std::size_t>{1});
    CHECK(step.distance == doctest::Approx(0.1));
    CHECK(link.cluster_count() == 2);
    CHECK(link.clusters() == std::vector<std::vector<std::size_t>>{{0, 1}, {2}});
    CHECK(link.linkage(0, 2) == doctest::Approx(0.4).epsilon(1e-15));
    CHECK_THROWS_AS(link.linkage(1, 2), NotFoundError);
}

TEST_CASE("labels follow clusters in smallest-member order")
{
    GroupAverageLinkage link(three_point_matrix());
    link.merge_closest();
    UtilityDatabase db(3);
    for (const char* id : {"u1", "u2", "u3"}) db.add({id, abc(0.5)});
    Clustering c;
    for (auto& members : link.clusters()) c.clusters.push_back({members, members.front(), 0.0});
    CHECK(label_database(db, c) == std::vector<std::size_t>{0, 0, 1});

    c.clusters.pop_back();
    CHECK_THROWS_AS(label_database(db, c), NotFoundError);
}

TEST_CASE("cluster count extremes")
{
    support::Gen gen(3);
    const auto m = support::mini_panda();
    const auto db = gen.database(m, 9);

    const auto all = hac(db, m, 0, 9);
    CHECK(all.clusters.size() == 9);
    CHECK(all.merges.empty());
    for (std::size_t i = 0; i < 9; ++i) {
        CHECK(all.clusters[i].members == std::vector<std::size_t>{i});
        CHECK(all.clusters[i].prototype == i);
        CHECK(all.clusters[i].prototype_score == 0.0);
    }

    const auto one = hac(db, m, 0, 1);
    REQUIRE(one.clusters.size() == 1);
    CHECK(one.clusters[0].members.size() == 9);
    CHECK(label_database(db, one) == std::vector<std::size_t>(9, 0));

    CHECK(hac(db, m, 0, 50).clusters.size() == 9);
    CHECK_THROWS_AS(hac(db, m, 0, 0), ValidationError);
    CHECK_THROWS_AS(hac(UtilityDatabase(22), m, 0, 2), ValidationError);
}

TEST_CASE("equal distances merge in lexicographic slot order")
{
    DistanceMatrix d(4);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = i + 1; j < 4; ++j) d.set(i, j, 1.0);
    GroupAverageLinkage link(d);
    auto s = link.merge_closest();
    CHECK(s.left == std::vector<std::size_t>{0});
    CHECK(s.right == std::vector<std::size_t>{1});
    s = link.merge_closest();
    CHECK(s.left == std::vector<std::size_t>{0, 1});
    CHECK(s.right == std::vector<std::size_t>{2});
}

TEST_CASE("prototype of a three member cluster by exhaustive scoring")
{
    const auto m = support::worked_model();
    UtilityDatabase db(3);
    db.add({"a", abc(0.9)}); // s1
    db.add({"b", abc(0.8)}); // s1
    db.add({"c", abc(0.4)}); // s2: EU(s1)=0.7 < 0.8
    const std::size_t members[] = {0, 1, 2};

    std::vector<double> score(3, 0.0);
    for (std::size_t cand = 0; cand < 3; ++cand)
        for (std::size_t j = 0; j < 3; ++j) score[cand] += support::oracle_ul(m, db[j].values, db[cand].values, 0);
    CHECK(score[0] == doctest::Approx(0.1));
    CHECK(score[1] == doctest::Approx(0.1));
    CHECK(score[2] == doctest::Approx(0.25));

    const auto choice = select_prototype(members, db, m, 0);
    CHECK(choice.index == 0);
    CHECK(choice.score == doctest::Approx(0.1).epsilon(1e-12));

    const std::size_t single[] = {2};
    CHECK(select_prototype(single, db, m, 0).index == 2);
    CHECK(select_prototype(single, db, m, 0).score == 0.0);
    CHECK_THROWS_AS(select_prototype(std::span<const std::size_t>{}, db, m, 0), ValidationError);
}

TEST_CASE("property: recurrence linkage equals direct mean over random databases")
{
    support::Gen gen(101);
    for (int trial = 0; trial < 250; ++trial) {
        const auto m = gen.model(gen.between(3, 7), 1, gen.between(2, 5));
        const std::size_t n = gen.between(2, 12);
        const auto db = gen.database(m, n, trial % 2 == 0);
        const LossTable losses(m, db, 0);
        const auto base = pairwise_distances(losses);
        GroupAverageLinkage link(base);
        while (link.cluster_count() > 1) {
            const auto clusters = link.clusters();
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t a = 0; a < clusters.size(); ++a)
                for (std::size_t b = a + 1; b < clusters.size(); ++b) {
                    const double direct = mean_cross(base, clusters[a], clusters[b]);
                    REQUIRE(link.linkage(clusters[a].front(), clusters[b].front()) ==
                            doctest::Approx(direct).epsilon(1e-9));
                    best = std::min(best, direct);
                }
            const auto step = link.merge_closest();
            REQUIRE(mean_cross(base, step.left, step.right) == doctest::Approx(best).epsilon(1e-9));
        }
    }
}

TEST_CASE("property: prototypes minimize the summed loss")
{
    support::Gen gen(102);
    for (int trial = 0; trial < 100; ++trial) {
        const auto m = gen.model(gen.between(3, 7), 2, gen.between(2, 5));
        const auto db = gen.database(m, gen.between(2, 12), trial % 2 == 0);
        const auto h = gen.index(2);
        const auto c = hac(db, m, h, gen.between(1, 4));
        std::size_t covered = 0;
        for (const auto& cluster : c.clusters) {
            covered += cluster.members.size();
            REQUIRE(std::is_sorted(cluster.members.begin(), cluster.members.end()));
            std::vector<double> score;
            for (std::size_t cand : cluster.members) {
                double s = 0.0;
                for (std::size_t j : cluster.members) s += support::oracle_ul(m, db[j].values, db[cand].values, h);
                score.push_back(s);
            }
            const double best = *std::min_element(score.begin(), score.end());
            REQUIRE(cluster.prototype_score == doctest::Approx(best).epsilon(1e-9));
            // lowest index among the (round-off) minimizers
            std::size_t first = 0;
            while (score[first] > best + 1e-12) ++first;
            REQUIRE(cluster.prototype == cluster.members[first]);
        }
        REQUIRE(covered == db.size());
        for (std::size_t i = 1; i < c.clusters.size(); ++i)
            REQUIRE(c.clusters[i - 1].members.front() < c.clusters[i].members.front());
    }
}

TEST_CASE("clustering is deterministic and exports ids")
{
    support::Gen gen(5);
    const auto m = support::mini_panda();
    const auto db = gen.database(m, 12);
    const auto a = hac(db, m, 1, 3);
    const auto b = hac(db, m, 1, 3);
    CHECK(clustering_to_json(a, db) == clustering_to_json(b, db));

    const auto doc = clustering_to_json(a, db);
    CHECK(doc["history"] == "1");
    CHECK(doc["k"] == 3);
    REQUIRE(doc["clusters"].size() == 3);
    CHECK(doc["clusters"][0]["members"][0] == "u0");
    CHECK(doc["clusters"][0]["prototype"].is_string());
}

TEST_CASE("cache shares one clustering per key across threads")
{
    support::Gen gen(6);
    const auto m = support::mini_panda();
    const auto db = gen.database(m, 10);
    ClusteringCache cache;
    std::vector<std::shared_ptr<const Clustering>> got(8);
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < got.size(); ++t) threads.emplace_back([&, t] { got[t] = cache.get(db, m, 2, 3); });
    for (auto& t : threads) t.join();
    for (const auto& g : got) CHECK(g == got.front());
    CHECK(cache.size() == 1);
    cache.get(db, m, 3, 3);
    cache.get(db, m, 2, 4);
    CHECK(cache.size() == 3);
}
