#include <doctest.h>

#include <chrono>
#include <limits>
#include <numeric>
#include <sstream>

#include "support/support.hpp"
#include "uelicit/error.hpp"
#include "uelicit/evaluation.hpp"

using namespace uelicit;

namespace {

GeneratedCorpus noiseless(std::size_t samples = 60)
{
    auto spec = load_spec(support::data_path("archetypes4.json"));
    spec.sigma = 0.0;
    spec.samples = samples;
    return generate(spec);
}

// Leave-one-out error when every function gets the single global prototype.
double oracle_loocv_k1(const DecisionModel& m, const UtilityDatabase& db, HistoryId h)
{
    const std::size_t n = db.size();
    double total = 0.0;
    for (std::size_t out = 0; out < n; ++out) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t proto = 0;
        for (std::size_t cand = 0; cand < n; ++cand) {
            if (cand == out) continue;
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j)
                if (j != out) s += support::oracle_ul(m, db[j].values, db[cand].values, h);
            if (s < best) {
                best = s;
                proto = cand;
            }
        }
        total += support::oracle_ul(m, db[out].values, db[proto].values, h);
    }
    return total / static_cast<double>(n);
}

} // namespace

TEST_CASE("noiseless corpus is classified without loss")
{
    const auto m = support::mini_panda();
    const auto c = noiseless();
    EvalOptions opt;
    opt.runs = 50;
    opt.seed = 1;
    for (HistoryId h = 0; h < m.history_count(); ++h) {
        const auto ho = holdout_error(c.db, m, h, opt);
        REQUIRE(ho.points.size() == 1);
        CHECK(ho.points[0].mean_error == 0.0);

        const std::size_t k4[] = {4};
        CHECK(loocv_over_k(c.db, m, h, k4).points[0].mean_error == 0.0);

        const std::size_t last[] = {c.db.size() - 1};
        CHECK(learning_curve(c.db, m, h, last, opt).points[0].mean_error == 0.0);
    }
}

TEST_CASE("single cluster leave-one-out matches the global prototype oracle")
{
    const auto m = support::mini_panda();
    support::Gen gen(51);
    for (int trial = 0; trial < 5; ++trial) {
        const auto db = gen.database(m, gen.between(3, 14));
        const auto h = gen.index(m.history_count());
        const std::size_t k1[] = {1};
        const auto r = loocv_over_k(db, m, h, k1);
        CHECK(r.points[0].mean_error == doctest::Approx(oracle_loocv_k1(m, db, h)).epsilon(1e-12));
        CHECK(r.points[0].samples.size() == db.size());
    }
}

TEST_CASE("split_error by hand on the worked fixture")
{
    const auto m = support::worked_model();
    UtilityDatabase db(3);
    db.add({"a", support::abc(0.9)});
    db.add({"b", support::abc(0.2)});
    db.add({"c", support::abc(0.95)});
    const LossTable losses(m, db, 0);
    // One cluster {a, b}: b scores 0.15 against a's 0.2, so c is advised s2.
    const std::size_t train[] = {0, 1}, test[] = {2};
    CHECK(support::oracle_ul(m, db[0].values, db[1].values, 0) == doctest::Approx(0.15));
    CHECK(split_error(db, losses, m, train, test, 1, kDefaultMinGap) == doctest::Approx(0.175).epsilon(1e-12));
    // Two clusters: c is routed to a's side of the B threshold.
    CHECK(split_error(db, losses, m, train, test, 2, kDefaultMinGap) == 0.0);
    CHECK_THROWS_AS(split_error(db, losses, m, train, std::span<const std::size_t>{}, 1, kDefaultMinGap),
                    ValidationError);
}

TEST_CASE("reports have the documented shape")
{
    const auto m = support::mini_panda();
    const auto c = support::bundled_corpus("archetypes4_noisy.json");
    EvalOptions opt;
    opt.runs = 20;
    opt.seed = 4;

    const auto ho = holdout_error(c.db, m, 1, opt);
    CHECK(ho.protocol == "holdout");
    CHECK(ho.points[0].x == 0.8);
    CHECK(ho.points[0].samples.size() == 20);
    CHECK(ho.runs == 20);
    CHECK(ho.points[0].mean_error ==
          doctest::Approx(std::accumulate(ho.points[0].samples.begin(), ho.points[0].samples.end(), 0.0) / 20.0)
              .epsilon(1e-15));

    const std::size_t sizes[] = {8, 16, 32};
    const auto lc = learning_curve(c.db, m, 1, sizes, opt);
    CHECK(lc.protocol == "learning-curve");
    REQUIRE(lc.points.size() == 3);
    CHECK(lc.points[2].x == 32.0);

    std::vector<std::size_t> ks(10);
    std::iota(ks.begin(), ks.end(), 1);
    const auto lo = loocv_over_k(c.db, m, 1, ks);
    CHECK(lo.protocol == "loocv");
    REQUIRE(lo.points.size() == 10);
    for (std::size_t i = 0; i < 10; ++i) {
        CHECK(lo.points[i].x == static_cast<double>(i + 1));
        for (double s : lo.points[i].samples) {
            CHECK(s >= 0.0);
            CHECK(s <= 1.0);
        }
    }

    std::ostringstream csv;
    write_csv(csv, lo);
    std::istringstream lines(csv.str());
    std::string line;
    std::getline(lines, line);
    CHECK(line == "protocol,history,x,mean_error,runs");
    std::size_t rows = 0;
    while (std::getline(lines, line)) {
        CHECK(line.rfind("loocv,1,", 0) == 0);
        ++rows;
    }
    CHECK(rows == 10);
    CHECK(summary(lo).find("loocv") != std::string::npos);
}

TEST_CASE("results do not depend on the run or the thread count")
{
    const auto m = support::mini_panda();
    const auto c = support::bundled_corpus("archetypes4_noisy.json");
    EvalOptions opt;
    opt.runs = 40;
    opt.seed = 9;
    const auto a = holdout_error(c.db, m, 2, opt);
    const auto b = holdout_error(c.db, m, 2, opt);
    opt.threads = 4;
    const auto t = holdout_error(c.db, m, 2, opt);
    CHECK(a.points[0].samples == b.points[0].samples);
    CHECK(a.points[0].samples == t.points[0].samples);
    CHECK(a.points[0].mean_error == t.points[0].mean_error);

    const std::size_t ks[] = {1, 3, 5};
    CHECK(loocv_over_k(c.db, m, 2, ks, kDefaultMinGap, 1).points[2].samples ==
          loocv_over_k(c.db, m, 2, ks, kDefaultMinGap, 3).points[2].samples);

    opt.threads = 1;
    opt.seed = 10;
    CHECK(holdout_error(c.db, m, 2, opt).points[0].samples != a.points[0].samples);
}

TEST_CASE("invalid evaluation requests")
{
    const auto m = support::mini_panda();
    const auto c = noiseless(10);
    EvalOptions opt;
    opt.runs = 2;

    opt.train_fraction = 1.0;
    CHECK_THROWS_AS(holdout_error(c.db, m, 0, opt), ValidationError);
    opt.train_fraction = 0.2; // 2 functions for k = 4
    CHECK_THROWS_AS(holdout_error(c.db, m, 0, opt), ValidationError);
    opt.train_fraction = 0.8;
    opt.runs = 0;
    CHECK_THROWS_AS(holdout_error(c.db, m, 0, opt), ValidationError);
    opt.runs = 2;
    CHECK_THROWS_AS(holdout_error(c.db, m, 9, opt), NotFoundError);

    const std::size_t too_big[] = {10};
    CHECK_THROWS_AS(learning_curve(c.db, m, 0, too_big, opt), ValidationError);
    CHECK_THROWS_AS(learning_curve(c.db, m, 0, std::span<const std::size_t>{}, opt), ValidationError);

    const std::size_t k0[] = {0}, kn[] = {10};
    CHECK_THROWS_AS(loocv_over_k(c.db, m, 0, k0), ValidationError);
    CHECK_THROWS_AS(loocv_over_k(c.db, m, 0, kn), ValidationError);
}

TEST_CASE("ten thousand holdout runs on twenty functions fit the budget")
{
    const auto m = support::mini_panda();
    auto spec = load_spec(support::data_path("archetypes4_noisy.json"));
    spec.samples = 20;
    const auto c = generate(spec);
    EvalOptions opt;
    opt.runs = 10000;
    opt.seed = 12;
    const auto start = std::chrono::steady_clock::now();
    const auto r = holdout_error(c.db, m, 0, opt);
    const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;
    MESSAGE("10000 runs took " << took.count() << " s");
    CHECK(r.points[0].samples.size() == 10000);
    CHECK(took.count() < 120.0);
}
