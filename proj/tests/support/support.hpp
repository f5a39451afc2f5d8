#pragma once

// Shared fixtures, hand-rolled generators and brute-force oracles for tests.
// The oracles deliberately avoid library helpers so they check the library
// rather than restate it.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "uelicit/corpus.hpp"
#include "uelicit/decision_model.hpp"
#include "uelicit/utility.hpp"

namespace support {

using namespace uelicit;

inline std::filesystem::path data_path(const std::string& name)
{
    return std::filesystem::path(UELICIT_DATA_DIR) / name;
}

inline DecisionModel worked_model() { return load_model(data_path("fixtures/worked_3x2.json")); }
inline DecisionModel minimal_model() { return load_model(data_path("fixtures/minimal_2x2.json")); }
inline DecisionModel mini_panda() { return load_model(data_path("mini_panda.json")); }

// Worked-fixture utility with u(A)=1, u(B)=b, u(C)=0.
inline std::vector<double> abc(double b) { return {1.0, b, 0.0}; }

class Gen
{
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
    std::size_t between(std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_); }
    bool coin() { return uniform() < 0.5; }
    std::mt19937_64& engine() { return rng_; }

    std::vector<double> simplex(std::size_t n)
    {
        std::vector<double> p(n);
        double total = 0.0;
        for (auto& x : p) {
            // Sparse rows now and then, as real outcome tables have many zeros.
            x = coin() && coin() ? 0.0 : -std::log(uniform(1e-12, 1.0));
            total += x;
        }
        if (total == 0.0) {
            p[index(n)] = 1.0;
            return p;
        }
        for (auto& x : p) x /= total;
        return p;
    }

    DecisionModel model(std::size_t D, std::size_t H, std::size_t S)
    {
        std::vector<Outcome> outcomes;
        for (std::size_t o = 0; o < D; ++o) outcomes.push_back({o, "o" + std::to_string(o), "outcome " + std::to_string(o)});
        std::vector<History> histories;
        const auto priors = simplex(H);
        for (std::size_t h = 0; h < H; ++h) histories.push_back({h, "h" + std::to_string(h), priors[h]});
        std::vector<Strategy> strategies;
        for (std::size_t s = 0; s < S; ++s) strategies.push_back({s, "s" + std::to_string(s), "strategy " + std::to_string(s)});
        std::vector<double> prob;
        for (std::size_t s = 0; s < S; ++s)
            for (std::size_t h = 0; h < H; ++h) {
                const auto row = simplex(D);
                prob.insert(prob.end(), row.begin(), row.end());
            }
        return DecisionModel(outcomes, histories, strategies, prob, 0, D - 1);
    }

    std::vector<double> utility(std::size_t D, OutcomeId best, OutcomeId worst)
    {
        std::vector<double> u(D);
        for (auto& x : u) x = uniform();
        u[best] = 1.0;
        u[worst] = 0.0;
        return u;
    }

    // Coarse values make exact ties between strategies likely.
    std::vector<double> coarse_utility(std::size_t D, OutcomeId best, OutcomeId worst)
    {
        std::vector<double> u(D);
        for (auto& x : u) x = static_cast<double>(between(0, 4)) / 4.0;
        u[best] = 1.0;
        u[worst] = 0.0;
        return u;
    }

    UtilityDatabase database(const DecisionModel& model, std::size_t n, bool coarse = false)
    {
        UtilityDatabase db(model.outcome_count(), "random");
        for (std::size_t i = 0; i < n; ++i) {
            auto u = coarse ? coarse_utility(model.outcome_count(), model.best_anchor(), model.worst_anchor())
                            : utility(model.outcome_count(), model.best_anchor(), model.worst_anchor());
            db.add({"u" + std::to_string(i), std::move(u)});
        }
        return db;
    }

private:
    std::mt19937_64 rng_;
};

// Independent expected-utility sum straight from the distribution table.
inline double oracle_eu(const DecisionModel& m, const std::vector<double>& u, StrategyId s, HistoryId h)
{
    const auto p = m.distribution(s, h);
    long double total = 0.0L;
    for (std::size_t o = 0; o < u.size(); ++o) total += static_cast<long double>(p[o]) * u[o];
    return static_cast<double>(total);
}

// Exhaustive argmax, first maximum wins.
inline std::pair<StrategyId, double> oracle_best(const DecisionModel& m, const std::vector<double>& u, HistoryId h)
{
    StrategyId best = 0;
    double value = oracle_eu(m, u, 0, h);
    for (StrategyId s = 1; s < m.strategy_count(); ++s) {
        const double v = oracle_eu(m, u, s, h);
        if (v > value) {
            value = v;
            best = s;
        }
    }
    return {best, value};
}

inline double oracle_ul(const DecisionModel& m, const std::vector<double>& truth, const std::vector<double>& proto,
                        HistoryId h)
{
    const auto own = oracle_best(m, truth, h);
    const auto advised = oracle_best(m, proto, h);
    return own.second - oracle_eu(m, truth, advised.first, h);
}

inline double oracle_distance(const DecisionModel& m, const std::vector<double>& a, const std::vector<double>& b,
                              HistoryId h)
{
    return (oracle_ul(m, a, b, h) + oracle_ul(m, b, a, h)) / 2.0;
}

inline double entropy_bits(const std::vector<double>& p)
{
    double h = 0.0;
    for (double x : p)
        if (x > 0.0) h -= x * std::log2(x);
    return h;
}

// Temporary directory removed on destruction.
struct TempDir
{
    std::filesystem::path path;
    TempDir()
    {
        static std::mt19937_64 rng(std::random_device{}());
        path = std::filesystem::temp_directory_path() / ("uelicit-test-" + std::to_string(rng()));
        std::filesystem::create_directories(path);
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::filesystem::path operator/(const std::string& name) const { return path / name; }
};

inline GeneratedCorpus bundled_corpus(const std::string& spec_file = "archetypes4.json")
{
    return generate(load_spec(data_path(spec_file)));
}

} // namespace support
