#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "uelicit/decision_model.hpp"
#include "uelicit/tree.hpp"
#include "uelicit/utility.hpp"

namespace uelicit {

struct EvalPoint
{
    double x = 0.0;              // train size, k, or train fraction depending on the protocol
    double mean_error = 0.0;
    std::vector<double> samples; // one mean per run (or per fold)
};

struct EvalReport
{
    std::string protocol;
    std::string x_name;
    HistoryId history = 0;
    std::size_t k = 0; // 0 when k varies along x
    double min_gap = kDefaultMinGap;
    std::size_t runs = 0;
    std::uint64_t seed = 0;
    std::vector<EvalPoint> points;
};

struct EvalOptions
{
    std::size_t k = 4;
    double min_gap = kDefaultMinGap;
    double train_fraction = 0.8;
    std::size_t runs = 100;
    std::uint64_t seed = 0;
    std::size_t threads = 1; // results do not depend on this
};

// Clusters and builds a tree on `train`, classifies every `test` function by
// answering from its own values, and returns the mean UL of the assigned
// prototypes. Indices refer to `db`; `losses` must be the table of `db`.
double split_error(const UtilityDatabase& db, const LossTable& losses, const DecisionModel& model,
                   std::span<const std::size_t> train, std::span<const std::size_t> test, std::size_t k,
                   double min_gap);

// Random train/test splits of size floor(train_fraction * N) / remainder.
EvalReport holdout_error(const UtilityDatabase& db, const DecisionModel& model, HistoryId h, const EvalOptions& options);

// Holdout error at each train size; the test set is everything not trained on.
EvalReport learning_curve(const UtilityDatabase& db, const DecisionModel& model, HistoryId h,
                          std::span<const std::size_t> train_sizes, const EvalOptions& options);

// Leave-one-out error for each k in k_range (each within [1, N-1]).
EvalReport loocv_over_k(const UtilityDatabase& db, const DecisionModel& model, HistoryId h,
                        std::span<const std::size_t> k_range, double min_gap = kDefaultMinGap, std::size_t threads = 1);

// One row per point: protocol,history,x,mean_error,runs
void write_csv(std::ostream& out, const EvalReport& report, bool header = true);
std::string summary(const EvalReport& report);

} // namespace uelicit
