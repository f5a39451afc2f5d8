#include "uelicit/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "uelicit/clustering.hpp"
#include "uelicit/error.hpp"

namespace uelicit {

namespace {

double mean(const std::vector<double>& xs)
{
    if (xs.empty()) return 0.0;
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

// Runs task(i) for i in [0, count) on up to `threads` workers. Each task
// writes only its own slot, so the caller's reduction order is fixed.
template <typename Task>
void parallel_for(std::size_t count, std::size_t threads, Task task)
{
    threads = std::max<std::size_t>(1, std::min(threads, count));
    if (threads == 1) {
        for (std::size_t i = 0; i < count; ++i) task(i);
        return;
    }
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> workers;
    for (std::size_t t = 0; t < threads; ++t) {
        workers.emplace_back([&, t] {
            try {
                for (std::size_t i = t; i < count; i += threads) task(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& w : workers) w.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

struct Split
{
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

Split random_split(std::size_t n, std::size_t train_size, std::uint64_t seed, std::size_t run)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(run), static_cast<std::uint32_t>(run >> 32)};
    std::mt19937_64 rng(seq);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);

    Split s;
    s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(train_size));
    s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(train_size), order.end());
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.test.begin(), s.test.end());
    return s;
}

void check_train_size(std::size_t n, std::size_t train_size, std::size_t k)
{
    if (k < 1) throw ValidationError("k must be at least 1");
    if (train_size < k)
        throw ValidationError("train set of " + std::to_string(train_size) + " is smaller than k = " + std::to_string(k));
    if (train_size >= n)
        throw ValidationError("train size " + std::to_string(train_size) + " leaves no test functions out of " +
                              std::to_string(n));
}

EvalPoint holdout_point(const UtilityDatabase& db, const LossTable& losses, const DecisionModel& model,
                        std::size_t train_size, double x, const EvalOptions& options)
{
    EvalPoint point;
    point.x = x;
    point.samples.assign(options.runs, 0.0);
    parallel_for(options.runs, options.threads, [&](std::size_t run) {
        const auto split = random_split(db.size(), train_size, options.seed, run);
        point.samples[run] = split_error(db, losses, model, split.train, split.test, options.k, options.min_gap);
    });
    point.mean_error = mean(point.samples);
    return point;
}

void check_options(const UtilityDatabase& db, const DecisionModel& model, HistoryId h, const EvalOptions& options)
{
    model.check_history(h);
    model.check_dimension(db.outcome_count());
    if (options.runs < 1) throw ValidationError("at least one run required");
    if (db.size() < 2) throw ValidationError("evaluation needs at least two utility functions");
}

} // namespace

double split_error(const UtilityDatabase& db, const LossTable& losses, const DecisionModel& model,
                   std::span<const std::size_t> train, std::span<const std::size_t> test, std::size_t k,
                   double min_gap)
{
    if (test.empty()) throw ValidationError("empty test set");
    const auto clustering = hac(losses.subset(train), k);

    TrainingSet training;
    training.rows.reserve(train.size());
    for (std::size_t i : train) training.rows.push_back(db[i].values);
    training.labels.assign(train.size(), 0);
    std::vector<std::size_t> prototype(clustering.clusters.size());
    for (std::size_t c = 0; c < clustering.clusters.size(); ++c) {
        for (std::size_t m : clustering.clusters[c].members) training.labels[m] = c;
        prototype[c] = train[clustering.clusters[c].prototype];
        training.prototype_ids.push_back(db[prototype[c]].id);
    }
    const auto tree = build_tree(training, model, losses.history(), min_gap);

    double total = 0.0;
    for (std::size_t t : test) {
        const auto assigned = classify(tree, db[t].view());
        total += losses.loss(t, prototype[assigned.label]);
    }
    return total / static_cast<double>(test.size());
}

EvalReport holdout_error(const UtilityDatabase& db, const DecisionModel& model, HistoryId h, const EvalOptions& options)
{
    check_options(db, model, h, options);
    if (!(options.train_fraction > 0.0 && options.train_fraction < 1.0))
        throw ValidationError("train fraction must lie in (0,1)");
    const auto train_size =
        static_cast<std::size_t>(std::floor(options.train_fraction * static_cast<double>(db.size())));
    check_train_size(db.size(), train_size, options.k);

    const LossTable losses(model, db, h);
    EvalReport report{"holdout", "train_fraction", h, options.k, options.min_gap, options.runs, options.seed, {}};
    report.points.push_back(holdout_point(db, losses, model, train_size, options.train_fraction, options));
    return report;
}

EvalReport learning_curve(const UtilityDatabase& db, const DecisionModel& model, HistoryId h,
                          std::span<const std::size_t> train_sizes, const EvalOptions& options)
{
    check_options(db, model, h, options);
    if (train_sizes.empty()) throw ValidationError("at least one train size required");
    for (std::size_t size : train_sizes) check_train_size(db.size(), size, options.k);

    const LossTable losses(model, db, h);
    EvalReport report{"learning-curve", "train_size", h, options.k, options.min_gap, options.runs, options.seed, {}};
    for (std::size_t size : train_sizes)
        report.points.push_back(holdout_point(db, losses, model, size, static_cast<double>(size), options));
    return report;
}

EvalReport loocv_over_k(const UtilityDatabase& db, const DecisionModel& model, HistoryId h,
                        std::span<const std::size_t> k_range, double min_gap, std::size_t threads)
{
    model.check_history(h);
    model.check_dimension(db.outcome_count());
    const std::size_t n = db.size();
    if (n < 2) throw ValidationError("leave-one-out needs at least two utility functions");
    if (k_range.empty()) throw ValidationError("empty k range");
    for (std::size_t k : k_range)
        if (k < 1 || k > n - 1)
            throw ValidationError("k = " + std::to_string(k) + " outside [1, " + std::to_string(n - 1) + "]");

    const LossTable losses(model, db, h);
    EvalReport report{"loocv", "k", h, 0, min_gap, n, 0, {}};
    for (std::size_t k : k_range) {
        EvalPoint point;
        point.x = static_cast<double>(k);
        point.samples.assign(n, 0.0);
        parallel_for(n, threads, [&](std::size_t held_out) {
            std::vector<std::size_t> train;
            train.reserve(n - 1);
            for (std::size_t i = 0; i < n; ++i)
                if (i != held_out) train.push_back(i);
            const std::size_t test[] = {held_out};
            point.samples[held_out] = split_error(db, losses, model, train, test, k, min_gap);
        });
        point.mean_error = mean(point.samples);
        report.points.push_back(std::move(point));
    }
    return report;
}

void write_csv(std::ostream& out, const EvalReport& report, bool header)
{
    if (header) out << "protocol,history,x,mean_error,runs\n";
    char buf[64];
    for (const auto& p : report.points) {
        std::snprintf(buf, sizeof buf, "%.17g", p.mean_error);
        out << report.protocol << ',' << report.history << ',' << p.x << ',' << buf << ',' << p.samples.size()
            << '\n';
    }
}

std::string summary(const EvalReport& report)
{
    std::ostringstream s;
    s << "protocol: " << report.protocol << '\n' << "history:  " << report.history << '\n';
    if (report.k != 0) s << "k:        " << report.k << '\n';
    s << "gamma:    " << report.min_gap << '\n';
    if (report.protocol != "loocv") s << "runs:     " << report.runs << "\nseed:     " << report.seed << '\n';
    s << report.x_name << "\tmean_error\n";
    char buf[32];
    for (const auto& p : report.points) {
        std::snprintf(buf, sizeof buf, "%.6f", p.mean_error);
        s << p.x << '\t' << buf << '\n';
    }
    return s.str();
}

} // namespace uelicit
