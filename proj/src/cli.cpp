#include "uelicit/cli.hpp"

#include <charconv>
#include <csignal>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "uelicit/clustering.hpp"
#include "uelicit/corpus.hpp"
#include "uelicit/error.hpp"
#include "uelicit/evaluation.hpp"
#include "uelicit/service.hpp"
#include "uelicit/session.hpp"
#include "uelicit/tree.hpp"

namespace uelicit {

namespace {

std::size_t parse_count(std::string_view s)
{
    std::size_t v = 0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || ptr != end || s.empty()) throw ValidationError("'" + std::string(s) + "' is not a count");
    return v;
}

struct Inputs
{
    std::string model;
    std::string db;
    std::string history = "0";
    std::size_t k = 4;
    double gamma = kDefaultMinGap;
};

void add_inputs(CLI::App* cmd, Inputs& in, bool with_history)
{
    cmd->add_option("--model", in.model, "Decision model JSON")->required()->check(CLI::ExistingFile);
    cmd->add_option("--db", in.db, "Utility database CSV")->required()->check(CLI::ExistingFile);
    if (with_history) cmd->add_option("--history", in.history, "History id or label")->capture_default_str();
    cmd->add_option("--k", in.k, "Number of clusters")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--gamma", in.gamma, "Minimum gap for feature splits")->capture_default_str()->check(CLI::NonNegativeNumber);
}

struct Loaded
{
    std::shared_ptr<const DecisionModel> model;
    std::shared_ptr<const UtilityDatabase> db;
};

Loaded load_inputs(const Inputs& in, std::ostream& err)
{
    Loaded l;
    l.model = std::make_shared<const DecisionModel>(load_model(in.model));
    auto report = load_database(in.db, *l.model);
    if (report.dropped > 0) err << in.db << ": " << report.summary() << " (rows with missing values)\n";
    if (report.db.empty()) throw ValidationError(in.db + " contains no complete utility functions");
    l.db = std::make_shared<const UtilityDatabase>(std::move(report.db));
    return l;
}

// Writes to `path`, or to `out` when path is empty or "-".
template <typename Writer>
void emit(const std::string& path, std::ostream& out, Writer write)
{
    if (path.empty() || path == "-") {
        write(out);
        return;
    }
    std::ofstream file(path);
    if (!file) throw Error("cannot write " + path);
    write(file);
    if (!file) throw Error("failed writing " + path);
}

std::string describe_question(const SplitQuestion& q, const DecisionModel& model)
{
    const auto& outcomes = model.outcomes();
    std::ostringstream s;
    const auto& a = outcomes.at(q.first);
    s << "  outcome " << a.id << " \"" << a.label << "\": " << a.question_text << '\n';
    if (q.kind == SplitKind::preference) {
        const auto& b = outcomes.at(q.second);
        s << "  outcome " << b.id << " \"" << b.label << "\": " << b.question_text << '\n'
          << "  answer y if you strictly prefer the first outcome to the second\n";
    } else {
        const auto& best = outcomes.at(model.best_anchor());
        const auto& worst = outcomes.at(model.worst_anchor());
        s << "  lottery: probability " << q.threshold << " of \"" << best.label << "\", probability "
          << 1.0 - q.threshold << " of \"" << worst.label << "\"\n"
          << "  answer y if you strictly prefer the certain outcome to the lottery\n";
    }
    return s.str();
}

std::optional<bool> parse_answer(std::string line)
{
    for (auto& c : line) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) return std::nullopt;
    line = line.substr(first, line.find_last_not_of(" \t\r") - first + 1);
    if (line == "y" || line == "yes") return true;
    if (line == "n" || line == "no") return false;
    return std::nullopt;
}

int cmd_gen(const std::string& spec_path, std::optional<std::uint64_t> seed, const std::string& out_path,
            const std::string& labels_path, std::ostream& out, std::ostream& err)
{
    auto spec = load_spec(spec_path);
    if (seed) spec.seed = *seed;
    const auto corpus = generate(spec);
    for (const auto& w : corpus.warnings) err << "warning: " << w << '\n';
    emit(out_path, out, [&](std::ostream& o) { write_database(o, corpus.db); });
    if (!labels_path.empty()) {
        emit(labels_path, out, [&](std::ostream& o) {
            o << "id,archetype\n";
            for (std::size_t i = 0; i < corpus.db.size(); ++i) o << corpus.db[i].id << ',' << corpus.labels[i] << '\n';
        });
    }
    return 0;
}

int cmd_cluster(const Inputs& in, bool all_histories, const std::string& out_path, std::ostream& out, std::ostream& err)
{
    const auto l = load_inputs(in, err);
    nlohmann::json doc;
    if (all_histories) {
        doc = nlohmann::json::array();
        for (HistoryId h = 0; h < l.model->history_count(); ++h)
            doc.push_back(clustering_to_json(hac(*l.db, *l.model, h, in.k), *l.db));
    } else {
        doc = clustering_to_json(hac(*l.db, *l.model, l.model->find_history(in.history), in.k), *l.db);
    }
    emit(out_path, out, [&](std::ostream& o) { o << doc.dump(2) << '\n'; });
    return 0;
}

int cmd_tree(const Inputs& in, const std::string& out_path, std::ostream& out, std::ostream& err)
{
    const auto l = load_inputs(in, err);
    TreeProvider trees(l.model, l.db, in.k, in.gamma);
    const auto tree = trees.tree(l.model->find_history(in.history));
    emit(out_path, out, [&](std::ostream& o) { o << tree_to_json(*tree).dump(2) << '\n'; });
    return 0;
}

int cmd_elicit(const Inputs& in, std::istream& input, std::ostream& out, std::ostream& err)
{
    const auto l = load_inputs(in, err);
    auto trees = std::make_shared<TreeProvider>(l.model, l.db, in.k, in.gamma);
    SessionStore store(trees, 0);
    const auto& model = *l.model;
    auto session = store.create(model.find_history(in.history));

    std::string line;
    while (session.status == SessionStatus::in_progress) {
        const auto view = store.question(session.id);
        out << "Q: " << view.text << " [y/n/why]\n" << std::flush;
        std::optional<bool> answer;
        while (!answer) {
            if (!std::getline(input, line)) {
                err << "error: input ended before the elicitation finished\n";
                return 1;
            }
            answer = parse_answer(line);
            if (answer) break;
            if (line.find("why") != std::string::npos) {
                out << describe_question(view.question, model);
            } else {
                out << "please answer y, n or why\n";
            }
            out << "Q: " << view.text << " [y/n/why]\n" << std::flush;
        }
        session = store.submit(session.id, *answer);
    }

    const auto& r = *session.result;
    const auto& strategy = model.strategies().at(r.strategy);
    out << "questions: " << session.transcript.size() << '\n'
        << "cluster: " << r.label << '\n'
        << "prototype: " << r.prototype_id << '\n'
        << "strategy: " << strategy.id << ' ' << strategy.label << '\n'
        << "description: " << strategy.description << '\n'
        << "expected utility: " << r.expected_utility << '\n';
    return 0;
}

struct EvalArgs
{
    std::string protocol;
    std::size_t runs = 100;
    std::uint64_t seed = 0;
    double train_fraction = 0.8;
    std::string train_sizes;
    std::string k_range = "1..10";
    std::size_t threads = 1;
    std::string out_path;
    std::string summary_path;
};

int cmd_eval(const Inputs& in, const EvalArgs& args, std::ostream& out, std::ostream& err)
{
    const auto l = load_inputs(in, err);
    const auto h = l.model->find_history(in.history);
    EvalOptions options;
    options.k = in.k;
    options.min_gap = in.gamma;
    options.train_fraction = args.train_fraction;
    options.runs = args.runs;
    options.seed = args.seed;
    options.threads = args.threads;

    EvalReport report;
    if (args.protocol == "holdout") {
        report = holdout_error(*l.db, *l.model, h, options);
    } else if (args.protocol == "learning-curve") {
        std::vector<std::size_t> sizes;
        if (args.train_sizes.empty()) {
            for (std::size_t s = std::max<std::size_t>(in.k, 2); s < l.db->size(); s += std::max<std::size_t>(1, l.db->size() / 10))
                sizes.push_back(s);
        } else {
            sizes = parse_range(args.train_sizes);
        }
        report = learning_curve(*l.db, *l.model, h, sizes, options);
    } else {
        const auto ks = parse_range(args.k_range);
        report = loocv_over_k(*l.db, *l.model, h, ks, in.gamma, args.threads);
    }

    emit(args.out_path, out, [&](std::ostream& o) { write_csv(o, report); });
    if (!args.summary_path.empty()) {
        emit(args.summary_path, out, [&](std::ostream& o) { o << summary(report); });
    } else {
        err << summary(report);
    }
    return 0;
}

Service* g_service = nullptr;

extern "C" void on_signal(int)
{
    if (g_service != nullptr) g_service->stop();
}

int cmd_serve(const Inputs& in, const ServiceOptions& options, bool warm_up, std::ostream& out, std::ostream& err)
{
    const auto l = load_inputs(in, err);
    auto trees = std::make_shared<TreeProvider>(l.model, l.db, in.k, in.gamma);
    if (warm_up) trees->warm_up();
    auto store = std::make_shared<SessionStore>(trees);
    Service service(store, options);
    const int port = service.bind();
    out << "listening on http://" << options.host << ':' << port << '\n' << std::flush;
    g_service = &service;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    service.run();
    g_service = nullptr;
    return 0;
}

} // namespace

std::vector<std::size_t> parse_range(std::string_view text)
{
    std::vector<std::size_t> out;
    if (const auto dots = text.find(".."); dots != std::string_view::npos) {
        const auto lo = parse_count(text.substr(0, dots));
        const auto hi = parse_count(text.substr(dots + 2));
        if (hi < lo) throw ValidationError("empty range '" + std::string(text) + "'");
        for (std::size_t v = lo; v <= hi; ++v) out.push_back(v);
        return out;
    }
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        out.push_back(parse_count(text.substr(start, comma == std::string_view::npos ? text.npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Utility elicitation by clustering and decision trees", "uelicit"};
    app.require_subcommand(1);

    std::string spec_path, out_path, labels_path;
    std::optional<std::uint64_t> gen_seed;
    auto* gen = app.add_subcommand("gen", "Synthesize a utility database from a generator spec");
    gen->add_option("--spec", spec_path, "Generator spec JSON")->required()->check(CLI::ExistingFile);
    gen->add_option("--seed", gen_seed, "Override the spec seed");
    gen->add_option("--out,-o", out_path, "Output CSV (default stdout)");
    gen->add_option("--labels", labels_path, "Also write ground-truth archetype labels");

    Inputs cluster_in;
    bool all_histories = false;
    auto* cluster = app.add_subcommand("cluster", "Cluster the database for one or every history");
    add_inputs(cluster, cluster_in, true);
    cluster->add_flag("--all-histories", all_histories, "Emit one clustering per history");
    cluster->add_option("--out,-o", out_path, "Output JSON (default stdout)");

    Inputs tree_in;
    auto* tree = app.add_subcommand("tree", "Build and export the elicitation tree for a history");
    add_inputs(tree, tree_in, true);
    tree->add_option("--out,-o", out_path, "Output JSON (default stdout)");

    Inputs elicit_in;
    auto* elicit = app.add_subcommand("elicit", "Answer questions on the terminal and get a recommendation");
    add_inputs(elicit, elicit_in, true);

    Inputs eval_in;
    EvalArgs eval_args;
    auto* eval = app.add_subcommand("eval", "Holdout, learning-curve and leave-one-out reports");
    eval->add_option("protocol", eval_args.protocol, "holdout | learning-curve | loocv")
        ->required()
        ->check(CLI::IsMember({"holdout", "learning-curve", "loocv"}));
    add_inputs(eval, eval_in, true);
    eval->add_option("--runs", eval_args.runs, "Random splits per point")->capture_default_str()->check(CLI::PositiveNumber);
    eval->add_option("--seed", eval_args.seed, "Split seed")->capture_default_str();
    eval->add_option("--train-fraction", eval_args.train_fraction, "Holdout train fraction")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    eval->add_option("--train-sizes", eval_args.train_sizes, "Learning-curve sizes, e.g. 10..50 or 8,16,32");
    eval->add_option("--k-range", eval_args.k_range, "Leave-one-out cluster counts")->capture_default_str();
    eval->add_option("--threads", eval_args.threads, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    eval->add_option("--out,-o", eval_args.out_path, "CSV report (default stdout)");
    eval->add_option("--summary", eval_args.summary_path, "Summary block (default stderr)");

    Inputs serve_in;
    ServiceOptions serve_options;
    bool warm_up = false;
    std::string static_dir, snapshot;
    auto* serve = app.add_subcommand("serve", "Start the HTTP session service");
    add_inputs(serve, serve_in, false);
    serve->add_option("--host", serve_options.host, "Bind address")->capture_default_str();
    serve->add_option("--port", serve_options.port, "Port (0 picks a free one)")->capture_default_str();
    serve->add_option("--static", static_dir, "Directory served at /")->check(CLI::ExistingDirectory);
    serve->add_option("--snapshot", snapshot, "Session snapshot file");
    serve->add_flag("--warm-up", warm_up, "Build every history's tree before listening");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (*gen) return cmd_gen(spec_path, gen_seed, out_path, labels_path, out, err);
        if (*cluster) return cmd_cluster(cluster_in, all_histories, out_path, out, err);
        if (*tree) return cmd_tree(tree_in, out_path, out, err);
        if (*elicit) return cmd_elicit(elicit_in, in, out, err);
        if (*eval) return cmd_eval(eval_in, eval_args, out, err);
        if (*serve) {
            if (!static_dir.empty()) serve_options.static_dir = static_dir;
            if (!snapshot.empty()) serve_options.snapshot = snapshot;
            return cmd_serve(serve_in, serve_options, warm_up, out, err);
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

} // namespace uelicit
