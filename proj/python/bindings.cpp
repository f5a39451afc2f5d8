#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "uelicit/clustering.hpp"
#include "uelicit/corpus.hpp"
#include "uelicit/error.hpp"
#include "uelicit/evaluation.hpp"
#include "uelicit/tree.hpp"
#include "uelicit/utility.hpp"

namespace py = pybind11;
using namespace uelicit;

namespace {

py::dict report_dict(const EvalReport& r)
{
    py::list points;
    for (const auto& p : r.points) {
        py::dict d;
        d["x"] = p.x;
        d["mean_error"] = p.mean_error;
        d["samples"] = p.samples;
        points.append(d);
    }
    py::dict d;
    d["protocol"] = r.protocol;
    d["history"] = r.history;
    d["points"] = points;
    return d;
}

py::object json_to_py(const nlohmann::json& j)
{
    return py::module_::import("json").attr("loads")(j.dump());
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Utility elicitation: loss-based clustering and question trees";

    auto base = py::register_exception<Error>(m, "Error");
    py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
    py::register_exception<ParseError>(m, "ParseError", base.ptr());
    py::register_exception<NotFoundError>(m, "NotFoundError", base.ptr());
    py::register_exception<StateError>(m, "StateError", base.ptr());
    py::register_exception<ConflictError>(m, "ConflictError", base.ptr());

    py::class_<DecisionModel>(m, "DecisionModel")
        .def_property_readonly("outcome_count", &DecisionModel::outcome_count)
        .def_property_readonly("history_count", &DecisionModel::history_count)
        .def_property_readonly("strategy_count", &DecisionModel::strategy_count)
        .def_property_readonly("best_anchor", &DecisionModel::best_anchor)
        .def_property_readonly("worst_anchor", &DecisionModel::worst_anchor)
        .def("outcome_labels",
             [](const DecisionModel& model) {
                 std::vector<std::string> labels;
                 for (const auto& o : model.outcomes()) labels.push_back(o.label);
                 return labels;
             })
        .def("find_history", &DecisionModel::find_history)
        .def("distribution", [](const DecisionModel& model, StrategyId s, HistoryId h) {
            const auto d = model.distribution(s, h);
            return std::vector<double>(d.begin(), d.end());
        });

    m.def("load_model", &load_model, py::arg("path"));
    m.def("model_from_json", [](const std::string& text) { return model_from_json(nlohmann::json::parse(text)); });

    m.def("expected_utility", [](const DecisionModel& model, const std::vector<double>& u, StrategyId s, HistoryId h) {
        return expected_utility(model, u, s, h);
    });
    m.def("best_strategy", [](const DecisionModel& model, const std::vector<double>& u, HistoryId h) {
        const auto b = best_strategy(model, u, h);
        return py::make_tuple(b.strategy, b.expected_utility);
    });
    m.def("utility_loss",
          [](const DecisionModel& model, const std::vector<double>& truth, const std::vector<double>& proto, HistoryId h) {
              return utility_loss(model, truth, proto, h);
          });
    m.def("distance", [](const DecisionModel& model, const std::vector<double>& a, const std::vector<double>& b,
                         HistoryId h) { return distance(model, a, b, h); });
    m.def("averaged_distance", [](const DecisionModel& model, const std::vector<double>& a, const std::vector<double>& b) {
        return averaged_distance(model, a, b);
    });
    m.def(
        "normalize",
        [](const std::vector<double>& raw, OutcomeId best, OutcomeId worst) {
            auto r = normalize(raw, best, worst);
            return py::make_tuple(r.function.values, r.clamped);
        },
        py::arg("raw"), py::arg("best_anchor"), py::arg("worst_anchor"));

    py::class_<UtilityDatabase>(m, "UtilityDatabase")
        .def("__len__", &UtilityDatabase::size)
        .def_property_readonly("outcome_count", &UtilityDatabase::outcome_count)
        .def("ids",
             [](const UtilityDatabase& db) {
                 std::vector<std::string> ids;
                 for (const auto& u : db) ids.push_back(u.id);
                 return ids;
             })
        .def("values", [](const UtilityDatabase& db, std::size_t i) { return db.at(i).values; })
        .def("save", [](const UtilityDatabase& db, const std::filesystem::path& path) { save_database(db, path); });

    m.def("load_database", [](const std::filesystem::path& path, const DecisionModel& model) {
        auto report = load_database(path, model);
        return py::make_tuple(std::move(report.db), report.dropped);
    });
    m.def("generate", [](const std::filesystem::path& spec_path) {
        auto corpus = generate(load_spec(spec_path));
        return py::make_tuple(std::move(corpus.db), corpus.labels);
    });

    m.def(
        "cluster",
        [](const UtilityDatabase& db, const DecisionModel& model, HistoryId h, std::size_t k) {
            return json_to_py(clustering_to_json(hac(db, model, h, k), db));
        },
        py::arg("db"), py::arg("model"), py::arg("history"), py::arg("k"));

    m.def("entropy", [](const std::vector<std::size_t>& counts) { return entropy(counts); });

    py::class_<ElicitationTree>(m, "ElicitationTree")
        .def_property_readonly("depth", &ElicitationTree::depth)
        .def_property_readonly("node_count", &ElicitationTree::node_count)
        .def("to_json", [](const ElicitationTree& t) { return json_to_py(tree_to_json(t)); })
        .def("classify", [](const ElicitationTree& t, const std::vector<double>& u) {
            const auto c = classify(t, u);
            return py::make_tuple(c.label, c.prototype, c.questions);
        });

    m.def(
        "build_tree",
        [](const UtilityDatabase& db, const DecisionModel& model, HistoryId h, std::size_t k, double gamma) {
            const auto clustering = hac(db, model, h, k);
            TreeMetadata meta;
            meta.db_hash = db.fingerprint();
            meta.k = k;
            return build_tree(TrainingSet::from(db, clustering), model, h, gamma, meta);
        },
        py::arg("db"), py::arg("model"), py::arg("history"), py::arg("k"), py::arg("gamma") = kDefaultMinGap);

    m.def(
        "holdout_error",
        [](const UtilityDatabase& db, const DecisionModel& model, HistoryId h, std::size_t k, double gamma,
           double train_fraction, std::size_t runs, std::uint64_t seed) {
            EvalOptions o;
            o.k = k;
            o.min_gap = gamma;
            o.train_fraction = train_fraction;
            o.runs = runs;
            o.seed = seed;
            EvalReport r;
            {
                py::gil_scoped_release release;
                r = holdout_error(db, model, h, o);
            }
            return report_dict(r);
        },
        py::arg("db"), py::arg("model"), py::arg("history"), py::arg("k"), py::arg("gamma") = kDefaultMinGap,
        py::arg("train_fraction") = 0.8, py::arg("runs") = 100, py::arg("seed") = 0);

    m.def(
        "loocv_over_k",
        [](const UtilityDatabase& db, const DecisionModel& model, HistoryId h, const std::vector<std::size_t>& ks,
           double gamma) { return report_dict(loocv_over_k(db, model, h, ks, gamma)); },
        py::arg("db"), py::arg("model"), py::arg("history"), py::arg("k_range"), py::arg("gamma") = kDefaultMinGap);
}
