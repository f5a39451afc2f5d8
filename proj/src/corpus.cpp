#include "uelicit/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

#include "uelicit/error.hpp"

namespace uelicit {

namespace {

constexpr double kWeightTolerance = 1e-9;

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_row(std::string_view line)
{
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return cells;
}

std::string format_value(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Maps a header cell to an outcome: numeric id first, then label.
OutcomeId resolve_outcome(std::string_view cell, const DecisionModel& model)
{
    std::size_t id = 0;
    const auto* end = cell.data() + cell.size();
    if (auto [ptr, ec] = std::from_chars(cell.data(), end, id); ec == std::errc{} && ptr == end) {
        if (id < model.outcome_count()) return id;
    }
    for (const auto& o : model.outcomes())
        if (o.label == cell) return o.id;
    throw ValidationError("column '" + std::string(cell) + "' is not an outcome of the model");
}

} // namespace

double min_archetype_gap(const GeneratorSpec& spec)
{
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < spec.archetypes.size(); ++a) {
        for (std::size_t b = a + 1; b < spec.archetypes.size(); ++b) {
            double widest = 0.0;
            for (std::size_t o = 0; o < spec.archetypes[a].size(); ++o)
                widest = std::max(widest, std::abs(spec.archetypes[a][o] - spec.archetypes[b][o]));
            gap = std::min(gap, widest);
        }
    }
    return gap;
}

std::vector<std::string> validate(const GeneratorSpec& spec)
{
    if (spec.archetypes.empty()) throw ValidationError("generator spec needs at least one archetype");
    if (spec.weights.size() != spec.archetypes.size())
        throw ValidationError("one weight per archetype required");
    double total = 0.0;
    for (double w : spec.weights) {
        if (!(w >= 0.0)) throw ValidationError("archetype weights must be non-negative");
        total += w;
    }
    if (std::abs(total - 1.0) > kWeightTolerance) throw ValidationError("archetype weights must sum to 1");
    if (!(spec.sigma >= 0.0)) throw ValidationError("noise scale must be non-negative");
    if (spec.samples == 0) throw ValidationError("sample count must be positive");

    const std::size_t D = spec.outcome_count();
    if (D < 2) throw ValidationError("archetypes need at least two outcomes");
    if (spec.best_anchor >= D || spec.worst_anchor >= D || spec.best_anchor == spec.worst_anchor)
        throw ValidationError("invalid anchors for the archetype dimension");
    for (std::size_t a = 0; a < spec.archetypes.size(); ++a) {
        if (spec.archetypes[a].size() != D) throw ValidationError("archetype " + std::to_string(a) + " has the wrong dimension");
        check_normalized({"archetype " + std::to_string(a), spec.archetypes[a]}, spec.best_anchor, spec.worst_anchor);
    }

    std::vector<std::string> warnings;
    if (spec.archetypes.size() > 1) {
        const double gap = min_archetype_gap(spec);
        if (spec.sigma >= gap / 4.0) {
            std::ostringstream msg;
            msg << "noise scale " << spec.sigma << " is not below a quarter of the smallest archetype gap " << gap;
            warnings.push_back(msg.str());
        }
    }
    return warnings;
}

GeneratorSpec spec_from_json(const nlohmann::json& doc)
{
    try {
        GeneratorSpec spec;
        spec.archetypes = doc.at("archetypes").get<std::vector<std::vector<double>>>();
        spec.weights = doc.at("weights").get<std::vector<double>>();
        spec.sigma = doc.at("sigma").get<double>();
        spec.samples = doc.at("samples").get<std::size_t>();
        spec.seed = doc.at("seed").get<std::uint64_t>();
        spec.best_anchor = doc.at("best_anchor").get<OutcomeId>();
        spec.worst_anchor = doc.at("worst_anchor").get<OutcomeId>();
        spec.id_prefix = doc.value("id_prefix", std::string("syn"));
        return spec;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("generator spec: ") + e.what());
    }
}

nlohmann::json spec_to_json(const GeneratorSpec& spec)
{
    return {{"archetypes", spec.archetypes}, {"weights", spec.weights},         {"sigma", spec.sigma},
            {"samples", spec.samples},       {"seed", spec.seed},               {"best_anchor", spec.best_anchor},
            {"worst_anchor", spec.worst_anchor}, {"id_prefix", spec.id_prefix}};
}

GeneratorSpec load_spec(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw NotFoundError("cannot open generator spec " + path.string());
    try {
        return spec_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

GeneratedCorpus generate(const GeneratorSpec& spec)
{
    GeneratedCorpus out;
    out.warnings = validate(spec);
    out.db = UtilityDatabase(spec.outcome_count(), "generated:" + std::to_string(spec.seed));

    std::mt19937_64 rng(spec.seed);
    std::discrete_distribution<std::size_t> pick(spec.weights.begin(), spec.weights.end());
    std::uniform_real_distribution<double> noise(-spec.sigma, spec.sigma);

    const int width = static_cast<int>(std::to_string(spec.samples - 1).size());
    for (std::size_t i = 0; i < spec.samples; ++i) {
        const std::size_t a = pick(rng);
        std::vector<double> values = spec.archetypes[a];
        if (spec.sigma > 0.0) {
            for (double& v : values) v = std::clamp(v + noise(rng), 0.0, 1.0);
        }
        values[spec.best_anchor] = 1.0;
        values[spec.worst_anchor] = 0.0;

        std::ostringstream id;
        id << spec.id_prefix << '-' << std::setw(std::max(width, 3)) << std::setfill('0') << i;
        out.db.add({id.str(), std::move(values)});
        out.labels.push_back(a);
    }
    return out;
}

std::string LoadReport::summary() const
{
    std::ostringstream s;
    s << db.size() << " loaded, " << dropped << " dropped";
    return s.str();
}

LoadReport read_database(std::istream& in, const DecisionModel& model, std::string source)
{
    const std::size_t D = model.outcome_count();
    std::string line;
    std::size_t line_no = 0;

    // header
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) {
            have_header = true;
            break;
        }
    }
    if (!have_header) throw ParseError("utility database " + source + " is empty");

    const auto header = split_row(line);
    if (header.empty() || header.front() != "id") throw ParseError("first header column must be 'id'");
    std::vector<OutcomeId> columns;
    std::vector<bool> seen(D, false);
    for (std::size_t c = 1; c < header.size(); ++c) {
        const OutcomeId o = resolve_outcome(header[c], model);
        if (seen[o]) throw ValidationError("outcome column '" + std::string(header[c]) + "' repeated");
        seen[o] = true;
        columns.push_back(o);
    }
    const bool inject_best = !seen[model.best_anchor()];
    const bool inject_worst = !seen[model.worst_anchor()];
    for (OutcomeId o = 0; o < D; ++o) {
        if (!seen[o] && o != model.best_anchor() && o != model.worst_anchor())
            throw ValidationError("utility database lacks a column for outcome " + std::to_string(o) + " ('" +
                                  model.outcomes()[o].label + "')");
    }

    LoadReport report;
    report.db = UtilityDatabase(D, std::move(source));
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split_row(line);
        const std::string where = "line " + std::to_string(line_no);
        if (cells.size() != header.size())
            throw ParseError(where + ": expected " + std::to_string(header.size()) + " cells, found " +
                             std::to_string(cells.size()));
        if (cells[0].empty()) throw ParseError(where + ": missing id");

        std::vector<double> values(D, 0.0);
        bool missing = false;
        for (std::size_t c = 1; c < cells.size(); ++c) {
            const auto cell = cells[c];
            if (cell.empty()) {
                missing = true;
                continue;
            }
            double v = 0.0;
            const auto* end = cell.data() + cell.size();
            auto [ptr, ec] = std::from_chars(cell.data(), end, v);
            if (ec != std::errc{} || ptr != end)
                throw ParseError(where + ": '" + std::string(cell) + "' is not a number");
            if (!(v >= 0.0 && v <= 1.0)) throw ValidationError(where + ": value " + std::string(cell) + " outside [0,1]");
            values[columns[c - 1]] = v;
        }
        if (missing) {
            report.dropped += 1;
            report.dropped_ids.emplace_back(cells[0]);
            continue;
        }
        if (inject_best) values[model.best_anchor()] = 1.0;
        if (inject_worst) values[model.worst_anchor()] = 0.0;
        UtilityFunction u{std::string(cells[0]), std::move(values)};
        try {
            check_normalized(u, model.best_anchor(), model.worst_anchor());
        } catch (const ValidationError& e) {
            throw ValidationError(where + ": " + e.what());
        }
        report.db.add(std::move(u));
    }
    return report;
}

LoadReport load_database(const std::filesystem::path& path, const DecisionModel& model)
{
    std::ifstream in(path);
    if (!in) throw NotFoundError("cannot open utility database " + path.string());
    return read_database(in, model, path.string());
}

void write_database(std::ostream& out, const UtilityDatabase& db)
{
    out << "id";
    for (std::size_t o = 0; o < db.outcome_count(); ++o) out << ',' << o;
    out << '\n';
    for (const auto& u : db) {
        out << u.id;
        for (double v : u.values) out << ',' << format_value(v);
        out << '\n';
    }
}

void save_database(const UtilityDatabase& db, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) throw Error("cannot write utility database " + path.string());
    write_database(out, db);
    if (!out) throw Error("failed writing " + path.string());
}

} // namespace uelicit
