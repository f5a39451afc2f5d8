#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "uelicit/decision_model.hpp"
#include "uelicit/utility.hpp"

namespace uelicit {

struct GeneratorSpec
{
    std::vector<std::vector<double>> archetypes;
    std::vector<double> weights;
    double sigma = 0.0;
    std::size_t samples = 0;
    std::uint64_t seed = 0;
    OutcomeId best_anchor = 0;
    OutcomeId worst_anchor = 1;
    std::string id_prefix = "syn";

    std::size_t archetype_count() const noexcept { return archetypes.size(); }
    std::size_t outcome_count() const noexcept { return archetypes.empty() ? 0 : archetypes.front().size(); }
};

// Throws ValidationError on hard violations; returns advisory warnings.
std::vector<std::string> validate(const GeneratorSpec& spec);

// Smallest, over archetype pairs, of the largest per-coordinate difference.
double min_archetype_gap(const GeneratorSpec& spec);

GeneratorSpec spec_from_json(const nlohmann::json& doc);
nlohmann::json spec_to_json(const GeneratorSpec& spec);
GeneratorSpec load_spec(const std::filesystem::path& path);

struct GeneratedCorpus
{
    UtilityDatabase db;
    std::vector<std::size_t> labels; // generating archetype per sample
    std::vector<std::string> warnings;
};

/**
 * Draws an archetype per sample from `weights`, adds independent uniform
 * noise on [-sigma, sigma] to every coordinate, clamps to [0,1] and re-pins
 * the anchors. Uses std::mt19937_64 seeded with `seed`.
 */
GeneratedCorpus generate(const GeneratorSpec& spec);

struct LoadReport
{
    UtilityDatabase db;
    std::size_t dropped = 0;
    std::vector<std::string> dropped_ids;

    std::string summary() const;
};

// Header `id,<outcome ids...>`; a blank cell drops its row. Anchor columns
// may be omitted and are filled with 1/0. Throws ParseError or ValidationError.
LoadReport read_database(std::istream& in, const DecisionModel& model, std::string source = {});
LoadReport load_database(const std::filesystem::path& path, const DecisionModel& model);

void write_database(std::ostream& out, const UtilityDatabase& db);
void save_database(const UtilityDatabase& db, const std::filesystem::path& path);

} // namespace uelicit
