#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "drae/experiments.hpp"

namespace drae {

// Round-trip-exact shortest decimal representation.
std::string format_double(double value);

// Game JSON: {"n_actions", "n_states", "state_probs", "rewards"} with
// rewards indexed [i][j][s]. The loader validates every StateGame invariant.
nlohmann::json game_to_json(const StateGame& game);
StateGame game_from_json(const nlohmann::json& j);
void save_game(const StateGame& game, const std::filesystem::path& path);
StateGame load_game(const std::filesystem::path& path);

nlohmann::json profile_to_json(const EquilibriumProfile& profile);
void save_profile(const EquilibriumProfile& profile, const std::filesystem::path& path);

// Risk matrix dump: CSV with a header row of action indices plus a sidecar
// JSON of {stage, scheme, tau, degree, min_eigenvalue}.
void dump_risk_matrix(const RiskMatrix& risk, const std::filesystem::path& csv_path,
                      const std::filesystem::path& json_path);

nlohmann::json spec_to_json(const SyntheticSpec& spec);
nlohmann::json spec_to_json(const AssetSpec& spec);
nlohmann::json spec_to_json(const PPMSpec& spec);
SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j);
AssetSpec asset_spec_from_json(const nlohmann::json& j);
PPMSpec ppm_spec_from_json(const nlohmann::json& j);

std::string frontier_csv(const std::vector<FrontierRow>& rows);
std::string skew_csv(const std::vector<SkewDistanceRow>& rows);
std::string state_count_csv(const std::vector<StateCountRow>& rows);
std::string degree_csv(const std::vector<DegreeRow>& rows);

void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace drae
