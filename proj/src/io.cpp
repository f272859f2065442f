#include "drae/io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

namespace drae {

namespace {

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
    if (j.contains(key)) return j.at(key).get<T>();
    return fallback;
}

}  // namespace

std::string format_double(double value) {
    std::array<char, 32> buf;
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), res.ptr);
}

nlohmann::json game_to_json(const StateGame& game) {
    nlohmann::json j;
    j["n_actions"] = game.n_actions();
    j["n_states"] = game.n_states();
    j["state_probs"] = std::vector<double>(game.state_probs().data(),
                                           game.state_probs().data() + game.n_states());
    auto rewards = nlohmann::json::array();
    for (int i = 0; i < game.n_actions(); ++i) {
        auto row = nlohmann::json::array();
        for (int k = 0; k < game.n_actions(); ++k) {
            auto cell = nlohmann::json::array();
            for (int s = 0; s < game.n_states(); ++s) {
                cell.push_back(game.reward(i, k, s));
            }
            row.push_back(std::move(cell));
        }
        rewards.push_back(std::move(row));
    }
    j["rewards"] = std::move(rewards);
    return j;
}

StateGame game_from_json(const nlohmann::json& j) {
    const int n_actions = j.at("n_actions").get<int>();
    const int n_states = j.at("n_states").get<int>();
    if (n_actions < 1 || n_states < 1) {
        throw ContractViolation("game file needs n_actions >= 1 and n_states >= 1");
    }
    const auto& probs = j.at("state_probs");
    if (static_cast<int>(probs.size()) != n_states) {
        throw ContractViolation("state_probs length does not match n_states");
    }
    Eigen::VectorXd q(n_states);
    for (int s = 0; s < n_states; ++s) q(s) = probs.at(s).get<double>();

    const auto& rewards = j.at("rewards");
    if (static_cast<int>(rewards.size()) != n_actions) {
        throw ContractViolation("rewards outer dimension does not match n_actions");
    }
    std::vector<Eigen::MatrixXd> tensor(n_states, Eigen::MatrixXd(n_actions, n_actions));
    for (int i = 0; i < n_actions; ++i) {
        const auto& row = rewards.at(i);
        if (static_cast<int>(row.size()) != n_actions) {
            throw ContractViolation("rewards middle dimension does not match n_actions");
        }
        for (int k = 0; k < n_actions; ++k) {
            const auto& cell = row.at(k);
            if (static_cast<int>(cell.size()) != n_states) {
                throw ContractViolation("rewards inner dimension does not match n_states");
            }
            for (int s = 0; s < n_states; ++s) {
                tensor[s](i, k) = cell.at(s).get<double>();
            }
        }
    }
    return StateGame(std::move(tensor), std::move(q));
}

void save_game(const StateGame& game, const std::filesystem::path& path) {
    write_text_file(path, game_to_json(game).dump(2) + "\n");
}

StateGame load_game(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ContractViolation("game file " + path.string() + " is not valid JSON: " + e.what());
    }
    try {
        return game_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw ContractViolation("game file " + path.string() + " has a bad schema: " + e.what());
    }
}

nlohmann::json profile_to_json(const EquilibriumProfile& profile) {
    nlohmann::json j;
    j["concept"] = to_string(profile.solution_concept);
    j["gamma"] = profile.gamma;
    j["tau"] = profile.tau;
    j["degree"] = profile.degree;
    j["scheme"] = to_string(profile.scheme);
    j["strategy_p1"] = std::vector<double>(
        profile.strategy_p1.probs.data(),
        profile.strategy_p1.probs.data() + profile.strategy_p1.size());
    j["strategy_p2"] = std::vector<double>(
        profile.strategy_p2.probs.data(),
        profile.strategy_p2.probs.data() + profile.strategy_p2.size());
    j["er"] = profile.er;
    j["variance"] = profile.variance;
    j["lpm"] = profile.lpm;
    j["iterations"] = profile.iterations;
    j["converged"] = profile.converged;
    return j;
}

void save_profile(const EquilibriumProfile& profile, const std::filesystem::path& path) {
    write_text_file(path, profile_to_json(profile).dump(2) + "\n");
}

void dump_risk_matrix(const RiskMatrix& risk, const std::filesystem::path& csv_path,
                      const std::filesystem::path& json_path) {
    std::ostringstream csv;
    for (int j = 0; j < risk.size(); ++j) {
        csv << (j == 0 ? "" : ",") << j;
    }
    csv << "\n";
    for (int i = 0; i < risk.size(); ++i) {
        for (int j = 0; j < risk.size(); ++j) {
            csv << (j == 0 ? "" : ",") << format_double(risk.values(i, j));
        }
        csv << "\n";
    }
    write_text_file(csv_path, csv.str());

    nlohmann::json meta;
    meta["stage"] = to_string(risk.stage);
    meta["scheme"] = to_string(risk.config.scheme);
    meta["tau"] = risk.config.tau;
    meta["degree"] = risk.config.degree;
    meta["min_eigenvalue"] = risk.min_eigenvalue();
    write_text_file(json_path, meta.dump(2) + "\n");
}

nlohmann::json spec_to_json(const SyntheticSpec& spec) {
    nlohmann::json j;
    j["type"] = "synthetic";
    j["n_actions"] = spec.n_actions;
    j["n_high_var"] = spec.n_high_var;
    j["n_high_skew"] = spec.n_high_skew;
    j["high_var_range"] = {spec.high_var_lo, spec.high_var_hi};
    j["high_skew_set"] = spec.high_skew_set;
    j["low_var_range"] = {spec.low_var_lo, spec.low_var_hi};
    j["low_skew_range"] = {spec.low_skew_lo, spec.low_skew_hi};
    j["n_states"] = spec.n_states;
    j["seed"] = spec.seed;
    return j;
}

nlohmann::json spec_to_json(const AssetSpec& spec) {
    nlohmann::json j;
    j["type"] = "asset";
    j["n_portfolios"] = spec.n_portfolios;
    j["n_assets"] = spec.n_assets;
    j["n_states"] = spec.n_states;
    j["wealth"] = {spec.wealth_p1, spec.wealth_p2};
    j["seed"] = spec.seed;
    return j;
}

nlohmann::json spec_to_json(const PPMSpec& spec) {
    nlohmann::json j;
    j["type"] = "ppm";
    j["n_products"] = spec.n_products;
    j["n_segments"] = spec.n_segments;
    j["costs"] = spec.costs;
    j["segment_sizes"] = spec.segment_sizes;
    auto utilities = nlohmann::json::array();
    for (int m = 0; m < spec.n_products; ++m) {
        std::vector<double> row(spec.n_segments);
        for (int k = 0; k < spec.n_segments; ++k) row[k] = spec.utilities(m, k);
        utilities.push_back(row);
    }
    j["utilities"] = std::move(utilities);
    j["mu"] = spec.mu_scale;
    j["n_states"] = spec.n_states;
    j["seed"] = spec.seed;
    return j;
}

SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j) {
    SyntheticSpec spec;
    spec.n_actions = get_or(j, "n_actions", spec.n_actions);
    spec.n_high_var = get_or(j, "n_high_var", spec.n_high_var);
    spec.n_high_skew = get_or(j, "n_high_skew", spec.n_high_skew);
    if (j.contains("high_var_range")) {
        spec.high_var_lo = j.at("high_var_range").at(0).get<double>();
        spec.high_var_hi = j.at("high_var_range").at(1).get<double>();
    }
    spec.high_skew_set = get_or(j, "high_skew_set", spec.high_skew_set);
    if (j.contains("low_var_range")) {
        spec.low_var_lo = j.at("low_var_range").at(0).get<double>();
        spec.low_var_hi = j.at("low_var_range").at(1).get<double>();
    }
    if (j.contains("low_skew_range")) {
        spec.low_skew_lo = j.at("low_skew_range").at(0).get<double>();
        spec.low_skew_hi = j.at("low_skew_range").at(1).get<double>();
    }
    spec.n_states = get_or(j, "n_states", spec.n_states);
    spec.seed = get_or(j, "seed", spec.seed);
    spec.validate();
    return spec;
}

AssetSpec asset_spec_from_json(const nlohmann::json& j) {
    AssetSpec spec;
    spec.n_portfolios = get_or(j, "n_portfolios", spec.n_portfolios);
    spec.n_assets = get_or(j, "n_assets", spec.n_assets);
    spec.n_states = get_or(j, "n_states", spec.n_states);
    if (j.contains("wealth")) {
        spec.wealth_p1 = j.at("wealth").at(0).get<double>();
        spec.wealth_p2 = j.at("wealth").at(1).get<double>();
    }
    spec.seed = get_or(j, "seed", spec.seed);
    spec.validate();
    return spec;
}

PPMSpec ppm_spec_from_json(const nlohmann::json& j) {
    const int n_products = get_or(j, "n_products", 3);
    const int n_segments = get_or(j, "n_segments", 4);
    const std::uint64_t seed = get_or<std::uint64_t>(j, "seed", 0);
    PPMSpec spec = PPMSpec::random(n_products, n_segments, seed);
    if (j.contains("costs")) spec.costs = j.at("costs").get<std::vector<double>>();
    if (j.contains("segment_sizes")) {
        spec.segment_sizes = j.at("segment_sizes").get<std::vector<double>>();
    }
    if (j.contains("utilities")) {
        const auto& u = j.at("utilities");
        spec.utilities.resize(n_products, n_segments);
        for (int m = 0; m < n_products; ++m) {
            for (int k = 0; k < n_segments; ++k) {
                spec.utilities(m, k) = u.at(m).at(k).get<double>();
            }
        }
    }
    spec.mu_scale = get_or(j, "mu", spec.mu_scale);
    spec.n_states = get_or(j, "n_states", spec.n_states);
    spec.validate();
    return spec;
}

std::string frontier_csv(const std::vector<FrontierRow>& rows) {
    std::ostringstream os;
    os << "concept,gamma,tau,degree,scheme,er,variance,lpm,iterations,converged,seed\n";
    for (const auto& row : rows) {
        os << to_string(row.solution_concept) << ',' << format_double(row.gamma) << ','
           << format_double(row.tau) << ',' << format_double(row.degree) << ','
           << to_string(row.scheme) << ',' << format_double(row.er) << ','
           << format_double(row.variance) << ',' << format_double(row.lpm) << ','
           << row.iterations << ',' << (row.converged ? "true" : "false") << ',' << row.seed
           << "\n";
    }
    return os.str();
}

std::string skew_csv(const std::vector<SkewDistanceRow>& rows) {
    std::ostringstream os;
    os << "kappa,mean_distance,std_distance\n";
    for (const auto& row : rows) {
        os << format_double(row.kappa) << ',' << format_double(row.mean_distance) << ','
           << format_double(row.std_distance) << "\n";
    }
    return os.str();
}

std::string state_count_csv(const std::vector<StateCountRow>& rows) {
    std::ostringstream os;
    os << "n_states,concept,seed,lpm\n";
    for (const auto& row : rows) {
        os << row.n_states << ',' << to_string(row.solution_concept) << ',' << row.seed << ','
           << format_double(row.lpm) << "\n";
    }
    return os.str();
}

std::string degree_csv(const std::vector<DegreeRow>& rows) {
    std::ostringstream os;
    os << "degree,er,lpm,lpm_ref2,iterations,converged\n";
    for (const auto& row : rows) {
        os << format_double(row.degree) << ',' << format_double(row.er) << ','
           << format_double(row.lpm) << ',' << format_double(row.lpm_ref2) << ','
           << row.iterations << ',' << (row.converged ? "true" : "false") << "\n";
    }
    return os.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    out << content;
    if (!out) {
        throw std::runtime_error("failed writing " + path.string());
    }
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace drae
