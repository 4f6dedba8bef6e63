#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "hfb/dynamics.hpp"
#include "hfb/gibbs.hpp"
#include "hfb/states.hpp"

namespace hfbcli {

using nlohmann::json;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// raised when a state is rejected by check_admissible
struct AdmissibilityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

json load_json(const std::string& path);

struct StateSpec {
    std::string preset = "vacuum";  // vacuum | plane_wave | squeezed | random | file
    std::string file;
    std::uint64_t seed = 0;
    hfb::RandomStateOptions random;
    std::vector<int> wavevector;
    double amplitude = 1.0;
    double squeeze = 0.5;
};

struct EvolveConfig {
    hfb::TorusGrid grid;
    hfb::PotentialPair pot;
    hfb::GridField V;
    StateSpec state;
    hfb::IntegratorConfig integ;
    bool snapshots = false;
};

struct GibbsConfig {
    hfb::GibbsParams params;
    std::vector<double> L_list;
    double tol = 1e-12;
};

struct DiagonalizeConfig {
    hfb::TorusGrid grid;
    StateSpec state;
    double tol = 1e-8;
    double dt = 0.05;
};

struct ModesConfig {
    hfb::TorusGrid grid;
    double n_total = 1.0;
    double n0 = 1.0;
    double g = 0.0;
};

// base_dir resolves relative snapshot paths; seed overrides state.seed for the random preset
EvolveConfig parse_evolve(const json& j, const std::string& base_dir, std::optional<std::uint64_t> seed);
GibbsConfig parse_gibbs(const json& j);
DiagonalizeConfig parse_diagonalize(const json& j, const std::string& base_dir,
                                    std::optional<std::uint64_t> seed);
ModesConfig parse_modes(const json& j);

hfb::QuasifreeState build_state(const hfb::TorusGrid& grid, const StateSpec& spec);

json grid_json(const hfb::TorusGrid& g);

}  // namespace hfbcli
