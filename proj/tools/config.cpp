#include "config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "hfb/meanfield.hpp"

namespace hfbcli {

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

const json& need(const json& j, const std::string& key, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path + ": expected an object");
    auto it = j.find(key);
    if (it == j.end()) throw ConfigError(join(path, key) + ": missing");
    return *it;
}

double number(const json& v, const std::string& path) {
    if (!v.is_number()) throw ConfigError(path + ": expected a number");
    double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(path + ": not finite");
    return x;
}

long long integer(const json& v, const std::string& path) {
    if (!v.is_number_integer()) throw ConfigError(path + ": expected an integer");
    return v.get<long long>();
}

bool boolean(const json& v, const std::string& path) {
    if (!v.is_boolean()) throw ConfigError(path + ": expected true or false");
    return v.get<bool>();
}

double num_or(const json& j, const std::string& key, const std::string& path, double def) {
    return j.contains(key) ? number(j[key], join(path, key)) : def;
}

bool bool_or(const json& j, const std::string& key, const std::string& path, bool def) {
    return j.contains(key) ? boolean(j[key], join(path, key)) : def;
}

std::vector<double> numbers(const json& v, const std::string& path) {
    if (!v.is_array()) throw ConfigError(path + ": expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

void only_keys(const json& j, const std::string& path, std::initializer_list<const char*> keys) {
    if (!j.is_object()) throw ConfigError((path.empty() ? "config" : path) + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : keys) ok = ok || it.key() == k;
        if (!ok) throw ConfigError(join(path, it.key()) + ": unknown field");
    }
}

hfb::TorusGrid parse_grid(const json& j, const std::string& path) {
    only_keys(j, path, {"dim", "points", "half_length"});
    long long d = integer(need(j, "dim", path), join(path, "dim"));
    long long N = integer(need(j, "points", path), join(path, "points"));
    double L = number(need(j, "half_length", path), join(path, "half_length"));
    if (d < 1 || d > 3) throw ConfigError(join(path, "dim") + ": must be 1, 2 or 3");
    if (N < 2 || N % 2) throw ConfigError(join(path, "points") + ": must be even and >= 2");
    if (!(L > 0.0)) throw ConfigError(join(path, "half_length") + ": must be positive");
    if (std::pow(double(N), double(d)) > 4096) throw ConfigError(path + ": more than 4096 sites");
    return hfb::make_grid(int(d), int(N), L);
}

double squared_radius(const hfb::TorusGrid& g, int j) {
    double r2 = 0.0;
    for (int a = 0; a < g.dim; ++a) r2 += g.position(j, a) * g.position(j, a);
    return r2;
}

hfb::rvec site_values(const hfb::TorusGrid& g, const json& v, const std::string& path) {
    auto x = numbers(v, path);
    if (static_cast<int>(x.size()) != g.sites)
        throw ConfigError(path + ": expected " + std::to_string(g.sites) + " values");
    return Eigen::Map<hfb::rvec>(x.data(), g.sites);
}

hfb::PotentialPair parse_interaction(const hfb::TorusGrid& g, const json& j, const std::string& path) {
    only_keys(j, path, {"contact", "gaussian", "values"});
    if (j.size() != 1) throw ConfigError(path + ": give exactly one of contact, gaussian, values");
    if (j.contains("contact")) return hfb::make_contact_potential(number(j["contact"], join(path, "contact")));
    if (j.contains("values")) return hfb::make_grid_potential(g, site_values(g, j["values"], join(path, "values")));
    const std::string p = join(path, "gaussian");
    const json& gj = j["gaussian"];
    only_keys(gj, p, {"amplitude", "width"});
    double a = number(need(gj, "amplitude", p), join(p, "amplitude"));
    double w = number(need(gj, "width", p), join(p, "width"));
    if (!(w > 0.0)) throw ConfigError(join(p, "width") + ": must be positive");
    hfb::rvec v(g.sites);
    for (int i = 0; i < g.sites; ++i) v(i) = a * std::exp(-squared_radius(g, i) / (2.0 * w * w));
    return hfb::make_grid_potential(g, v);
}

hfb::GridField parse_external(const hfb::TorusGrid& g, const json& j, const std::string& path) {
    only_keys(j, path, {"harmonic", "values"});
    if (j.size() != 1) throw ConfigError(path + ": give exactly one of harmonic, values");
    hfb::rvec V(g.sites);
    if (j.contains("values")) {
        V = site_values(g, j["values"], join(path, "values"));
    } else {
        double c = number(j["harmonic"], join(path, "harmonic"));
        for (int i = 0; i < g.sites; ++i) V(i) = c * squared_radius(g, i);
    }
    return V.cast<hfb::cxd>();
}

std::string resolve(const std::string& base_dir, const std::string& file) {
    std::filesystem::path p(file);
    if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
    return p.string();
}

StateSpec parse_state(const json& j, const std::string& path, const std::string& base_dir,
                      std::optional<std::uint64_t> seed) {
    StateSpec s;
    if (j.contains("file")) {
        only_keys(j, path, {"file"});
        if (!j["file"].is_string()) throw ConfigError(join(path, "file") + ": expected a string");
        s.preset = "file";
        s.file = resolve(base_dir, j["file"].get<std::string>());
        if (!std::filesystem::exists(s.file)) throw ConfigError(join(path, "file") + ": no such file " + s.file);
        return s;
    }
    const json& pj = need(j, "preset", path);
    if (!pj.is_string()) throw ConfigError(join(path, "preset") + ": expected a string");
    s.preset = pj.get<std::string>();
    if (s.preset == "vacuum") {
        only_keys(j, path, {"preset"});
    } else if (s.preset == "plane_wave") {
        only_keys(j, path, {"preset", "wavevector", "amplitude"});
        for (double m : numbers(need(j, "wavevector", path), join(path, "wavevector"))) {
            if (m != std::round(m)) throw ConfigError(join(path, "wavevector") + ": integer entries expected");
            s.wavevector.push_back(int(m));
        }
        s.amplitude = num_or(j, "amplitude", path, 1.0);
    } else if (s.preset == "squeezed") {
        only_keys(j, path, {"preset", "r"});
        s.squeeze = num_or(j, "r", path, 0.5);
    } else if (s.preset == "random") {
        only_keys(j, path, {"preset", "seed", "scale", "bandwidth", "condensate", "pairing"});
        if (j.contains("seed")) {
            long long v = integer(j["seed"], join(path, "seed"));
            if (v < 0) throw ConfigError(join(path, "seed") + ": must be >= 0");
            s.seed = std::uint64_t(v);
        }
        if (seed) s.seed = *seed;
        s.random.scale = num_or(j, "scale", path, 0.5);
        s.random.bandwidth = num_or(j, "bandwidth", path, 0.0);
        s.random.with_condensate = bool_or(j, "condensate", path, true);
        s.random.with_pairing = bool_or(j, "pairing", path, true);
        if (s.random.scale < 0.0) throw ConfigError(join(path, "scale") + ": must be >= 0");
        if (s.random.bandwidth < 0.0) throw ConfigError(join(path, "bandwidth") + ": must be >= 0");
    } else {
        throw ConfigError(join(path, "preset") + ": unknown preset '" + s.preset +
                          "' (vacuum, plane_wave, squeezed, random)");
    }
    return s;
}

hfb::QuasifreeState load_snapshot(const std::string& file) {
    try {
        return hfb::read_snapshot(file);
    } catch (const std::exception& e) {
        throw ConfigError("state.file: " + std::string(e.what()));
    }
}

// grid from the config, or from the snapshot when the state is a file
hfb::TorusGrid grid_for(const json& j, const StateSpec& s) {
    if (j.contains("grid")) return parse_grid(j["grid"], "grid");
    if (s.preset == "file") return load_snapshot(s.file).grid;
    throw ConfigError("grid: missing");
}

}  // namespace

json load_json(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config " + path);
    try {
        return json::parse(is, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

EvolveConfig parse_evolve(const json& j, const std::string& base_dir, std::optional<std::uint64_t> seed) {
    only_keys(j, "", {"grid", "interaction", "external", "state", "integrator"});
    EvolveConfig c;
    c.state = parse_state(need(j, "state", ""), "state", base_dir, seed);
    c.grid = grid_for(j, c.state);
    c.pot = parse_interaction(c.grid, need(j, "interaction", ""), "interaction");
    if (j.contains("external")) c.V = parse_external(c.grid, j["external"], "external");

    const std::string p = "integrator";
    const json& ij = need(j, p, "");
    only_keys(ij, p, {"dt", "t_final", "scheme", "output_stride", "repair_drift", "snapshots"});
    c.integ.dt = number(need(ij, "dt", p), "integrator.dt");
    c.integ.t_final = number(need(ij, "t_final", p), "integrator.t_final");
    if (!(c.integ.dt > 0.0)) throw ConfigError("integrator.dt: must be positive");
    if (c.integ.t_final < 0.0) throw ConfigError("integrator.t_final: must be >= 0");
    if (ij.contains("output_stride")) {
        long long s = integer(ij["output_stride"], "integrator.output_stride");
        if (s < 1) throw ConfigError("integrator.output_stride: must be >= 1");
        c.integ.output_stride = int(s);
    }
    c.integ.repair_drift = bool_or(ij, "repair_drift", p, false);
    c.snapshots = bool_or(ij, "snapshots", p, false);
    if (ij.contains("scheme")) {
        if (!ij["scheme"].is_string()) throw ConfigError("integrator.scheme: expected a string");
        auto s = ij["scheme"].get<std::string>();
        if (s == "rk4")
            c.integ.scheme = hfb::Scheme::rk4;
        else if (s == "strang_split")
            c.integ.scheme = hfb::Scheme::strang_split;
        else
            throw ConfigError("integrator.scheme: unknown scheme '" + s + "' (rk4, strang_split)");
    }
    if (c.integ.scheme == hfb::Scheme::strang_split && c.V.size() > 0 && c.V.cwiseAbs().maxCoeff() != 0.0)
        throw ConfigError("integrator.scheme: strang_split requires a vanishing external potential");
    return c;
}

GibbsConfig parse_gibbs(const json& j) {
    only_keys(j, "", {"beta", "g", "n", "n_over_nc", "dim", "points", "L_list", "tol"});
    GibbsConfig c;
    auto& p = c.params;
    p.beta = number(need(j, "beta", ""), "beta");
    p.g = number(need(j, "g", ""), "g");
    long long d = integer(need(j, "dim", ""), "dim");
    long long N = integer(need(j, "points", ""), "points");
    if (d < 1 || d > 3) throw ConfigError("dim: must be 1, 2 or 3");
    if (N < 2 || N % 2) throw ConfigError("points: must be even and >= 2");
    if (!(p.beta > 0.0)) throw ConfigError("beta: must be positive");
    if (p.g < 0.0) throw ConfigError("g: must be >= 0");
    if (j.contains("n") == j.contains("n_over_nc")) throw ConfigError("n: give exactly one of n, n_over_nc");
    if (j.contains("n")) {
        p.n = number(j["n"], "n");
    } else {
        if (d < 3) throw ConfigError("n_over_nc: the critical density needs dim >= 3");
        p.n = number(j["n_over_nc"], "n_over_nc") * hfb::critical_density(p.beta, int(d));
    }
    if (!(p.n > 0.0)) throw ConfigError("n: must be positive");
    c.L_list = numbers(need(j, "L_list", ""), "L_list");
    if (c.L_list.empty()) throw ConfigError("L_list: empty");
    for (std::size_t i = 0; i < c.L_list.size(); ++i) {
        if (!(c.L_list[i] > 0.0)) throw ConfigError("L_list[" + std::to_string(i) + "]: must be positive");
        if (i > 0 && !(c.L_list[i] > c.L_list[i - 1]))
            throw ConfigError("L_list[" + std::to_string(i) + "]: must be ascending");
    }
    c.tol = num_or(j, "tol", "", 1e-12);
    if (!(c.tol > 0.0)) throw ConfigError("tol: must be positive");
    p.grid = hfb::make_grid(int(d), int(N), c.L_list.front());
    return c;
}

DiagonalizeConfig parse_diagonalize(const json& j, const std::string& base_dir,
                                    std::optional<std::uint64_t> seed) {
    only_keys(j, "", {"grid", "state", "tol", "dt"});
    DiagonalizeConfig c;
    c.state = parse_state(need(j, "state", ""), "state", base_dir, seed);
    c.grid = grid_for(j, c.state);
    c.tol = num_or(j, "tol", "", 1e-8);
    c.dt = num_or(j, "dt", "", 0.05);
    if (!(c.tol > 0.0)) throw ConfigError("tol: must be positive");
    if (!(c.dt > 0.0)) throw ConfigError("dt: must be positive");
    return c;
}

ModesConfig parse_modes(const json& j) {
    only_keys(j, "", {"grid", "n_total", "n0", "g"});
    ModesConfig c;
    c.grid = parse_grid(need(j, "grid", ""), "grid");
    c.n_total = number(need(j, "n_total", ""), "n_total");
    c.n0 = number(need(j, "n0", ""), "n0");
    c.g = number(need(j, "g", ""), "g");
    if (c.n0 < 0.0 || c.n0 > c.n_total) throw ConfigError("n0: need 0 <= n0 <= n_total");
    return c;
}

hfb::QuasifreeState build_state(const hfb::TorusGrid& grid, const StateSpec& spec) {
    hfb::QuasifreeState r;
    if (spec.preset == "file") {
        r = load_snapshot(spec.file);
        if (r.grid.dim != grid.dim || r.grid.points_per_side != grid.points_per_side ||
            r.grid.half_length != grid.half_length)
            throw ConfigError("state.file: snapshot grid differs from the configured grid");
    } else if (spec.preset == "vacuum") {
        r = hfb::vacuum_state(grid);
    } else if (spec.preset == "squeezed") {
        r = hfb::squeezed_state(grid, spec.squeeze);
    } else if (spec.preset == "random") {
        r = hfb::sample_random_state(grid, spec.seed, spec.random);
    } else if (spec.preset == "plane_wave") {
        if (static_cast<int>(spec.wavevector.size()) != grid.dim)
            throw ConfigError("state.wavevector: expected " + std::to_string(grid.dim) + " entries");
        const double k0 = M_PI / grid.half_length;
        int mode = -1;
        for (int p = 0; p < grid.sites && mode < 0; ++p) {
            bool match = true;
            for (int a = 0; a < grid.dim; ++a) match = match && std::lround(grid.modes(p, a) / k0) == spec.wavevector[a];
            if (match) mode = p;
        }
        if (mode < 0) throw ConfigError("state.wavevector: outside the grid's mode range");
        r = hfb::vacuum_state(grid);
        r.phi = spec.amplitude * hfb::plane_wave(grid, mode);
    } else {
        throw ConfigError("state.preset: unknown preset '" + spec.preset + "'");
    }
    auto rep = hfb::check_admissible(r);
    if (!rep.admissible)
        throw AdmissibilityError("initial state is not admissible (max violation " +
                                 std::to_string(rep.max_violation()) + ")");
    return r;
}

json grid_json(const hfb::TorusGrid& g) {
    return {{"dim", g.dim}, {"points", g.points_per_side}, {"half_length", g.half_length}, {"sites", g.sites}};
}

}  // namespace hfbcli
