#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "config.hpp"
#include "hfb/dynamics.hpp"
#include "hfb/gibbs.hpp"
#include "hfb/observables.hpp"
#include "hfb/symplectic.hpp"

namespace fs = std::filesystem;
using hfbcli::json;

namespace {

enum Exit { kOk = 0, kRuntime = 1, kConfig = 2, kAbort = 3, kAdmissibility = 4 };

struct Options {
    std::string config;
    std::string out = ".";
    std::optional<std::uint64_t> seed;
    bool quiet = false;
};

Options opts;

void info(const char* fmt, const std::string& s) {
    if (!opts.quiet) std::fprintf(stderr, fmt, s.c_str());
}

std::string base_dir() { return fs::path(opts.config).parent_path().string(); }

std::ofstream open_csv(const std::string& name) {
    std::ofstream os(fs::path(opts.out) / name);
    if (!os) throw std::runtime_error("cannot open " + (fs::path(opts.out) / name).string());
    os << std::setprecision(17);
    return os;
}

void write_summary(const json& j) {
    const auto path = fs::path(opts.out) / "summary.json";
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path.string());
    os << j.dump(2) << '\n';
    info("wrote %s\n", path.string());
}

double rel_drift(double x, double x0) { return x0 != 0.0 ? std::abs(x - x0) / std::abs(x0) : std::abs(x - x0); }

// least squares of log ||sigma_t|| against t
std::pair<double, double> log_fit(const std::vector<std::pair<double, double>>& pts) {
    double n = 0, st = 0, sy = 0, stt = 0, sty = 0, syy = 0;
    for (auto [t, s] : pts) {
        if (!(s > 0.0)) continue;
        const double y = std::log(s);
        n += 1;
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
        syy += y * y;
    }
    if (n < 3) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
    const double vt = stt - st * st / n, vy = syy - sy * sy / n, c = sty - st * sy / n;
    const double slope = c / vt;
    const double r2 = vy > 0.0 ? c * c / (vt * vy) : 1.0;
    return {slope, r2};
}

json nullable(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

int run_evolve() {
    auto cfg = hfbcli::parse_evolve(hfbcli::load_json(opts.config), base_dir(), opts.seed);
    auto rho0 = hfbcli::build_state(cfg.grid, cfg.state);
    fs::create_directories(opts.out);
    if (cfg.snapshots) fs::create_directories(fs::path(opts.out) / "snapshots");

    auto csv = open_csv("trajectory.csv");
    csv << "t,N,E,min_eig_Gamma,herm_violation,symm_violation\n";
    std::vector<hfb::TrajectoryRecord> recs;
    int snap = 0;
    hfb::QuasifreeState last = rho0;
    auto observer = [&](double t, const hfb::QuasifreeState& r) {
        auto rec = hfb::record_of(t, r, cfg.pot, cfg.V);
        recs.push_back(rec);
        csv << rec.t << ',' << rec.N << ',' << rec.E << ',' << rec.min_eig_Gamma << ',' << rec.herm_violation << ','
            << rec.symm_violation << '\n';
        if (cfg.snapshots) {
            char name[64];
            std::snprintf(name, sizeof name, "snap_%06d.hfbsnap", snap++);
            hfb::write_snapshot((fs::path(opts.out) / "snapshots" / name).string(), r);
        }
        last = r;
    };

    json s;
    s["command"] = "evolve";
    s["grid"] = hfbcli::grid_json(cfg.grid);
    s["state"] = cfg.state.preset;
    if (cfg.state.preset == "random") s["seed"] = cfg.state.seed;
    s["interaction"] = cfg.pot.mode == hfb::PairMode::contact ? "contact" : "grid_function";
    s["dt"] = cfg.integ.dt;
    s["t_final"] = cfg.integ.t_final;
    s["scheme"] = cfg.integ.scheme == hfb::Scheme::rk4 ? "rk4" : "strang_split";
    s["steps"] = std::llround(cfg.integ.t_final / cfg.integ.dt);
    s["outputs"] = {{"trajectory", "trajectory.csv"}, {"final_state", "final_state.hfbsnap"}};
    if (cfg.snapshots) s["outputs"]["snapshots"] = "snapshots";

    int code = kOk;
    try {
        hfb::evolve(rho0, cfg.pot, cfg.V, cfg.integ, {observer});
        s["status"] = "ok";
    } catch (const hfb::NumericalAbort& e) {
        s["status"] = "aborted";
        s["message"] = e.what();
        code = kAbort;
    }
    csv.close();
    hfb::write_snapshot((fs::path(opts.out) / "final_state.hfbsnap").string(), last);

    double dN = 0.0, dE = 0.0, mine = std::numeric_limits<double>::infinity();
    for (const auto& r : recs) {
        dN = std::max(dN, rel_drift(r.N, recs.front().N));
        dE = std::max(dE, rel_drift(r.E, recs.front().E));
        mine = std::min(mine, r.min_eig_Gamma);
    }
    s["records"] = recs.size();
    s["t_reached"] = recs.empty() ? 0.0 : recs.back().t;
    s["N_initial"] = recs.front().N;
    s["N_final"] = recs.back().N;
    s["E_initial"] = recs.front().E;
    s["E_final"] = recs.back().E;
    s["max_drift_N"] = dN;
    s["max_drift_E"] = dE;
    s["min_eig_Gamma"] = mine;
    write_summary(s);
    if (code == kAbort) std::fprintf(stderr, "numerical abort at t = %.6g: %s\n", recs.back().t, s["message"].get<std::string>().c_str());
    return code;
}

int run_gibbs() {
    auto cfg = hfbcli::parse_gibbs(hfbcli::load_json(opts.config));
    const auto& p = cfg.params;
    json s;
    s["command"] = "gibbs";
    s["beta"] = p.beta;
    s["g"] = p.g;
    s["n"] = p.n;
    s["dim"] = p.grid.dim;
    s["points"] = p.grid.points_per_side;
    s["warnings"] = json::array();
    if (p.grid.dim < 3) {
        const std::string w = "dim < 3: no critical density; only the finite-L chemical potentials are computed";
        s["warnings"].push_back(w);
        if (!opts.quiet) std::fprintf(stderr, "warning: %s\n", w.c_str());
    }
    auto res = hfb::thermodynamic_sweep(p, cfg.L_list, cfg.tol);
    fs::create_directories(opts.out);
    hfb::write_sweep_csv((fs::path(opts.out) / "sweep.csv").string(), res);
    const bool cond = p.grid.dim >= 3;
    s["n_c"] = cond ? json(res.n_c) : json(nullptr);
    s["mu_inf"] = cond ? json(res.mu_inf) : json(nullptr);
    s["condensate_fraction_predicted"] = cond ? json(res.condensate_fraction_predicted) : json(nullptr);
    s["largest_L"] = res.rows.back().L;
    s["mu_largest_L"] = res.rows.back().mu;
    s["zero_mode_fraction_largest_L"] = res.rows.back().zero_mode_fraction;
    s["rows"] = res.rows.size();
    s["status"] = "ok";
    s["outputs"] = {{"sweep", "sweep.csv"}};
    write_summary(s);
    return kOk;
}

int run_diagonalize() {
    auto cfg = hfbcli::parse_diagonalize(hfbcli::load_json(opts.config), base_dir(), opts.seed);
    auto rho = hfbcli::build_state(cfg.grid, cfg.state);
    hfb::DiagonalizeOptions o;
    o.dt = cfg.dt;
    auto res = hfb::diagonalize_gamma(rho, cfg.tol, o);
    fs::create_directories(opts.out);
    {
        auto os = open_csv("spectrum.csv");
        os << "index,gamma_prime\n";
        for (int i = 0; i < res.spectrum.size(); ++i) os << i << ',' << res.spectrum(i) << '\n';
    }
    {
        auto os = open_csv("decay_log.csv");
        os << "t,sigma_hs\n";
        for (auto [t, n] : res.decay_log) os << t << ',' << n << '\n';
    }
    auto [slope, r2] = log_fit(res.decay_log);
    json s;
    s["command"] = "diagonalize";
    s["grid"] = hfbcli::grid_json(cfg.grid);
    s["state"] = cfg.state.preset;
    if (cfg.state.preset == "random") s["seed"] = cfg.state.seed;
    s["tol"] = cfg.tol;
    s["residual"] = res.residual;
    s["clip"] = res.clip;
    s["passes"] = res.passes;
    s["symplectic_violation"] = hfb::check_symplectic(res.U);
    s["spectrum_min"] = res.spectrum.minCoeff();
    s["spectrum_max"] = res.spectrum.maxCoeff();
    s["trace_gamma_prime"] = res.spectrum.sum();
    s["decay_slope"] = nullable(slope);
    s["decay_r2"] = nullable(r2);
    s["status"] = "ok";
    s["outputs"] = {{"spectrum", "spectrum.csv"}, {"decay_log", "decay_log.csv"}};
    write_summary(s);
    return kOk;
}

int run_modes() {
    auto cfg = hfbcli::parse_modes(hfbcli::load_json(opts.config));
    auto modes = hfb::bogoliubov_modes(cfg.n_total, cfg.n0, cfg.g, cfg.grid);
    fs::create_directories(opts.out);
    hfb::write_mode_table((fs::path(opts.out) / "modes.csv").string(), modes);
    int stable = 0, gapless = 0, unstable = 0;
    double emin = std::numeric_limits<double>::infinity();
    for (const auto& m : modes) {
        if (!m.stable)
            ++unstable;
        else if (m.gapless)
            ++gapless;
        else {
            ++stable;
            emin = std::min(emin, m.E);
        }
    }
    json s;
    s["command"] = "modes";
    s["grid"] = hfbcli::grid_json(cfg.grid);
    s["n_total"] = cfg.n_total;
    s["n0"] = cfg.n0;
    s["g"] = cfg.g;
    s["modes"] = modes.size();
    s["stable"] = stable;
    s["gapless"] = gapless;
    s["unstable"] = unstable;
    s["min_gapped_energy"] = nullable(emin);
    s["status"] = "ok";
    s["outputs"] = {{"modes", "modes.csv"}};
    write_summary(s);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hartree-Fock-Bogoliubov dynamics, diagonalization and Gibbs states on a torus grid"};
    app.require_subcommand(1);
    app.add_option("--out", opts.out, "output directory")->capture_default_str();
    app.add_option("--seed", opts.seed, "seed for the random state preset");
    app.add_flag("--quiet", opts.quiet, "no progress output");

    int (*handler)() = nullptr;
    auto add = [&](const char* name, const char* desc, int (*f)()) {
        auto* sub = app.add_subcommand(name, desc);
        sub->fallthrough();
        sub->add_option("--config", opts.config, "JSON configuration file")->required();
        sub->callback([&handler, f] { handler = f; });
    };
    add("evolve", "integrate the HFB equations", run_evolve);
    add("gibbs", "finite-volume Gibbs states and the thermodynamic sweep", run_gibbs);
    add("diagonalize", "symplectic diagonalization of a state", run_diagonalize);
    add("modes", "Bogoliubov modes of a homogeneous condensate", run_modes);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    try {
        return handler();
    } catch (const hfbcli::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kConfig;
    } catch (const hfbcli::AdmissibilityError& e) {
        std::fprintf(stderr, "admissibility: %s\n", e.what());
        return kAdmissibility;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "admissibility: %s\n", e.what());
        return kAdmissibility;
    } catch (const hfb::NumericalAbort& e) {
        std::fprintf(stderr, "numerical abort: %s\n", e.what());
        return kAbort;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kRuntime;
    }
}
