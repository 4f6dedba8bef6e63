#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hfb/meanfield.hpp"
#include "hfb/states.hpp"

namespace hfb {

// Time derivatives of (phi, gamma, sigma); gamma and sigma as kernels.
struct HfbRhs {
    GridField dphi;
    GridKernel dgamma;
    GridKernel dsigma;
};

enum class Scheme { rk4, strang_split };

struct IntegratorConfig {
    double dt = 1e-3;
    Scheme scheme = Scheme::rk4;
    double t_final = 0.0;
    int output_stride = 1;
    bool repair_drift = false;
};

struct NumericalAbort : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Mean-field matrices acting on site values at a given state:
// H = h(gamma + |phi><phi|), H0 = h(gamma), K = k(sigma + phi (x) phi).
struct MeanFieldMatrices {
    cmat H;
    cmat H0;
    cmat K;
};

MeanFieldMatrices mean_field_matrices(const QuasifreeState& rho, const PotentialPair& pot, const GridField& V);

HfbRhs hfb_rhs(const QuasifreeState& rho, const PotentialPair& pot, const GridField& V);

// exp(-i dt A_kin) with A_kin the kinetic part of the linear generator; V must vanish.
class LinearPropagator {
public:
    LinearPropagator(double dt, const TorusGrid& grid, const GridField& V, const PotentialPair& pot);
    QuasifreeState apply(const QuasifreeState& rho) const;

private:
    TorusGrid grid_;
    cmat F_;
    cvec phase_;  // e^{-i |k|^2 dt} per mode
};

LinearPropagator linear_propagator(double dt, const TorusGrid& grid, const GridField& V, const PotentialPair& pot);

QuasifreeState step(const QuasifreeState& rho, const PotentialPair& pot, const GridField& V,
                    const IntegratorConfig& cfg);

struct TrajectoryRecord {
    double t = 0.0;
    double N = 0.0;
    double E = 0.0;
    double min_eig_Gamma = 0.0;  // of the kernel Gamma
    double herm_violation = 0.0;
    double symm_violation = 0.0;
};

struct Trajectory {
    std::vector<TrajectoryRecord> records;
    std::vector<QuasifreeState> snapshots;
};

using Observer = std::function<void(double, const QuasifreeState&)>;

// Records (and calls observers) every output_stride steps and at the end.
Trajectory evolve(const QuasifreeState& rho0, const PotentialPair& pot, const GridField& V,
                  const IntegratorConfig& cfg, const std::vector<Observer>& observers = {},
                  bool keep_snapshots = false);

TrajectoryRecord record_of(double t, const QuasifreeState& rho, const PotentialPair& pot, const GridField& V);

void write_trajectory_csv(const std::string& path, const Trajectory& traj);

}  // namespace hfb
