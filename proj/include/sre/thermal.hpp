// Thermal Schwinger-Dyson solver for the coupled two-cluster model:
//   Sigma_ab = J^2 s_ab G_ab^3,   G = (kinetic - Sigma)^{-1}
// on the antiperiodic circle. The production path iterates in Matsubara
// frequencies (time-translation invariance holds); a matrix-form backend
// on the integer tau grid provides ln Z on the same discretization as the
// replica contour solver, so the two actions share cutoff effects.
//
// Convention: fields of the right cluster absorb a phase i, making every
// Green's function real. In this basis the kinetic hopping block is
// symmetric (+mu on both off-diagonals) and the self-energy update carries
// a minus sign on the LR/RL cubes: Sigma_LR = -J^2 G_LR^3.

#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "sre/domain.hpp"

namespace sre::thermal {

// Time-translation-invariant pair of Green's functions sampled on
// midpoints tau_k = (k + 1/2) dtau. g_rr = g_ll and g_rl = g_lr by the
// left/right symmetry of the model.
struct ThermalGreen {
    TauGrid grid;
    std::vector<double> g_ll;
    std::vector<double> g_lr;
};

enum class Branch { BlackHole, Wormhole };

struct ThermalSaddle {
    ThermalGreen green;
    ThermalGreen self_energy;
    double ln_z = 0.0;    // per mode pair
    double action = 0.0;  // S_beta / N = -ln_z
    bool converged = false;
    int iterations = 0;
    double residual = 0.0;
    std::vector<double> residual_history;
    Branch branch_tag = Branch::BlackHole;
};

struct SolveOptions {
    double tol = 1e-10;     // on max|dG| between successive candidates
    int max_iter = 5000;
    double damping = 0.3;   // halved after two consecutive residual rises
};

struct Init {
    enum Kind {
        Free,          // mu = 0 free propagator, sgn(tau)/2
        WormholeSeed,  // J = 0 closed form at the same (beta, mu)
        FromState,     // continue from a previous saddle (same M)
    };
    Kind kind = Free;
    const ThermalSaddle* state = nullptr;
};

// Damped fixed-point iteration in Matsubara space. Returns the converged
// saddle or the best iterate flagged unconverged; throws on NaN.
ThermalSaddle solve_thermal(const CheckedConfig& cfg, const Init& init,
                            const SolveOptions& opt = {});

// ln Z per mode pair for a converged saddle (also stored in the saddle).
double ln_z(const CheckedConfig& cfg, const ThermalSaddle& saddle);

// S2(rho) per mode pair = S_{2beta} - 2 S_beta, each term taken from the
// dominant branch (larger ln Z) at its own temperature; the 2beta solve
// uses 2M slices so both grids share dtau.
double renyi2(const ModelParams& params, int slices_m,
              const SolveOptions& opt = {});

// J = 0 closed forms (also the wormhole seed).
double free_g_ll(double mu, double beta, double tau);
double free_g_lr(double mu, double beta, double tau);

// ln(2 cosh(beta mu / 2)), overflow-safe.
double free_ln_z(double mu, double beta);

// ---------------------------------------------------------------------
// Matrix-form backend (integer grid tau_i = i dtau, side-major indexing
// s*M + i). Shares the discretization of the replica contour solver.
// ---------------------------------------------------------------------

struct MatrixThermal {
    Eigen::MatrixXd green;  // (2M) x (2M), entries G(tau_i, tau_j)
    double ln_z = 0.0;
    bool converged = false;
    int iterations = 0;
    double residual = 0.0;
};

// Polishes the (transferred) Matsubara solution to the matrix-scheme fixed
// point and evaluates ln Z with the determinant referenced to the free
// kinetic operator, so J = 0 is exact at every M.
MatrixThermal solve_thermal_matrix(const CheckedConfig& cfg,
                                   const ThermalSaddle& seed,
                                   const SolveOptions& opt = {});

// Antiperiodic single-circle kinetic matrix used by both backends.
Eigen::MatrixXd thermal_kinetic(const TauGrid& grid, double mu);

}  // namespace sre::thermal
