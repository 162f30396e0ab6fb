// Shared domain types for the coupled-cluster Majorana model: physical
// parameters (N, J, mu, beta), the imaginary-time grid, and the boundary
// sector labels used by the replica solver.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sre {

// Physical knobs of the two-cluster model: N Majorana modes per side
// (2N total), quartic coupling strength J, inter-cluster hopping mu,
// inverse temperature beta. All energies in units where hbar = 1.
struct ModelParams {
    int n_per_side = 1;
    double coupling_j = 1.0;
    double hopping_mu = 0.0;
    double beta = 0.0;
};

// Uniform discretization of one beta-length branch of the imaginary-time
// contour: slices_m points with spacing dtau = beta / slices_m.
struct TauGrid {
    int slices_m = 0;
    double dtau = 0.0;

    static TauGrid make(double beta, int slices_m) {
        TauGrid g;
        g.slices_m = slices_m;
        g.dtau = (slices_m > 0) ? beta / slices_m : 0.0;
        return g;
    }
    double beta() const { return dtau * slices_m; }
};

// Boundary-condition assignment (sigma_L, sigma_R) for one replica-pair
// junction sector. Exactly four sectors exist.
struct SectorLabel {
    int sigma_l = +1;  // +1 or -1
    int sigma_r = +1;

    SectorLabel paired() const { return {-sigma_l, -sigma_r}; }
    bool operator==(const SectorLabel&) const = default;
};

// All four sectors in a fixed canonical order.
std::vector<SectorLabel> all_sectors();

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Parameter/grid bundle that passed validation. beta = 0 is carried as an
// explicit infinite-temperature flag so no solver ever divides by beta.
struct CheckedConfig {
    ModelParams params;
    TauGrid grid;
    bool infinite_temperature = false;
};

// Validates params and grid against the model invariants. Throws
// ConfigError naming the offending field: negative or non-finite entries,
// odd slice counts, or dtau * slices_m != beta beyond 1e-12 relative.
CheckedConfig validate_params(const ModelParams& params, const TauGrid& grid);

// Energy unit used for reporting: J when J > 0, otherwise mu.
double energy_unit(const ModelParams& params);

}  // namespace sre
