#include "sre/domain.hpp"

#include <cmath>

namespace sre {

std::vector<SectorLabel> all_sectors() {
    return {{+1, +1}, {+1, -1}, {-1, +1}, {-1, -1}};
}

static void require(bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
}

CheckedConfig validate_params(const ModelParams& params, const TauGrid& grid) {
    require(params.n_per_side >= 1, "n_per_side must be >= 1");
    require(std::isfinite(params.coupling_j) && params.coupling_j >= 0.0,
            "negative or non-finite coupling J");
    require(std::isfinite(params.hopping_mu) && params.hopping_mu >= 0.0,
            "negative hopping mu");
    require(std::isfinite(params.beta) && params.beta >= 0.0,
            "negative or non-finite beta");

    CheckedConfig out{params, grid, params.beta == 0.0};
    if (out.infinite_temperature) return out;

    require(grid.slices_m >= 2, "slices_m must be >= 2");
    require(grid.slices_m % 2 == 0, "odd slice count");
    require(std::isfinite(grid.dtau) && grid.dtau > 0.0, "non-positive dtau");
    const double len = grid.dtau * grid.slices_m;
    require(std::abs(len - params.beta) <= 1e-12 * std::max(1.0, params.beta),
            "grid length dtau*slices_m does not match beta");
    return out;
}

double energy_unit(const ModelParams& params) {
    return params.coupling_j > 0.0 ? params.coupling_j : params.hopping_mu;
}

}  // namespace sre
