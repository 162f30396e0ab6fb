#include "sre/thermal.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

namespace sre::thermal {

namespace {

using cxd = std::complex<double>;
constexpr cxd kI{0.0, 1.0};

// ---------------------------------------------------------------------
// Odd-frequency Fourier pair on the antiperiodic circle
//   F(w_n) = dtau sum_k e^{+i w_n tau_k} f(tau_k)
//   f(tau_k) = (1/beta) sum_n e^{-i w_n tau_k} F(w_n)
// with w_n = (2n+1) pi / beta, tau_k = (k+1/2) dtau, n = -M/2 .. M/2-1
// stored at array index n mod M.
// ---------------------------------------------------------------------
class OddFourier {
  public:
    OddFourier(int m, double beta) : m_(m), beta_(beta), dtau_(beta / m) {
        buf_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * m_));
        plus_ = fftw_plan_dft_1d(m_, buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
        minus_ = fftw_plan_dft_1d(m_, buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
        const double pi_m = M_PI / m_;
        tw_k_.resize(m_);
        tw_n_.resize(m_);
        omega_.resize(m_);
        for (int k = 0; k < m_; ++k) tw_k_[k] = std::exp(kI * (pi_m * k));
        for (int j = 0; j < m_; ++j) {
            const int n = (j < m_ / 2) ? j : j - m_;
            omega_[j] = (2.0 * n + 1.0) * M_PI / beta_;
            tw_n_[j] = std::exp(kI * (pi_m * (n + 0.5)));
        }
    }
    ~OddFourier() {
        fftw_destroy_plan(plus_);
        fftw_destroy_plan(minus_);
        fftw_free(buf_);
    }
    OddFourier(const OddFourier&) = delete;
    OddFourier& operator=(const OddFourier&) = delete;

    int size() const { return m_; }
    double omega(int j) const { return omega_[j]; }

    void to_freq(const std::vector<double>& f, std::vector<cxd>& out) const {
        for (int k = 0; k < m_; ++k) {
            const cxd v = f[k] * tw_k_[k];
            buf_[k][0] = v.real();
            buf_[k][1] = v.imag();
        }
        fftw_execute(plus_);
        out.resize(m_);
        for (int j = 0; j < m_; ++j)
            out[j] = dtau_ * tw_n_[j] * cxd(buf_[j][0], buf_[j][1]);
    }

    void to_tau(const std::vector<cxd>& f, std::vector<double>& out) const {
        for (int j = 0; j < m_; ++j) {
            const cxd v = f[j] * std::conj(tw_n_[j]);
            buf_[j][0] = v.real();
            buf_[j][1] = v.imag();
        }
        fftw_execute(minus_);
        out.resize(m_);
        for (int k = 0; k < m_; ++k)
            out[k] = (cxd(buf_[k][0], buf_[k][1]) * std::conj(tw_k_[k])).real() / beta_;
    }

  private:
    int m_;
    double beta_, dtau_;
    fftw_complex* buf_;
    fftw_plan plus_, minus_;
    std::vector<cxd> tw_k_, tw_n_;
    std::vector<double> omega_;
};

double extrapolate_edge(const std::vector<double>& a, bool front) {
    const std::size_t m = a.size();
    return front ? 1.5 * a[0] - 0.5 * a[1] : 1.5 * a[m - 1] - 0.5 * a[m - 2];
}

// sum_{n >= n0} 1/(2n+1)^2 = pi^2/8 minus the head.
double odd_inverse_square_tail(int n0) {
    double head = 0.0;
    for (int n = 0; n < n0; ++n) head += 1.0 / ((2.0 * n + 1.0) * (2.0 * n + 1.0));
    return M_PI * M_PI / 8.0 - head;
}

struct LogDet {
    double log_abs = 0.0;
    int sign = 1;
};

LogDet log_det(const Eigen::PartialPivLU<Eigen::MatrixXd>& lu) {
    LogDet out;
    const auto& m = lu.matrixLU();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const double d = m(i, i);
        out.log_abs += std::log(std::abs(d));
        if (d < 0.0) out.sign = -out.sign;
    }
    if (lu.permutationP().determinant() < 0) out.sign = -out.sign;
    return out;
}

}  // namespace

double free_g_ll(double mu, double beta, double tau) {
    const double e = std::exp(-beta * mu);
    return (std::exp(-mu * tau) + std::exp(-mu * (beta - tau))) / (2.0 * (1.0 + e));
}

double free_g_lr(double mu, double beta, double tau) {
    const double e = std::exp(-beta * mu);
    return (std::exp(-mu * tau) - std::exp(-mu * (beta - tau))) / (2.0 * (1.0 + e));
}

double free_ln_z(double mu, double beta) {
    const double x = 0.5 * beta * mu;
    return x + std::log1p(std::exp(-2.0 * x));
}

// ---------------------------------------------------------------------
// Matsubara iteration
// ---------------------------------------------------------------------

namespace {

struct FreqState {
    std::vector<cxd> sd, so;  // self-energy components
    std::vector<cxd> gd, go;  // Green's function candidates minus free part
};

// One Schwinger-Dyson update: from (g_ll, g_lr) in tau to the candidate
// Green's functions. The J = 0 propagator is subtracted in frequency and
// added back in closed form, so the truncated sums act only on the fast
// decaying remainder.
void sd_update(const OddFourier& four, double coupling_j, double mu, double beta,
               const std::vector<double>& gll, const std::vector<double>& glr,
               std::vector<double>& sd_tau, std::vector<double>& so_tau,
               FreqState& ws, std::vector<double>& out_gll,
               std::vector<double>& out_glr) {
    const int m = four.size();
    const double j2 = coupling_j * coupling_j;
    sd_tau.resize(m);
    so_tau.resize(m);
    for (int k = 0; k < m; ++k) {
        sd_tau[k] = j2 * gll[k] * gll[k] * gll[k];
        so_tau[k] = -j2 * glr[k] * glr[k] * glr[k];
    }
    four.to_freq(sd_tau, ws.sd);
    four.to_freq(so_tau, ws.so);

    ws.gd.resize(m);
    ws.go.resize(m);
    for (int j = 0; j < m; ++j) {
        const double w = four.omega(j);
        const cxd a = -kI * w - ws.sd[j];
        const cxd b = mu - ws.so[j];
        const cxd den = a * a - b * b;
        const double free_den = w * w + mu * mu;
        ws.gd[j] = a / den - kI * w / free_den;
        ws.go[j] = -b / den - mu / free_den;
    }
    four.to_tau(ws.gd, out_gll);
    four.to_tau(ws.go, out_glr);
    const double dtau = beta / m;
    for (int k = 0; k < m; ++k) {
        const double tau = (k + 0.5) * dtau;
        out_gll[k] += free_g_ll(mu, beta, tau);
        out_glr[k] += free_g_lr(mu, beta, tau);
    }
}

// ln Z per pair: exact free value, determinant ratio against the free
// kinetic operator (with the analytic 1/w^2 tail of the sum), and the
// interaction double integral in its two-term form, safe slightly off
// shell. Expects ws.sd/ws.so for the supplied Green's functions.
double assemble_ln_z(const OddFourier& four, double coupling_j, double mu,
                     double beta, const std::vector<double>& gll,
                     const std::vector<double>& glr,
                     const std::vector<double>& sd_tau,
                     const std::vector<double>& so_tau, const FreqState& ws) {
    const int m = four.size();
    const double j2 = coupling_j * coupling_j;

    double det_sum = 0.0;
    for (int j = 0; j < m; ++j) {
        const double w = four.omega(j);
        if (w < 0.0) continue;
        const cxd a = -kI * w - ws.sd[j];
        const cxd b = mu - ws.so[j];
        const cxd r = (a * a - b * b) / (-(w * w + mu * mu));
        det_sum += std::log(std::abs(r));
    }

    // Sigma_d(iw) ~ sigma1/(iw), sigma1 = -(Sigma_d(0+) + Sigma_d(beta-)).
    const double sigma1 =
        -(extrapolate_edge(sd_tau, true) + extrapolate_edge(sd_tau, false));
    const double tail = -2.0 * sigma1 * (beta / M_PI) * (beta / M_PI) *
                        odd_inverse_square_tail(m / 2);

    const double dtau = beta / m;
    double bracket = 0.0;
    for (int k = 0; k < m; ++k) {
        const double g4 = gll[k] * gll[k] * gll[k] * gll[k] +
                          glr[k] * glr[k] * glr[k] * glr[k];
        bracket += (sd_tau[k] * gll[k] - so_tau[k] * glr[k]) - 0.25 * j2 * g4;
    }
    return free_ln_z(mu, beta) + det_sum + tail - beta * dtau * bracket;
}

Branch classify_branch(const std::vector<double>& glr) {
    return std::abs(glr.front()) > 0.15 ? Branch::Wormhole : Branch::BlackHole;
}

}  // namespace

ThermalSaddle solve_thermal(const CheckedConfig& cfg, const Init& init,
                            const SolveOptions& opt) {
    const ModelParams& p = cfg.params;

    if (cfg.infinite_temperature) {
        ThermalSaddle out;
        out.ln_z = std::log(2.0);
        out.action = -out.ln_z;
        out.converged = true;
        return out;
    }

    const int m = cfg.grid.slices_m;
    const double beta = p.beta;
    const double dtau = cfg.grid.dtau;
    OddFourier four(m, beta);

    std::vector<double> gll(m), glr(m);
    switch (init.kind) {
        case Init::Free:
            for (int k = 0; k < m; ++k) {
                gll[k] = 0.5;
                glr[k] = 0.0;
            }
            break;
        case Init::WormholeSeed:
            for (int k = 0; k < m; ++k) {
                const double tau = (k + 0.5) * dtau;
                gll[k] = free_g_ll(p.hopping_mu, beta, tau);
                glr[k] = free_g_lr(p.hopping_mu, beta, tau);
            }
            break;
        case Init::FromState:
            if (!init.state ||
                init.state->green.g_ll.size() != static_cast<std::size_t>(m))
                throw std::invalid_argument(
                    "solve_thermal: FromState needs a saddle on the same grid");
            gll = init.state->green.g_ll;
            glr = init.state->green.g_lr;
            break;
    }

    FreqState ws;
    std::vector<double> sd_tau, so_tau, cand_ll, cand_lr;
    std::vector<double> history;
    double damping = opt.damping;
    double residual = std::numeric_limits<double>::infinity();
    double prev_residual = residual;
    int rises = 0;
    int iter = 0;
    bool converged = false;

    for (iter = 1; iter <= opt.max_iter; ++iter) {
        sd_update(four, p.coupling_j, p.hopping_mu, beta, gll, glr, sd_tau,
                  so_tau, ws, cand_ll, cand_lr);
        double res = 0.0;
        for (int k = 0; k < m; ++k) {
            res = std::max(res, std::abs(cand_ll[k] - gll[k]));
            res = std::max(res, std::abs(cand_lr[k] - glr[k]));
        }
        if (!std::isfinite(res))
            throw std::runtime_error("solve_thermal: NaN in update at iteration " +
                                     std::to_string(iter) + " (previous residual " +
                                     std::to_string(prev_residual) + ")");
        for (int k = 0; k < m; ++k) {
            gll[k] += damping * (cand_ll[k] - gll[k]);
            glr[k] += damping * (cand_lr[k] - glr[k]);
        }
        residual = res;
        if (res < opt.tol) {
            converged = true;
            break;
        }
        if (res > prev_residual) {
            if (++rises >= 2) {
                damping = std::max(0.02, 0.5 * damping);
                rises = 0;
            }
        } else {
            rises = 0;
        }
        prev_residual = res;
    }

    // Refresh the self-energy for the final iterate before assembling ln Z.
    sd_update(four, p.coupling_j, p.hopping_mu, beta, gll, glr, sd_tau, so_tau,
              ws, cand_ll, cand_lr);

    ThermalSaddle out;
    out.green.grid = cfg.grid;
    out.green.g_ll = gll;
    out.green.g_lr = glr;
    out.self_energy.grid = cfg.grid;
    out.self_energy.g_ll = sd_tau;
    out.self_energy.g_lr = so_tau;
    out.ln_z = assemble_ln_z(four, p.coupling_j, p.hopping_mu, beta, gll, glr,
                             sd_tau, so_tau, ws);
    out.action = -out.ln_z;
    out.converged = converged;
    out.iterations = std::min(iter, opt.max_iter);
    out.residual = residual;
    out.branch_tag = classify_branch(glr);
    return out;
}

double ln_z(const CheckedConfig&, const ThermalSaddle& saddle) {
    if (!saddle.converged)
        throw std::runtime_error("ln_z: unconverged saddle rejected");
    return saddle.ln_z;
}

namespace {

// Dominant-branch ln Z at one temperature: both cold starts, larger ln Z
// (smaller action) wins among the converged ones.
double dominant_ln_z(const CheckedConfig& cfg, const SolveOptions& opt) {
    const ThermalSaddle a = solve_thermal(cfg, {Init::Free, nullptr}, opt);
    const ThermalSaddle b = solve_thermal(cfg, {Init::WormholeSeed, nullptr}, opt);
    if (!a.converged && !b.converged)
        throw std::runtime_error("renyi2: thermal solves failed on both seeds");
    if (!a.converged) return b.ln_z;
    if (!b.converged) return a.ln_z;
    return std::max(a.ln_z, b.ln_z);
}

}  // namespace

double renyi2(const ModelParams& params, int slices_m, const SolveOptions& opt) {
    if (params.beta == 0.0) return std::log(2.0);
    const CheckedConfig cfg =
        validate_params(params, TauGrid::make(params.beta, slices_m));
    ModelParams doubled = params;
    doubled.beta *= 2.0;
    const CheckedConfig cfg2 =
        validate_params(doubled, TauGrid::make(doubled.beta, 2 * slices_m));
    const double lnz_b = dominant_ln_z(cfg, opt);
    const double lnz_2b = dominant_ln_z(cfg2, opt);
    return 2.0 * lnz_b - lnz_2b;
}

// ---------------------------------------------------------------------
// Matrix backend
// ---------------------------------------------------------------------

Eigen::MatrixXd thermal_kinetic(const TauGrid& grid, double mu) {
    const int m = grid.slices_m;
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(2 * m, 2 * m);
    for (int s = 0; s < 2; ++s) {
        const int off = s * m;
        for (int i = 0; i < m; ++i) {
            k(off + i, off + i) = 1.0;
            if (i > 0)
                k(off + i, off + i - 1) = -1.0;
            else
                k(off, off + m - 1) = 1.0;  // antiperiodic closure
        }
    }
    for (int i = 0; i < m; ++i) {
        k(i, m + i) += mu * grid.dtau;
        k(m + i, i) += mu * grid.dtau;
    }
    return k;
}

namespace {

// Linear interpolation of a midpoint-sampled antiperiodic function.
double interp_antiperiodic(const std::vector<double>& a, double beta, double u) {
    double sign = 1.0;
    if (u < 0.0) {
        u += beta;
        sign = -1.0;
    }
    const int m = static_cast<int>(a.size());
    const double dtau = beta / m;
    const double x = u / dtau - 0.5;
    if (x <= 0.0) return sign * (a[0] + (a[0] - a[1]) * (-x));
    if (x >= m - 1.0)
        return sign * (a[m - 1] + (a[m - 1] - a[m - 2]) * (x - (m - 1.0)));
    const int k = static_cast<int>(x);
    const double f = x - k;
    return sign * (a[k] * (1.0 - f) + a[k + 1] * f);
}

}  // namespace

MatrixThermal solve_thermal_matrix(const CheckedConfig& cfg,
                                   const ThermalSaddle& seed,
                                   const SolveOptions& opt) {
    const ModelParams& p = cfg.params;
    const int m = cfg.grid.slices_m;
    const double dtau = cfg.grid.dtau;
    const double dtau2 = dtau * dtau;
    const double j2 = p.coupling_j * p.coupling_j;
    const double beta = p.beta;

    const Eigen::MatrixXd kin = thermal_kinetic(cfg.grid, p.hopping_mu);
    const LogDet free_det = log_det(Eigen::PartialPivLU<Eigen::MatrixXd>(kin));

    // Seed self-energy from the time-translation-invariant saddle.
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(2 * m, 2 * m);
    const auto& sd = seed.self_energy.g_ll;
    const auto& so = seed.self_energy.g_lr;
    if (!sd.empty()) {
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                const double u = (i - j) * dtau;
                const double d = interp_antiperiodic(sd, beta, u);
                const double o = interp_antiperiodic(so, beta, u);
                sigma(i, j) = d;
                sigma(m + i, m + j) = d;
                sigma(i, m + j) = o;
                sigma(m + i, j) = o;
            }
    }

    MatrixThermal out;
    Eigen::MatrixXd g = (kin - dtau2 * sigma).partialPivLu().inverse();
    double damping = opt.damping;
    double prev_res = std::numeric_limits<double>::infinity();
    int rises = 0;

    auto refresh_sigma = [&]() {
        sigma.topLeftCorner(m, m) = j2 * g.topLeftCorner(m, m).array().cube();
        sigma.bottomRightCorner(m, m) = j2 * g.bottomRightCorner(m, m).array().cube();
        sigma.topRightCorner(m, m) = -j2 * g.topRightCorner(m, m).array().cube();
        sigma.bottomLeftCorner(m, m) = -j2 * g.bottomLeftCorner(m, m).array().cube();
    };

    for (int iter = 1; iter <= opt.max_iter; ++iter) {
        refresh_sigma();
        const Eigen::MatrixXd cand = (kin - dtau2 * sigma).partialPivLu().inverse();
        if (!std::isfinite(cand.sum()))
            throw std::runtime_error(
                "solve_thermal_matrix: NaN in update at iteration " +
                std::to_string(iter));
        const double res = (cand - g).cwiseAbs().maxCoeff();
        g += damping * (cand - g);
        out.iterations = iter;
        out.residual = res;
        if (res < opt.tol) {
            out.converged = true;
            break;
        }
        if (res > prev_res) {
            if (++rises >= 2) {
                damping = std::max(0.02, 0.5 * damping);
                rises = 0;
            }
        } else {
            rises = 0;
        }
        prev_res = res;
    }

    refresh_sigma();
    const LogDet det = log_det(Eigen::PartialPivLU<Eigen::MatrixXd>(kin - dtau2 * sigma));
    if (det.sign <= 0 || free_det.sign <= 0)
        throw std::runtime_error("solve_thermal_matrix: non-positive determinant");

    const double sg = (sigma.topLeftCorner(m, m).array() * g.topLeftCorner(m, m).array()).sum() +
                      (sigma.bottomRightCorner(m, m).array() * g.bottomRightCorner(m, m).array()).sum() -
                      (sigma.topRightCorner(m, m).array() * g.topRightCorner(m, m).array()).sum() -
                      (sigma.bottomLeftCorner(m, m).array() * g.bottomLeftCorner(m, m).array()).sum();
    const double g4 = g.topLeftCorner(m, m).array().pow(4).sum() +
                      g.bottomRightCorner(m, m).array().pow(4).sum() +
                      g.topRightCorner(m, m).array().pow(4).sum() +
                      g.bottomLeftCorner(m, m).array().pow(4).sum();

    out.green = g;
    out.ln_z = free_ln_z(p.hopping_mu, beta) +
               0.5 * (det.log_abs - free_det.log_abs) -
               0.5 * dtau2 * (sg - 0.25 * j2 * g4);
    return out;
}

}  // namespace sre::thermal
