#include "sre/exact.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "sre/random.hpp"

namespace sre::ed {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

cxd i_power(int k) {
    switch (((k % 4) + 4) % 4) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, 1.0};
        case 2: return {-1.0, 0.0};
        default: return {0.0, -1.0};
    }
}

int popcount32(std::uint32_t x) { return std::popcount(x); }

void check_hermitian(const Cmat& h, const char* who) {
    const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
    if ((h - h.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw std::invalid_argument(std::string(who) + ": non-Hermitian input");
}

}  // namespace

// ---------------------------------------------------------------------
// Pauli strings
// ---------------------------------------------------------------------

PauliString PauliString::operator*(const PauliString& rhs) const {
    // X^a Z^b X^c Z^d = (-1)^{|b & c|} X^{a^c} Z^{b^d}
    PauliString out;
    out.coeff = coeff * rhs.coeff;
    if (popcount32(z & rhs.x) % 2 != 0) out.coeff = -out.coeff;
    out.x = x ^ rhs.x;
    out.z = z ^ rhs.z;
    return out;
}

cxd PauliString::amplitude_on(std::uint32_t basis_state) const {
    cxd a = coeff;
    if (popcount32(z & basis_state) % 2 != 0) a = -a;
    return a;
}

Cmat PauliString::to_dense(int n_qubits) const {
    const long dim = 1L << n_qubits;
    Cmat m = Cmat::Zero(dim, dim);
    for (long b = 0; b < dim; ++b)
        m(b ^ x, b) = amplitude_on(static_cast<std::uint32_t>(b));
    return m;
}

PauliString majorana_string(int m) {
    const int k = m / 2;
    const std::uint32_t prefix = (1u << k) - 1u;
    PauliString p;
    p.x = 1u << k;
    if (m % 2 == 0) {
        p.z = prefix;
        p.coeff = kInvSqrt2;
    } else {
        p.z = prefix | (1u << k);
        p.coeff = cxd(0.0, kInvSqrt2);  // Y = i X Z
    }
    return p;
}

// ---------------------------------------------------------------------
// Dense operator sets
// ---------------------------------------------------------------------

MajoranaOps build_majorana_ops(int n_total) {
    if (n_total < 2 || n_total % 2 != 0)
        throw std::invalid_argument("build_majorana_ops: n_total must be even and >= 2");
    if (n_total > 16)
        throw std::invalid_argument("build_majorana_ops: dimension cap exceeded (n_total > 16)");
    MajoranaOps out;
    out.n_total = n_total;
    out.n_qubits = n_total / 2;
    out.dim = 1L << out.n_qubits;
    out.ops.reserve(n_total);
    for (int m = 0; m < n_total; ++m)
        out.ops.push_back(majorana_string(m).to_dense(out.n_qubits));
    return out;
}

MajoranaString build_majorana_string(const MajoranaOps& ops, std::uint32_t v) {
    MajoranaString s;
    s.v = v;
    s.weight = popcount32(v);
    PauliString p;  // identity
    for (int m = 0; m < ops.n_total; ++m)
        if (v & (1u << m)) p = p * majorana_string(m);
    // i^{w(w-1)/2} 2^{w/2} restores Hermiticity and Psi^2 = 1; the 2^{w/2}
    // cancels the 2^{-1/2} carried by each normalized Majorana.
    p.coeff *= i_power(s.weight * (s.weight - 1) / 2) *
               std::pow(2.0, 0.5 * s.weight);
    s.matrix = p.to_dense(ops.n_qubits);
    return s;
}

// ---------------------------------------------------------------------
// Hamiltonian and thermal states
// ---------------------------------------------------------------------

CouplingSample draw_couplings(const ModelParams& params, std::uint64_t seed) {
    const int n = params.n_per_side;
    CouplingSample out;
    out.n_per_side = n;
    out.seed = seed;
    const double nd = static_cast<double>(n);
    const double sigma = params.coupling_j * std::sqrt(6.0 / (nd * nd * nd));
    GaussianSource rng(seed);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            for (int k = j + 1; k < n; ++k)
                for (int l = k + 1; l < n; ++l)
                    out.j_ijkl.push_back(rng.normal(0.0, sigma));
    return out;
}

Cmat build_hamiltonian(const ModelParams& params, const CouplingSample& sample,
                       const MajoranaOps& ops) {
    const int n = params.n_per_side;
    if (sample.n_per_side != n)
        throw std::invalid_argument("build_hamiltonian: sample drawn for different N");
    if (ops.n_total != 2 * n)
        throw std::invalid_argument("build_hamiltonian: operator set sized for different N");

    // Mode (L, j) is Majorana 2j, mode (R, j) is Majorana 2j+1.
    auto left = [](int j) { return 2 * j; };
    auto right = [](int j) { return 2 * j + 1; };

    PauliString acc_zero = majorana_string(0) * majorana_string(0);  // 1/2 * I
    Cmat h = Cmat::Zero(ops.dim, ops.dim);

    std::size_t idx = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            for (int k = j + 1; k < n; ++k)
                for (int l = k + 1; l < n; ++l) {
                    const double coupling = sample.j_ijkl.at(idx++);
                    for (auto side : {+left, +right}) {
                        PauliString q = majorana_string(side(i)) *
                                        majorana_string(side(j)) *
                                        majorana_string(side(k)) *
                                        majorana_string(side(l));
                        q.coeff *= coupling;
                        for (long b = 0; b < ops.dim; ++b)
                            h(b ^ q.x, b) += q.amplitude_on(static_cast<std::uint32_t>(b));
                    }
                }

    for (int j = 0; j < n; ++j) {
        PauliString hop = majorana_string(left(j)) * majorana_string(right(j));
        hop.coeff *= cxd(0.0, params.hopping_mu);
        for (long b = 0; b < ops.dim; ++b)
            h(b ^ hop.x, b) += hop.amplitude_on(static_cast<std::uint32_t>(b));
    }

    check_hermitian(h, "build_hamiltonian");
    return h;
}

Cmat thermal_state(const Cmat& h, double beta) {
    if (!(std::isfinite(beta) && beta >= 0.0))
        throw std::invalid_argument("thermal_state: beta must be finite and >= 0");
    check_hermitian(h, "thermal_state");
    Eigen::SelfAdjointEigenSolver<Cmat> es(h);
    const Eigen::VectorXd& ev = es.eigenvalues();
    const double e0 = ev.minCoeff();
    Eigen::VectorXd w = (-beta * (ev.array() - e0)).exp();
    w /= w.sum();
    return es.eigenvectors() * w.asDiagonal() * es.eigenvectors().adjoint();
}

// ---------------------------------------------------------------------
// Majorana spectrum and SRE
// ---------------------------------------------------------------------

namespace {

// tr[rho P] for a Pauli string without materializing P.
cxd string_trace(const Cmat& rho, const PauliString& p) {
    cxd t = 0.0;
    const long dim = rho.rows();
    for (long b = 0; b < dim; ++b)
        t += p.amplitude_on(static_cast<std::uint32_t>(b)) * rho(b, b ^ p.x);
    return t;
}

PauliString string_for_v(int n_total, std::uint32_t v) {
    PauliString p;
    int w = 0;
    for (int m = 0; m < n_total; ++m)
        if (v & (1u << m)) {
            p = p * majorana_string(m);
            ++w;
        }
    p.coeff *= i_power(w * (w - 1) / 2) * std::pow(2.0, 0.5 * w);
    return p;
}

}  // namespace

MajoranaSpectrum majorana_spectrum(const Cmat& rho, const MajoranaOps& ops) {
    MajoranaSpectrum out;
    out.n_total = ops.n_total;
    const std::uint32_t n_strings = 1u << ops.n_total;

    for (std::uint32_t v = 0; v < n_strings; ++v) {
        if (popcount32(v) % 2 != 0) continue;
        const cxd c = string_trace(rho, string_for_v(ops.n_total, v));
        if (std::abs(c.imag()) > 1e-9)
            throw std::runtime_error("majorana_spectrum: complex coefficient signals a parity/phase bug");
        out.coefficients[v] = c.real();
    }

    // Spot-check that the odd-parity sector vanishes (1% subsample, >= 8).
    const std::uint32_t n_checks = std::max<std::uint32_t>(8, n_strings / 100);
    std::mt19937_64 pick(0x9e3779b97f4a7c15ull ^ n_strings);
    for (std::uint32_t t = 0; t < n_checks; ++t) {
        const std::uint32_t v = static_cast<std::uint32_t>(pick()) & (n_strings - 1);
        if (popcount32(v) % 2 == 0) continue;
        const cxd c = string_trace(rho, string_for_v(ops.n_total, v));
        if (std::abs(c) > 1e-9)
            throw std::runtime_error("majorana_spectrum: odd-weight coefficient nonzero");
    }
    return out;
}

SreValues sre_direct(const MajoranaSpectrum& spectrum, const Cmat& rho) {
    double sum4 = 0.0;
    for (const auto& [v, c] : spectrum.coefficients) sum4 += c * c * c * c;
    if (sum4 <= 0.0)
        throw std::runtime_error("sre_direct: vanishing participation sum (c_0 = 1 expected)");
    const int nq = spectrum.n_total / 2;
    SreValues out;
    out.m2 = -std::log(std::ldexp(sum4, -nq));
    out.s2 = -std::log((rho * rho).trace().real());
    out.m2_tilde = out.m2 - out.s2;
    return out;
}

namespace {

struct SparseVec {
    std::vector<std::pair<std::uint32_t, cxd>> entries;
};

// out = in + 4 * S (in), merging duplicate basis states.
SparseVec apply_insertion_factor(const SparseVec& in, const PauliString& s) {
    std::unordered_map<std::uint32_t, cxd> acc;
    acc.reserve(2 * in.entries.size());
    for (const auto& [b, a] : in.entries) {
        acc[b] += a;
        acc[b ^ s.x] += 4.0 * a * s.amplitude_on(b);
    }
    SparseVec out;
    out.entries.assign(acc.begin(), acc.end());
    return out;
}

}  // namespace

ReplicatedSre sre_replicated(const Cmat& rho_unnorm, int n_per_side) {
    if (n_per_side < 1 || n_per_side > 4)
        throw std::invalid_argument("sre_replicated: four-copy dimension cap needs n_per_side <= 4");
    const int n_total = 2 * n_per_side;
    const int nq = n_per_side;           // qubits per copy
    const long dim_small = 1L << nq;
    if (rho_unnorm.rows() != dim_small)
        throw std::invalid_argument("sre_replicated: matrix size does not match n_per_side");
    check_hermitian(rho_unnorm, "sre_replicated");

    const double norm = rho_unnorm.trace().real();
    if (!(norm > 0.0))
        throw std::runtime_error("sre_replicated: e^{-beta H} has non-positive trace");
    const Cmat e = rho_unnorm / norm;  // tr e = 1; S_beta = -ln norm

    // Four fermionic copies, copy-major Majorana ordering: the copy-a
    // Majorana m sits at global index a*n_total + m, so copy a occupies
    // qubits [a*nq, (a+1)*nq) and even per-copy operators act only there.
    std::vector<PauliString> insertion;  // psi^1 psi^2 psi^3 psi^4 per mode
    for (int m = 0; m < n_total; ++m) {
        PauliString s = majorana_string(0 * n_total + m) *
                        majorana_string(1 * n_total + m) *
                        majorana_string(2 * n_total + m) *
                        majorana_string(3 * n_total + m);
        insertion.push_back(s);
    }

    const std::uint32_t mask = static_cast<std::uint32_t>(dim_small - 1);
    const long dim_big = 1L << (4 * nq);
    cxd z_norm = 0.0;
    for (long b = 0; b < dim_big; ++b) {
        SparseVec vec;
        vec.entries.emplace_back(static_cast<std::uint32_t>(b), cxd(1.0, 0.0));
        for (const auto& s : insertion) vec = apply_insertion_factor(vec, s);
        const std::uint32_t bu = static_cast<std::uint32_t>(b);
        for (const auto& [bp, amp] : vec.entries) {
            cxd w = amp;
            for (int a = 0; a < 4; ++a)
                w *= e((bu >> (a * nq)) & mask, (bp >> (a * nq)) & mask);
            z_norm += w;
        }
    }
    if (std::abs(z_norm.imag()) > 1e-9 * std::max(1.0, std::abs(z_norm.real())))
        throw std::runtime_error("sre_replicated: replicated trace not real");

    ReplicatedSre out;
    out.s_sre = -std::log(z_norm.real()) - 4.0 * std::log(norm);
    out.m2 = -std::log(z_norm.real()) + nq * std::log(2.0);

    // Guard against oracle disagreement with the direct string-spectrum path.
    const MajoranaOps ops = build_majorana_ops(n_total);
    const SreValues direct = sre_direct(majorana_spectrum(e, ops), e);
    if (std::abs(direct.m2 - out.m2) > 1e-8)
        throw std::runtime_error("sre_replicated: disagrees with sre_direct beyond 1e-8");
    return out;
}

double free_pair_m2(double beta_mu) {
    if (!(std::isfinite(beta_mu) && beta_mu >= 0.0))
        throw std::invalid_argument("free_pair_m2: beta*mu must be finite and >= 0");
    const double t = std::tanh(0.5 * beta_mu);
    const double t4 = t * t * t * t;
    return -std::log(0.5 * (1.0 + t4));
}

// ---------------------------------------------------------------------
// Disorder averaging
// ---------------------------------------------------------------------

DisorderStats disorder_average(
    const std::function<std::vector<double>(std::uint64_t)>& estimator,
    int n_samples, std::uint64_t seed) {
    if (n_samples < 2)
        throw std::invalid_argument("disorder_average: n_samples must be >= 2");

    DisorderStats out;
    for (int k = 0; k < n_samples; ++k) {
        try {
            out.samples.push_back(estimator(seed + static_cast<std::uint64_t>(k)));
        } catch (const std::exception& ex) {
            out.failures.emplace_back(k, ex.what());
        }
    }
    if (out.samples.empty()) return out;

    const std::size_t n_comp = out.samples.front().size();
    const double n = static_cast<double>(out.samples.size());
    out.mean.assign(n_comp, 0.0);
    out.std_error.assign(n_comp, 0.0);
    for (const auto& s : out.samples)
        for (std::size_t c = 0; c < n_comp; ++c) out.mean[c] += s[c];
    for (auto& m : out.mean) m /= n;
    if (out.samples.size() >= 2) {
        for (const auto& s : out.samples)
            for (std::size_t c = 0; c < n_comp; ++c) {
                const double d = s[c] - out.mean[c];
                out.std_error[c] += d * d;
            }
        for (auto& se : out.std_error) se = std::sqrt(se / (n * (n - 1.0)));
    }
    return out;
}

}  // namespace sre::ed
