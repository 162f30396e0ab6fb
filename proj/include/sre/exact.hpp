// Exact small-N reference: dense Jordan-Wigner Majorana operators, the
// Majorana-string expansion of a density matrix, and the stabilizer Renyi
// entropy computed both directly from the string coefficients and from the
// replicated four-copy trace. Serves as the oracle for the large-N solvers.

#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "sre/domain.hpp"

namespace sre::ed {

using Cmat = Eigen::MatrixXcd;
using cxd = std::complex<double>;

// ---------------------------------------------------------------------
// Pauli strings
// ---------------------------------------------------------------------

// coeff * (prod_q X_q^{x bit}) * (prod_q Z_q^{z bit}) on up to 32 qubits.
// Majorana operators and their products stay in this closed form, which
// keeps the replicated-trace evaluation sparse.
struct PauliString {
    cxd coeff{1.0, 0.0};
    std::uint32_t x = 0;
    std::uint32_t z = 0;

    PauliString operator*(const PauliString& rhs) const;

    // P |b> = amplitude * |b ^ x>
    cxd amplitude_on(std::uint32_t basis_state) const;

    // Dense matrix on n_qubits (qubit q <-> bit q of the index).
    Cmat to_dense(int n_qubits) const;
};

// Jordan-Wigner Majorana with {psi_m, psi_n} = delta_mn (psi^2 = 1/2):
//   psi_{2k}   = 2^{-1/2} Z_0 ... Z_{k-1} X_k
//   psi_{2k+1} = 2^{-1/2} Z_0 ... Z_{k-1} Y_k
// Mode m even is (L, m/2), m odd is (R, m/2), so the hopping term is
// local in the qubit chain.
PauliString majorana_string(int m);

// ---------------------------------------------------------------------
// Dense operator sets
// ---------------------------------------------------------------------

// The 2N dense Majorana matrices on N = n_total/2 qubits.
struct MajoranaOps {
    int n_total = 0;
    int n_qubits = 0;
    long dim = 0;
    std::vector<Cmat> ops;
};

// n_total even, 2 <= n_total <= 16 (dimension cap 2^8).
MajoranaOps build_majorana_ops(int n_total);

// Hermitian, self-inverse product of Majoranas selected by the bit
// vector v, with the phase i^{|v|(|v|-1)/2} 2^{|v|/2}.
struct MajoranaString {
    std::uint32_t v = 0;
    int weight = 0;
    Cmat matrix;
};

MajoranaString build_majorana_string(const MajoranaOps& ops, std::uint32_t v);

// ---------------------------------------------------------------------
// Model Hamiltonian and thermal states
// ---------------------------------------------------------------------

// One disorder realization of the quartic couplings, drawn i.i.d.
// Gaussian with mean 0 and variance 6 J^2 / N^3, identical for the left
// and right clusters. Entries ordered lexicographically over i<j<k<l.
struct CouplingSample {
    int n_per_side = 0;
    std::uint64_t seed = 0;
    std::vector<double> j_ijkl;
};

CouplingSample draw_couplings(const ModelParams& params, std::uint64_t seed);

// H = sum J_ijkl (L-quartic + R-quartic) + i mu sum_j psi_{L,j} psi_{R,j}
Cmat build_hamiltonian(const ModelParams& params, const CouplingSample& sample,
                       const MajoranaOps& ops);

// rho = e^{-beta H} / Z by eigendecomposition with ground-state shift.
Cmat thermal_state(const Cmat& h, double beta);

// ---------------------------------------------------------------------
// Majorana spectrum and SRE
// ---------------------------------------------------------------------

// Coefficients c_v = tr[rho Psi_v] over even-weight strings (odd weights
// vanish by fermion parity; a random subsample of them is checked).
struct MajoranaSpectrum {
    int n_total = 0;
    std::map<std::uint32_t, double> coefficients;

    double at(std::uint32_t v) const {
        auto it = coefficients.find(v);
        return it == coefficients.end() ? 0.0 : it->second;
    }
};

MajoranaSpectrum majorana_spectrum(const Cmat& rho, const MajoranaOps& ops);

struct SreValues {
    double m2 = 0.0;
    double s2 = 0.0;
    double m2_tilde = 0.0;
};

// M2 = -ln(2^{-Nq} sum c^4), S2 = -ln tr rho^2, M2~ = M2 - S2.
SreValues sre_direct(const MajoranaSpectrum& spectrum, const Cmat& rho);

// Four-copy replicated trace: builds the operator
//   prod_m (1 + 4 psi_m^(1) psi_m^(2) psi_m^(3) psi_m^(4))
// on 4 fermionic copies and evaluates Z_SRE = tr[(e^{-beta H})^{x4} Pi]
// by sparse string application. Requires n_per_side <= 4. Aborts if the
// resulting M2 disagrees with sre_direct beyond 1e-8.
struct ReplicatedSre {
    double s_sre = 0.0;
    double m2 = 0.0;
};

ReplicatedSre sre_replicated(const Cmat& rho_unnorm, int n_per_side);

// Closed form for the decoupled (J = 0) limit, per (L,R) mode pair:
//   M2 = -ln((1 + tanh^4(beta mu / 2)) / 2)
double free_pair_m2(double beta_mu);

// ---------------------------------------------------------------------
// Disorder averaging
// ---------------------------------------------------------------------

struct DisorderStats {
    std::vector<double> mean;
    std::vector<double> std_error;
    std::vector<std::vector<double>> samples;        // [sample][component]
    std::vector<std::pair<int, std::string>> failures;  // (seed offset, what)
};

// Runs estimator(seed + k) for k = 0..n_samples-1. Failures are recorded
// with their seed offset; statistics cover the successful samples.
DisorderStats disorder_average(
    const std::function<std::vector<double>(std::uint64_t)>& estimator,
    int n_samples, std::uint64_t seed);

}  // namespace sre::ed
