#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "doctest.h"
#include "sre/exact.hpp"
#include "sre/random.hpp"

using namespace sre;
using namespace sre::ed;

namespace {

Cmat boltzmann(const Cmat& h, double beta) {
    Eigen::SelfAdjointEigenSolver<Cmat> es(h);
    Eigen::VectorXd w = (-beta * es.eigenvalues().array()).exp();
    return es.eigenvectors() * w.asDiagonal() * es.eigenvectors().adjoint();
}

double max_abs(const Cmat& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("mt19937_64 conforms to the standard reference value") {
    std::mt19937_64 eng(5489u);
    eng.discard(9999);
    CHECK(eng() == 9981545732273789042ull);
}

TEST_CASE("Majorana operators anticommute and square to 1/2") {
    for (int n_total : {2, 4, 6}) {
        auto ops = build_majorana_ops(n_total);
        const Cmat id = Cmat::Identity(ops.dim, ops.dim);
        for (int m = 0; m < n_total; ++m) {
            CHECK(max_abs(ops.ops[m] - ops.ops[m].adjoint()) < 1e-14);
            for (int n = m; n < n_total; ++n) {
                const Cmat anti = ops.ops[m] * ops.ops[n] + ops.ops[n] * ops.ops[m];
                const double expect = (m == n) ? 1.0 : 0.0;
                CHECK(max_abs(anti - expect * id) < 1e-14);
            }
        }
    }
}

TEST_CASE("build_majorana_ops rejects bad sizes") {
    CHECK_THROWS(build_majorana_ops(3));
    CHECK_THROWS(build_majorana_ops(18));
}

TEST_CASE("Majorana strings are Hermitian, self-inverse, orthonormal") {
    auto ops = build_majorana_ops(8);
    const Cmat id = Cmat::Identity(ops.dim, ops.dim);
    std::mt19937_64 rng(12345);
    for (int trial = 0; trial < 20; ++trial) {
        const std::uint32_t v = rng() & 0xffu;
        const std::uint32_t w = rng() & 0xffu;
        auto sv = build_majorana_string(ops, v);
        auto sw = build_majorana_string(ops, w);
        CHECK(max_abs(sv.matrix - sv.matrix.adjoint()) < 1e-12);
        CHECK(max_abs(sv.matrix * sv.matrix - id) < 1e-12);
        const double expect = (v == w) ? 16.0 : 0.0;  // 2^4 delta_vw
        CHECK(std::abs((sv.matrix * sw.matrix).trace().real() - expect) < 1e-12);
        CHECK(std::abs((sv.matrix * sw.matrix).trace().imag()) < 1e-12);
    }
}

TEST_CASE("Hamiltonian at N=2 has no quartic term and free-pair spectrum") {
    ModelParams p{2, 3.7, 1.0, 1.0};
    auto ops = build_majorana_ops(4);
    auto sample = draw_couplings(p, 11);
    CHECK(sample.j_ijkl.empty());  // needs i<j<k<l within N=2
    Cmat h = build_hamiltonian(p, sample, ops);

    // Two independent pairs with splitting mu: eigenvalues {-1, 0, 0, +1}.
    Eigen::SelfAdjointEigenSolver<Cmat> es(h);
    Eigen::Vector4d expect(-1.0, 0.0, 0.0, 1.0);
    CHECK((es.eigenvalues() - expect).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("Hamiltonian at N=4, mu=0 is traceless with tr H^3 = 0") {
    ModelParams p{4, 1.0, 0.0, 1.0};
    auto ops = build_majorana_ops(8);
    auto sample = draw_couplings(p, 5);
    CHECK(sample.j_ijkl.size() == 1);  // C(4,4)
    Cmat h = build_hamiltonian(p, sample, ops);
    CHECK(max_abs(h - h.adjoint()) < 1e-12);
    CHECK(std::abs(h.trace().real()) < 1e-10);
    CHECK(std::abs((h * h * h).trace().real()) < 1e-10);
}

TEST_CASE("thermal_state anchors") {
    ModelParams p{2, 0.0, 1.0, 0.0};
    auto ops = build_majorana_ops(4);
    Cmat h = build_hamiltonian(p, draw_couplings(p, 1), ops);

    SUBCASE("beta = 0 is maximally mixed") {
        Cmat rho = thermal_state(h, 0.0);
        CHECK(max_abs(rho - Cmat::Identity(4, 4) / 4.0) < 1e-14);
    }
    SUBCASE("large beta*mu projects onto the ground state") {
        Cmat rho = thermal_state(h, 50.0);
        Eigen::SelfAdjointEigenSolver<Cmat> es(h);
        Cmat ground = es.eigenvectors().col(0) * es.eigenvectors().col(0).adjoint();
        CHECK(max_abs(rho - ground) < 1e-15);
    }
    SUBCASE("trace is one") {
        Cmat rho = thermal_state(h, 2.341);
        CHECK(std::abs(rho.trace().real() - 1.0) < 1e-13);
    }
    SUBCASE("non-Hermitian input is rejected") {
        Cmat bad = h;
        bad(0, 1) += cxd(0.0, 0.5);
        CHECK_THROWS(thermal_state(bad, 1.0));
    }
}

TEST_CASE("Majorana spectrum of the maximally mixed state") {
    auto ops = build_majorana_ops(6);
    Cmat rho = Cmat::Identity(ops.dim, ops.dim) / double(ops.dim);
    auto spec = majorana_spectrum(rho, ops);
    CHECK(spec.at(0) == doctest::Approx(1.0).epsilon(1e-13));
    for (const auto& [v, c] : spec.coefficients)
        if (v != 0) CHECK(std::abs(c) < 1e-13);
}

TEST_CASE("N=1 free pair: c_{LR} = -tanh(beta mu / 2)") {
    ModelParams p{1, 0.0, 0.8, 1.7};
    auto ops = build_majorana_ops(2);
    Cmat h = build_hamiltonian(p, draw_couplings(p, 3), ops);
    Cmat rho = thermal_state(h, p.beta);
    auto spec = majorana_spectrum(rho, ops);
    const double expect = -std::tanh(0.5 * p.beta * p.hopping_mu);
    CHECK(spec.at(0b11) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("spectrum normalization sum c^2 = 2^N exp(-S2)") {
    std::mt19937_64 seeds(77);
    for (int trial = 0; trial < 3; ++trial) {
        ModelParams p{3, 1.0, 0.3, 2.5};
        auto ops = build_majorana_ops(6);
        Cmat h = build_hamiltonian(p, draw_couplings(p, seeds()), ops);
        Cmat rho = thermal_state(h, p.beta);
        auto spec = majorana_spectrum(rho, ops);
        double sum2 = 0.0;
        for (const auto& [v, c] : spec.coefficients) sum2 += c * c;
        const double s2 = -std::log((rho * rho).trace().real());
        CHECK(sum2 == doctest::Approx(8.0 * std::exp(-s2)).epsilon(1e-10));
    }
}

TEST_CASE("sre_direct anchors") {
    SUBCASE("beta = 0 gives (N ln 2, N ln 2, 0)") {
        auto ops = build_majorana_ops(8);
        Cmat rho = Cmat::Identity(ops.dim, ops.dim) / double(ops.dim);
        auto vals = sre_direct(majorana_spectrum(rho, ops), rho);
        CHECK(vals.m2 == doctest::Approx(4.0 * std::log(2.0)).epsilon(1e-12));
        CHECK(vals.s2 == doctest::Approx(4.0 * std::log(2.0)).epsilon(1e-12));
        CHECK(std::abs(vals.m2_tilde) < 1e-12);
    }
    SUBCASE("N=4 decoupled pairs match the closed form at beta mu = 2") {
        ModelParams p{4, 0.0, 1.0, 2.0};
        auto ops = build_majorana_ops(8);
        Cmat h = build_hamiltonian(p, draw_couplings(p, 9), ops);
        Cmat rho = thermal_state(h, p.beta);
        auto vals = sre_direct(majorana_spectrum(rho, ops), rho);
        CHECK(std::abs(vals.m2 / 4.0 - free_pair_m2(2.0)) < 1e-8);
    }
    SUBCASE("pure stabilizer ground state has vanishing SRE") {
        ModelParams p{1, 0.0, 1.0, 60.0};
        auto ops = build_majorana_ops(2);
        Cmat h = build_hamiltonian(p, draw_couplings(p, 2), ops);
        Cmat rho = thermal_state(h, p.beta);
        auto vals = sre_direct(majorana_spectrum(rho, ops), rho);
        CHECK(std::abs(vals.m2_tilde) < 1e-9);
    }
}

TEST_CASE("replicated trace agrees with the direct definition") {
    SUBCASE("beta = 0: S_SRE = -4 N ln 2") {
        for (int n : {1, 2, 3}) {
            Cmat id = Cmat::Identity(1L << n, 1L << n);
            auto rep = sre_replicated(id, n);
            CHECK(rep.s_sre == doctest::Approx(-4.0 * n * std::log(2.0)).epsilon(1e-10));
            CHECK(rep.m2 == doctest::Approx(n * std::log(2.0)).epsilon(1e-10));
        }
    }
    SUBCASE("interacting samples (the op aborts internally on mismatch)") {
        std::mt19937_64 seeds(123);
        for (int n : {2, 3}) {
            ModelParams p{n, 1.0, 0.2, 1.3};
            auto ops = build_majorana_ops(2 * n);
            Cmat h = build_hamiltonian(p, draw_couplings(p, seeds()), ops);
            auto rep = sre_replicated(boltzmann(h, p.beta), n);
            auto direct = sre_direct(majorana_spectrum(thermal_state(h, p.beta), ops),
                                     thermal_state(h, p.beta));
            CHECK(std::abs(rep.m2 - direct.m2) < 1e-9);
        }
    }
    SUBCASE("J = 0 closed form at beta mu = 2") {
        ModelParams p{2, 0.0, 1.0, 2.0};
        auto ops = build_majorana_ops(4);
        Cmat h = build_hamiltonian(p, draw_couplings(p, 4), ops);
        auto rep = sre_replicated(boltzmann(h, p.beta), 2);
        CHECK(std::abs(rep.m2 / 2.0 - free_pair_m2(2.0)) < 1e-9);
    }
}

TEST_CASE("free_pair_m2 limits") {
    CHECK(free_pair_m2(0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(free_pair_m2(200.0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(free_pair_m2(2.0) == doctest::Approx(0.403145).epsilon(1e-5));
    CHECK(free_pair_m2(5.0) < free_pair_m2(1.0));  // monotone toward pure state
}

TEST_CASE("disorder_average") {
    SUBCASE("constant estimator has zero standard error") {
        auto stats = disorder_average([](std::uint64_t) { return std::vector<double>{3.5}; }, 8, 1);
        CHECK(stats.mean[0] == 3.5);
        CHECK(stats.std_error[0] == 0.0);
        CHECK(stats.samples.size() == 8);
    }
    SUBCASE("same seed is bit-identical") {
        auto run = [](std::uint64_t seed) {
            return disorder_average(
                [](std::uint64_t s) {
                    GaussianSource g(s);
                    return std::vector<double>{g.standard_normal()};
                },
                16, seed);
        };
        auto a = run(42), b = run(42);
        CHECK(a.mean[0] == b.mean[0]);
        CHECK(a.std_error[0] == b.std_error[0]);
    }
    SUBCASE("failures are reported with their seed offset") {
        auto stats = disorder_average(
            [](std::uint64_t s) -> std::vector<double> {
                if (s == 12) throw std::runtime_error("boom");
                return {1.0};
            },
            5, 10);
        REQUIRE(stats.failures.size() == 1);
        CHECK(stats.failures[0].first == 2);
        CHECK(stats.samples.size() == 4);
    }
    SUBCASE("fewer than two samples is a misuse error") {
        CHECK_THROWS(disorder_average([](std::uint64_t) { return std::vector<double>{}; }, 1, 0));
    }
}

TEST_CASE("two ED routes agree under disorder averaging") {
    // N=2, a handful of samples: the replicated-trace M2 recomputation must
    // sit on top of the direct-path M2 sample by sample.
    ModelParams p{2, 1.0, 0.0, 3.0};
    auto ops = build_majorana_ops(4);
    auto stats = disorder_average(
        [&](std::uint64_t s) {
            Cmat h = build_hamiltonian(p, draw_couplings(p, s), ops);
            Cmat rho = thermal_state(h, p.beta);
            auto direct = sre_direct(majorana_spectrum(rho, ops), rho);
            auto rep = sre_replicated(boltzmann(h, p.beta), 2);
            return std::vector<double>{direct.m2, rep.m2};
        },
        6, 2024);
    CHECK(stats.failures.empty());
    for (const auto& s : stats.samples) CHECK(std::abs(s[0] - s[1]) < 1e-9);
}
