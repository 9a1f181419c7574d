#include <cmath>
#include <limits>

#include "doctest.h"
#include "rtree/krein.hpp"
#include "support.hpp"

using namespace rtree;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double oracle_real(const std::vector<Atom>& atoms, double kappa) {
    const auto m = testing::oracle_m_plus(atoms, cplx(-kappa * kappa, 0.0));
    REQUIRE_FALSE(m.infinite);
    return m.value.real();
}

}  // namespace

TEST_SUITE("krein") {

TEST_CASE("free_green examples") {
    const auto z = EnergyPoint::below(1.0);
    CHECK(std::abs(free_green(0.0, 2.3, z)) == 0.0);
    for (double t : {0.1, 1.0, 3.0}) CHECK(free_green(t, t, z).real() == doctest::Approx(0.5 * (1 - std::exp(-2 * t))));
    CHECK(free_green(40.0, 40.0, z).real() == doctest::Approx(0.5));
    testing::Gen gen(31);
    for (int i = 0; i < 100; ++i) {
        const EnergyPoint w(gen.upper(5, 0.01, 3));
        const double t = gen.uniform(0, 5), u = gen.uniform(0, 5);
        CHECK(std::abs(free_green(t, u, w) - free_green(u, t, w)) <= 1e-15 * (1 + std::abs(free_green(t, u, w))));
    }
    CHECK_THROWS_AS(free_green(1.0, 1.0, EnergyPoint(cplx(1.0, 0.0))), std::domain_error);
}

TEST_CASE("t_block examples") {
    const auto z = EnergyPoint::below(1.0);
    const auto blk = t_block(std::log(2.0) / 2.0, std::log(2.0) / 2.0, z);
    CHECK(std::abs(blk(0, 0) - (-0.25)) < 1e-15);
    CHECK(std::abs(blk(0, 1) - (-0.25)) < 1e-15);
    CHECK(std::abs(blk(1, 0) - (-0.25)) < 1e-15);
    CHECK(std::abs(blk(1, 1) - 0.75) < 1e-15);

    for (double kappa : {0.5, 2.0, 5.0}) {
        const auto far = t_block(60.0, 60.0, EnergyPoint::below(kappa));
        CHECK(std::abs(far(0, 0) + 1.0 / (2 * kappa)) < 1e-14);
        CHECK(std::abs(far(1, 1) - kappa / 2) < 1e-14);
        CHECK(std::abs(far(0, 1)) < 1e-14);
    }

    // diagonal block against the closed form at z = -kappa^2
    for (double kappa : {0.3, 1.7}) {
        for (double t : {0.2, 1.3}) {
            const double e = std::exp(-2 * kappa * t);
            const auto d = t_block(t, t, EnergyPoint::below(kappa));
            CHECK(std::abs(d(0, 0) + (1 - e) / (2 * kappa)) < 1e-14);
            CHECK(std::abs(d(0, 1) + e / 2) < 1e-14);
            CHECK(std::abs(d(1, 1) - kappa / 2 * (1 + e)) < 1e-14);
        }
    }

    // off-diagonal decay ~ kappa e^{-kappa |t_n - t_m|}
    for (double kappa : {1.0, 4.0, 10.0}) {
        double worst = 0.0;
        for (double tn : {0.5, 1.5, 3.0})
            for (double tm : {0.7, 2.2, 4.0}) {
                const auto b = t_block(tn, tm, EnergyPoint::below(kappa));
                Eigen::JacobiSVD<Eigen::Matrix2cd> svd(b);
                worst = std::max(worst, svd.singularValues()(0) / (kappa * std::exp(-kappa * std::abs(tn - tm))));
            }
        CHECK(worst <= 1.5);
    }
}

TEST_CASE("b_block examples") {
    Eigen::Matrix2d expect;
    expect << 0, 1.5, 1.5, 0;
    CHECK(b_block(3.0) == expect);
    expect << 0, 0.5, 0.5, 0;
    CHECK(b_block(1.0) == expect);
    CHECK_THROWS_AS(b_block(0.9), std::domain_error);

    // T0 block + B has eigenvalues bounded away from 0 by const / kappa
    for (double beta : {1.0, 3.0, 10.0})
        for (double kappa : {1.0, 10.0, 100.0}) {
            Eigen::Matrix2d m = b_block(beta);
            m(0, 0) = -1 / (2 * kappa);
            m(1, 1) = kappa / 2;
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(m);
            CHECK(es.eigenvalues().cwiseAbs().minCoeff() * kappa >= 0.4);
        }
}

TEST_CASE("assemble_krein structure") {
    const auto z = EnergyPoint(cplx(-0.4, 0.9));
    const AtomicMeasure empty({}, 1.0);
    CHECK(assemble_krein(empty, z, 0).size() == 0);

    const AtomicMeasure one({Atom::from_b(1.2, 4.0)}, 1.0);
    const auto s1 = assemble_krein(one, z, 1);
    REQUIRE(s1.size() == 1);
    const Eigen::Matrix2cd expect = t_block(1.2, 1.2, z) + b_block(3.0).cast<cplx>();
    CHECK((s1.block(0, 0) - expect).norm() < 1e-15);
    CHECK(s1.tail_bound() == 0.0);

    testing::Gen gen(32);
    for (int i = 0; i < 50; ++i) {
        const auto mu = gen.measure(6, 0.3, 1.0, 1.0, 8.0, 1);
        const EnergyPoint w(gen.upper(4, 0.05, 3));
        const EnergyPoint wbar(std::conj(w.z()));
        const auto a = assemble_krein(mu, w, mu.explicit_count());
        const auto b = assemble_krein(mu, wbar, mu.explicit_count());
        CHECK((b.matrix() - a.matrix().adjoint()).norm() <= 1e-13 * a.matrix().norm());
        CHECK((a.matrix() - a.matrix().transpose()).norm() <= 1e-13 * a.matrix().norm());
    }
    CHECK_THROWS_AS(assemble_krein(one, z, 2), std::invalid_argument);
    CHECK_THROWS_AS(assemble_krein(one, EnergyPoint(cplx(2.0, 0.0)), 1), std::domain_error);
}

TEST_CASE("tail bound decays at the asserted exponential rate") {
    for (double kappa : {0.5, 1.0, 3.0}) {
        const auto z = EnergyPoint::below(kappa);
        const double r = krein_tail_bound(z, 5.0, 1.0) / krein_tail_bound(z, 4.0, 1.0);
        CHECK(r == doctest::Approx(std::exp(-kappa)).epsilon(1e-12));
    }
    CHECK(krein_tail_bound(EnergyPoint::below(1.0), std::nullopt, 1.0) == 0.0);
}

TEST_CASE("Schur remainder obeys the kappa (e^{-2 kappa t1} + e^{-kappa eps}) scale") {
    std::vector<Atom> atoms;
    for (int n = 1; n <= 6; ++n) atoms.push_back({0.5 + 0.75 * n, 3.0});
    const AtomicMeasure mu(atoms, 0.75);
    const double t1 = atoms[0].t, eps = 0.75;
    for (double kappa : {2.0, 4.0, 8.0, 16.0}) {
        const auto sys = assemble_krein(mu, EnergyPoint::below(kappa), atoms.size());
        const double scale = kappa * (std::exp(-2 * kappa * t1) + std::exp(-kappa * eps));
        CHECK(schur_remainder_norm(sys) <= 3.0 * scale);
    }
}

TEST_CASE("trace vectors decay exponentially along the atoms") {
    std::vector<Atom> atoms;
    for (int n = 1; n <= 12; ++n) atoms.push_back({2.0 + 0.5 * n, 3.0});
    const double kappa = 1.5;
    const auto tv = trace_vector(atoms, EnergyPoint::below(kappa), [](double u) { return u * (1 - u); }, 0.0, 1.0);
    for (std::size_t n = 0; n < atoms.size(); ++n) {
        const double size = std::hypot(std::abs(tv[n][0]), std::abs(tv[n][1]));
        const double envelope = std::exp(-kappa * 0.5 * double(n + 1));
        CHECK(size <= 1.0 * envelope);
    }
    // beyond the source support w(t) = c e^{-kappa t}, so w' = -kappa w
    for (const auto& a : tv) CHECK(std::abs(a[1] + kappa * a[0]) <= 1e-10);
}

TEST_CASE("resolvent_kernel examples") {
    const auto z = EnergyPoint(cplx(0.5, 0.6));
    const AtomicMeasure empty({}, 1.0);
    CHECK(resolvent_kernel(empty, z, 0.7, 1.9) == free_green(0.7, 1.9, z));

    const AtomicMeasure three({Atom::from_b(0.8, 4.0), Atom::from_b(1.9, 2.0), Atom::from_b(3.1, 9.0)}, 0.5);
    CHECK(std::abs(resolvent_kernel(three, z, 0.0, 1.3)) < 1e-15);

    // b = inf at t1 decouples [0, t1] with Dirichlet ends
    const double L = 1.6;
    const AtomicMeasure dir({Atom::from_b(L, kInf)}, 0.5);
    for (double kappa : {0.5, 1.0, 3.0})
        for (double t : {0.2, 0.9, 1.4})
            for (double u : {0.3, 1.1}) {
                const cplx g = resolvent_kernel(dir, EnergyPoint::below(kappa), t, u);
                CHECK(std::abs(g - testing::oracle_interval_kernel(t, u, L, kappa)) < 1e-12);
            }
    CHECK_THROWS_AS(resolvent_kernel(three, z, 0.8, 1.0), std::invalid_argument);
}

TEST_CASE("resolvent_kernel symmetry, ODE residual and jump conditions") {
    testing::Gen gen(33);
    for (int i = 0; i < 20; ++i) {
        const auto mu = gen.measure(4, 0.5, 1.0, 1.3, 8.0, 1);
        const EnergyPoint z(gen.upper(3, 0.1, 2));
        const auto atoms = mu.atoms();
        const auto sys = assemble_krein(mu, z, atoms.size());
        const double end = atoms.back().t + 1.0;
        for (int j = 0; j < 10; ++j) {
            const double t = gen.uniform(0, end), u = gen.uniform(0, end);
            const cplx a = sys.resolvent_kernel(t, u), b = sys.resolvent_kernel(u, t);
            CHECK(std::abs(a - b) <= 1e-9 * (1 + std::abs(a)));
        }
        const double u = gen.uniform(0.1, end);
        const double h = 1e-3;
        for (double t = h; t < end; t += 37 * h) {
            bool near = std::abs(t - u) <= 2 * h;
            for (const auto& at : atoms) near = near || std::abs(t - at.t) <= 2 * h;
            if (near) continue;
            const cplx G = sys.resolvent_kernel(t, u);
            const cplx d2 = (sys.resolvent_kernel(t + h, u) - 2.0 * G + sys.resolvent_kernel(t - h, u)) / (h * h);
            CHECK(std::abs(d2 + z.z() * G) <= 1e-6 * (1 + std::abs(z.z())) * std::max(std::abs(G), 1e-12) + 1e-9);
        }
        for (const auto& at : atoms) {
            if (std::abs(at.t - u) < 0.01) continue;
            const double d = 1e-7, hh = 1e-4;
            const cplx lm = sys.resolvent_kernel(at.t - d, u), lp = sys.resolvent_kernel(at.t + d, u);
            const cplx dl = (sys.resolvent_kernel(at.t - d, u) - sys.resolvent_kernel(at.t - d - hh, u)) / hh;
            const cplx dr = (sys.resolvent_kernel(at.t + d + hh, u) - sys.resolvent_kernel(at.t + d, u)) / hh;
            const double sb = at.sqrt_b();
            CHECK(std::abs(lp - sb * lm) <= 1e-5 * (1 + std::abs(lp)));
            CHECK(std::abs(dr - dl / sb) <= 1e-3 * (1 + std::abs(dr)));
        }
    }
}

TEST_CASE("m_plus_krein examples") {
    const AtomicMeasure empty({}, 1.0);
    for (double kappa : {1.0, 2.0, 4.0})
        CHECK(m_plus_krein(empty, EnergyPoint::below(kappa)).value == cplx(-kappa, 0.0));

    const AtomicMeasure one({Atom::from_b(1.0, 4.0)}, 1.0);
    const double m1 = m_plus_krein(one, EnergyPoint::below(1.0)).value.real();
    CHECK(m1 == doctest::Approx(-1.17676).epsilon(1e-5));
    // two-step closed form: m(1-) = 4 * (-1), then back to 0
    const double c = std::cosh(1.0), s = std::sinh(1.0), mm = -4.0;
    CHECK(m1 == doctest::Approx((mm * c - s) / (c - mm * s)).epsilon(1e-13));

    const AtomicMeasure dir({Atom::from_b(1.0, kInf)}, 1.0);
    CHECK(m_plus_krein(dir, EnergyPoint::below(1.0)).value.real() == doctest::Approx(-1.0 / std::tanh(1.0)).epsilon(1e-12));
}

TEST_CASE("m_plus_krein: real on the negative axis, Herglotz above it, equal to the oracle") {
    testing::Gen gen(34);
    for (int i = 0; i < 150; ++i) {
        const auto mu = gen.measure(10, 0.25, 1.0, 1.0, 10.0);
        const double kappa = gen.uniform(0.5, 10.0);
        const cplx m = m_plus_krein(mu, EnergyPoint::below(kappa)).value;
        CHECK(std::abs(m.imag()) <= 1e-10);
        const double o = oracle_real(mu.atoms(), kappa);
        CHECK(std::abs(m.real() - o) <= 1e-6 * (1 + std::abs(o)));

        const EnergyPoint w(gen.upper(6, 0.05, 3));
        const auto mk = m_plus_krein(mu, w).value;
        CHECK(mk.imag() > 0.0);
        const auto mo = testing::oracle_m_plus(mu.atoms(), w.z());
        CHECK(std::abs(mk - mo.value) <= 1e-6 * (1 + std::abs(mo.value)));
    }
}

TEST_CASE("injectivity probe on small measures") {
    testing::Gen gen(35);
    double margin = kInf;
    for (int i = 0; i < 100; ++i) {
        const auto a = gen.measure(2, 0.5, 1.5, 1.2, 6.0, 1);
        const auto b = gen.measure(2, 0.5, 1.5, 1.2, 6.0, 1);
        double gap = 0.0;
        for (int kappa = 1; kappa <= 8; ++kappa) {
            const auto z = EnergyPoint::below(kappa);
            gap = std::max(gap, std::abs(m_plus_krein(a, z).value - m_plus_krein(b, z).value));
        }
        margin = std::min(margin, gap);
    }
    MESSAGE("injectivity margin over 100 random pairs: " << margin);
    CHECK(margin > 1e-8);
}

TEST_CASE("asymptotic_ratio tends to one") {
    const AtomicMeasure one({Atom::from_b(1.0, 4.0)}, 1.0);
    const AtomicMeasure dir({Atom::from_b(1.0, kInf)}, 1.0);
    double prev = kInf;
    for (double kappa : {2.0, 4.0, 6.0, 8.0, 10.0}) {
        const double r = asymptotic_ratio(one, kappa);
        CHECK(r == doctest::Approx(testing::oracle_one_atom_ratio(1.0, 4.0, kappa)).epsilon(1e-10));
        CHECK(std::abs(r - 1) < prev);
        prev = std::abs(r - 1);
        CHECK(asymptotic_ratio(dir, kappa) ==
              doctest::Approx(testing::oracle_one_atom_ratio(1.0, kInf, kappa)).epsilon(1e-10));
    }
    CHECK(std::abs(asymptotic_ratio(one, 10.0) - 1) < 1e-2);
    CHECK(std::abs(asymptotic_ratio(dir, 10.0) - 1) < 1e-2);
    CHECK_THROWS_AS(asymptotic_ratio(AtomicMeasure({}, 1.0), 3.0), std::domain_error);
}

TEST_CASE("truncation control for infinite measures") {
    const AtomicMeasure per({}, 0.5, SupportClass::half_line, PeriodicTail{0.5, 1.0, {Atom::from_b(0.5, 4.0)}});
    const auto z = EnergyPoint::below(2.0);
    const std::size_t N = choose_truncation(per, z, 1e-12);
    CHECK(N > 1);
    CHECK(N < 64);
    const auto sys = assemble_krein(per, z, N);
    CHECK(sys.tail_bound() * sys.inverse_norm() * sys.inverse_norm() <= 1e-12);

    KreinOptions fixed;
    fixed.truncation = 2;
    try {
        m_plus_krein(per, z, fixed);
        FAIL("expected a refusal");
    } catch (const TruncationRefusal& e) {
        CHECK(e.required() == N);
    }

    // with enough atoms the value matches the periodic Floquet closure oracle
    std::vector<Atom> many = per.first_atoms(80);
    const double o = oracle_real(many, 2.0);
    CHECK(m_plus_krein(per, z).value.real() == doctest::Approx(o).epsilon(1e-10));

    KreinOptions capped;
    capped.max_atoms = 4;
    capped.tol = 1e-30;
    CHECK_THROWS_AS(m_plus_krein(per, EnergyPoint::below(0.05), capped), TruncationRefusal);
}

}  // TEST_SUITE
