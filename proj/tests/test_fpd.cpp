#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "qfpc/fpd.hpp"
#include "qfpc/oracles.hpp"
#include "qfpc/rng.hpp"

using namespace qfpc;

namespace {

const MatXc kOne = MatXc::Constant(1, 1, cx(1.0, 0.0));

NoiseIdealSpec scalar_spec(double d, double g_r, double omega, double sigma, double u_r, double o_d) {
    NoiseIdealSpec spec;
    spec.sigma = sigma;
    spec.g = MatX::Constant(1, 1, 1.0);
    spec.g_r = MatX::Constant(1, 1, g_r);
    spec.omega = MatX::Constant(1, 1, omega);
    spec.u_r = VecX::Constant(1, u_r);
    spec.o_d = VecX::Constant(1, o_d);
    spec.d = MatXc::Constant(1, 1, cx(d, 0.0));
    return spec;
}

MatXc random_complex(RngStream& rng, int rows, int cols) {
    MatXc m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) m(i, j) = cx(rng.normal(), rng.normal());
    }
    return m;
}

MatX random_spd(RngStream& rng, int n) {
    MatX r(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) r(i, j) = rng.normal();
    }
    return r * r.transpose() + 0.5 * MatX::Identity(n, n);
}

}  // namespace

TEST_CASE("a fully zeroed problem stays at the zero cost-to-go") {
    NoiseIdealSpec spec = scalar_spec(0.0, 1.0, 1.0, 0.0, 0.0, 0.0);
    const CostToGo next = riccati_step(CostToGo::zero(1), kOne, kOne, spec);
    CHECK(next.m.cwiseAbs().maxCoeff() == 0.0);
    CHECK(next.p.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("scalar backward step values") {
    const CostToGo base = CostToGo::zero(1);
    SUBCASE("sigma = 0 gives m = 0.5") {
        const NoiseIdealSpec spec = scalar_spec(1, 1, 1, 0.0, 0, 0);
        const CostToGo next = riccati_step(base, kOne, kOne, spec);
        CHECK(std::abs(next.m(0, 0) - cx(0.5, 0)) <= 1e-15);
        const double oracle = oracles::scalar_curvature_in_x(base, 1.0, 1.0, spec);
        CHECK(std::abs(std::real(next.m(0, 0)) - oracle) <= 1e-5);
    }
    SUBCASE("sigma = 0.3 adds the multiplicative-noise term") {
        const NoiseIdealSpec spec = scalar_spec(1, 1, 1, 0.3, 0, 0);
        const CostToGo next = riccati_step(base, kOne, kOne, spec);
        CHECK(std::abs(next.m(0, 0) - cx(0.8, 0)) <= 1e-15);
        const double oracle = oracles::scalar_curvature_in_x(base, 1.0, 1.0, spec);
        CHECK(std::abs(std::real(next.m(0, 0)) - oracle) <= 1e-5);
    }
}

TEST_CASE("the backward step maps Hermitian to Hermitian") {
    RngStream rng(91, 6);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 2 + trial % 3;
        NoiseIdealSpec spec;
        spec.sigma = 0.2 * rng.uniform01();
        spec.g = random_spd(rng, 1);
        spec.g_r = random_spd(rng, 1);
        spec.omega = random_spd(rng, 1);
        spec.u_r = VecX::Constant(1, rng.normal());
        spec.o_d = VecX::Constant(1, rng.normal());
        spec.d = random_complex(rng, 1, n);

        CostToGo ct = CostToGo::zero(n);
        const MatXc c = random_complex(rng, n, n);
        ct.m = c * c.adjoint();
        ct.p = random_complex(rng, 1, n);
        const MatXc a = random_complex(rng, n, n);
        const MatXc b = random_complex(rng, n, 1);

        // raw right-hand side, before the library re-Hermitizes
        const MatX gr_inv = spec.g_r.inverse();
        const MatXc q = spec.d.adjoint() * gr_inv.cast<cx>() * spec.d + ct.m;
        const MatXc s = spec.omega.inverse().cast<cx>() + b.adjoint() * q * b;
        const MatXc raw = a.adjoint() * q * a -
                          a.adjoint() * q.adjoint() * b * s.inverse() * (b.adjoint() * q * a) +
                          spec.sigma * (a.adjoint() * q * a);
        CHECK((raw - raw.adjoint()).cwiseAbs().maxCoeff() <= 1e-10 * (1.0 + raw.cwiseAbs().maxCoeff()));

        const CostToGo next = riccati_step(ct, a, b, spec);
        CHECK((next.m - next.m.adjoint()).cwiseAbs().maxCoeff() == 0.0);
        CHECK((next.m - raw).cwiseAbs().maxCoeff() <= 1e-9 * (1.0 + raw.cwiseAbs().maxCoeff()));
    }
}

TEST_CASE("scalar steady state hits the golden-ratio fixed point") {
    const NoiseIdealSpec spec = scalar_spec(1, 1, 1, 0.0, 0, 0);
    const SteadyStateResult res = steady_state(kOne, kOne, spec, 1e-13, 1000);
    const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
    CHECK(std::abs(std::real(res.cost.m(0, 0)) - golden) <= 1e-12);

    const double oracle = oracles::scalar_riccati_fixed_point(1, 1, 1, 1, 1, 0.0);
    CHECK(std::abs(std::real(res.cost.m(0, 0)) - oracle) <= 1e-12);

    // fixed-point property
    const CostToGo next = riccati_step(res.cost, kOne, kOne, spec);
    CHECK((next.m - res.cost.m).cwiseAbs().maxCoeff() < 1e-13);
    CHECK((next.p - res.cost.p).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("steady state with no control solves the discrete Lyapunov equation") {
    RngStream rng(92, 6);
    for (int trial = 0; trial < 5; ++trial) {
        MatXc a = random_complex(rng, 2, 2);
        Eigen::ComplexEigenSolver<MatXc> es(a);
        a *= (0.3 + 0.5 * rng.uniform01()) / es.eigenvalues().cwiseAbs().maxCoeff();

        NoiseIdealSpec spec;
        spec.sigma = 0.0;
        spec.g = MatX::Constant(1, 1, 1.0);
        spec.g_r = MatX::Constant(1, 1, 0.25);
        spec.omega = MatX::Constant(1, 1, 3.0);
        spec.u_r = VecX::Zero(1);
        spec.o_d = VecX::Zero(1);
        spec.d = random_complex(rng, 1, 2);

        const MatXc b = MatXc::Zero(2, 1);
        const SteadyStateResult res = steady_state(a, b, spec, 1e-13, 100000);
        const MatXc c = spec.d.adjoint() * spec.g_r.inverse().cast<cx>() * spec.d;
        const MatXc ref = oracles::dlyap_direct(a, (a.adjoint() * c * a).eval());
        CHECK((res.cost.m - ref).cwiseAbs().maxCoeff() <= 1e-9);
    }
}

TEST_CASE("steady state reports non-convergence") {
    // rho(a) = 1 with the output reading that direction: the recursion drifts
    const NoiseIdealSpec spec = scalar_spec(1, 1, 1, 0.5, 0, 0);
    MatXc b = MatXc::Zero(1, 1);
    CHECK_THROWS_AS(steady_state(kOne, b, spec, 1e-10, 200), ConvergenceError);
    try {
        steady_state(kOne, b, spec, 1e-10, 200);
    } catch (const ConvergenceError& e) {
        CHECK(e.residual_m > 0.0);
    }
}

TEST_CASE("controller collapses to the ideal when the input column vanishes") {
    RngStream rng(93, 6);
    NoiseIdealSpec spec;
    spec.sigma = 0.1;
    spec.g = random_spd(rng, 1);
    spec.g_r = random_spd(rng, 1);
    spec.omega = random_spd(rng, 2);
    spec.u_r = VecX(2);
    spec.u_r << 0.7, -1.3;
    spec.o_d = VecX::Constant(1, 0.4);
    spec.d = random_complex(rng, 1, 3);

    CostToGo ct = CostToGo::zero(3);
    const MatXc c = random_complex(rng, 3, 3);
    ct.m = c * c.adjoint();
    ct.p = random_complex(rng, 1, 3);

    const ControlLaw law = control_law(ct, random_complex(rng, 3, 3), MatXc::Zero(3, 2), spec,
                                       random_complex(rng, 3, 1));
    CHECK((law.v - spec.u_r).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK((law.r - spec.omega).cwiseAbs().maxCoeff() <= 1e-12 * spec.omega.cwiseAbs().maxCoeff());
}

TEST_CASE("scalar controller values") {
    const NoiseIdealSpec spec = scalar_spec(1, 1, 1, 0.0, 0.0, 1.0);
    const CostToGo base = CostToGo::zero(1);
    SUBCASE("from the origin") {
        const ControlLaw law = control_law(base, kOne, kOne, spec, VecXc::Zero(1));
        CHECK(std::abs(law.v(0) - 0.5) <= 1e-15);
        CHECK(std::abs(law.r(0, 0) - 0.5) <= 1e-15);
        CHECK(law.im_residual <= 1e-15);
    }
    SUBCASE("from x = 1 the pull cancels") {
        const ControlLaw law = control_law(base, kOne, kOne, spec, VecXc::Constant(1, cx(1, 0)));
        CHECK(std::abs(law.v(0)) <= 1e-15);
    }
}

TEST_CASE("controller mean is the stationary point of the one-step exponent") {
    RngStream rng(94, 6);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 1 + static_cast<int>(rng.uniform01() * 4.0);
        const int m = 1 + static_cast<int>(rng.uniform01() * 2.0);
        NoiseIdealSpec spec;
        spec.sigma = 0.3 * rng.uniform01();
        spec.g = random_spd(rng, m);
        spec.g_r = random_spd(rng, m);
        spec.omega = random_spd(rng, 1);
        spec.u_r = VecX::Constant(1, rng.normal());
        spec.o_d = VecX(m);
        for (int i = 0; i < m; ++i) spec.o_d(i) = rng.normal();
        spec.d = random_complex(rng, m, n);

        CostToGo ct = CostToGo::zero(n);
        const MatXc c = random_complex(rng, n, n);
        ct.m = c * c.adjoint();
        ct.p = random_complex(rng, 1, n);
        const MatXc a = random_complex(rng, n, n);
        const MatXc b = random_complex(rng, n, 1);
        const VecXc x = random_complex(rng, n, 1);

        const ControlLaw law = control_law(ct, a, b, spec, x);
        auto f = [&](const VecX& u) { return oracles::exponent_value(ct, a, b, spec, x, u); };
        const VecX grad = oracles::finite_diff_gradient(f, law.v);
        CHECK(grad.norm() <= 1e-5 * (1.0 + law.v.norm()));
        const MatX hess = oracles::finite_diff_hessian(f, law.v);
        CHECK(std::abs(hess(0, 0) - 1.0 / law.r(0, 0)) <= 1e-4 * std::abs(1.0 / law.r(0, 0)));
    }
}

TEST_CASE("omega interpolates the controller between ideal mean and unconstrained minimizer") {
    const CostToGo base = CostToGo::zero(1);
    const double u_r = -0.8;
    // unconstrained minimizer of beta: (b q b)^-1 (b q a x + 0.5 b (p - 2 o_d gr d)) with q = 1
    const double x = 0.6, o_d = 1.0;
    const double u_beta = -(x - o_d);  // = argmin 0.5 (x + u - o_d)^2
    double prev_gap_beta = std::numeric_limits<double>::infinity();
    double prev_gap_ur = -1.0;
    for (double omega : {1e-4, 1e-2, 1.0, 1e2, 1e4}) {
        const NoiseIdealSpec spec = scalar_spec(1, 1, omega, 0.0, u_r, o_d);
        const ControlLaw law = control_law(base, kOne, kOne, spec, VecXc::Constant(1, cx(x, 0)));
        const double gap_beta = std::abs(law.v(0) - u_beta);
        const double gap_ur = std::abs(law.v(0) - u_r);
        CHECK(gap_beta <= prev_gap_beta + 1e-12);
        CHECK(gap_ur >= prev_gap_ur - 1e-12);
        prev_gap_beta = gap_beta;
        prev_gap_ur = gap_ur;
    }
    const NoiseIdealSpec tight = scalar_spec(1, 1, 1e-8, 0.0, u_r, o_d);
    CHECK(std::abs(control_law(base, kOne, kOne, tight, VecXc::Constant(1, cx(x, 0))).v(0) - u_r) <= 1e-6);
    const NoiseIdealSpec loose = scalar_spec(1, 1, 1e8, 0.0, u_r, o_d);
    CHECK(std::abs(control_law(base, kOne, kOne, loose, VecXc::Constant(1, cx(x, 0))).v(0) - u_beta) <= 1e-6);
}

TEST_CASE("omega_const increment vanishes when the ideal matches the model") {
    NoiseIdealSpec spec;
    spec.sigma = 0.0;
    spec.g = MatX::Constant(1, 1, 0.7);
    spec.g_r = spec.g;
    spec.omega = MatX::Constant(1, 1, 2.0);
    spec.u_r = VecX::Zero(1);
    spec.o_d = VecX::Zero(1);
    spec.d = MatXc::Zero(1, 2);
    const CostToGo base = CostToGo::zero(2);
    RngStream rng(95, 6);
    const CostToGo next = riccati_step(base, random_complex(rng, 2, 2), MatXc::Zero(2, 1), spec);
    CHECK(std::abs(next.omega_const) <= 1e-12);
}

TEST_CASE("sampling the control law") {
    SUBCASE("zero covariance returns the mean") {
        ControlLaw law;
        law.v = VecX::Constant(1, 0.37);
        law.r = MatX::Zero(1, 1);
        RngStream rng(96, 6);
        CHECK(sample_control(law, rng)(0) == 0.37);
    }
    SUBCASE("identical streams give identical draws") {
        ControlLaw law;
        law.v = VecX::Constant(1, 0.5);
        law.r = MatX::Constant(1, 1, 0.25);
        RngStream a(97, 6), b(97, 6);
        for (int i = 0; i < 100; ++i) CHECK(sample_control(law, a)(0) == sample_control(law, b)(0));
    }
    SUBCASE("law of large numbers") {
        ControlLaw law;
        law.v = VecX::Constant(1, 0.5);
        law.r = MatX::Constant(1, 1, 0.25);
        RngStream rng(98, 6);
        double acc = 0.0, acc2 = 0.0;
        const int n = 100000;
        for (int i = 0; i < n; ++i) {
            const double u = sample_control(law, rng)(0);
            acc += u;
            acc2 += u * u;
        }
        const double mean = acc / n;
        CHECK(std::abs(mean - 0.5) <= 0.005);
        CHECK(std::abs(acc2 / n - mean * mean - 0.25) <= 0.01);
    }
    SUBCASE("indefinite covariance is rejected") {
        ControlLaw law;
        law.v = VecX::Zero(1);
        law.r = MatX::Constant(1, 1, -1.0);
        RngStream rng(99, 6);
        CHECK_THROWS_AS(sample_control(law, rng), NumericalError);
    }
}

TEST_CASE("gaussian log densities") {
    const VecXc zc = VecXc::Zero(1);
    const MatXc ic = MatXc::Identity(1, 1);
    CHECK(gaussian_logpdf(zc, zc, ic) == doctest::Approx(std::log(1.0 / M_PI)).epsilon(1e-14));
    const VecX zr = VecX::Zero(1);
    const MatX ir = MatX::Identity(1, 1);
    CHECK(gaussian_logpdf(zr, zr, ir) == doctest::Approx(-0.5 * std::log(2.0 * M_PI)).epsilon(1e-14));

    RngStream rng(100, 6);
    const MatXc c = random_complex(rng, 2, 2);
    const MatXc cov = c * c.adjoint() + MatXc::Identity(2, 2);
    const VecXc mean = random_complex(rng, 2, 1);
    const VecXc x = random_complex(rng, 2, 1);
    const VecXc r = x - mean;
    const double direct = -(2.0 * std::log(M_PI) + std::log(std::abs(cov.determinant())) +
                            std::real((r.adjoint() * cov.inverse() * r)(0)));
    CHECK(std::abs(gaussian_logpdf(x, mean, cov) - direct) <= 1e-12);

    MatX bad = -MatX::Identity(2, 2);
    CHECK_THROWS_AS(gaussian_logpdf(VecX::Zero(2), VecX::Zero(2), bad), NumericalError);
}

TEST_CASE("gaussian KLD") {
    const VecX zero = VecX::Zero(2);
    const MatX eye = MatX::Identity(2, 2);
    CHECK(kld_gaussians(zero, eye, zero, eye) == 0.0);

    CHECK(kld_gaussians(VecX::Zero(1), MatX::Identity(1, 1), VecX::Constant(1, 1.0),
                        MatX::Identity(1, 1)) == doctest::Approx(0.5).epsilon(1e-14));

    RngStream rng(101, 6);
    VecX m0(3), m1(3);
    for (int i = 0; i < 3; ++i) { m0(i) = rng.normal(); m1(i) = rng.normal(); }
    const MatX c0 = random_spd(rng, 3);
    const MatX c1 = random_spd(rng, 3);
    const double closed = kld_gaussians(m0, c0, m1, c1);
    CHECK(closed >= 0.0);
    const auto mc = oracles::mc_kld_gaussians(m0, c0, m1, c1, 1000000, 2024);
    CHECK(std::abs(closed - mc.value) <= 3.0 * mc.std_error + 1e-6);

    CHECK_THROWS_AS(kld_gaussians(VecX::Zero(2), eye, VecX::Zero(3), MatX::Identity(3, 3)),
                    DimensionError);
}

TEST_CASE("noise spec validation") {
    NoiseIdealSpec spec = scalar_spec(1, 1, 1, 0, 0, 0);
    spec.sigma = -0.1;
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    spec = scalar_spec(1, 1, 1, 0, 0, 0);
    spec.g_r = -MatX::Identity(1, 1);
    CHECK_THROWS_AS(spec.validate(), NumericalError);
    spec = scalar_spec(1, 1, 1, 0, 0, 0);
    spec.o_d = VecX::Zero(2);
    CHECK_THROWS_AS(spec.validate(), DimensionError);
}
