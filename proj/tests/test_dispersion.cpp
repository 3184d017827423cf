#include "doctest.h"

#include <cmath>
#include <random>

#include "filament/dispersion.hpp"

using namespace filament;

namespace {

MediumParams medium(double gamma = 1.0, double omega0 = 1.0) {
    MediumParams m;
    m.gamma = gamma;
    m.omega0 = omega0;
    return m;
}

}  // namespace

TEST_CASE("branch labels round trip") {
    for (const auto& b : curved_branches()) CHECK(parse_branch(to_string(b)) == b);
    CHECK(parse_branch("+-") == BranchId::curved(1, -1));
    CHECK(parse_branch("0") == BranchId::constant(0));
    CHECK_THROWS_AS(parse_branch("x"), Error);
}

TEST_CASE("medium validation") {
    MediumParams m = medium();
    CHECK_NOTHROW(m.validate());
    m.gamma = -1.0;
    CHECK_THROWS_AS(m.validate(), Error);
    m.gamma = 0.0;
    CHECK_THROWS_AS(m.validate(), Error);
    CHECK_NOTHROW(m.validate(true));
}

TEST_CASE("curved roots satisfy the quartic") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(0.05, 4.0);
    for (int s = 0; s < 50; ++s) {
        const MediumParams m = medium(U(rng), U(rng));
        const double k = U(rng);
        const BranchValues v = omega_branches(k, m);
        for (double w : v.curved) CHECK(std::abs(dispersion_quartic(w, k, m)) < 1e-10);
        CHECK(v.constant[0] == 0.0);
        CHECK(v.constant[1] == doctest::Approx(std::sqrt(m.gamma + m.omega0 * m.omega0)));
        CHECK(v.constant[2] == -v.constant[1]);
    }
}

TEST_CASE("gamma = 0 separates light cone and oscillator") {
    const MediumParams m = medium(0.0, 1.7);
    const BranchValues v = omega_branches(0.6, m);
    std::vector<double> got(v.curved.begin(), v.curved.end());
    std::sort(got.begin(), got.end());
    const std::vector<double> want{-1.7, -0.6, 0.6, 1.7};
    for (int i = 0; i < 4; ++i) CHECK(std::abs(got[i] - want[i]) < 1e-12);
}

TEST_CASE("12x12 projectors") {
    const MediumParams m = medium(1.3, 0.8);
    const Eigen::Vector3d k(0.3, -0.7, 1.1);
    Mat12 sum = Mat12::Zero();
    for (const auto& b : curved_branches()) {
        const Mat12 P = projector(b, k, m);
        CHECK((P * P - P).cwiseAbs().maxCoeff() < 1e-10);
        CHECK(std::abs(P.trace() - 2.0) < 1e-10);
        const double w = branch_omega(b, k.norm(), m);
        CHECK((operator_L(w, k, m) * P).cwiseAbs().maxCoeff() < 1e-9);
        sum += P;
    }
    const auto cp = constant_projectors(k, m);
    const double wc[3] = {0.0, std::sqrt(1.3 + 0.64), -std::sqrt(1.3 + 0.64)};
    for (int j = 0; j < 3; ++j) {
        CHECK((operator_L(wc[j], k, m) * cp[j]).cwiseAbs().maxCoeff() < 1e-9);
        sum += cp[j];
    }
    CHECK((sum - Mat12::Identity()).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("polarization lift lies in the kernel") {
    const MediumParams m = medium();
    const Eigen::Vector3d k(0.0, 0.0, 2.0);
    const Eigen::Vector3d e(1.0, 0.0, 0.0);
    for (const auto& b : curved_branches()) {
        const double w = branch_omega(b, 2.0, m);
        const Vec12 v = polarization_lift(e, w, k, m);
        CHECK((operator_L(w, k, m) * v).cwiseAbs().maxCoeff() < 1e-12);
        const Vec4 v1 = polarization_lift_1d(w, 2.0, m);
        CHECK((operator_L4(w, 2.0, m) * v1).cwiseAbs().maxCoeff() < 1e-12);
        const Mat4 P = projector_1d(b, 2.0, m);
        CHECK((P * v1 - v1).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("group velocity and GVD match finite differences") {
    const MediumParams m = medium();
    const BranchId b = BranchId::curved(1, 1);
    const double k = 2.0, h = 1e-4;
    const Derivatives d = group_velocity_and_gvd(b, k, m);
    const double wp = branch_omega(b, k + h, m), w0 = branch_omega(b, k, m), wm = branch_omega(b, k - h, m);
    CHECK(d.omega == doctest::Approx(w0));
    CHECK(d.d1 == doctest::Approx((wp - wm) / (2 * h)).epsilon(1e-7));
    CHECK(d.d2 == doctest::Approx((wp - 2 * w0 + wm) / (h * h)).epsilon(1e-5));
}

TEST_CASE("NLS dispersion is the second-order Taylor polynomial") {
    const MediumParams m = medium();
    const BranchId b = BranchId::curved(1, -1);
    const double k0 = 2.0;
    const Derivatives d = group_velocity_and_gvd(b, k0, m);
    for (double q : {-0.5, 0.0, 0.3}) {
        const double want = d.omega + d.d1 * q + 0.5 * d.d2 * q * q;
        CHECK(omega_nls(k0 + q, k0, b, m) == doctest::Approx(want));
    }
    // Third-order agreement near the carrier.
    const double q = 1e-2;
    CHECK(std::abs(omega_nls(k0 + q, k0, b, m) - branch_omega(b, k0 + q, m)) < 1e-5);
}

TEST_CASE("NLS coefficients") {
    const MediumParams m = medium();
    const NlsCoefficients c = nls_coefficients(2.0, BranchId::curved(1, 1), m, 0.1);
    const Derivatives d = group_velocity_and_gvd(BranchId::curved(1, 1), 2.0, m);
    CHECK(c.omega == doctest::Approx(d.omega));
    CHECK(c.c_g == doctest::Approx(d.d1));
    CHECK(c.alpha1 == (d.d2 > 0 ? 1 : (d.d2 < 0 ? -1 : 0)));
    CHECK(c.damping == 0.0);  // omega1 = 0
    const double w = c.omega;
    CHECK(c.alpha3 == doctest::Approx(-(w * w - 1.0) / w));
}

TEST_CASE("odd harmonics of the default carrier are off the variety") {
    CHECK(is_nonresonant(2.0, BranchId::curved(1, 1), medium()));
}
