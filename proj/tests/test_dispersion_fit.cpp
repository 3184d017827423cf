#include "doctest.h"

#include <cmath>

#include "filament/dispersion_fit.hpp"

using namespace filament;

namespace {
const MediumParams kMedium{};
const BranchId kBranch = BranchId::curved(1, 1);
}  // namespace

TEST_CASE("admissibility check") {
    Eigen::VectorXd b(1);
    Eigen::MatrixXd B(1, 1);
    b << 0.0;
    B << 0.0;
    CHECK(check_hyp(b, B).ok);
    b << 1.0;
    B << 0.5;
    CHECK(check_hyp(b, B).ok);  // 4 - b^2/B = 2 > 0
    b << 2.0;
    B << 0.5;
    CHECK_FALSE(check_hyp(b, B).ok);  // 4 - 8 < 0
    b << 1.0;
    B << 0.0;
    CHECK_FALSE(check_hyp(b, B).ok);  // b outside the range of B
    B << -0.1;
    CHECK_FALSE(check_hyp(b, B).ok);
    CHECK_FALSE(check_hyp(b, B).diagnostic.empty());
}

TEST_CASE("fit window sampling") {
    const auto w1 = fit_window(2.0, 1.5, 1, 201);
    CHECK(w1.size() == 201);
    CHECK(w1.front()[0] == doctest::Approx(0.5));
    CHECK(w1.back()[0] == doctest::Approx(3.5));
}

TEST_CASE("improved dispersion beats the Taylor polynomial on the default window") {
    const FitResult f = fit_improved(kBranch, 2.0, 1.5, kMedium, 1);
    CHECK(check_hyp(f.b, f.B).ok);
    CHECK(f.sup_error < 0.5 * f.nls_sup_error);
    // The fitter and the evaluator share one code path.
    const double again = window_sup_error(f, kBranch, kMedium, fit_window(2.0, 1.5, 1, 201));
    CHECK(std::abs(again - f.sup_error) < 1e-12);
    CHECK(std::abs(window_sup_error_nls(2.0, kBranch, kMedium, 1, fit_window(2.0, 1.5, 1, 201)) - f.nls_sup_error) <
          1e-12);
}

TEST_CASE("finer candidate grid never increases the objective") {
    FitOptions coarse;
    coarse.grid_b = 32;
    coarse.grid_B = 32;
    coarse.refine = false;
    FitOptions fine = coarse;
    fine.grid_b = 64;
    fine.grid_B = 64;
    const double e1 = fit_improved(kBranch, 2.0, 1.5, kMedium, 1, coarse).sup_error;
    const double e2 = fit_improved(kBranch, 2.0, 1.5, kMedium, 1, fine).sup_error;
    CHECK(e2 <= e1 + 1e-15);
}

TEST_CASE("vanishing window selects the zero fit") {
    const FitResult f = fit_improved(kBranch, 2.0, 1e-6, kMedium, 1);
    CHECK(f.sup_error <= f.nls_sup_error + 1e-15);
    CHECK(f.nls_sup_error < 1e-15);
}

TEST_CASE("improved symbol reduces to NLS for the zero fit") {
    const FitResult z = FitResult::zero(1);
    for (double k : {1.0, 2.0, 3.3})
        CHECK(omega_imp(k, 2.0, kBranch, z, kMedium) == doctest::Approx(omega_nls(k, 2.0, kBranch, kMedium)));
    CHECK(z.is_zero());
    CHECK(z.denominator({0.7, 0.0}) == 1.0);
}

TEST_CASE("tied cubic term") {
    Eigen::MatrixXd B(1, 1);
    B << 0.25;
    const auto c = tied_c3(B, 0.8, 1);
    REQUIRE(c.size() == 1);
    CHECK(c[0] == doctest::Approx(-0.8 * 0.25));
}

TEST_CASE("two-dimensional fit is admissible with diagonal B") {
    FitOptions o;
    o.grid_b = 24;
    o.grid_B = 24;
    const FitResult f = fit_improved(kBranch, 2.0, 1.0, kMedium, 2, o);
    CHECK(f.dims == 2);
    CHECK(check_hyp(f.b, f.B).ok);
    CHECK(f.B(0, 1) == 0.0);
    CHECK(f.b(0) == 0.0);
    CHECK(f.sup_error <= f.nls_sup_error);
}
