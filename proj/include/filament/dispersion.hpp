#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "filament/grid.hpp"

namespace filament {

enum class NonlinearityKind { cubic, cubic_quintic, saturated };

std::string to_string(NonlinearityKind k);
NonlinearityKind parse_nonlinearity(const std::string& s);

struct IonizationParams {
    double c = 0.0;
    double c0 = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;
    int K = 1;
    double alpha4 = 0.0;
    double alpha5 = 0.0;
};

// Dimensionless medium constants. The Q equation reads
//   dQ/dt + eps^{1+p} omega1 Q - (sqrt(gamma) E - omega0 P)/eps = eps (gamma/omega0^3) (1 + f) |P|^2 P.
struct MediumParams {
    double gamma = 1.0;
    double omega0 = 1.0;
    double omega1 = 0.0;
    double p = 1.0;
    NonlinearityKind nonlinearity = NonlinearityKind::cubic;
    double r = 1.0;
    double a_tilde = 0.0;
    std::optional<IonizationParams> ionization;

    // Throws on invalid constants. gamma = 0 is accepted only when allow_zero_gamma
    // is set (degenerate checks of the dispersion relation).
    void validate(bool allow_zero_gamma = false) const;
};

struct BranchId {
    enum class Family { curved, constant };
    Family family = Family::curved;
    // curved: outer = overall sign, inner = sign in front of sqrt(Delta).
    // constant: outer in {0, +1, -1} selects 0 or +-sqrt(gamma + omega0^2); inner unused.
    int outer = 1;
    int inner = 1;

    static BranchId curved(int outer, int inner) { return {Family::curved, outer, inner}; }
    static BranchId constant(int which) { return {Family::constant, which, 0}; }
    bool is_curved() const { return family == Family::curved; }
    bool operator==(const BranchId&) const = default;
};

std::string to_string(const BranchId& b);
// Accepts "++", "+-", "-+", "--", "(+,-)" style, or "0", "+c", "-c" for constant sheets.
BranchId parse_branch(const std::string& s);

struct BranchValues {
    // Order: (+,+), (+,-), (-,+), (-,-).
    std::array<double, 4> curved{};
    // Order: 0, +sqrt(gamma+omega0^2), -sqrt(gamma+omega0^2).
    std::array<double, 3> constant{};
    double value(const BranchId& b) const;
};

std::array<BranchId, 4> curved_branches();
std::array<BranchId, 3> constant_branches();

BranchValues omega_branches(double k, const MediumParams& m);
double branch_omega(const BranchId& b, double k, const MediumParams& m);
// G(omega, k) = omega^4 - omega^2 (omega0^2 + gamma + k^2) + omega0^2 k^2.
double dispersion_quartic(double omega, double k, const MediumParams& m);

using Mat12 = Eigen::Matrix<cplx, 12, 12>;
using Vec12 = Eigen::Matrix<cplx, 12, 1>;
using Mat4 = Eigen::Matrix<cplx, 4, 4>;
using Vec4 = Eigen::Matrix<cplx, 4, 1>;

// Blocks ordered (B, E, Q, P), each a 3-vector.
Mat12 symbol_A(const Eigen::Vector3d& k);
Mat12 coupling_E(const MediumParams& m);
// L(omega, k) = -omega I + A(k) + E/i.
Mat12 operator_L(double omega, const Eigen::Vector3d& k, const MediumParams& m);

// Transverse reduction (B_y, E_x, Q_x, P_x) with propagation along z.
Mat4 symbol_A1(double k);
Mat4 coupling_E4(const MediumParams& m);
Mat4 operator_L4(double omega, double k, const MediumParams& m);

Mat12 projector(const BranchId& branch, const Eigen::Vector3d& kvec, const MediumParams& m);
// Projectors on the three constant sheets (zero, +, -), by orthogonal completion.
std::array<Mat12, 3> constant_projectors(const Eigen::Vector3d& kvec, const MediumParams& m);

Vec12 polarization_lift(const Eigen::Vector3d& e, double omega, const Eigen::Vector3d& kvec, const MediumParams& m);
// Reduced lift of a unit E_x amplitude for signed wavenumber k along z.
Vec4 polarization_lift_1d(double omega, double k, const MediumParams& m);
Mat4 projector_1d(const BranchId& branch, double k, const MediumParams& m);

struct Derivatives {
    double omega = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
};
Derivatives group_velocity_and_gvd(const BranchId& branch, double k, const MediumParams& m);

// Exact branch frequency at a (kx, kz) wavevector (1D: kz only, index 0).
double omega_exact(const BranchId& branch, const WaveVec& kprime, int dims, const MediumParams& m);

// Taylor (NLS) dispersion around the carrier k0 e_z; kprime in (x, z) order in 2D, z in 1D.
double omega_nls(double kprime, double k0, const BranchId& branch, const MediumParams& m);
double omega_nls(const WaveVec& kprime, int dims, double k0, const BranchId& branch, const MediumParams& m);

// Improved-dispersion parameters. Vectors and matrices are indexed like grid
// dimensions: 1D (z), 2D (x, z).
struct FitResult {
    int dims = 1;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(1);
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(1, 1);
    // Coefficients of the cubic form C3(d) = sum_a C3[a] dx^a dz^(3-a), a = 0..dims==2?3:0.
    std::vector<double> C3{0.0};
    double k0 = 0.0;
    double half_width = 0.0;
    double sup_error = 0.0;
    double nls_sup_error = 0.0;

    static FitResult zero(int dims);
    double c3(const WaveVec& d) const;
    // 1 + b.d + d.B d
    double denominator(const WaveVec& d) const;
    bool is_zero() const;
};

// C3 coefficients of the tied choice C3(grad) = -omega'(k) grad.B grad d_z.
std::vector<double> tied_c3(const Eigen::MatrixXd& B, double omega_prime, int dims);

double omega_imp(double kprime, double k0, const BranchId& branch, const FitResult& fit, const MediumParams& m);
double omega_imp(const WaveVec& kprime, int dims, double k0, const BranchId& branch, const FitResult& fit,
                 const MediumParams& m);

struct NlsCoefficients {
    double omega = 0.0;
    double c_g = 0.0;
    double omega_pp = 0.0;
    double diffraction = 0.0;
    double gvd = 0.0;
    int alpha1 = 0;
    // Damping rate in the slow time tau = eps t (multiply by eps for t).
    double damping = 0.0;
    double cubic_gain = 0.0;
    // Closed-form self-steepening coefficient -(omega^2 - omega0^2)/(sqrt(gamma) omega).
    double alpha3 = 0.0;
    // Coefficient from the projector derivative: E-component of pi pi' F equals
    // -alpha3_projector times that of pi F for F along Q. Used by nls_polarized.
    double alpha3_projector = 0.0;
    double n_sq = 0.0;
    // P = beta E and Q = i q_ratio E on the branch.
    double beta = 0.0;
    double q_ratio = 0.0;
};

NlsCoefficients nls_coefficients(double k, const BranchId& branch, const MediumParams& m, double epsilon);

// Checks that the odd harmonics n(omega, k), n = 3, 5, ..., 2*pmax+3, stay off every sheet.
bool is_nonresonant(double k, const BranchId& branch, const MediumParams& m, int pmax = 0, double tol = 1e-6);

}  // namespace filament
