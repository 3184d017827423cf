#include "filament/dispersion.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

namespace filament {

namespace {

constexpr double kResonanceGuard = 1e-8;

Eigen::Matrix3cd cross_matrix(const Eigen::Vector3d& k) {
    Eigen::Matrix3cd c = Eigen::Matrix3cd::Zero();
    c(0, 1) = -k(2);
    c(0, 2) = k(1);
    c(1, 0) = k(2);
    c(1, 2) = -k(0);
    c(2, 0) = -k(1);
    c(2, 1) = k(0);
    return c;
}

void require_curved(const BranchId& b) {
    if (!b.is_curved()) throw Error("a curved branch is required, got " + to_string(b));
}

void check_resonance(double omega, const MediumParams& m) {
    if (std::abs(omega * omega - m.omega0 * m.omega0) < kResonanceGuard)
        throw Error("resonance: omega^2 = omega0^2 within guard");
}

// Orthonormal basis of the plane orthogonal to k.
std::pair<Eigen::Vector3d, Eigen::Vector3d> transverse_basis(const Eigen::Vector3d& k) {
    const Eigen::Vector3d z = k.normalized();
    Eigen::Vector3d a(1.0, 0.0, 0.0);
    if (std::abs(z.dot(a)) > 0.9) a = Eigen::Vector3d(0.0, 1.0, 0.0);
    Eigen::Vector3d e1 = (a - a.dot(z) * z).normalized();
    Eigen::Vector3d e2 = z.cross(e1);
    return {e1, e2};
}

}  // namespace

std::string to_string(NonlinearityKind k) {
    switch (k) {
        case NonlinearityKind::cubic: return "cubic";
        case NonlinearityKind::cubic_quintic: return "cubic_quintic";
        case NonlinearityKind::saturated: return "saturated";
    }
    return "cubic";
}

NonlinearityKind parse_nonlinearity(const std::string& s) {
    if (s == "cubic") return NonlinearityKind::cubic;
    if (s == "cubic_quintic" || s == "quintic") return NonlinearityKind::cubic_quintic;
    if (s == "saturated") return NonlinearityKind::saturated;
    throw Error("unknown nonlinearity kind: " + s);
}

void MediumParams::validate(bool allow_zero_gamma) const {
    if (!(gamma > 0.0) && !(allow_zero_gamma && gamma == 0.0)) throw Error("medium: gamma must be > 0");
    if (!(omega0 > 0.0)) throw Error("medium: omega0 must be > 0");
    if (!(omega1 >= 0.0)) throw Error("medium: omega1 must be >= 0");
    if (!(p > 0.0)) throw Error("medium: p must be > 0");
    if (!(r > 0.0)) throw Error("medium: r must be > 0");
    if (!(a_tilde >= 0.0)) throw Error("medium: a_tilde must be >= 0");
    if (ionization) {
        const auto& io = *ionization;
        if (io.c < 0 || io.c0 < 0 || io.c1 < 0 || io.c2 < 0 || io.alpha4 < 0 || io.alpha5 < 0)
            throw Error("medium: ionization constants must be nonnegative");
        if (io.K < 1) throw Error("medium: ionization order K must be >= 1");
    }
}

std::string to_string(const BranchId& b) {
    if (b.is_curved()) return std::string("(") + (b.outer > 0 ? "+" : "-") + "," + (b.inner > 0 ? "+" : "-") + ")";
    if (b.outer == 0) return "const(0)";
    return b.outer > 0 ? "const(+)" : "const(-)";
}

BranchId parse_branch(const std::string& s) {
    std::string t;
    for (char c : s)
        if (c != '(' && c != ')' && c != ',' && c != ' ') t.push_back(c);
    if (t == "++") return BranchId::curved(1, 1);
    if (t == "+-") return BranchId::curved(1, -1);
    if (t == "-+") return BranchId::curved(-1, 1);
    if (t == "--") return BranchId::curved(-1, -1);
    if (t == "0") return BranchId::constant(0);
    if (t == "+c") return BranchId::constant(1);
    if (t == "-c") return BranchId::constant(-1);
    throw Error("cannot parse branch '" + s + "' (expected ++, +-, -+, --)");
}

std::array<BranchId, 4> curved_branches() {
    return {BranchId::curved(1, 1), BranchId::curved(1, -1), BranchId::curved(-1, 1), BranchId::curved(-1, -1)};
}

std::array<BranchId, 3> constant_branches() {
    return {BranchId::constant(0), BranchId::constant(1), BranchId::constant(-1)};
}

double BranchValues::value(const BranchId& b) const {
    if (b.is_curved()) {
        const int idx = (b.outer > 0 ? 0 : 2) + (b.inner > 0 ? 0 : 1);
        return curved[idx];
    }
    return b.outer == 0 ? constant[0] : (b.outer > 0 ? constant[1] : constant[2]);
}

BranchValues omega_branches(double k, const MediumParams& m) {
    k = std::abs(k);
    const double w02 = m.omega0 * m.omega0;
    const double S = w02 + m.gamma + k * k;
    const double a = w02 + m.gamma - k * k;
    const double delta = a * a + 4.0 * m.gamma * k * k;
    const double wp2 = 0.5 * (S + std::sqrt(delta));
    // Product of the roots in omega^2 is omega0^2 k^2; avoids cancellation.
    const double wm2 = wp2 > 0.0 ? w02 * k * k / wp2 : 0.0;
    const double wp = std::sqrt(wp2), wm = std::sqrt(wm2);
    BranchValues v;
    v.curved = {wp, wm, -wp, -wm};
    const double c = std::sqrt(m.gamma + w02);
    v.constant = {0.0, c, -c};
    return v;
}

double branch_omega(const BranchId& b, double k, const MediumParams& m) { return omega_branches(k, m).value(b); }

double dispersion_quartic(double omega, double k, const MediumParams& m) {
    const double w2 = omega * omega;
    const double w02 = m.omega0 * m.omega0;
    return w2 * w2 - w2 * (w02 + m.gamma + k * k) + w02 * k * k;
}

Mat12 symbol_A(const Eigen::Vector3d& k) {
    Mat12 A = Mat12::Zero();
    const Eigen::Matrix3cd c = cross_matrix(k);
    A.block<3, 3>(0, 3) = c;
    A.block<3, 3>(3, 0) = -c;
    return A;
}

Mat12 coupling_E(const MediumParams& m) {
    Mat12 E = Mat12::Zero();
    const double sg = std::sqrt(m.gamma);
    const Eigen::Matrix3cd I = Eigen::Matrix3cd::Identity();
    E.block<3, 3>(3, 6) = sg * I;
    E.block<3, 3>(6, 3) = -sg * I;
    E.block<3, 3>(6, 9) = m.omega0 * I;
    E.block<3, 3>(9, 6) = -m.omega0 * I;
    return E;
}

Mat12 operator_L(double omega, const Eigen::Vector3d& k, const MediumParams& m) {
    const cplx minus_i(0.0, -1.0);
    return -omega * Mat12::Identity() + symbol_A(k) + minus_i * coupling_E(m);
}

Mat4 symbol_A1(double k) {
    Mat4 A = Mat4::Zero();
    A(0, 1) = k;
    A(1, 0) = k;
    return A;
}

Mat4 coupling_E4(const MediumParams& m) {
    Mat4 E = Mat4::Zero();
    const double sg = std::sqrt(m.gamma);
    E(1, 2) = sg;
    E(2, 1) = -sg;
    E(2, 3) = m.omega0;
    E(3, 2) = -m.omega0;
    return E;
}

Mat4 operator_L4(double omega, double k, const MediumParams& m) {
    const cplx minus_i(0.0, -1.0);
    return -omega * Mat4::Identity() + symbol_A1(k) + minus_i * coupling_E4(m);
}

Vec12 polarization_lift(const Eigen::Vector3d& e, double omega, const Eigen::Vector3d& kvec, const MediumParams& m) {
    if (omega == 0.0) throw Error("polarization_lift: omega = 0 is singular");
    check_resonance(omega, m);
    if (std::abs(e.dot(kvec)) > 1e-10 * std::max(1.0, e.norm() * kvec.norm()))
        throw Error("polarization_lift: e must be orthogonal to k");
    const double den = omega * omega - m.omega0 * m.omega0;
    const double sg = std::sqrt(m.gamma);
    Vec12 v;
    const Eigen::Vector3d b = kvec.cross(e) / omega;
    for (int i = 0; i < 3; ++i) {
        v(i) = b(i);
        v(3 + i) = e(i);
        v(6 + i) = cplx(0.0, omega * sg / den) * e(i);
        v(9 + i) = -m.omega0 * sg / den * e(i);
    }
    return v;
}

Vec4 polarization_lift_1d(double omega, double k, const MediumParams& m) {
    if (omega == 0.0) throw Error("polarization_lift: omega = 0 is singular");
    check_resonance(omega, m);
    const double den = omega * omega - m.omega0 * m.omega0;
    const double sg = std::sqrt(m.gamma);
    Vec4 v;
    v << k / omega, 1.0, cplx(0.0, omega * sg / den), -m.omega0 * sg / den;
    return v;
}

Mat12 projector(const BranchId& branch, const Eigen::Vector3d& kvec, const MediumParams& m) {
    require_curved(branch);
    const double k = kvec.norm();
    if (!(k > 0.0)) throw Error("projector: kvec must be nonzero");
    const double omega = branch_omega(branch, k, m);
    const auto [e1, e2] = transverse_basis(kvec);
    Mat12 P = Mat12::Zero();
    for (const auto& e : {e1, e2}) {
        const Vec12 v = polarization_lift(e, omega, kvec, m);
        P += v * v.adjoint() / v.squaredNorm();
    }
    return P;
}

Mat4 projector_1d(const BranchId& branch, double k, const MediumParams& m) {
    require_curved(branch);
    const double omega = branch_omega(branch, k, m);
    const Vec4 v = polarization_lift_1d(omega, k, m);
    return v * v.adjoint() / v.squaredNorm();
}

std::array<Mat12, 3> constant_projectors(const Eigen::Vector3d& kvec, const MediumParams& m) {
    Mat12 curved = Mat12::Zero();
    for (const auto& b : curved_branches()) curved += projector(b, kvec, m);
    const Mat12 complement = Mat12::Identity() - curved;
    Eigen::SelfAdjointEigenSolver<Mat12> pc(complement);
    // Range of the complement: the four eigenvectors with eigenvalue near 1.
    Eigen::Matrix<cplx, 12, 4> W;
    for (int j = 0; j < 4; ++j) W.col(j) = pc.eigenvectors().col(8 + j);
    const cplx minus_i(0.0, -1.0);
    const Mat12 H = symbol_A(kvec) + minus_i * coupling_E(m);
    const Eigen::Matrix4cd Hc = W.adjoint() * H * W;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> hs(Hc);
    const double c = std::sqrt(m.gamma + m.omega0 * m.omega0);
    const std::array<double, 3> targets{0.0, c, -c};
    std::array<Mat12, 3> out{Mat12::Zero(), Mat12::Zero(), Mat12::Zero()};
    for (int j = 0; j < 4; ++j) {
        const double lam = hs.eigenvalues()(j);
        int best = 0;
        for (int t = 1; t < 3; ++t)
            if (std::abs(lam - targets[t]) < std::abs(lam - targets[best])) best = t;
        const Vec12 v = W * hs.eigenvectors().col(j);
        out[best] += v * v.adjoint();
    }
    return out;
}

Derivatives group_velocity_and_gvd(const BranchId& branch, double k, const MediumParams& m) {
    require_curved(branch);
    const double w = branch_omega(branch, k, m);
    const double w02 = m.omega0 * m.omega0;
    const double S = w02 + m.gamma + k * k;
    const double Gw = 4.0 * w * w * w - 2.0 * w * S;
    const double Gk = -2.0 * k * w * w + 2.0 * w02 * k;
    if (std::abs(Gw) <= 1e-14 * std::max(1.0, std::abs(w * S)))
        throw Error("group_velocity_and_gvd: dG/domega vanishes (degenerate branch)");
    const double d1 = -Gk / Gw;
    const double Gww = 12.0 * w * w - 2.0 * S;
    const double Gwk = -4.0 * w * k;
    const double Gkk = -2.0 * w * w + 2.0 * w02;
    const double d2 = -(Gww * d1 * d1 + 2.0 * Gwk * d1 + Gkk) / Gw;
    return {w, d1, d2};
}

double omega_exact(const BranchId& branch, const WaveVec& kprime, int dims, const MediumParams& m) {
    const double k = dims == 1 ? std::abs(kprime[0]) : std::hypot(kprime[0], kprime[1]);
    return branch_omega(branch, k, m);
}

double omega_nls(double kprime, double k0, const BranchId& branch, const MediumParams& m) {
    return omega_nls(WaveVec{kprime, 0.0}, 1, k0, branch, m);
}

double omega_nls(const WaveVec& kprime, int dims, double k0, const BranchId& branch, const MediumParams& m) {
    if (!(k0 > 0.0)) throw Error("omega_nls: k0 must be > 0");
    const Derivatives d = group_velocity_and_gvd(branch, k0, m);
    if (dims == 1) {
        const double dz = kprime[0] - k0;
        return d.omega + d.d1 * dz + 0.5 * d.d2 * dz * dz;
    }
    const double dx = kprime[0], dz = kprime[1] - k0;
    return d.omega + d.d1 * dz + 0.5 * (d.d1 / k0 * dx * dx + d.d2 * dz * dz);
}

FitResult FitResult::zero(int dims) {
    FitResult f;
    f.dims = dims;
    f.b = Eigen::VectorXd::Zero(dims);
    f.B = Eigen::MatrixXd::Zero(dims, dims);
    f.C3.assign(dims == 1 ? 1 : 4, 0.0);
    return f;
}

double FitResult::c3(const WaveVec& d) const {
    if (dims == 1) return C3[0] * d[0] * d[0] * d[0];
    double s = 0.0;
    for (int a = 0; a < 4; ++a) s += C3[a] * std::pow(d[0], a) * std::pow(d[1], 3 - a);
    return s;
}

double FitResult::denominator(const WaveVec& d) const {
    double s = 1.0;
    for (int i = 0; i < dims; ++i) {
        s += b(i) * d[i];
        for (int j = 0; j < dims; ++j) s += d[i] * B(i, j) * d[j];
    }
    return s;
}

bool FitResult::is_zero() const {
    bool z = b.isZero(0.0) && B.isZero(0.0);
    for (double c : C3) z = z && c == 0.0;
    return z;
}

std::vector<double> tied_c3(const Eigen::MatrixXd& B, double omega_prime, int dims) {
    if (dims == 1) return {-omega_prime * B(0, 0)};
    // (d.B d) dz = Bxx dx^2 dz + 2 Bxz dx dz^2 + Bzz dz^3
    return {-omega_prime * B(1, 1), -omega_prime * 2.0 * B(0, 1), -omega_prime * B(0, 0), 0.0};
}

double omega_imp(double kprime, double k0, const BranchId& branch, const FitResult& fit, const MediumParams& m) {
    return omega_imp(WaveVec{kprime, 0.0}, 1, k0, branch, fit, m);
}

double omega_imp(const WaveVec& kprime, int dims, double k0, const BranchId& branch, const FitResult& fit,
                 const MediumParams& m) {
    if (fit.dims != dims) throw Error("omega_imp: fit dimension mismatch");
    const Derivatives d = group_velocity_and_gvd(branch, k0, m);
    WaveVec delta{0.0, 0.0};
    if (dims == 1) {
        delta[0] = kprime[0] - k0;
    } else {
        delta[0] = kprime[0];
        delta[1] = kprime[1] - k0;
    }
    const int zd = dims - 1;
    const double cg_dot = d.d1 * delta[zd];
    double quad;
    if (dims == 1) {
        quad = d.d2 * delta[0] * delta[0];
    } else {
        quad = d.d1 / k0 * delta[0] * delta[0] + d.d2 * delta[1] * delta[1];
    }
    double b_dot = 0.0;
    for (int i = 0; i < dims; ++i) b_dot += fit.b(i) * delta[i];
    const double num = cg_dot + 0.5 * quad + cg_dot * b_dot - fit.c3(delta);
    const double den = fit.denominator(delta);
    if (!(den > 0.0)) throw Error("omega_imp: denominator <= 0 (constraint violated on window)");
    return d.omega + num / den;
}

NlsCoefficients nls_coefficients(double k, const BranchId& branch, const MediumParams& m, double epsilon) {
    require_curved(branch);
    if (!(k > 0.0)) throw Error("nls_coefficients: k must be > 0");
    const Derivatives d = group_velocity_and_gvd(branch, k, m);
    const double w = d.omega;
    check_resonance(w, m);
    const double w2 = w * w, w02 = m.omega0 * m.omega0;
    const double den = w2 - w02;
    const double sg = std::sqrt(m.gamma);
    NlsCoefficients c;
    c.omega = w;
    c.c_g = d.d1;
    c.omega_pp = d.d2;
    c.diffraction = d.d1 / (2.0 * k);
    c.gvd = 0.5 * d.d2;
    c.alpha1 = std::abs(d.d2) < 1e-12 ? 0 : (d.d2 > 0 ? 1 : -1);
    c.n_sq = k * k / w2 + 1.0 + m.gamma * (w2 + w02) / (den * den);
    c.damping = std::pow(epsilon, m.p) * m.omega1 * m.gamma * w2 / (den * den * c.n_sq);
    c.cubic_gain = m.gamma * m.gamma * m.gamma * w / (c.n_sq * den * den * den * den);
    c.alpha3 = -den / (sg * w);
    c.beta = -m.omega0 * sg / den;
    c.q_ratio = w * sg / den;

    // Analytic derivative of the rank-one reduced projector v v*/|v|^2.
    const Vec4 v = polarization_lift_1d(w, k, m);
    Vec4 dv;
    dv << (w - k * d.d1) / w2, 0.0, cplx(0.0, -sg * d.d1 * (w2 + w02) / (den * den)),
        m.omega0 * sg * 2.0 * w * d.d1 / (den * den);
    const double n = v.squaredNorm();
    const double dn = 2.0 * (v.adjoint() * dv)(0, 0).real();
    Vec4 F = Vec4::Zero();
    F(2) = 1.0;
    const cplx vF = (v.adjoint() * F)(0, 0);
    const cplx dvF = (dv.adjoint() * F)(0, 0);
    const Vec4 dpF = (dv * vF + v * dvF) / n - v * vF * dn / (n * n);
    const cplx num = (v.adjoint() * dpF)(0, 0);
    c.alpha3_projector = -(num / std::conj(v(2))).real();
    return c;
}

bool is_nonresonant(double k, const BranchId& branch, const MediumParams& m, int pmax, double tol) {
    const double w = branch_omega(branch, k, m);
    const double c = std::sqrt(m.gamma + m.omega0 * m.omega0);
    for (int p = 0; p <= pmax; ++p) {
        const double n = 2.0 * p + 3.0;
        const double W = n * w, K = n * k;
        const double w02 = m.omega0 * m.omega0;
        const double scale = W * W * W * W + W * W * (w02 + m.gamma + K * K) + w02 * K * K;
        const double res = std::abs(dispersion_quartic(W, K, m)) / std::max(1.0, scale);
        if (res < tol) return false;
        if (std::abs(W) < tol || std::abs(std::abs(W) - c) < tol) return false;
    }
    return true;
}

}  // namespace filament
