#include "filament/maxwell.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss.hpp>

#include "filament/nonlinearity.hpp"

namespace filament {

void check_carrier_on_lattice(double k, double epsilon, const GridSpec& g) {
    const int zd = g.z_dim();
    const double f = g.fundamental(zd);
    const double m = k / (epsilon * f);
    const double r = std::round(m);
    if (std::abs(m - r) > 1e-9 * std::max(1.0, std::abs(m)) || r < 1.0) {
        const double lo = std::floor(m), hi = std::ceil(m);
        std::ostringstream os;
        os << "carrier k/eps = " << k / epsilon << " is not a multiple of the grid fundamental " << f
           << "; nearest representable eps values: ";
        if (hi >= 1.0) os << k / (f * hi);
        if (lo >= 1.0) os << ", " << k / (f * lo);
        throw Error(os.str());
    }
}

SpectralField lift_envelope(const std::vector<cplx>& envelope, double k, const BranchId& branch,
                            const MediumParams& m, double epsilon, const GridSpec& g) {
    if (g.dims != 1) throw Error("lift_envelope: 1D grid required");
    if (envelope.size() != g.size()) throw Error("lift_envelope: envelope size mismatch");
    std::vector<cplx> hat = envelope;
    fft_forward(g, hat.data());
    SpectralField out(g, 4);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double kp = k + epsilon * g.wavenumbers[0][i];
        const double w = branch_omega(branch, kp, m);
        if (w == 0.0) continue;
        const Vec4 v = polarization_lift_1d(w, kp, m);
        for (int c = 0; c < 4; ++c) out.at(c, i) = v(c) * hat[i];
    }
    to_physical_inplace(out);
    return out;
}

SpectralField modulate(const SpectralField& env, double k, double omega, double t, double epsilon) {
    SpectralField U(env.grid, env.components);
    for (std::size_t i = 0; i < env.points(); ++i) {
        const double z = env.grid.position(i)[0];
        const double ph = (k * z - omega * t) / epsilon;
        const cplx e(std::cos(ph), std::sin(ph));
        for (int c = 0; c < env.components; ++c) U.at(c, i) = 2.0 * (env.at(c, i) * e).real();
    }
    return U;
}

SpectralField demodulate(const SpectralField& u, double k, double omega, double t, double epsilon) {
    SpectralField d(u.grid, u.components);
    for (std::size_t i = 0; i < u.points(); ++i) {
        const double z = u.grid.position(i)[0];
        const double ph = -(k * z - omega * t) / epsilon;
        const cplx e(std::cos(ph), std::sin(ph));
        for (int c = 0; c < u.components; ++c) d.at(c, i) = u.at(c, i) * e;
    }
    const double cut = k / (2.0 * epsilon);
    SymbolTable lp = make_symbol_table(u.grid, [&](const WaveVec& xi) { return std::abs(xi[0]) < cut ? 1.0 : 0.0; });
    apply_table_inplace(d, lp);
    return d;
}

MaxwellState init_wave_packet(const WavePacketSpec& spec, const MediumParams& m, double epsilon, const GridSpec& g) {
    m.validate();
    if (g.dims != 1) throw Error("init_wave_packet: the oracle is 1D");
    if (!(epsilon > 0.0 && epsilon <= 1.0)) throw Error("init_wave_packet: epsilon must lie in (0, 1]");
    if (!spec.branch.is_curved()) throw Error("init_wave_packet: curved branch required");
    check_carrier_on_lattice(spec.carrier_k, epsilon, g);
    SpectralField env = lift_envelope(spec.envelope, spec.carrier_k, spec.branch, m, epsilon, g);
    if (spec.polarization_defect) {
        const auto& r = *spec.polarization_defect;
        if (r.components != 4 || !r.grid.same_shape(g)) throw Error("init_wave_packet: defect must be a 4-component field");
        for (std::size_t j = 0; j < env.data.size(); ++j) env.data[j] += epsilon * r.data[j];
    }
    MaxwellState s;
    s.u = modulate(env, spec.carrier_k, 0.0, 0.0, epsilon);
    s.epsilon = epsilon;
    s.time = 0.0;
    if (m.ionization) s.rho = std::vector<double>(g.size(), 0.0);
    return s;
}

Eigen::VectorXd nonlinearity_eval(const Eigen::VectorXd& p_sharp, const MediumParams& m, double epsilon) {
    return medium_nonlinearity(p_sharp, m, epsilon);
}

cplx hilbert_symbol(double xi) { return cplx(0.0, std::sqrt(2.0) * xi / std::sqrt(1.0 + xi * xi)); }

Mat4 maxwell_linear_propagator(double xi, double dt, const MediumParams& m, double epsilon) {
    // -dt (i xi A1 + E4/eps) = -i (dt/eps) H with H = A1(eps xi) + E4/i Hermitian.
    const cplx minus_i(0.0, -1.0);
    const Mat4 H = symbol_A1(epsilon * xi) + minus_i * coupling_E4(m);
    Eigen::SelfAdjointEigenSolver<Mat4> es(H);
    Eigen::Vector4cd ph;
    for (int j = 0; j < 4; ++j) {
        const double a = -dt * es.eigenvalues()(j) / epsilon;
        ph(j) = cplx(std::cos(a), std::sin(a));
    }
    return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

MaxwellStepper::MaxwellStepper(const GridSpec& g, const MediumParams& m, double epsilon, double dt, MaxwellOptions opt)
    : grid_(g), medium_(m), eps_(epsilon), dt_(dt), opt_(opt) {
    m.validate();
    if (g.dims != 1) throw Error("MaxwellStepper: 1D grid required");
    if (!(dt > 0.0)) throw Error("MaxwellStepper: dt must be > 0");
    const int nyq = g.n[0] / 2;
    linear_ = make_matrix_table(g, 4, [&](const WaveVec& xi) -> Eigen::MatrixXcd {
        if (!opt_.linear) return Eigen::MatrixXcd::Identity(4, 4);
        return maxwell_linear_propagator(xi[0], dt_, medium_, eps_);
    });
    // The unpaired Nyquist mode is dropped so real data stays real.
    for (std::size_t i = 0; i < g.size(); ++i)
        if (std::abs(g.mode_label(i, 0)) == nyq && opt_.linear)
            for (int j = 0; j < 16; ++j) linear_.values[i * 16 + j] = 0.0;
    hilbert_ = make_symbol_table(g, [&](const WaveVec& xi) -> cplx {
        return hilbert_symbol(eps_ * xi[0] / opt_.carrier_k);
    });
    for (std::size_t i = 0; i < g.size(); ++i)
        if (std::abs(g.mode_label(i, 0)) == nyq) hilbert_.values[i] = 0.0;
}

void MaxwellStepper::nonlinear_half(MaxwellState& s, double h) const {
    if (!opt_.nonlinear) return;
    const double a = std::pow(eps_, 1.0 + medium_.p) * medium_.omega1;
    const double decay = std::exp(-a * h);
    // (1 - e^{-a h})/a, continuous at a = 0
    const double gain = a * h > 1e-12 ? -std::expm1(-a * h) / a : h * (1.0 - 0.5 * a * h);
    cplx* Q = s.u.comp(2);
    const cplx* P = s.u.comp(3);
    const double pre = medium_.gamma / std::pow(medium_.omega0, 3);
    const double str = medium_.a_tilde * medium_.gamma / (medium_.omega0 * medium_.omega0) * std::pow(eps_, medium_.r);
    const auto kind = medium_.nonlinearity;
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(grid_.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const double p = P[i].real();
        const double x = str * p * p;
        double f = 1.0;
        if (kind == NonlinearityKind::cubic_quintic) {
            f = 1.0 - x;
        } else if (kind == NonlinearityKind::saturated) {
            const double d = 1.0 + 2.0 * x / 3.0;
            f = (1.0 + x / 3.0) / (d * d);
        }
        const double N = pre * f * p * p * p;
        Q[i] = Q[i] * decay + eps_ * N * gain;
    }
    if (s.rho && medium_.ionization) ionization_half(s, h);
}

void MaxwellStepper::ionization_half(MaxwellState& s, double h) const {
    const auto& io = *medium_.ionization;
    const std::size_t n = grid_.size();
    std::vector<double>& rho = *s.rho;
    cplx* E = s.u.comp(1);
    // RK4 on (E, rho); the Hilbert term couples nodes through one FFT pair per stage.
    auto rhs = [&](const std::vector<double>& e, const std::vector<double>& r, std::vector<double>& de,
                   std::vector<double>& dr) {
        std::vector<cplx> hr(n);
        if (opt_.hilbert) {
            for (std::size_t i = 0; i < n; ++i) hr[i] = r[i] * e[i];
            fft_forward(grid_, hr.data());
            for (std::size_t i = 0; i < n; ++i) hr[i] *= hilbert_.values[i];
            fft_inverse(grid_, hr.data());
        }
        for (std::size_t i = 0; i < n; ++i) {
            const double e2 = e[i] * e[i];
            const double eK1 = std::pow(e2, io.K - 1);
            de[i] = -eps_ * hr[i].real() - eps_ * io.c0 * (io.c1 * eK1 + io.c2 * r[i]) * e[i];
            dr[i] = eps_ * io.c1 * eK1 * e2 + eps_ * io.c2 * r[i] * e2;
        }
    };
    std::vector<double> e0(n), r0 = rho;
    for (std::size_t i = 0; i < n; ++i) e0[i] = E[i].real();
    std::vector<double> k1e(n), k1r(n), k2e(n), k2r(n), k3e(n), k3r(n), k4e(n), k4r(n), te(n), tr(n);
    rhs(e0, r0, k1e, k1r);
    for (std::size_t i = 0; i < n; ++i) te[i] = e0[i] + 0.5 * h * k1e[i], tr[i] = r0[i] + 0.5 * h * k1r[i];
    rhs(te, tr, k2e, k2r);
    for (std::size_t i = 0; i < n; ++i) te[i] = e0[i] + 0.5 * h * k2e[i], tr[i] = r0[i] + 0.5 * h * k2r[i];
    rhs(te, tr, k3e, k3r);
    for (std::size_t i = 0; i < n; ++i) te[i] = e0[i] + h * k3e[i], tr[i] = r0[i] + h * k3r[i];
    rhs(te, tr, k4e, k4r);
    for (std::size_t i = 0; i < n; ++i) {
        E[i] = e0[i] + h / 6.0 * (k1e[i] + 2.0 * k2e[i] + 2.0 * k3e[i] + k4e[i]);
        rho[i] = r0[i] + h / 6.0 * (k1r[i] + 2.0 * k2r[i] + 2.0 * k3r[i] + k4r[i]);
    }
}

void MaxwellStepper::step(MaxwellState& s) const {
    if (!s.u.grid.same_shape(grid_) || s.u.components != 4) throw Error("MaxwellStepper: state/grid mismatch");
    nonlinear_half(s, 0.5 * dt_);
    apply_table_inplace(s.u, linear_);
    nonlinear_half(s, 0.5 * dt_);
    s.time += dt_;
    for (const auto& v : s.u.data)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
            std::ostringstream os;
            os << "maxwell_step: non-finite state at t = " << s.time;
            throw Error(os.str());
        }
}

MaxwellState maxwell_step(const MaxwellState& s, double dt, const MediumParams& m) {
    MaxwellOptions opt;
    MaxwellState out = s;
    MediumParams mm = m;
    mm.ionization.reset();
    MaxwellStepper(s.u.grid, mm, s.epsilon, dt, opt).step(out);
    return out;
}

MaxwellState maxwell_ionization_step(const MaxwellState& s, double dt, const MediumParams& m, double carrier_k) {
    if (!s.rho) throw Error("maxwell_ionization_step: state has no density");
    if (!m.ionization) throw Error("maxwell_ionization_step: medium has no ionization constants");
    MaxwellOptions opt;
    opt.carrier_k = carrier_k;
    MaxwellState out = s;
    MaxwellStepper(s.u.grid, m, s.epsilon, dt, opt).step(out);
    return out;
}

double maxwell_l2(const MaxwellState& s) { return l2_norm(s.u); }

double maxwell_energy(const MaxwellState& s, const MediumParams& m) {
    const double pre = m.gamma / std::pow(m.omega0, 3);
    const double str = m.a_tilde * m.gamma / (m.omega0 * m.omega0) * std::pow(s.epsilon, m.r);
    double pot = 0.0;
    for (std::size_t i = 0; i < s.u.points(); ++i) {
        const double p = s.u.at(3, i).real();
        const double p2 = p * p;
        switch (m.nonlinearity) {
            case NonlinearityKind::cubic: pot += pre * p2 * p2 / 4.0; break;
            case NonlinearityKind::cubic_quintic: pot += pre * (p2 * p2 / 4.0 - str * p2 * p2 * p2 / 6.0); break;
            case NonlinearityKind::saturated:
                pot += boost::math::quadrature::gauss<double, 20>::integrate(
                    [&](double q) {
                        const double x = str * q * q;
                        const double d = 1.0 + 2.0 * x / 3.0;
                        return pre * (1.0 + x / 3.0) / (d * d) * q * q * q;
                    },
                    0.0, std::abs(p));
                break;
        }
    }
    const double l2 = l2_norm(s.u);
    return 0.5 * l2 * l2 - s.epsilon * s.epsilon / m.omega0 * pot * s.u.grid.cell_volume();
}

double max_imag_residue(const MaxwellState& s) {
    double m = 0.0;
    for (const auto& v : s.u.data) m = std::max(m, std::abs(v.imag()));
    return m;
}

}  // namespace filament
