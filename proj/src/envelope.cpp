#include "filament/envelope.hpp"

#include <cmath>
#include <sstream>

#include "filament/kernels.hpp"
#include "filament/maxwell.hpp"

namespace filament {

namespace {

const cplx I_(0.0, 1.0);

bool all_zero(const std::vector<double>& v) {
    for (double x : v)
        if (x != 0.0) return false;
    return true;
}

double dot(const std::vector<double>& a, const WaveVec& xi, int dims) {
    double s = 0.0;
    for (int d = 0; d < dims && d < static_cast<int>(a.size()); ++d) s += a[d] * xi[d];
    return s;
}

double dispersion_form(const WaveVec& xi, int dims, int alpha1) {
    const int zd = dims - 1;
    const double perp = dims == 2 ? xi[0] * xi[0] : 0.0;
    return perp + alpha1 * xi[zd] * xi[zd];
}

// Physical wavevector k0 e_z + eps xi in grid order.
WaveVec carrier_shift(const WaveVec& xi, int dims, double k0, double eps) {
    if (dims == 1) return {k0 + eps * xi[0], 0.0};
    return {eps * xi[0], k0 + eps * xi[1]};
}

double wave_norm(const WaveVec& k, int dims) { return dims == 1 ? std::abs(k[0]) : std::hypot(k[0], k[1]); }

}  // namespace

std::string to_string(ModelKind m) {
    switch (m) {
        case ModelKind::envelope_exact: return "envelope_exact";
        case ModelKind::full_dispersion: return "full_dispersion";
        case ModelKind::nls: return "nls";
        case ModelKind::nls_improved: return "nls_improved";
        case ModelKind::nls_polarized: return "nls_polarized";
        case ModelKind::family_scalar: return "family_scalar";
        case ModelKind::family_vect: return "family_vect";
        case ModelKind::ionized_fixed_frame: return "ionized_fixed_frame";
        case ModelKind::ionized_moving_frame: return "ionized_moving_frame";
        case ModelKind::general_ionized: return "general_ionized";
    }
    return "?";
}

ModelKind parse_model(const std::string& s) {
    for (ModelKind m : {ModelKind::envelope_exact, ModelKind::full_dispersion, ModelKind::nls, ModelKind::nls_improved,
                        ModelKind::nls_polarized, ModelKind::family_scalar, ModelKind::family_vect,
                        ModelKind::ionized_fixed_frame, ModelKind::ionized_moving_frame, ModelKind::general_ionized})
        if (to_string(m) == s) return m;
    throw Error("unknown model '" + s + "'");
}

bool is_dimensional(ModelKind m) {
    return m == ModelKind::envelope_exact || m == ModelKind::full_dispersion || m == ModelKind::nls ||
           m == ModelKind::nls_improved || m == ModelKind::nls_polarized;
}

bool uses_slow_time(ModelKind m) {
    return m == ModelKind::family_scalar || m == ModelKind::family_vect || m == ModelKind::ionized_moving_frame;
}

int model_components(ModelKind m) {
    if (m == ModelKind::envelope_exact) return 4;
    if (m == ModelKind::family_vect) return 2;
    return 1;
}

static bool is_ionized(ModelKind m) {
    return m == ModelKind::ionized_fixed_frame || m == ModelKind::ionized_moving_frame ||
           m == ModelKind::general_ionized;
}

void ModelConfig::validate(int dims) const {
    if (dims != 1 && dims != 2) throw Error("model: dims must be 1 or 2");
    if (!(epsilon > 0.0)) throw Error("model: epsilon must be > 0");
    if (alpha1 < -1 || alpha1 > 1) throw Error("model: alpha1 must be -1, 0 or 1");
    if (!(alpha2 >= 0.0)) throw Error("model: alpha2 must be >= 0");
    if (!alpha3.empty() && static_cast<int>(alpha3.size()) != dims)
        throw Error("model: alpha3 must have one entry per grid dimension");
    for (double a : alpha3)
        if (!std::isfinite(a)) throw Error("model: alpha3 must be finite");
    if (!(r > 0.0)) throw Error("model: r must be > 0");
    if (fit) {
        if (fit->dims != dims) throw Error("model: fit dimension does not match the grid");
        const HypCheck h = check_hyp(fit->b, fit->B);
        if (!h.ok) throw Error("model: fit violates the admissibility constraints: " + h.diagnostic);
    }
    if (model == ModelKind::envelope_exact && dims != 1) throw Error("model: envelope_exact is one-dimensional");
    if (model == ModelKind::family_vect && f_kind != FKind::zero)
        throw Error("model: family_vect supports the cubic nonlinearity only");
    if (is_ionized(model)) {
        if (!ionization) throw Error("model: ionization parameters required for " + to_string(model));
        const auto& io = *ionization;
        if (!(io.c >= 0.0) || !(io.alpha4 >= 0.0) || !(io.alpha5 >= 0.0))
            throw Error("model: ionization requires c, alpha4, alpha5 >= 0");
        if (io.K < 1) throw Error("model: ionization requires K >= 1");
        if (model == ModelKind::ionized_moving_frame && !(io.c_g > 0.0))
            throw Error("model: moving-frame density requires c_g > 0");
    }
}

EnvelopeState make_envelope_state(const GridSpec& g, const ModelConfig& cfg, const std::vector<cplx>& scalar_profile) {
    cfg.validate(g.dims);
    if (scalar_profile.size() != g.size()) throw Error("make_envelope_state: profile size mismatch");
    EnvelopeState s{SpectralField(g, model_components(cfg.model)), std::nullopt, 0.0};
    std::copy(scalar_profile.begin(), scalar_profile.end(), s.u.comp(cfg.model == ModelKind::envelope_exact ? 1 : 0));
    if (cfg.model == ModelKind::ionized_fixed_frame || cfg.model == ModelKind::general_ionized)
        s.density = std::vector<double>(g.size(), 0.0);
    if (cfg.model == ModelKind::ionized_moving_frame) s.density = rho_tilde_solve(s.u, cfg);
    return s;
}

double p2_symbol(const WaveVec& xi, const FitResult& fit, double epsilon) {
    return fit.denominator({epsilon * xi[0], epsilon * xi[1]});
}

IonizationRhs ionization_rhs(const std::vector<cplx>& u, const std::vector<double>& rho, const ModelConfig& cfg) {
    if (!cfg.ionization) throw Error("ionization_rhs: ionization parameters required");
    if (u.size() != rho.size()) throw Error("ionization_rhs: size mismatch");
    const auto& io = *cfg.ionization;
    const double e = cfg.epsilon;
    IonizationRhs out{std::vector<cplx>(u.size()), std::vector<double>(u.size())};
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double I = std::norm(u[i]);
        const double IK1 = std::pow(I, io.K - 1);
        out.du[i] = I_ * e * (I - rho[i]) * u[i] - e * io.c * (io.alpha4 * IK1 + io.alpha5 * rho[i]) * u[i];
        out.drho[i] = e * (io.alpha4 * IK1 * I + io.alpha5 * rho[i] * I);
    }
    return out;
}

std::vector<double> rho_tilde_solve(const SpectralField& v, const ModelConfig& cfg) {
    if (!cfg.ionization) throw Error("rho_tilde_solve: ionization parameters required");
    const auto& io = *cfg.ionization;
    if (!(io.c_g > 0.0)) throw Error("rho_tilde_solve: c_g must be > 0");
    const GridSpec& g = v.grid;
    const int zd = g.z_dim();
    const int nz = g.n[zd];
    const int nt = g.dims == 2 ? g.n[0] : 1;
    std::vector<double> rho(g.size(), 0.0);

    double peak = 0.0, edge = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        double a2 = 0.0;
        for (int c = 0; c < v.components; ++c) a2 += std::norm(v.at(c, i));
        peak = std::max(peak, std::sqrt(a2));
        if (static_cast<int>(i % nz) == nz - 1) edge = std::max(edge, std::sqrt(a2));
    }
    if (peak == 0.0) return rho;
    if (edge > 1e-8 * peak) {
        std::ostringstream os;
        os << "rho_tilde_solve: |v| at the right edge is " << edge / peak
           << " of its peak; enlarge the box so the pulse decays below 1e-8 there";
        throw Error(os.str());
    }

    const GridSpec line = make_grid(1, {nz}, {g.length[zd]});
    const double L = g.length[zd];
    const double z0 = g.coord(zd, 0);
    const double s_pre = cfg.epsilon * io.alpha4 / io.c_g;
    const double a_pre = cfg.epsilon * io.alpha5 / io.c_g;
    // Zero-mean periodic antiderivative; returns the mean separately.
    auto antiderivative = [&](std::vector<cplx>& f) {
        fft_forward(line, f.data());
        const double mean = f[0].real() / nz;
        for (int j = 0; j < nz; ++j) {
            const double k = line.wavenumbers[0][j];
            const bool nyq = nz % 2 == 0 && j == nz / 2;
            f[j] = (j == 0 || nyq) ? cplx(0.0) : f[j] / (I_ * k);
        }
        fft_inverse(line, f.data());
        return mean;
    };

    for (int t = 0; t < nt; ++t) {
        std::vector<double> I(nz);
        for (int j = 0; j < nz; ++j) {
            const std::size_t idx = static_cast<std::size_t>(t) * nz + j;
            double a2 = 0.0;
            for (int c = 0; c < v.components; ++c) a2 += std::norm(v.at(c, idx));
            I[j] = a2;
        }
        std::vector<double> phi(nz, 0.0);
        if (a_pre != 0.0) {
            std::vector<cplx> a(nz);
            for (int j = 0; j < nz; ++j) a[j] = a_pre * I[j];
            const double abar = antiderivative(a);
            for (int j = 0; j < nz; ++j) phi[j] = abar * (line.coord(0, j) - z0) + a[j].real();
            double mx = phi[0];
            for (double p : phi) mx = std::max(mx, p);
            for (double& p : phi) p -= mx;
        }
        std::vector<cplx> gf(nz);
        for (int j = 0; j < nz; ++j) gf[j] = s_pre * std::pow(I[j], io.K) * std::exp(phi[j]);
        const double gbar = antiderivative(gf);
        const double G0 = gf[0].real();
        for (int j = 0; j < nz; ++j) {
            const double z = line.coord(0, j);
            // int_z^{z0+L} g = gbar (z0 + L - z) + G(z0) - G(z)
            const double integral = gbar * (z0 + L - z) + G0 - gf[j].real();
            const double val = std::exp(-phi[j]) * integral;
            rho[static_cast<std::size_t>(t) * nz + j] = val > 0.0 ? val : 0.0;
        }
    }
    return rho;
}

SpectralField to_moving_frame(const SpectralField& u, double c_g, double t) {
    const int zd = u.grid.z_dim();
    // v(z') = u(z' + c_g t)
    return apply_scalar_multiplier(u, [&](const WaveVec& xi) {
        const double a = xi[zd] * c_g * t;
        return cplx(std::cos(a), std::sin(a));
    });
}

SpectralField from_moving_frame(const SpectralField& v, double c_g, double t) { return to_moving_frame(v, c_g, -t); }

EnvelopeSolver::EnvelopeSolver(const GridSpec& g, const ModelConfig& cfg, const MediumParams& m, double k0,
                               const BranchId& branch, double dt)
    : grid_(g), cfg_(cfg), medium_(m), k0_(k0), branch_(branch), dt_(dt) {
    build();
}

EnvelopeSolver::EnvelopeSolver(const GridSpec& g, const ModelConfig& cfg, double dt)
    : grid_(g), cfg_(cfg), medium_(), k0_(0.0), branch_(BranchId::curved(1, 1)), dt_(dt) {
    if (is_dimensional(cfg.model)) throw Error("EnvelopeSolver: " + to_string(cfg.model) + " needs medium and carrier");
    build();
}

void EnvelopeSolver::build() {
    cfg_.validate(grid_.dims);
    if (!(dt_ > 0.0)) throw Error("EnvelopeSolver: dt must be > 0");
    const int dims = grid_.dims;
    const int zd = dims - 1;
    const double eps = cfg_.epsilon;
    const ModelKind mk = cfg_.model;
    const FitResult fit = cfg_.fit ? *cfg_.fit : FitResult::zero(dims);
    alpha3_ = cfg_.alpha3.empty() ? std::vector<double>(dims, 0.0) : cfg_.alpha3;
    const SymbolTable mask = cfg_.dealias ? dealias_mask(grid_) : SymbolTable{std::vector<cplx>(grid_.size(), 1.0)};

    if (is_dimensional(mk)) {
        medium_.validate();
        if (!(k0_ > 0.0)) throw Error("EnvelopeSolver: carrier k0 must be > 0");
        if (!branch_.is_curved()) throw Error("EnvelopeSolver: curved branch required");
        coef_ = nls_coefficients(k0_, branch_, medium_, eps);
        omega0_ = coef_.omega;
        rate_pre_ = -coef_.q_ratio * coef_.beta / coef_.n_sq;
        if (mk == ModelKind::nls_polarized && cfg_.alpha3.empty()) {
            alpha3_.assign(dims, 0.0);
            alpha3_[zd] = coef_.alpha3_projector;
        }
    } else if (cfg_.ionization) {
        coef_.c_g = cfg_.ionization->c_g;
    }

    const std::size_t n = grid_.size();
    lambda_.assign(n, 0.0);
    p2_.assign(n, 1.0);
    std::vector<double> damp(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const WaveVec xi = grid_.xi(i);
        const WaveVec kp = carrier_shift(xi, dims, k0_, eps);
        const WaveVec del{eps * xi[0], eps * xi[1]};
        p2_[i] = fit.denominator(del);
        if (!(p2_[i] > 0.0)) throw Error("EnvelopeSolver: P2 symbol is not positive on the grid");
        switch (mk) {
            case ModelKind::envelope_exact: break;
            case ModelKind::full_dispersion: {
                const double w = omega_exact(branch_, kp, dims, medium_);
                lambda_[i] = (w - omega0_) / eps;
                const Vec4 v = polarization_lift_1d(w, wave_norm(kp, dims), medium_);
                const double den = w * w - medium_.omega0 * medium_.omega0;
                damp[i] = std::pow(eps, 1.0 + medium_.p) * medium_.omega1 * medium_.gamma * w * w /
                          (den * den * v.squaredNorm());
                p2_[i] = 1.0;
                break;
            }
            case ModelKind::nls:
                lambda_[i] = (omega_nls(kp, dims, k0_, branch_, medium_) - omega0_) / eps;
                damp[i] = eps * coef_.damping;
                p2_[i] = 1.0;
                break;
            case ModelKind::nls_improved:
            case ModelKind::nls_polarized:
                lambda_[i] = (omega_imp(kp, dims, k0_, branch_, fit, medium_) - omega0_) / eps;
                damp[i] = eps * coef_.damping / p2_[i];
                break;
            case ModelKind::family_scalar:
            case ModelKind::family_vect:
                lambda_[i] = dispersion_form(xi, dims, cfg_.alpha1) / p2_[i];
                damp[i] = cfg_.alpha2 / p2_[i];
                break;
            case ModelKind::ionized_fixed_frame:
                p2_[i] = 1.0;
                lambda_[i] = coef_.c_g * xi[zd] + eps * dispersion_form(xi, dims, cfg_.alpha1);
                break;
            case ModelKind::ionized_moving_frame:
                p2_[i] = 1.0;
                lambda_[i] = dispersion_form(xi, dims, cfg_.alpha1);
                break;
            case ModelKind::general_ionized:
                lambda_[i] = (coef_.c_g * xi[zd] + eps * dispersion_form(xi, dims, cfg_.alpha1)) / p2_[i];
                damp[i] = eps * cfg_.alpha2 / p2_[i];
                break;
        }
    }

    if (mk == ModelKind::envelope_exact) {
        const cplx carrier = std::exp(I_ * omega0_ * dt_ / eps);
        lin4_ = make_matrix_table(grid_, 4, [&](const WaveVec& xi) -> Eigen::MatrixXcd {
            return maxwell_linear_propagator((k0_ + eps * xi[0]) / eps, dt_, medium_, eps) * carrier;
        });
        for (std::size_t i = 0; i < n; ++i)
            for (int j = 0; j < 16; ++j) lin4_.values[i * 16 + j] *= mask.values[i];
        local_nl_ = true;
        return;
    }

    lin_.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) lin_.values[i] = std::exp(-dt_ * (I_ * lambda_[i] + damp[i])) * mask.values[i];

    const bool p2_one = fit.is_zero();
    const bool a3_zero = all_zero(alpha3_);
    switch (mk) {
        case ModelKind::nls: local_nl_ = true; break;
        case ModelKind::nls_improved: local_nl_ = p2_one; break;
        case ModelKind::nls_polarized: local_nl_ = p2_one && (!cfg_.polarization_terms || a3_zero); break;
        case ModelKind::family_scalar:
        case ModelKind::family_vect:
        case ModelKind::general_ionized: local_nl_ = p2_one && a3_zero; break;
        case ModelKind::ionized_fixed_frame:
        case ModelKind::ionized_moving_frame: local_nl_ = true; break;
        default: local_nl_ = false;
    }

    nl_mult_.values.resize(n);
    if (mk == ModelKind::full_dispersion) beta_k_.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const WaveVec xi = grid_.xi(i);
        cplx mult;
        switch (mk) {
            case ModelKind::full_dispersion: {
                const WaveVec kp = carrier_shift(xi, dims, k0_, eps);
                const double w = omega_exact(branch_, kp, dims, medium_);
                const Vec4 v = polarization_lift_1d(w, wave_norm(kp, dims), medium_);
                // E-row, Q-column entry of the rank-one projector.
                mult = eps * v(1) * std::conj(v(2)) / v.squaredNorm();
                beta_k_.values[i] = v(3);
                break;
            }
            case ModelKind::nls_improved: mult = I_ / p2_[i]; break;
            case ModelKind::nls_polarized: {
                double first = 0.0;
                if (cfg_.polarization_terms) {
                    first = -eps * dot(alpha3_, xi, dims);
                    for (int d = 0; d < dims; ++d) first += eps * fit.b(d) * xi[d];
                }
                mult = I_ * (1.0 + first) / p2_[i];
                break;
            }
            case ModelKind::family_scalar:
            case ModelKind::family_vect: mult = I_ * (1.0 - eps * dot(alpha3_, xi, dims)) / p2_[i]; break;
            case ModelKind::general_ionized: mult = I_ * eps * (1.0 - eps * dot(alpha3_, xi, dims)) / p2_[i]; break;
            default: mult = 1.0;
        }
        nl_mult_.values[i] = mult * mask.values[i];
    }
}

double EnvelopeSolver::dimensional_rate(double intensity) const {
    const double b = coef_.beta;
    return cfg_.epsilon * rate_pre_ * medium_envelope_factor(b * b * intensity, medium_, cfg_.epsilon);
}

double EnvelopeSolver::dimensional_potential(double intensity) const {
    return cfg_.epsilon * rate_pre_ * medium_envelope_potential(intensity, coef_.beta, medium_, cfg_.epsilon);
}

SpectralField EnvelopeSolver::lift_to_maxwell(const SpectralField& scalar) const {
    if (grid_.dims != 1) throw Error("lift_to_maxwell: 1D grid required");
    if (!is_dimensional(cfg_.model)) throw Error("lift_to_maxwell: dimensional model required");
    if (cfg_.model == ModelKind::envelope_exact) return scalar;
    const SpectralField& e = scalar;
    if (cfg_.model == ModelKind::full_dispersion) {
        std::vector<cplx> env(e.comp(0), e.comp(0) + e.points());
        return lift_envelope(env, k0_, branch_, medium_, cfg_.epsilon, grid_);
    }
    const Vec4 v = polarization_lift_1d(omega0_, k0_, medium_);
    SpectralField out(grid_, 4);
    for (std::size_t i = 0; i < e.points(); ++i)
        for (int c = 0; c < 4; ++c) out.at(c, i) = v(c) * e.at(0, i);
    return out;
}

void EnvelopeSolver::linear(EnvelopeState& s) const {
    if (cfg_.model == ModelKind::envelope_exact)
        apply_table_inplace(s.u, lin4_);
    else
        apply_table_inplace(s.u, lin_);
}

void EnvelopeSolver::nonlinear(EnvelopeState& s, double h) const {
    if (local_nl_)
        nonlinear_local(s, h);
    else
        nonlinear_nonlocal(s, h);
}

void EnvelopeSolver::nonlinear_local(EnvelopeState& s, double h) const {
    const std::size_t n = grid_.size();
    const std::ptrdiff_t nn = static_cast<std::ptrdiff_t>(n);
    switch (cfg_.model) {
        case ModelKind::envelope_exact: {
            // Exact Q update with P frozen: q' = -a q + eps F(p).
            const double a = std::pow(cfg_.epsilon, 1.0 + medium_.p) * medium_.omega1;
            const double decay = std::exp(-a * h);
            const double gain = a * h > 1e-12 ? -std::expm1(-a * h) / a : h * (1.0 - 0.5 * a * h);
            cplx* Q = s.u.comp(2);
            const cplx* P = s.u.comp(3);
            const double eps = cfg_.epsilon;
#pragma omp parallel for schedule(static)
            for (std::ptrdiff_t i = 0; i < nn; ++i) {
                const double hf = medium_envelope_factor(std::norm(P[i]), medium_, eps);
                Q[i] = Q[i] * decay + eps * hf * P[i] * gain;
            }
            return;
        }
        case ModelKind::nls:
        case ModelKind::nls_improved:
        case ModelKind::nls_polarized: {
            cplx* u = s.u.comp(0);
#pragma omp parallel for schedule(static)
            for (std::ptrdiff_t i = 0; i < nn; ++i) {
                const double k = dimensional_rate(std::norm(u[i]));
                u[i] *= cplx(std::cos(h * k), std::sin(h * k));
            }
            return;
        }
        case ModelKind::family_scalar:
            kernels::kerr_rotate(s.u.comp(0), n, h, std::pow(cfg_.epsilon, cfg_.r), kerr_shape(cfg_.f_kind));
            return;
        case ModelKind::family_vect: {
            cplx* a = s.u.comp(0);
            cplx* b = s.u.comp(1);
#pragma omp parallel for schedule(static)
            for (std::ptrdiff_t i = 0; i < nn; ++i) {
                // I = |v|^2 and S = v.v e^{-2iIt} are invariants of the pointwise flow.
                const double I = std::norm(a[i]) + std::norm(b[i]);
                const cplx S0 = a[i] * a[i] + b[i] * b[i];
                const double mu = std::sqrt(std::max(0.0, I * I - std::norm(S0))) / 3.0;
                const double c = std::cos(mu * h);
                const double sn = mu * h > 1e-300 ? std::sin(mu * h) / mu : h;
                const cplx rot(std::cos(I * h), std::sin(I * h));
                const cplx fa = c * a[i] + sn * (-I_ / 3.0) * (I * a[i] - S0 * std::conj(a[i]));
                const cplx fb = c * b[i] + sn * (-I_ / 3.0) * (I * b[i] - S0 * std::conj(b[i]));
                a[i] = fa * rot;
                b[i] = fb * rot;
            }
            return;
        }
        case ModelKind::ionized_fixed_frame:
        case ModelKind::general_ionized: ionization_local(s, h, false); return;
        case ModelKind::ionized_moving_frame: ionization_local(s, h, true); return;
        default: throw Error("nonlinear_local: unsupported model");
    }
}

void EnvelopeSolver::ionization_local(EnvelopeState& s, double h, bool moving) const {
    const auto& io = *cfg_.ionization;
    const std::size_t n = grid_.size();
    if (!s.density) s.density = std::vector<double>(n, 0.0);
    if (moving) s.density = rho_tilde_solve(s.u, cfg_);
    std::vector<double>& rho = *s.density;
    cplx* u = s.u.comp(0);
    // Time scale: fixed frame carries eps, the slow time does not.
    const double e = moving ? 1.0 : cfg_.epsilon;
    const double c = io.c, a4 = io.alpha4, a5 = io.alpha5;
    const int K = io.K;
    const std::ptrdiff_t nn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < nn; ++i) {
        // RK4 on (I, phase, rho); rho is frozen in the moving frame.
        auto f = [&](double I, double r, double& dI, double& dphi, double& dr) {
            I = std::max(I, 0.0);
            const double ion = a4 * std::pow(I, K) + a5 * r * I;
            dI = -2.0 * e * c * ion;
            dphi = e * (I - r);
            dr = moving ? 0.0 : e * ion;
        };
        const double I0 = std::norm(u[i]), r0 = rho[i];
        double k1I, k1p, k1r, k2I, k2p, k2r, k3I, k3p, k3r, k4I, k4p, k4r;
        f(I0, r0, k1I, k1p, k1r);
        f(I0 + 0.5 * h * k1I, r0 + 0.5 * h * k1r, k2I, k2p, k2r);
        f(I0 + 0.5 * h * k2I, r0 + 0.5 * h * k2r, k3I, k3p, k3r);
        f(I0 + h * k3I, r0 + h * k3r, k4I, k4p, k4r);
        const double I1 = std::max(0.0, I0 + h / 6.0 * (k1I + 2 * k2I + 2 * k3I + k4I));
        const double dphi = h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
        const double amp = I0 > 0.0 ? std::sqrt(I1 / I0) : 0.0;
        u[i] *= amp * cplx(std::cos(dphi), std::sin(dphi));
        if (!moving) rho[i] = r0 + h / 6.0 * (k1r + 2 * k2r + 2 * k3r + k4r);
    }
}

void EnvelopeSolver::nonlinear_nonlocal(EnvelopeState& s, double h) const {
    const std::size_t n = grid_.size();
    const int comps = s.u.components;
    const ModelKind mk = cfg_.model;
    const double eps = cfg_.epsilon;
    const bool with_rho = mk == ModelKind::general_ionized;
    if (with_rho && !s.density) s.density = std::vector<double>(n, 0.0);
    const double sr = std::pow(eps, cfg_.r);
    const KerrShape shape = kerr_shape(cfg_.f_kind);

    auto rhs = [&](const SpectralField& u, const std::vector<double>& rho, SpectralField& du, std::vector<double>& dr) {
        du = SpectralField(grid_, comps);
        const std::ptrdiff_t nn = static_cast<std::ptrdiff_t>(n);
        switch (mk) {
            case ModelKind::full_dispersion: {
                SpectralField p = u;
                apply_table_inplace(p, beta_k_);
                for (std::size_t i = 0; i < n; ++i)
                    du.data[i] = medium_envelope_factor(std::norm(p.data[i]), medium_, eps) * p.data[i];
                break;
            }
            case ModelKind::nls_improved:
            case ModelKind::nls_polarized:
#pragma omp parallel for schedule(static)
                for (std::ptrdiff_t i = 0; i < nn; ++i) du.data[i] = dimensional_rate(std::norm(u.data[i])) * u.data[i];
                break;
            case ModelKind::family_scalar:
#pragma omp parallel for schedule(static)
                for (std::ptrdiff_t i = 0; i < nn; ++i)
                    du.data[i] = kernels::kerr_rate(std::norm(u.data[i]), sr, shape) * u.data[i];
                break;
            case ModelKind::family_vect:
#pragma omp parallel for schedule(static)
                for (std::ptrdiff_t i = 0; i < nn; ++i) {
                    const cplx a = u.at(0, i), b = u.at(1, i);
                    const cplx S = a * a + b * b;
                    const double I = std::norm(a) + std::norm(b);
                    du.at(0, i) = (S * std::conj(a) + 2.0 * I * a) / 3.0;
                    du.at(1, i) = (S * std::conj(b) + 2.0 * I * b) / 3.0;
                }
                break;
            case ModelKind::general_ionized: {
                const auto& io = *cfg_.ionization;
                dr.assign(n, 0.0);
                for (std::size_t i = 0; i < n; ++i) {
                    const cplx v = u.data[i];
                    const double I = std::norm(v);
                    const double ion = io.alpha4 * std::pow(I, io.K - 1) + io.alpha5 * rho[i];
                    du.data[i] = (I - rho[i]) * v + I_ * io.c * ion * v;
                    dr[i] = eps * ion * I;
                }
                break;
            }
            default: throw Error("nonlinear_nonlocal: unsupported model");
        }
        apply_table_inplace(du, nl_mult_);
    };

    const SpectralField u0 = s.u;
    const std::vector<double> r0 = with_rho ? *s.density : std::vector<double>(n, 0.0);
    SpectralField k1, k2, k3, k4, tmp(grid_, comps);
    std::vector<double> d1, d2, d3, d4, rt(n);
    auto axpy = [&](double a, const SpectralField& k, const std::vector<double>& dk) {
        for (std::size_t j = 0; j < tmp.data.size(); ++j) tmp.data[j] = u0.data[j] + a * k.data[j];
        if (with_rho)
            for (std::size_t j = 0; j < n; ++j) rt[j] = r0[j] + a * dk[j];
    };
    rhs(u0, r0, k1, d1);
    axpy(0.5 * h, k1, d1);
    rhs(tmp, with_rho ? rt : r0, k2, d2);
    axpy(0.5 * h, k2, d2);
    rhs(tmp, with_rho ? rt : r0, k3, d3);
    axpy(h, k3, d3);
    rhs(tmp, with_rho ? rt : r0, k4, d4);
    for (std::size_t j = 0; j < s.u.data.size(); ++j)
        s.u.data[j] = u0.data[j] + h / 6.0 * (k1.data[j] + 2.0 * k2.data[j] + 2.0 * k3.data[j] + k4.data[j]);
    if (with_rho)
        for (std::size_t j = 0; j < n; ++j) (*s.density)[j] = r0[j] + h / 6.0 * (d1[j] + 2 * d2[j] + 2 * d3[j] + d4[j]);
}

void EnvelopeSolver::step(EnvelopeState& s) const {
    if (!s.u.grid.same_shape(grid_) || s.u.components != model_components(cfg_.model))
        throw Error("EnvelopeSolver: state does not match the model grid or components");
    nonlinear(s, 0.5 * dt_);
    linear(s);
    nonlinear(s, 0.5 * dt_);
    s.time += dt_;
}

EnvelopeState envelope_step(const EnvelopeState& s, double dt, const ModelConfig& cfg, const MediumParams& m, double k0,
                            const BranchId& branch) {
    EnvelopeState out = s;
    if (is_dimensional(cfg.model)) {
        EnvelopeSolver(s.u.grid, cfg, m, k0, branch, dt).step(out);
    } else {
        EnvelopeSolver(s.u.grid, cfg, dt).step(out);
    }
    return out;
}

}  // namespace filament
