#pragma once

#include <optional>
#include <string>
#include <vector>

#include "filament/dispersion.hpp"
#include "filament/dispersion_fit.hpp"
#include "filament/grid.hpp"
#include "filament/nonlinearity.hpp"

namespace filament {

enum class ModelKind {
    envelope_exact,
    full_dispersion,
    nls,
    nls_improved,
    nls_polarized,
    family_scalar,
    family_vect,
    ionized_fixed_frame,
    ionized_moving_frame,
    general_ionized,
};

std::string to_string(ModelKind m);
ModelKind parse_model(const std::string& s);
// Models whose coefficients come from the medium and carrier (integrated in t, fixed frame).
bool is_dimensional(ModelKind m);
// Models integrated in the slow time tau = eps t.
bool uses_slow_time(ModelKind m);
int model_components(ModelKind m);

struct EnvelopeIonization {
    double c = 0.0;
    double alpha4 = 0.0;
    double alpha5 = 0.0;
    int K = 1;
    double c_g = 1.0;
};

struct ModelConfig {
    ModelKind model = ModelKind::family_scalar;
    int alpha1 = 1;
    double alpha2 = 0.0;
    // Self-steepening vector, grid-dimension order; empty means zero. For
    // nls_polarized an empty vector selects the projector-derived value.
    std::vector<double> alpha3;
    FKind f_kind = FKind::zero;
    double r = 1.0;
    std::optional<FitResult> fit;
    std::optional<EnvelopeIonization> ionization;
    double epsilon = 0.1;
    bool dealias = false;
    // nls_polarized only: false drops the first-order factor on the nonlinearity.
    bool polarization_terms = true;

    void validate(int dims) const;
};

struct EnvelopeState {
    SpectralField u;
    std::optional<std::vector<double>> density;
    double time = 0.0;
};

EnvelopeState make_envelope_state(const GridSpec& g, const ModelConfig& cfg, const std::vector<cplx>& scalar_profile);

// 1 + eps b.xi + eps^2 xi.B xi
double p2_symbol(const WaveVec& xi, const FitResult& fit, double epsilon);

struct IonizationRhs {
    std::vector<cplx> du;
    std::vector<double> drho;
};
// Pointwise time derivatives of the fixed-frame ionized model (dispersion excluded):
// du = i eps (|u|^2 - rho) u - eps c (alpha4 |u|^{2K-2} + alpha5 rho) u, drho = eps(alpha4 |u|^{2K} + alpha5 rho |u|^2).
IonizationRhs ionization_rhs(const std::vector<cplx>& u, const std::vector<double>& rho, const ModelConfig& cfg);

// Closed-form density of the moving-frame model: integrates
// -c_g d_z rho = eps alpha4 |v|^{2K} + eps alpha5 rho |v|^2 from the right edge with rho(+inf) = 0.
std::vector<double> rho_tilde_solve(const SpectralField& v, const ModelConfig& cfg);

// Shift between fixed (t, z) and moving (z' = z - c_g t) frames.
SpectralField to_moving_frame(const SpectralField& u, double c_g, double t);
SpectralField from_moving_frame(const SpectralField& v, double c_g, double t);

class EnvelopeSolver {
public:
    EnvelopeSolver(const GridSpec& g, const ModelConfig& cfg, const MediumParams& m, double k0, const BranchId& branch,
                   double dt);
    // Normalized models that do not depend on a medium or carrier.
    EnvelopeSolver(const GridSpec& g, const ModelConfig& cfg, double dt);
    void step(EnvelopeState& s) const;

    const ModelConfig& config() const { return cfg_; }
    const GridSpec& grid() const { return grid_; }
    double dt() const { return dt_; }
    double carrier_omega() const { return omega0_; }
    const NlsCoefficients& coefficients() const { return coef_; }
    // Real dispersion symbol lambda(xi) with u_t = -i lambda u for the linear part (no damping).
    const std::vector<double>& dispersion_symbol() const { return lambda_; }
    const std::vector<double>& p2_values() const { return p2_; }
    // Rate kappa(|u|^2) of the local nonlinear phase for dimensional scalar models.
    double dimensional_rate(double intensity) const;
    // Nonlinear substep applied with a pointwise exact flow (no Fourier coupling).
    bool local_nonlinearity() const { return local_nl_; }
    // Potential Phi with d Phi/dI = kappa(I) (dimensional scalar models).
    double dimensional_potential(double intensity) const;
    // Per-mode 4-vector lift of a scalar E envelope (full_dispersion) or the constant lift.
    SpectralField lift_to_maxwell(const SpectralField& scalar) const;

private:
    void linear(EnvelopeState& s) const;
    void nonlinear(EnvelopeState& s, double h) const;
    void nonlinear_local(EnvelopeState& s, double h) const;
    void nonlinear_nonlocal(EnvelopeState& s, double h) const;
    void ionization_local(EnvelopeState& s, double h, bool moving) const;
    void build();
    double rate_pre_ = 0.0;

    GridSpec grid_;
    ModelConfig cfg_;
    MediumParams medium_;
    double k0_;
    BranchId branch_;
    double dt_;
    double omega0_ = 0.0;
    NlsCoefficients coef_{};
    bool local_nl_ = true;
    std::vector<double> lambda_;
    std::vector<double> p2_;
    SymbolTable lin_;
    MatrixSymbolTable lin4_;
    SymbolTable nl_mult_;
    // full_dispersion per-mode factors
    SymbolTable beta_k_;
    SymbolTable proj_eq_;
    std::vector<double> alpha3_;
};

EnvelopeState envelope_step(const EnvelopeState& s, double dt, const ModelConfig& cfg, const MediumParams& m, double k0,
                            const BranchId& branch);

}  // namespace filament
