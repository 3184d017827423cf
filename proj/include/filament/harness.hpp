#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "filament/config.hpp"
#include "filament/diagnostics.hpp"
#include "filament/dispersion.hpp"
#include "filament/dispersion_fit.hpp"
#include "filament/envelope.hpp"
#include "filament/maxwell.hpp"

namespace filament {

// Physical medium and pulse scales.
struct PhysicalInputs {
    double tbar = 0.0;        // inverse carrier frequency
    double Tbar = 0.0;        // pulse duration
    double Omega0 = 0.0;      // resonance frequency
    double Omega1 = 0.0;      // damping frequency
    double b_coupling = 0.0;  // oscillator coupling b
    double a3 = 0.0;          // cubic coefficient of the nonlinear potential gradient
    double a5 = 0.0;          // quintic coefficient
    double p = 1.0;           // damping exponent of the dimensionless system
    double r = 1.0;           // saturation exponent
    NonlinearityKind kind = NonlinearityKind::cubic;
};

struct DimensionlessMedium {
    double epsilon = 0.0;
    MediumParams medium;
};

DimensionlessMedium build_medium_from_physical(const PhysicalInputs& in);
// Inverse map; the time scale tbar and a3 fix the remaining freedom.
PhysicalInputs physical_from_medium(double epsilon, const MediumParams& m, double tbar, double a3);

struct ProfileSpec {
    // gaussian: A exp(-sum (x_d - c_d)^2 / w_d^2); sech: A sech along z times a Gaussian in x;
    // constant: A. All shapes are multiplied by 1 + perturbation * prod cos(m_d x_d 2 pi / L_d).
    std::string shape = "gaussian";
    double amplitude = 1.0;
    std::array<double, 2> width{1.0, 1.0};
    std::array<double, 2> center{0.0, 0.0};
    double perturbation = 0.0;
    std::array<int, 2> perturbation_modes{0, 0};
};

std::vector<cplx> make_profile(const GridSpec& g, const ProfileSpec& p);

// Readers of the structured config; `prefix` is the section name.
GridSpec grid_from_config(const Config& c, const std::string& prefix);
MediumParams medium_from_config(const Config& c, const std::string& prefix = "medium");
ModelConfig model_from_config(const Config& c, int dims, const std::string& prefix = "model");
ProfileSpec profile_from_config(const Config& c, const std::string& prefix = "profile");
BlowupThresholds thresholds_from_config(const Config& c);

// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct ConvergenceOptions {
    MediumParams medium;
    double k = 2.0;
    BranchId branch = BranchId::curved(1, 1);
    std::vector<double> epsilons{0.2, 0.1, 0.05};
    double T = 0.5;
    double amplitude = 0.5;
    double width = 1.0;
    int points = 2048;
    double length = 0.0;  // 0 selects 6 pi
    // Time step as a multiple of epsilon.
    double dt_factor = 0.125;
    std::vector<std::string> models{"envelope_exact", "full_dispersion", "nls"};
    double fit_half_width = 1.5;
    // Re-run the oracle with dt/2 and record the difference.
    bool oracle_self_check = true;
    // O(1) profile added to the lifted initial data as eps * r along E (0 = none).
    double polarization_defect = 0.0;
};

struct ConvergenceReport {
    std::vector<double> epsilons;
    std::vector<std::string> models;
    // Max over snapshots and nodes of |U - U_app|, U_app the modulated lifted envelope.
    std::map<std::string, std::vector<double>> errors;
    std::map<std::string, double> slopes;
    // Same comparison after demodulation and low-pass filtering (first harmonic only).
    std::map<std::string, std::vector<double>> errors_demodulated;
    std::map<std::string, double> slopes_demodulated;
    std::map<std::string, std::vector<double>> runtime;
    std::vector<double> oracle_runtime;
    std::vector<double> oracle_self_error;
    std::vector<std::string> failures;
    std::optional<FitResult> fit;
};

ConvergenceOptions convergence_from_config(const Config& c);
ConvergenceReport run_convergence(const ConvergenceOptions& opt);

struct CompareOptions {
    GridSpec grid;
    ProfileSpec profile;
    ModelConfig base;
    // Entries "model" or "model:f_kind".
    std::vector<std::string> variants;
    MediumParams medium;
    double k0 = 2.0;
    BranchId branch = BranchId::curved(1, 1);
    // Horizon in the slow time tau; fixed-frame models run to tau/eps.
    double tau_final = 1.0;
    // Step in the slow time; fixed-frame models use dt_tau/eps.
    double dt_tau = 1e-3;
    int sample_every = 10;
    BlowupThresholds thresholds;
};

struct CompareRow {
    std::string name;
    RunReport report;
    double wall_time = 0.0;
    std::string error;
};

CompareOptions compare_from_config(const Config& c);
std::vector<CompareRow> compare_models(const CompareOptions& opt);

}  // namespace filament
