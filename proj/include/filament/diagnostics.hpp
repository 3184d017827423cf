#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "filament/envelope.hpp"

namespace filament {

// Discrete L2 norm squared, summed over components.
double mass(const EnvelopeState& s);
// Same quantity evaluated on the Fourier side (Parseval cross-check).
double mass_spectral(const EnvelopeState& s);
// Imaginary part of int conj(u) grad u, one entry per grid dimension.
std::vector<double> momentum(const EnvelopeState& s);
// ||grad u||_{L2} by spectral differentiation.
double grad_norm(const EnvelopeState& s);
// sqrt(||u||^2 + ||grad u||^2)
double h1_norm(const EnvelopeState& s);
// sum over modes of P2(eps xi) |u_hat|^2, scaled like the mass.
double quadratic_form_p2(const EnvelopeState& s, const FitResult& fit, double epsilon);

// Energy of the normalized families:
// 1/2 int (|grad_perp v|^2 + alpha1 |d_z v|^2) - 1/2 int F(|v|^2), F' (I) = I (1 + f(eps^r I)).
// The vector family uses the potential |v.v|^2/6 + |v|^4/3.
double energy(const EnvelopeState& s, const ModelConfig& cfg);
// Model-matched energy. Dimensional scalar models use
// 1/2 (sum P2 lambda |u_hat|^2 - int Phi(|u|^2)); returns NaN where no energy applies.
double energy(const EnvelopeState& s, const EnvelopeSolver& solver);

// sqrt(2 E0 + (1 + 3/(16 eps^r)) M0)
double h1_bound_cq(double mass0, double energy0, double epsilon, double r);

struct BlowupThresholds {
    double grad_growth = 1e3;
    double amplitude_growth = 1e6;
};

enum class RunStatus { completed, blowup_suspected, aborted };
std::string to_string(RunStatus s);
RunStatus parse_status(const std::string& s);

struct SeriesRow {
    double t = 0.0;
    double mass = 0.0;
    double energy = 0.0;
    std::vector<double> momentum;
    double max_abs = 0.0;
    double grad_norm = 0.0;
    double max_rho = 0.0;
};

struct RunReport {
    std::vector<SeriesRow> series;
    RunStatus status = RunStatus::completed;
    std::map<std::string, double> drift;
    BlowupThresholds thresholds;
    std::string message;
    long steps = 0;
    double t_final = 0.0;
};

SeriesRow sample(const EnvelopeState& s, const EnvelopeSolver& solver);

// blowup_suspected iff some sample crossed a threshold relative to the first sample.
RunStatus blowup_detect(const RunReport& r);

// Relative drifts max |x(t) - x(0)| / |x(0)| of mass, energy and momentum components.
void compute_drifts(RunReport& r);

struct RunOptions {
    double t_final = 1.0;
    int sample_every = 1;
    BlowupThresholds thresholds;
    // Called at every sample (including t = 0).
    std::function<void(const EnvelopeState&, long)> on_sample;
};

// Integrates to t_final, sampling the diagnostics. Halts on threshold crossings
// (blowup_suspected) or non-finite values (aborted, with the max|u| history in the message).
RunReport run_envelope(EnvelopeState& s, const EnvelopeSolver& solver, const RunOptions& opt);

void write_series_csv(const std::string& path, const RunReport& r);
RunReport read_series_csv(const std::string& path);

}  // namespace filament
