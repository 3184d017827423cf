#pragma once

#include <optional>
#include <vector>

#include "filament/dispersion.hpp"
#include "filament/grid.hpp"

namespace filament {

// 1D transverse reduction: components (B_y, E_x, Q_x, P_x), fields depend on z only.
struct MaxwellState {
    SpectralField u;
    std::optional<std::vector<double>> rho;
    double time = 0.0;
    double epsilon = 0.1;
};

struct WavePacketSpec {
    // Scalar E_x envelope on the grid nodes.
    std::vector<cplx> envelope;
    double carrier_k = 1.0;
    BranchId branch = BranchId::curved(1, 1);
    // Optional O(1) profile r; eps * r is added to the lifted 4-component envelope.
    std::optional<SpectralField> polarization_defect;
};

// Carrier k/eps must be an integer multiple of 2 pi / L.
void check_carrier_on_lattice(double k, double epsilon, const GridSpec& g);

// Lifted 4-component envelope: every Fourier mode xi of the scalar envelope is
// lifted with the branch polarization at wavenumber k + eps xi.
SpectralField lift_envelope(const std::vector<cplx>& envelope, double k, const BranchId& branch,
                            const MediumParams& m, double epsilon, const GridSpec& g);

MaxwellState init_wave_packet(const WavePacketSpec& spec, const MediumParams& m, double epsilon, const GridSpec& g);

// Multiply by exp(-i (k z - omega t)/eps) and keep modes with |xi| < k/(2 eps).
SpectralField demodulate(const SpectralField& u, double k, double omega, double t, double epsilon);
// U = u e^{i(kz - omega t)/eps} + c.c.
SpectralField modulate(const SpectralField& env, double k, double omega, double t, double epsilon);

// Right side of the Q equation for a given P (real vector).
Eigen::VectorXd nonlinearity_eval(const Eigen::VectorXd& p_sharp, const MediumParams& m, double epsilon);

// Regularized Hilbert symbol sqrt(2) i xi / sqrt(1 + xi^2).
cplx hilbert_symbol(double xi);

struct MaxwellOptions {
    bool linear = true;     // A(d) and E/eps part
    bool nonlinear = true;  // Kerr-type source and damping on Q
    bool hilbert = true;    // free-electron current term (ionization only)
    double carrier_k = 1.0; // k_l inside the Hilbert multiplier
};

// Strang splitting with cached per-mode exponentials for a fixed dt.
class MaxwellStepper {
public:
    MaxwellStepper(const GridSpec& g, const MediumParams& m, double epsilon, double dt, MaxwellOptions opt = {});
    // Advances by dt. Ionization terms are active when state.rho and medium.ionization are present.
    void step(MaxwellState& s) const;
    double dt() const { return dt_; }

private:
    void nonlinear_half(MaxwellState& s, double h) const;
    void ionization_half(MaxwellState& s, double h) const;
    GridSpec grid_;
    MediumParams medium_;
    double eps_;
    double dt_;
    MaxwellOptions opt_;
    MatrixSymbolTable linear_;
    SymbolTable hilbert_;
};

MaxwellState maxwell_step(const MaxwellState& s, double dt, const MediumParams& m);
MaxwellState maxwell_ionization_step(const MaxwellState& s, double dt, const MediumParams& m, double carrier_k);

// Exact per-mode propagator exp(-dt (i xi A1 + E4/eps)).
Mat4 maxwell_linear_propagator(double xi, double dt, const MediumParams& m, double epsilon);

// 1/2 |U|^2 - (eps^2/omega0) int V(P) with V' the Q-source; conserved for omega1 = 0
// without ionization.
double maxwell_energy(const MaxwellState& s, const MediumParams& m);
double maxwell_l2(const MaxwellState& s);
double max_imag_residue(const MaxwellState& s);

}  // namespace filament
