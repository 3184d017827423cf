#pragma once

#include <functional>

#include <Eigen/Dense>

#include "filament/dispersion.hpp"
#include "filament/kernels.hpp"

namespace filament {

using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

// Saturation shapes of the envelope families: zero f = 0, quintic f(x) = -x,
// saturated f(x) = -x/(1+x).
enum class FKind { zero, quintic, saturated };
std::string to_string(FKind f);
FKind parse_fkind(const std::string& s);
KerrShape kerr_shape(FKind f);

// First-harmonic filter (1/2pi) int e^{-i theta} F(u e^{i theta} + c.c.) d theta by
// trapezoidal quadrature on `points` nodes.
CVec filter_first_harmonic(const CVec& u, const std::function<RVec(const RVec&)>& F, int points = 64);

// (u.u) conj(u) + 2 |u|^2 u
CVec fenv_cubic(const CVec& u);
// Filtered (1 + f(eps^r |w|^2)) |w|^2 w with f from the family shape.
CVec fenv_general(const CVec& u, FKind f_kind, double r, double epsilon);

// G(E, w) = c1 |E|^{2K-2} E + c2 w E and its filtered envelope.
CVec genv(const CVec& u, double w, const IonizationParams& io);
// Expansion of 2 G^env . conj(u) in powers of |u|^2 and |u.u|^2 using the
// multinomial weights C(K,k) C(K-k,k).
double genv_power_expansion(const CVec& u, double w, const IonizationParams& io);
// Same expansion with the weights 2 C(K-1,k) C(K-k,k) for k >= 1 as printed in
// the literature; agrees with the above for K <= 2 only.
double genv_power_expansion_printed(const CVec& u, double w, const IonizationParams& io);

// Medium nonlinearity acting on P: (gamma/omega0^3)(1 + f(eps^r |P|^2)) |P|^2 P with
// f(x) = ftilde(a_tilde gamma/omega0^2 x), ftilde per NonlinearityKind.
RVec medium_nonlinearity(const RVec& p, const MediumParams& m, double epsilon);
// Scalar envelope of the medium nonlinearity: filtered value equals h(|p|^2) p.
double medium_envelope_factor(double p_abs2, const MediumParams& m, double epsilon);
// Primitive Phi(I) = int_0^I h(beta^2 s) ds, used by the dimensional Hamiltonians.
double medium_envelope_potential(double intensity, double beta, const MediumParams& m, double epsilon);

}  // namespace filament
