#pragma once

#include <complex>
#include <cstddef>

namespace filament {

using cplx = std::complex<double>;

// Thread control for the OpenMP kernels. threads <= 0 keeps the runtime default.
void set_threads(int threads);
int max_threads();

enum class KerrShape { cubic, quintic, saturated };

// Inner loops shared by every split-step solver. The serial variants are the
// reference implementations used in tests and benchmarks; the dispatching
// entry points in `kernels` pick the OpenMP variants.
namespace kernels {

namespace serial {
// data[c*n + i] *= table[i] for every component c.
void multiply_modes(cplx* data, const cplx* table, std::size_t n, int comps);
// Per-mode dense product: v_i <- M_i v_i with M_i stored row-major at mats + i*c*c.
void matvec_modes(cplx* data, const cplx* mats, std::size_t n, int comps);
// v <- v * exp(i h g(|v|^2)) with g(I) = I (1 + f(s I)), f per shape.
void kerr_rotate(cplx* v, std::size_t n, double h, double s, KerrShape shape);
}  // namespace serial

namespace parallel {
void multiply_modes(cplx* data, const cplx* table, std::size_t n, int comps);
void matvec_modes(cplx* data, const cplx* mats, std::size_t n, int comps);
void kerr_rotate(cplx* v, std::size_t n, double h, double s, KerrShape shape);
}  // namespace parallel

void multiply_modes(cplx* data, const cplx* table, std::size_t n, int comps);
void matvec_modes(cplx* data, const cplx* mats, std::size_t n, int comps);
void kerr_rotate(cplx* v, std::size_t n, double h, double s, KerrShape shape);

// g(I) = I (1 + f(s I)) for the normalized family nonlinearities:
// cubic f = 0, quintic f(x) = -x, saturated f(x) = -x/(1+x).
double kerr_rate(double intensity, double s, KerrShape shape);

}  // namespace kernels
}  // namespace filament
