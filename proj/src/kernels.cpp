#include "filament/kernels.hpp"

#include <cmath>

#include <omp.h>

namespace filament {

void set_threads(int threads) {
    if (threads > 0) omp_set_num_threads(threads);
}

int max_threads() { return omp_get_max_threads(); }

namespace kernels {

double kerr_rate(double intensity, double s, KerrShape shape) {
    switch (shape) {
        case KerrShape::cubic: return intensity;
        case KerrShape::quintic: return intensity * (1.0 - s * intensity);
        case KerrShape::saturated: return intensity / (1.0 + s * intensity);
    }
    return intensity;
}

namespace {

inline void matvec_one(cplx* data, const cplx* m, std::size_t n, std::size_t i, int comps) {
    cplx in[12];
    for (int c = 0; c < comps; ++c) in[c] = data[c * n + i];
    for (int r = 0; r < comps; ++r) {
        cplx acc = 0.0;
        for (int c = 0; c < comps; ++c) acc += m[r * comps + c] * in[c];
        data[r * n + i] = acc;
    }
}

inline void kerr_one(cplx& v, double h, double s, KerrShape shape) {
    const double I = std::norm(v);
    const double ph = h * kerr_rate(I, s, shape);
    v *= cplx(std::cos(ph), std::sin(ph));
}

}  // namespace

namespace serial {

void multiply_modes(cplx* data, const cplx* table, std::size_t n, int comps) {
    for (int c = 0; c < comps; ++c)
        for (std::size_t i = 0; i < n; ++i) data[c * n + i] *= table[i];
}

void matvec_modes(cplx* data, const cplx* mats, std::size_t n, int comps) {
    const std::size_t stride = static_cast<std::size_t>(comps) * comps;
    for (std::size_t i = 0; i < n; ++i) matvec_one(data, mats + i * stride, n, i, comps);
}

void kerr_rotate(cplx* v, std::size_t n, double h, double s, KerrShape shape) {
    for (std::size_t i = 0; i < n; ++i) kerr_one(v[i], h, s, shape);
}

}  // namespace serial

namespace parallel {

void multiply_modes(cplx* data, const cplx* table, std::size_t n, int comps) {
    const std::ptrdiff_t total = static_cast<std::ptrdiff_t>(n) * comps;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t j = 0; j < total; ++j) data[j] *= table[static_cast<std::size_t>(j) % n];
}

void matvec_modes(cplx* data, const cplx* mats, std::size_t n, int comps) {
    const std::size_t stride = static_cast<std::size_t>(comps) * comps;
    const std::ptrdiff_t nn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < nn; ++i)
        matvec_one(data, mats + static_cast<std::size_t>(i) * stride, n, static_cast<std::size_t>(i), comps);
}

void kerr_rotate(cplx* v, std::size_t n, double h, double s, KerrShape shape) {
    const std::ptrdiff_t nn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < nn; ++i) kerr_one(v[i], h, s, shape);
}

}  // namespace parallel

void multiply_modes(cplx* data, const cplx* table, std::size_t n, int comps) {
    parallel::multiply_modes(data, table, n, comps);
}
void matvec_modes(cplx* data, const cplx* mats, std::size_t n, int comps) {
    parallel::matvec_modes(data, mats, n, comps);
}
void kerr_rotate(cplx* v, std::size_t n, double h, double s, KerrShape shape) {
    parallel::kerr_rotate(v, n, h, s, shape);
}

}  // namespace kernels
}  // namespace filament
