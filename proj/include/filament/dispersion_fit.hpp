#pragma once

#include <string>

#include "filament/dispersion.hpp"

namespace filament {

struct HypCheck {
    bool ok = true;
    std::string diagnostic;
};

// B symmetric positive semidefinite, b in Range(B), 4 - b.(B^- b) > 0.
HypCheck check_hyp(const Eigen::VectorXd& b, const Eigen::MatrixXd& B);

struct FitOptions {
    int window_points = 201;
    int grid_b = 64;
    int grid_B = 64;
    double b_max = 4.0;
    double B_min = 1e-6;
    double B_max = 4.0;
    bool refine = true;
};

// Window samples as wavevectors (1D: 201 points on [k0-h, k0+h]; 2D: a square
// window in (x, z) around (0, k0)).
std::vector<WaveVec> fit_window(double k0, double half_width, int dims, int points);

// Sup-norm mismatch of omega_imp against the exact branch on the window.
double window_sup_error(const FitResult& fit, const BranchId& branch, const MediumParams& m,
                        const std::vector<WaveVec>& window);
double window_sup_error_nls(double k0, const BranchId& branch, const MediumParams& m, int dims,
                            const std::vector<WaveVec>& window);

FitResult fit_improved(const BranchId& branch, double k0, double half_width, const MediumParams& m, int dims,
                       const FitOptions& opt = {});

}  // namespace filament
