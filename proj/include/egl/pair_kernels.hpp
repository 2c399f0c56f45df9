#pragma once

#include <string>

namespace egl::simd {

// Pairwise interaction kernels evaluated over all i<j pairs. Coordinates are
// structure-of-arrays: coords[k][i] is coordinate k of particle i, k < d.
struct PairSpec {
    enum class Tag { None, Log2D, Coulomb, Riesz };
    Tag tag = Tag::None;
    int d = 1;          // ambient dimension
    double s = 1.0;     // log kernel scale: W = s * log(1/r)
    double alpha = 0.0; // riesz exponent: W = r^(alpha - d)
    double coincidence_r2 = 1e-24;
};

// Accumulates sum_{i<j} W(x_i, x_j) and grad[k][i] += sum_{j != i} d/dx_i^k W.
// grad may be null (energy only). Sets *coincident when a pair falls below the
// coincidence threshold of a singular kernel; the sums are then meaningless.
double pair_energy_grad_scalar(const PairSpec& spec, int n, const double* const* coords,
                               double* const* grad, bool* coincident);
double pair_energy_grad_avx2(const PairSpec& spec, int n, const double* const* coords,
                             double* const* grad, bool* coincident);

// sum_{i<j} w_i * w_j * log(r_ij); used by the planar log-energy functional.
double weighted_log_sum_scalar(int n, const double* x, const double* y, const double* w);
double weighted_log_sum_avx2(int n, const double* x, const double* y, const double* w);

enum class Isa { Scalar, Avx2 };

// Resolves once from CPU features and the ENTROPY_LAB_SIMD env var
// (values: auto | scalar | avx2).
Isa active_isa();
std::string isa_name(Isa isa);

// Dispatching front ends. The AVX2 path covers log2d (d <= 2) and coulomb d=3;
// other kernels always take the scalar path.
double pair_energy_grad(const PairSpec& spec, int n, const double* const* coords,
                        double* const* grad, bool* coincident);
double weighted_log_sum(int n, const double* x, const double* y, const double* w);

} // namespace egl::simd
