#include <cmath>

#include "egl/pair_kernels.hpp"

namespace egl::simd {

namespace {

// W(r) and the radial factor c(r) with grad_1 W = c * (x_i - x_j).
inline void kernel_terms(const PairSpec& spec, double r2, double& w, double& c) {
    switch (spec.tag) {
        case PairSpec::Tag::Log2D:
            w = -0.5 * spec.s * std::log(r2);
            c = -spec.s / r2;
            return;
        case PairSpec::Tag::Coulomb:
            if (spec.d == 1) {
                const double r = std::sqrt(r2);
                w = -r;
                c = -1.0 / r;
            } else if (spec.d == 2) {
                w = -0.5 * std::log(r2);
                c = -1.0 / r2;
            } else {
                const double r = std::sqrt(r2);
                w = std::pow(r, 2.0 - spec.d);
                c = (2.0 - spec.d) * std::pow(r, -spec.d);
            }
            return;
        case PairSpec::Tag::Riesz: {
            const double r = std::sqrt(r2);
            w = std::pow(r, spec.alpha - spec.d);
            c = (spec.alpha - spec.d) * std::pow(r, spec.alpha - spec.d - 2.0);
            return;
        }
        case PairSpec::Tag::None:
            w = 0.0;
            c = 0.0;
            return;
    }
    w = 0.0;
    c = 0.0;
}

inline bool kernel_singular(const PairSpec& spec) {
    return spec.tag == PairSpec::Tag::Log2D || spec.tag == PairSpec::Tag::Riesz ||
           (spec.tag == PairSpec::Tag::Coulomb && spec.d >= 2);
}

} // namespace

double pair_energy_grad_scalar(const PairSpec& spec, int n, const double* const* coords,
                               double* const* grad, bool* coincident) {
    *coincident = false;
    if (spec.tag == PairSpec::Tag::None) return 0.0;
    const int d = spec.d;
    const bool singular = kernel_singular(spec);
    double energy = 0.0;
    double diff[8];
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            double r2 = 0.0;
            for (int k = 0; k < d; ++k) {
                diff[k] = coords[k][i] - coords[k][j];
                r2 += diff[k] * diff[k];
            }
            if (r2 < spec.coincidence_r2) {
                if (singular || r2 == 0.0) {
                    *coincident = true;
                    return energy;
                }
            }
            double w, c;
            kernel_terms(spec, r2, w, c);
            energy += w;
            if (grad) {
                for (int k = 0; k < d; ++k) {
                    const double g = c * diff[k];
                    grad[k][i] += g;
                    grad[k][j] -= g;
                }
            }
        }
    }
    return energy;
}

double weighted_log_sum_scalar(int n, const double* x, const double* y, const double* w) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const double xi = x[i], yi = y[i], wi = w[i];
        double row = 0.0;
        for (int j = i + 1; j < n; ++j) {
            const double dx = xi - x[j];
            const double dy = yi - y[j];
            row += w[j] * std::log(dx * dx + dy * dy);
        }
        acc += wi * row;
    }
    return 0.5 * acc; // log r = log(r^2)/2
}

} // namespace egl::simd
