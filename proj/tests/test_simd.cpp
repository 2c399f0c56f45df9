#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "egl/pair_kernels.hpp"

using namespace egl;
using namespace egl::simd;

namespace {

struct Soa {
    std::vector<std::vector<double>> coords, grads;
    std::vector<const double*> cptr;
    std::vector<double*> gptr;

    Soa(int d, int n, std::mt19937_64& rng, double spread) {
        std::normal_distribution<double> normal(0.0, spread);
        coords.resize(d);
        grads.resize(d);
        for (int k = 0; k < d; ++k) {
            coords[k].resize(n);
            grads[k].assign(n, 0.0);
            for (int i = 0; i < n; ++i) coords[k][i] = normal(rng);
            cptr.push_back(coords[k].data());
            gptr.push_back(grads[k].data());
        }
    }
    void reset_grads() {
        for (auto& g : grads) std::fill(g.begin(), g.end(), 0.0);
    }
};

PairSpec spec_log2d(double s, int d = 2) {
    PairSpec p;
    p.tag = PairSpec::Tag::Log2D;
    p.d = d;
    p.s = s;
    return p;
}

PairSpec spec_coulomb(int d) {
    PairSpec p;
    p.tag = PairSpec::Tag::Coulomb;
    p.d = d;
    return p;
}

} // namespace

TEST_CASE("scalar pair kernel matches a naive double loop") {
    std::mt19937_64 rng(3);
    const int n = 37;
    Soa soa(2, n, rng, 1.0);
    bool coincident = false;
    const double energy =
        pair_energy_grad_scalar(spec_log2d(2.0), n, soa.cptr.data(), soa.gptr.data(), &coincident);
    CHECK(!coincident);
    double naive = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double dx = soa.coords[0][i] - soa.coords[0][j];
            const double dy = soa.coords[1][i] - soa.coords[1][j];
            naive += -2.0 * 0.5 * std::log(dx * dx + dy * dy);
        }
    CHECK(energy == doctest::Approx(naive).epsilon(1e-12));
}

TEST_CASE("avx2 and scalar kernels agree to 1e-10 relative") {
#ifndef EGL_HAVE_AVX2
    MESSAGE("AVX2 not compiled; equivalence checked trivially");
#else
    if (active_isa() != Isa::Avx2) {
        MESSAGE("AVX2 unavailable; equivalence checked trivially");
        return;
    }
    std::mt19937_64 rng(17);
    struct Case {
        PairSpec spec;
        int d;
    };
    std::vector<Case> cases = {{spec_log2d(2.0), 2}, {spec_log2d(1.5, 1), 1},
                               {spec_coulomb(2), 2}, {spec_coulomb(3), 3}};
    for (const auto& c : cases) {
        for (int n : {1, 2, 3, 5, 8, 13, 100, 257}) {
            Soa a(c.d, n, rng, 1.0);
            bool co_s = false, co_v = false;
            const double es =
                pair_energy_grad_scalar(c.spec, n, a.cptr.data(), a.gptr.data(), &co_s);
            std::vector<std::vector<double>> grad_scalar = a.grads;
            a.reset_grads();
            const double ev = pair_energy_grad_avx2(c.spec, n, a.cptr.data(), a.gptr.data(), &co_v);
            CHECK(co_s == co_v);
            const double scale = std::max(1.0, std::abs(es));
            CHECK(std::abs(es - ev) <= 1e-10 * scale);
            for (int k = 0; k < c.d; ++k)
                for (int i = 0; i < n; ++i) {
                    const double gs = grad_scalar[k][i], gv = a.grads[k][i];
                    CHECK(std::abs(gs - gv) <= 1e-10 * std::max(1.0, std::abs(gs)));
                }
        }
    }
#endif
}

TEST_CASE("weighted log sum: scalar oracle and avx2 equivalence") {
    std::mt19937_64 rng(29);
    const int n = 211;
    std::vector<double> x(n), y(n), w(n);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unif(0.1, 1.0);
    for (int i = 0; i < n; ++i) {
        x[i] = normal(rng);
        y[i] = normal(rng);
        w[i] = unif(rng);
    }
    const double s = weighted_log_sum_scalar(n, x.data(), y.data(), w.data());
    double naive = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double dx = x[i] - x[j], dy = y[i] - y[j];
            naive += w[i] * w[j] * 0.5 * std::log(dx * dx + dy * dy);
        }
    CHECK(s == doctest::Approx(naive).epsilon(1e-11));
#ifdef EGL_HAVE_AVX2
    if (active_isa() == Isa::Avx2) {
        const double v = weighted_log_sum_avx2(n, x.data(), y.data(), w.data());
        CHECK(std::abs(s - v) <= 1e-10 * std::max(1.0, std::abs(s)));
    }
#endif
}

TEST_CASE("coincidence detection fires on duplicated points") {
    std::vector<double> xs = {0.5, 0.5, -1.0};
    std::vector<double> ys = {0.2, 0.2, 0.3};
    const double* cptr[2] = {xs.data(), ys.data()};
    bool coincident = false;
    pair_energy_grad_scalar(spec_log2d(2.0), 3, cptr, nullptr, &coincident);
    CHECK(coincident);
#ifdef EGL_HAVE_AVX2
    if (active_isa() == Isa::Avx2) {
        coincident = false;
        pair_energy_grad_avx2(spec_log2d(2.0), 3, cptr, nullptr, &coincident);
        CHECK(coincident);
    }
#endif
}

TEST_CASE("isa dispatch reports a valid mode") {
    const Isa isa = active_isa();
    CHECK((isa == Isa::Scalar || isa == Isa::Avx2));
    CHECK(!isa_name(isa).empty());
}
