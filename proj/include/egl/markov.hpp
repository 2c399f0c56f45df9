#pragma once

#include <filesystem>
#include <vector>

namespace egl {

enum class ChainKind { Kernel, Generator };

// Row-stochastic kernel P or zero-row-sum generator L over S >= 2 states.
struct FiniteChain {
    ChainKind kind = ChainKind::Kernel;
    int size = 0;
    std::vector<double> matrix; // row-major S*S

    double at(int i, int j) const { return matrix[static_cast<std::size_t>(i) * size + j]; }
    double& at(int i, int j) { return matrix[static_cast<std::size_t>(i) * size + j]; }

    // Row sums within 1e-12 of 1 (kernel) or 0 (generator), sign constraints.
    void validate() const;
    // Strong connectivity of the support graph (entries > 1e-14 off-diagonal).
    bool irreducible() const;
};

struct ProbVector {
    std::vector<double> weights;

    int size() const { return static_cast<int>(weights.size()); }
    double operator[](int i) const { return weights[i]; }
    void validate() const; // entries >= 0, sum within 1e-12 of 1
};

// Unique invariant law of an irreducible chain. StructuralError if reducible,
// NumericError if the solve does not meet the 1e-10 residual.
ProbVector invariant_measure(const FiniteChain& chain);

// KL divergence sum_x mu(x) log(mu(x)/ref(x)); +infinity off the support of ref.
double relative_entropy(const ProbVector& mu, const ProbVector& ref);

// L1 distance sum_x |mu(x) - nu(x)|, in [0, 2].
double total_variation(const ProbVector& mu, const ProbVector& nu);

// [KL(mu0 P^n || mu_*)] for n = 0..steps. Kernel chains only.
std::vector<double> free_energy_trajectory(const FiniteChain& chain, const ProbVector& mu0,
                                           int steps);

// mu0 exp(tL) by uniformization. Generator chains only; t >= 0.
ProbVector ct_evolve(const FiniteChain& chain, const ProbVector& mu0, double t);

struct FreeEnergyDerivatives {
    double first = 0.0;  // d/dt KL(mu_t || mu_*), always <= 0
    double second = 0.0; // d^2/dt^2 of the same
};

// Analytic time derivatives of the free energy at mu_t. Generator chains only;
// mu_t must be strictly positive (domain_error via NumericError otherwise).
FreeEnergyDerivatives free_energy_derivatives(const FiniteChain& chain, const ProbVector& mu_t);

// Birth-death generator on {0..K}: up-rate lambda (suppressed at K), down-rate x*mu.
FiniteChain mm_infinity_generator(double lambda, double mu, int truncation);

// Least-squares slope of log(trajectory) divided by -2*dt.
double decay_rate_regression(const std::vector<double>& trajectory, double dt);

// Chain file format: "kind=kernel|generator", "S=<n>", then S rows of S decimals.
void save_chain(const FiniteChain& chain, const std::filesystem::path& path);
FiniteChain load_chain(const std::filesystem::path& path);

} // namespace egl
