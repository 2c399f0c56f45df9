#include "egl/markov.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>

#include "egl/errors.hpp"

namespace egl {

namespace {

constexpr double kSupportEps = 1e-14;
constexpr double kRowTol = 1e-12;

std::vector<double> mul_left(const std::vector<double>& v, const FiniteChain& chain) {
    const int s = chain.size;
    std::vector<double> out(s, 0.0);
    for (int i = 0; i < s; ++i) {
        const double vi = v[i];
        if (vi == 0.0) continue;
        for (int j = 0; j < s; ++j) out[j] += vi * chain.at(i, j);
    }
    return out;
}

// Dense partial-pivot solve of A x = b, A row-major s x s. Destroys inputs.
std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b, int s) {
    for (int col = 0; col < s; ++col) {
        int piv = col;
        for (int r = col + 1; r < s; ++r)
            if (std::abs(a[r * s + col]) > std::abs(a[piv * s + col])) piv = r;
        if (std::abs(a[piv * s + col]) < 1e-300)
            throw NumericError("invariant_measure: singular linear system");
        if (piv != col) {
            for (int c = 0; c < s; ++c) std::swap(a[col * s + c], a[piv * s + c]);
            std::swap(b[col], b[piv]);
        }
        const double inv = 1.0 / a[col * s + col];
        for (int r = col + 1; r < s; ++r) {
            const double f = a[r * s + col] * inv;
            if (f == 0.0) continue;
            for (int c = col; c < s; ++c) a[r * s + c] -= f * a[col * s + c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(s);
    for (int r = s - 1; r >= 0; --r) {
        double acc = b[r];
        for (int c = r + 1; c < s; ++c) acc -= a[r * s + c] * x[c];
        x[r] = acc / a[r * s + r];
    }
    return x;
}

void reach(const FiniteChain& chain, int start, bool transpose, std::vector<char>& seen) {
    std::vector<int> stack{start};
    seen.assign(chain.size, 0);
    seen[start] = 1;
    while (!stack.empty()) {
        const int i = stack.back();
        stack.pop_back();
        for (int j = 0; j < chain.size; ++j) {
            if (j == i || seen[j]) continue;
            const double w = transpose ? chain.at(j, i) : chain.at(i, j);
            if (w > kSupportEps) {
                seen[j] = 1;
                stack.push_back(j);
            }
        }
    }
}

} // namespace

void FiniteChain::validate() const {
    if (size < 2) throw UsageError("chain: needs at least 2 states");
    if (matrix.size() != static_cast<std::size_t>(size) * size)
        throw UsageError("chain: matrix size mismatch");
    for (int i = 0; i < size; ++i) {
        double row = 0.0;
        for (int j = 0; j < size; ++j) {
            const double v = at(i, j);
            if (!std::isfinite(v)) throw UsageError("chain: non-finite entry");
            if (kind == ChainKind::Kernel && v < 0.0)
                throw UsageError("chain: kernel entries must be non-negative");
            if (kind == ChainKind::Generator && i != j && v < 0.0)
                throw UsageError("chain: generator off-diagonal entries must be non-negative");
            row += v;
        }
        const double target = kind == ChainKind::Kernel ? 1.0 : 0.0;
        if (std::abs(row - target) > kRowTol)
            throw UsageError("chain: row " + std::to_string(i) + " sums to " +
                             std::to_string(row));
    }
}

bool FiniteChain::irreducible() const {
    std::vector<char> fwd, bwd;
    reach(*this, 0, false, fwd);
    reach(*this, 0, true, bwd);
    for (int i = 0; i < size; ++i)
        if (!fwd[i] || !bwd[i]) return false;
    return true;
}

void ProbVector::validate() const {
    double sum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw UsageError("probability vector: negative or NaN entry");
        sum += w;
    }
    if (std::abs(sum - 1.0) > kRowTol)
        throw UsageError("probability vector: mass " + std::to_string(sum) + " != 1");
}

ProbVector invariant_measure(const FiniteChain& chain) {
    chain.validate();
    const int s = chain.size;
    if (!chain.irreducible()) {
        std::vector<char> fwd;
        reach(chain, 0, false, fwd);
        std::string missing;
        for (int i = 0; i < s; ++i)
            if (!fwd[i]) missing += (missing.empty() ? "" : ",") + std::to_string(i);
        if (missing.empty()) missing = "state 0 not reachable from all states";
        throw StructuralError("invariant_measure: chain reducible; unreachable states {" +
                              missing + "}");
    }

    bool birth_death = true;
    for (int i = 0; i < s && birth_death; ++i)
        for (int j = 0; j < s; ++j)
            if (std::abs(i - j) > 1 && chain.at(i, j) != 0.0) {
                birth_death = false;
                break;
            }

    std::vector<double> mu;
    if (birth_death) {
        // Detailed balance gives the invariant measure exactly; this keeps
        // far-tail entries positive where a dense solve would round them away.
        mu.assign(s, 0.0);
        mu[0] = 1.0;
        for (int k = 0; k + 1 < s; ++k) mu[k + 1] = mu[k] * chain.at(k, k + 1) / chain.at(k + 1, k);
    } else if (s <= 2000) {
        // Solve mu A = 0 with A = P - I (kernel) or A = L, normalization replaces
        // the last column equation.
        std::vector<double> at(static_cast<std::size_t>(s) * s, 0.0);
        std::vector<double> b(s, 0.0);
        for (int i = 0; i < s; ++i)
            for (int j = 0; j < s; ++j) {
                double v = chain.at(j, i); // transpose
                if (chain.kind == ChainKind::Kernel && i == j) v -= 1.0;
                at[static_cast<std::size_t>(i) * s + j] = v;
            }
        for (int j = 0; j < s; ++j) at[static_cast<std::size_t>(s - 1) * s + j] = 1.0;
        b[s - 1] = 1.0;
        mu = solve_dense(std::move(at), std::move(b), s);
    } else {
        // Power iteration on the (uniformized) kernel.
        FiniteChain p = chain;
        if (chain.kind == ChainKind::Generator) {
            double lam = 0.0;
            for (int i = 0; i < s; ++i) lam = std::max(lam, -chain.at(i, i));
            lam = std::max(lam, 1.0);
            for (int i = 0; i < s; ++i)
                for (int j = 0; j < s; ++j)
                    p.at(i, j) = (i == j ? 1.0 : 0.0) + chain.at(i, j) / lam;
            p.kind = ChainKind::Kernel;
        }
        mu.assign(s, 1.0 / s);
        for (int it = 0; it < 200000; ++it) {
            std::vector<double> next = mul_left(mu, p);
            // lazy step keeps periodic chains converging
            double diff = 0.0;
            for (int i = 0; i < s; ++i) {
                next[i] = 0.5 * (next[i] + mu[i]);
                diff += std::abs(next[i] - mu[i]);
            }
            mu = std::move(next);
            if (diff < 1e-14) break;
        }
    }

    double sum = 0.0;
    for (double& v : mu) {
        if (v < 0.0 && v > -1e-12) v = 0.0;
        sum += v;
    }
    for (double& v : mu) v /= sum;

    double residual = 0.0;
    if (chain.kind == ChainKind::Kernel) {
        const auto mp = mul_left(mu, chain);
        for (int i = 0; i < s; ++i) residual += std::abs(mp[i] - mu[i]);
    } else {
        const auto ml = mul_left(mu, chain);
        for (int i = 0; i < s; ++i) residual += std::abs(ml[i]);
    }
    if (residual > 1e-10)
        throw NumericError("invariant_measure: solver residual " + std::to_string(residual));
    for (double v : mu)
        if (!(v > 0.0))
            throw NumericError("invariant_measure: non-positive invariant mass entry");
    return ProbVector{std::move(mu)};
}

double relative_entropy(const ProbVector& mu, const ProbVector& ref) {
    if (mu.size() != ref.size()) throw UsageError("relative_entropy: size mismatch");
    double acc = 0.0;
    for (int i = 0; i < mu.size(); ++i) {
        const double m = mu[i];
        if (m <= 0.0) continue; // 0 log 0 = 0
        if (ref[i] <= 0.0) return std::numeric_limits<double>::infinity();
        acc += m * std::log(m / ref[i]);
    }
    return std::max(acc, 0.0);
}

double total_variation(const ProbVector& mu, const ProbVector& nu) {
    if (mu.size() != nu.size()) throw UsageError("total_variation: size mismatch");
    double acc = 0.0;
    for (int i = 0; i < mu.size(); ++i) acc += std::abs(mu[i] - nu[i]);
    return acc;
}

std::vector<double> free_energy_trajectory(const FiniteChain& chain, const ProbVector& mu0,
                                           int steps) {
    if (chain.kind != ChainKind::Kernel)
        throw UsageError("free_energy_trajectory: discrete-time kernel required");
    if (steps < 1) throw UsageError("free_energy_trajectory: steps must be positive");
    const ProbVector target = invariant_measure(chain);
    std::vector<double> out;
    out.reserve(steps + 1);
    std::vector<double> mu = mu0.weights;
    for (int n = 0; n <= steps; ++n) {
        out.push_back(relative_entropy(ProbVector{mu}, target));
        if (n < steps) mu = mul_left(mu, chain);
    }
    return out;
}

ProbVector ct_evolve(const FiniteChain& chain, const ProbVector& mu0, double t) {
    if (chain.kind != ChainKind::Generator)
        throw UsageError("ct_evolve: generator chain required");
    if (t < 0.0) throw UsageError("ct_evolve: t must be non-negative");
    if (mu0.size() != chain.size) throw UsageError("ct_evolve: size mismatch");
    if (t == 0.0) return mu0;

    const int s = chain.size;
    double lam = 0.0;
    for (int i = 0; i < s; ++i) lam = std::max(lam, -chain.at(i, i));
    if (lam == 0.0) return mu0;

    // Uniformized kernel K = I + L/lam; mu_t = sum_k pois(lam t, k) mu0 K^k.
    FiniteChain k;
    k.kind = ChainKind::Kernel;
    k.size = s;
    k.matrix.resize(static_cast<std::size_t>(s) * s);
    for (int i = 0; i < s; ++i)
        for (int j = 0; j < s; ++j)
            k.at(i, j) = (i == j ? 1.0 : 0.0) + chain.at(i, j) / lam;

    const double rate = lam * t;
    double logw = -rate; // log Poisson(rate) weight at 0
    std::vector<double> out(s, 0.0);
    std::vector<double> term = mu0.weights;
    double covered = 0.0;
    for (int n = 0;; ++n) {
        const double w = std::exp(logw);
        for (int i = 0; i < s; ++i) out[i] += w * term[i];
        covered += w;
        if (n > rate && (covered >= 1.0 - 1e-13 || w < 1e-20)) break;
        if (n > 1000000) throw NumericError("ct_evolve: uniformization failed to converge");
        term = mul_left(term, k);
        logw += std::log(rate) - std::log1p(n);
    }
    double sum = std::accumulate(out.begin(), out.end(), 0.0);
    for (double& v : out) v /= sum;
    return ProbVector{std::move(out)};
}

FreeEnergyDerivatives free_energy_derivatives(const FiniteChain& chain, const ProbVector& mu_t) {
    if (chain.kind != ChainKind::Generator)
        throw UsageError("free_energy_derivatives: generator chain required");
    if (mu_t.size() != chain.size) throw UsageError("free_energy_derivatives: size mismatch");
    for (int i = 0; i < mu_t.size(); ++i)
        if (!(mu_t[i] > 0.0))
            throw NumericError(
                "free_energy_derivatives: mu_t has a zero entry; mix in a little of the "
                "invariant law first");

    const int s = chain.size;
    const ProbVector inv = invariant_measure(chain);
    std::vector<double> g(s), logg(s);
    for (int i = 0; i < s; ++i) {
        g[i] = mu_t[i] / inv[i];
        logg[i] = std::log(g[i]);
    }

    // Adjoint in ell^2(mu_*): L*(x,y) = L(y,x) mu_*(y)/mu_*(x).
    auto lstar = [&](const std::vector<double>& f) {
        std::vector<double> out(s, 0.0);
        for (int x = 0; x < s; ++x) {
            double acc = 0.0;
            for (int y = 0; y < s; ++y) acc += chain.at(y, x) * inv[y] * f[y];
            out[x] = acc / inv[x];
        }
        return out;
    };
    auto lapply = [&](const std::vector<double>& f) {
        std::vector<double> out(s, 0.0);
        for (int x = 0; x < s; ++x) {
            double acc = 0.0;
            for (int y = 0; y < s; ++y) acc += chain.at(x, y) * f[y];
            out[x] = acc;
        }
        return out;
    };

    const std::vector<double> lsg = lstar(g);
    const std::vector<double> llogg = lapply(logg);
    const std::vector<double> lllogg = lapply(llogg);

    FreeEnergyDerivatives d;
    for (int x = 0; x < s; ++x) {
        d.first += (logg[x] + 1.0) * lsg[x] * inv[x];
        d.second += (g[x] * lllogg[x] + lsg[x] * lsg[x] / g[x]) * inv[x];
    }
    return d;
}

FiniteChain mm_infinity_generator(double lambda, double mu, int truncation) {
    if (!(lambda > 0.0) || !(mu > 0.0))
        throw UsageError("mm_infinity_generator: lambda and mu must be positive");
    if (truncation < 2) throw UsageError("mm_infinity_generator: truncation must be >= 2");
    const int s = truncation + 1;
    FiniteChain chain;
    chain.kind = ChainKind::Generator;
    chain.size = s;
    chain.matrix.assign(static_cast<std::size_t>(s) * s, 0.0);
    for (int x = 0; x < s; ++x) {
        double out = 0.0;
        if (x < truncation) {
            chain.at(x, x + 1) = lambda;
            out += lambda;
        }
        if (x > 0) {
            chain.at(x, x - 1) = x * mu;
            out += x * mu;
        }
        chain.at(x, x) = -out;
    }
    return chain;
}

double decay_rate_regression(const std::vector<double>& trajectory, double dt) {
    if (trajectory.size() < 3) throw UsageError("decay_rate_regression: need >= 3 points");
    if (!(dt > 0.0)) throw UsageError("decay_rate_regression: dt must be positive");
    const int n = static_cast<int>(trajectory.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (int i = 0; i < n; ++i) {
        if (!(trajectory[i] > 0.0))
            throw NumericError("decay_rate_regression: trajectory must be strictly positive");
        const double x = i;
        const double y = std::log(trajectory[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return slope / (-2.0 * dt);
}

void save_chain(const FiniteChain& chain, const std::filesystem::path& path) {
    chain.validate();
    std::FILE* f = std::fopen(path.string().c_str(), "w");
    if (!f) throw NumericError("save_chain: cannot open " + path.string());
    std::fprintf(f, "kind=%s\nS=%d\n", chain.kind == ChainKind::Kernel ? "kernel" : "generator",
                 chain.size);
    for (int i = 0; i < chain.size; ++i) {
        for (int j = 0; j < chain.size; ++j)
            std::fprintf(f, "%s%.17g", j ? " " : "", chain.at(i, j));
        std::fputc('\n', f);
    }
    std::fclose(f);
}

FiniteChain load_chain(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("load_chain: cannot open " + path.string());
    std::string kind_line, size_line;
    std::getline(in, kind_line);
    std::getline(in, size_line);
    FiniteChain chain;
    if (kind_line == "kind=kernel")
        chain.kind = ChainKind::Kernel;
    else if (kind_line == "kind=generator")
        chain.kind = ChainKind::Generator;
    else
        throw UsageError("load_chain: expected kind=kernel|generator, got '" + kind_line + "'");
    if (std::sscanf(size_line.c_str(), "S=%d", &chain.size) != 1 || chain.size < 2)
        throw UsageError("load_chain: malformed size line '" + size_line + "'");
    chain.matrix.reserve(static_cast<std::size_t>(chain.size) * chain.size);
    for (int i = 0; i < chain.size; ++i) {
        std::string line;
        if (!std::getline(in, line)) throw UsageError("load_chain: truncated matrix");
        std::istringstream ls(line);
        for (int j = 0; j < chain.size; ++j) {
            double v;
            if (!(ls >> v)) throw UsageError("load_chain: malformed matrix row");
            chain.matrix.push_back(v);
        }
    }
    chain.validate();
    return chain;
}

} // namespace egl
