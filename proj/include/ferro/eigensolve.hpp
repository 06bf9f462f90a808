#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "ferro/basis.hpp"
#include "ferro/config.hpp"
#include "ferro/errors.hpp"
#include "ferro/graph.hpp"
#include "ferro/operators.hpp"
#include "ferro/rng.hpp"

namespace ferro {

enum class SolveMode { dense, krylov };

inline const char* to_string(SolveMode m) {
    return m == SolveMode::dense ? "dense" : "krylov";
}

struct SolverPolicy {
    std::size_t dense_cap = 4096;    // largest sector solved densely
    int max_lanczos_iters = 600;
    std::uint64_t seed = 1;
    int threads = 1;                 // sector-level workers
    Tolerances tol{};
    Limits limits{};
};

// Kernel membership cut, scaled by an upper bound on ||H||.
inline double energy_threshold(const CouplingGraph& g, const Tolerances& tol = {}) {
    return tol.energy_factor * scale_of(g.coupling_sum());
}

// Smallest spectral gap the degeneracy count is allowed to rest on.
inline double gap_threshold(const CouplingGraph& g, const Tolerances& tol = {}) {
    return tol.gap_factor * g.min_coupling();
}

struct SectorSpectrum {
    int sites = 0;
    int down = 0;
    SolveMode mode = SolveMode::dense;
    std::vector<double> eigenvalues;        // ascending; all (dense) or lowest m (krylov)
    std::vector<StateVector> eigenvectors;  // lowest few, sector-bound
    std::vector<double> residual_norms;     // ||Hv - lambda v|| per stored vector
};

namespace detail {

using Amps = std::vector<cplx>;

inline double amps_norm(const Amps& v) {
    double s = 0.0;
    for (const cplx& a : v) s += std::norm(a);
    return std::sqrt(s);
}

inline cplx amps_dot(const Amps& a, const Amps& b) {
    cplx s = 0.0;
    for (std::size_t p = 0; p < a.size(); ++p) s += std::conj(a[p]) * b[p];
    return s;
}

inline void amps_axpy(cplx alpha, const Amps& x, Amps& y) {
    for (std::size_t p = 0; p < x.size(); ++p) y[p] += alpha * x[p];
}

inline void orthogonalize_against(Amps& w, const std::vector<const Amps*>& set) {
    for (const Amps* u : set) amps_axpy(-amps_dot(*u, w), *u, w);
}

struct LanczosPair {
    double value = 0.0;
    Amps vector;
    double residual = 0.0;
    int iterations = 0;
};

// Lowest eigenpair of a Hermitian operator restricted to the orthogonal
// complement of `deflate`. Lanczos with full reorthogonalization (two
// passes over every stored vector); breakdown is handled by recording a
// zero off-diagonal and continuing from a fresh random direction, which
// keeps the tridiagonal matrix valid (it becomes block diagonal).
inline LanczosPair lanczos_lowest_one(
    const std::function<void(const Amps&, Amps&)>& apply_fn, std::size_t dim,
    Rng& rng, double resid_tol, int max_iters,
    const std::vector<const Amps*>& deflate) {
    const std::size_t effective_dim = dim - deflate.size();
    if (effective_dim == 0) {
        throw InvalidParameter("deflation space already spans the sector");
    }

    auto random_direction = [&]() {
        Amps v(dim);
        for (cplx& a : v) a = cplx{rng.normal(), rng.normal()};
        return v;
    };
    auto fresh_orthonormal = [&](const std::vector<Amps>& basis) {
        for (int attempt = 0; attempt < 16; ++attempt) {
            Amps v = random_direction();
            std::vector<const Amps*> against = deflate;
            for (const Amps& u : basis) against.push_back(&u);
            orthogonalize_against(v, against);
            orthogonalize_against(v, against);
            const double n = amps_norm(v);
            if (n > 1e-8) {
                for (cplx& a : v) a /= n;
                return v;
            }
        }
        throw EigensolverFailure("could not find a start direction outside the deflation space");
    };

    std::vector<Amps> basis;
    basis.push_back(fresh_orthonormal(basis));
    std::vector<double> alphas;
    std::vector<double> betas;  // betas[t] couples basis[t] and basis[t+1]
    Amps w(dim);

    auto ritz_lowest = [&](Eigen::VectorXd& coeffs) {
        const auto order = static_cast<Eigen::Index>(alphas.size());
        Eigen::VectorXd diag(order), sub(std::max<Eigen::Index>(order - 1, 0));
        for (Eigen::Index t = 0; t < order; ++t) diag[t] = alphas[static_cast<std::size_t>(t)];
        for (Eigen::Index t = 0; t + 1 < order; ++t) sub[t] = betas[static_cast<std::size_t>(t)];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
        es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
        if (es.info() != Eigen::Success) {
            throw EigensolverFailure("tridiagonal eigendecomposition failed");
        }
        coeffs = es.eigenvectors().col(0);
        return es.eigenvalues()[0];
    };

    auto assemble = [&](const Eigen::VectorXd& coeffs) {
        Amps x(dim, cplx{0.0, 0.0});
        for (std::size_t t = 0; t < basis.size(); ++t) {
            amps_axpy(cplx{coeffs[static_cast<Eigen::Index>(t)], 0.0}, basis[t], x);
        }
        const double n = amps_norm(x);
        for (cplx& a : x) a /= n;
        return x;
    };
    auto explicit_residual = [&](const Amps& x, double theta) {
        Amps hx(dim);
        apply_fn(x, hx);
        amps_axpy(cplx{-theta, 0.0}, x, hx);
        return amps_norm(hx);
    };

    const double breakdown = 1e-13 * std::max(1.0, resid_tol / 1e-9);
    for (int iter = 0; iter < max_iters; ++iter) {
        apply_fn(basis.back(), w);
        alphas.push_back(std::real(amps_dot(basis.back(), w)));
        std::vector<const Amps*> against = deflate;
        for (const Amps& u : basis) against.push_back(&u);
        orthogonalize_against(w, against);
        orthogonalize_against(w, against);
        const double beta = amps_norm(w);

        Eigen::VectorXd coeffs;
        const double theta = ritz_lowest(coeffs);
        const double resid_est =
            beta * std::abs(coeffs[static_cast<Eigen::Index>(basis.size()) - 1]);
        const bool exhausted = basis.size() == effective_dim;

        if (resid_est <= resid_tol || beta <= breakdown || exhausted) {
            Amps x = assemble(coeffs);
            const double resid = explicit_residual(x, theta);
            if (resid <= resid_tol || exhausted) {
                if (resid > resid_tol) {
                    throw NoConvergence("residual " + std::to_string(resid) +
                                        " above tolerance with the sector exhausted");
                }
                return {theta, std::move(x), resid, iter + 1};
            }
            if (beta <= breakdown) {
                // Invariant subspace hit before convergence: continue in a
                // fresh random direction with a zero coupling.
                betas.push_back(0.0);
                basis.push_back(fresh_orthonormal(basis));
                continue;
            }
        }
        if (exhausted) {
            // Converged path above always returns once exhausted.
            throw InternalInvariantViolation("lanczos exhausted the sector without returning");
        }
        betas.push_back(beta);
        Amps next = std::move(w);
        for (cplx& a : next) a /= beta;
        basis.push_back(std::move(next));
        w.assign(dim, cplx{0.0, 0.0});
    }
    throw NoConvergence("lanczos did not converge within " + std::to_string(max_iters) +
                        " iterations");
}

// Lowest `count` eigenpairs via repeated single-pair solves, each deflated
// against everything already converged.
inline std::vector<LanczosPair> lanczos_lowest(
    const std::function<void(const Amps&, Amps&)>& apply_fn, std::size_t dim,
    int count, std::uint64_t seed, double resid_tol, int max_iters,
    const std::vector<Amps>& pre_deflate = {}) {
    std::vector<LanczosPair> found;
    for (int t = 0; t < count; ++t) {
        Rng rng(Rng::derive_seed(seed, static_cast<std::uint64_t>(t)));
        std::vector<const Amps*> deflate;
        for (const Amps& u : pre_deflate) deflate.push_back(&u);
        for (const LanczosPair& p : found) deflate.push_back(&p.vector);
        found.push_back(
            lanczos_lowest_one(apply_fn, dim, rng, resid_tol, max_iters, deflate));
    }
    std::sort(found.begin(), found.end(),
              [](const LanczosPair& a, const LanczosPair& b) { return a.value < b.value; });
    return found;
}

inline std::function<void(const Amps&, Amps&)> apply_adapter(const ImplicitOperator& op) {
    return [&op](const Amps& x, Amps& y) {
        StateVector xs;
        xs.sites = op.sites();
        xs.down = op.sector_down();
        xs.amplitudes = x;
        StateVector ys = op.apply(xs);
        y = std::move(ys.amplitudes);
    };
}

struct DenseSolve {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
};

inline DenseSolve dense_solve(const ImplicitOperator& op, const Limits& limits,
                              bool want_vectors) {
    const Eigen::MatrixXd m = materialize_dense(op, limits);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        m, want_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) {
        throw EigensolverFailure("dense eigendecomposition failed");
    }
    DenseSolve out;
    out.values = es.eigenvalues();
    if (want_vectors) out.vectors = es.eigenvectors();
    return out;
}

inline StateVector column_as_state(const ImplicitOperator& op, const Eigen::MatrixXd& vecs,
                                   Eigen::Index col) {
    StateVector v;
    v.sites = op.sites();
    v.down = op.sector_down();
    v.amplitudes.resize(static_cast<std::size_t>(vecs.rows()));
    for (Eigen::Index r = 0; r < vecs.rows(); ++r) {
        v.amplitudes[static_cast<std::size_t>(r)] = cplx{vecs(r, col), 0.0};
    }
    return v;
}

inline double state_residual(const ImplicitOperator& op, const StateVector& v, double value) {
    StateVector hv = op.apply(v);
    double s = 0.0;
    for (std::size_t p = 0; p < hv.size(); ++p) {
        s += std::norm(hv.amplitudes[p] - value * v.amplitudes[p]);
    }
    return std::sqrt(s);
}

} // namespace detail

// Full spectrum of a sector small enough to materialize. Eigenvectors and
// explicit matrix-free residuals are stored for the lowest `keep_lowest`
// pairs.
inline SectorSpectrum dense_spectrum(const ImplicitOperator& op, std::size_t keep_lowest = 0,
                                     const Limits& limits = {}) {
    const auto solve = detail::dense_solve(op, limits, keep_lowest > 0);
    SectorSpectrum spec;
    spec.sites = op.sites();
    spec.down = op.sector_down();
    spec.mode = SolveMode::dense;
    spec.eigenvalues.assign(solve.values.data(), solve.values.data() + solve.values.size());
    const std::size_t keep = std::min<std::size_t>(keep_lowest, spec.eigenvalues.size());
    for (std::size_t t = 0; t < keep; ++t) {
        StateVector v = detail::column_as_state(op, solve.vectors, static_cast<Eigen::Index>(t));
        spec.residual_norms.push_back(detail::state_residual(op, v, spec.eigenvalues[t]));
        spec.eigenvectors.push_back(std::move(v));
    }
    return spec;
}

// Lowest `count` eigenpairs by Lanczos with full reorthogonalization.
// Deterministic for a fixed seed; degeneracies are resolved by restarting
// in the orthogonal complement of every converged vector.
inline SectorSpectrum krylov_lowest(const ImplicitOperator& op, int count,
                                    std::uint64_t seed, const SolverPolicy& policy = {}) {
    if (count < 2) throw InvalidParameter("krylov_lowest needs count >= 2");
    const std::size_t dim = op.dimension();
    if (dim < 2) throw InvalidParameter("krylov_lowest needs a sector of size > 1");
    const int nev = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(count), dim));
    const double resid_tol = policy.tol.residual_factor * op.residual_scale();
    auto pairs = detail::lanczos_lowest(detail::apply_adapter(op), dim, nev, seed,
                                        resid_tol, policy.max_lanczos_iters);
    SectorSpectrum spec;
    spec.sites = op.sites();
    spec.down = op.sector_down();
    spec.mode = SolveMode::krylov;
    for (auto& p : pairs) {
        spec.eigenvalues.push_back(p.value);
        spec.residual_norms.push_back(p.residual);
        StateVector v;
        v.sites = op.sites();
        v.down = op.sector_down();
        v.amplitudes = std::move(p.vector);
        spec.eigenvectors.push_back(std::move(v));
    }
    return spec;
}

// Per-sector summary of the kernel search.
struct SectorScan {
    int down = 0;
    std::size_t dimension = 0;
    SolveMode mode = SolveMode::dense;
    std::size_t kernel_count = 0;
    double min_eigenvalue = 0.0;
    std::optional<double> next_eigenvalue;  // lowest value above the kernel cut
    double max_kernel_residual = 0.0;
};

// Orthonormal basis of the numerical kernel of H, embedded in the full
// 2^N space, with per-sector provenance.
struct GroundSpace {
    int sites = 0;
    double energy_threshold = 0.0;
    std::vector<StateVector> vectors;
    std::map<int, std::size_t> per_sector_counts;
    std::vector<SectorScan> scans;

    std::size_t dimension() const { return vectors.size(); }
};

namespace detail {

inline SectorScan scan_sector(const CouplingGraph& g, int down, const SolverPolicy& policy,
                              double e_thr, double g_thr,
                              std::vector<StateVector>& kernel_out) {
    const int n = g.vertex_count();
    SectorPtr basis = enumerate_sector(n, down, policy.limits);
    const ImplicitOperator h = ImplicitOperator::hamiltonian(g, basis);
    const std::size_t dim = basis->size();

    SectorScan scan;
    scan.down = down;
    scan.dimension = dim;

    std::vector<StateVector> kernel;
    if (dim <= policy.dense_cap) {
        scan.mode = SolveMode::dense;
        Limits dense_limits = policy.limits;
        dense_limits.dense_cap = policy.dense_cap;
        const auto solve = dense_solve(h, dense_limits, true);
        scan.min_eigenvalue = solve.values[0];
        std::size_t kc = 0;
        while (kc < dim && solve.values[static_cast<Eigen::Index>(kc)] < e_thr) ++kc;
        scan.kernel_count = kc;
        if (kc < dim) scan.next_eigenvalue = solve.values[static_cast<Eigen::Index>(kc)];
        for (std::size_t t = 0; t < kc; ++t) {
            StateVector v = column_as_state(h, solve.vectors, static_cast<Eigen::Index>(t));
            scan.max_kernel_residual = std::max(
                scan.max_kernel_residual,
                state_residual(h, v, solve.values[static_cast<Eigen::Index>(t)]));
            kernel.push_back(std::move(v));
        }
    } else {
        scan.mode = SolveMode::krylov;
        const double resid_tol = policy.tol.residual_factor * h.residual_scale();
        const auto apply_fn = apply_adapter(h);
        const std::uint64_t sector_seed =
            Rng::derive_seed(policy.seed, static_cast<std::uint64_t>(down));
        // One eigenpair at a time, deflating what's already converged,
        // until the newest value clears the kernel cut.
        const std::size_t kernel_cap = 64;
        std::vector<Amps> converged;
        scan.min_eigenvalue = std::numeric_limits<double>::infinity();
        while (true) {
            if (converged.size() >= dim) break;  // whole sector in the kernel
            if (converged.size() > kernel_cap) {
                throw EigensolverFailure(
                    "kernel dimension exceeded " + std::to_string(kernel_cap) +
                    " in sector k=" + std::to_string(down) + "; refusing to guess");
            }
            Rng rng(Rng::derive_seed(sector_seed, converged.size()));
            std::vector<const Amps*> deflate;
            for (const Amps& u : converged) deflate.push_back(&u);
            LanczosPair pair = lanczos_lowest_one(apply_fn, dim, rng, resid_tol,
                                                  policy.max_lanczos_iters, deflate);
            scan.min_eigenvalue = std::min(scan.min_eigenvalue, pair.value);
            if (pair.value < e_thr) {
                scan.max_kernel_residual = std::max(scan.max_kernel_residual, pair.residual);
                StateVector v;
                v.sites = n;
                v.down = down;
                v.amplitudes = pair.vector;
                kernel.push_back(std::move(v));
                converged.push_back(std::move(pair.vector));
            } else {
                scan.next_eigenvalue = pair.value;
                break;
            }
        }
        scan.kernel_count = kernel.size();
    }

    // The kernel count is only trusted when the first excluded eigenvalue
    // clears the gap cut; anything in between is a loud failure, not a
    // guess.
    if (scan.next_eigenvalue && *scan.next_eigenvalue <= g_thr) {
        throw EigensolverFailure(
            "degeneracy gap test inconclusive in sector k=" + std::to_string(down) +
            ": next eigenvalue " + std::to_string(*scan.next_eigenvalue) +
            " below gap threshold " + std::to_string(g_thr));
    }

    kernel_out.reserve(kernel.size());
    for (StateVector& v : kernel) {
        kernel_out.push_back(embed_full(*basis, v, policy.limits));
    }
    return scan;
}

} // namespace detail

// Kernel of H across every S^z sector. Sectors are independent and may be
// scanned by parallel workers; the merge is by sector index, so the result
// does not depend on scheduling.
inline GroundSpace extract_ground_space(const CouplingGraph& g,
                                        const SolverPolicy& policy = {}) {
    const int n = g.vertex_count();
    const double e_thr = energy_threshold(g, policy.tol);
    const double g_thr = gap_threshold(g, policy.tol);

    std::vector<SectorScan> scans(static_cast<std::size_t>(n) + 1);
    std::vector<std::vector<StateVector>> kernels(static_cast<std::size_t>(n) + 1);

    const int workers = std::max(1, std::min<int>(policy.threads, n + 1));
    if (workers == 1) {
        for (int k = 0; k <= n; ++k) {
            scans[static_cast<std::size_t>(k)] =
                detail::scan_sector(g, k, policy, e_thr, g_thr, kernels[static_cast<std::size_t>(k)]);
        }
    } else {
        std::atomic<int> cursor{0};
        std::exception_ptr first_error;
        std::mutex error_mutex;
        auto worker = [&]() {
            while (true) {
                const int k = cursor.fetch_add(1);
                if (k > n) return;
                try {
                    scans[static_cast<std::size_t>(k)] = detail::scan_sector(
                        g, k, policy, e_thr, g_thr, kernels[static_cast<std::size_t>(k)]);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        };
        std::vector<std::thread> pool;
        for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
        if (first_error) std::rethrow_exception(first_error);
    }

    GroundSpace gs;
    gs.sites = n;
    gs.energy_threshold = e_thr;
    gs.scans = std::move(scans);
    for (int k = 0; k <= n; ++k) {
        gs.per_sector_counts[k] = kernels[static_cast<std::size_t>(k)].size();
        for (StateVector& v : kernels[static_cast<std::size_t>(k)]) {
            gs.vectors.push_back(std::move(v));
        }
    }

    // Modified Gram-Schmidt with a second pass. Vectors from different
    // sectors have disjoint support, so this mostly polishes within-sector
    // orthonormality.
    std::vector<StateVector> ortho;
    for (StateVector& v : gs.vectors) {
        for (int pass = 0; pass < 2; ++pass) {
            for (const StateVector& u : ortho) {
                const cplx overlap = dot(u, v);
                for (std::size_t p = 0; p < v.size(); ++p) {
                    v.amplitudes[p] -= overlap * u.amplitudes[p];
                }
            }
        }
        const double nrm = v.norm();
        if (nrm < 0.5) {
            throw InternalInvariantViolation(
                "kernel vectors became linearly dependent during orthonormalization");
        }
        for (cplx& a : v.amplitudes) a /= nrm;
        ortho.push_back(std::move(v));
    }
    gs.vectors = std::move(ortho);
    return gs;
}

} // namespace ferro
