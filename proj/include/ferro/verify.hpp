#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ferro/basis.hpp"
#include "ferro/config.hpp"
#include "ferro/eigensolve.hpp"
#include "ferro/errors.hpp"
#include "ferro/graph.hpp"
#include "ferro/operators.hpp"
#include "ferro/rng.hpp"
#include "ferro/version.hpp"

namespace ferro {

using EvidenceValue = std::variant<bool, std::int64_t, double, std::string>;

struct ClauseResult {
    std::string name;
    bool pass = false;
    std::vector<std::pair<std::string, EvidenceValue>> evidence;

    void add(std::string key, EvidenceValue value) {
        evidence.emplace_back(std::move(key), std::move(value));
    }
};

struct GraphSummary {
    int n = 0;
    std::size_t edges = 0;
};

// Witness data for the span clause: one Haar-rotated product state per
// expected kernel dimension, plus the numbers that certify span equality.
struct SpanCertificate {
    std::vector<Su2Matrix> rotations;
    std::vector<cplx> alpha;            // least-squares coefficients for one ground vector
    double alpha_residual = 0.0;
    double max_membership_residual = 0.0;
    double gram_min_singular_value = 0.0;
    double projector_distance = 0.0;
    int attempts = 1;
    bool dimension_match = false;
};

namespace detail {

inline Eigen::VectorXcd to_eigen(const StateVector& v) {
    Eigen::VectorXcd out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t p = 0; p < v.size(); ++p) {
        out[static_cast<Eigen::Index>(p)] = v.amplitudes[p];
    }
    return out;
}

inline Eigen::MatrixXcd ground_matrix(const GroundSpace& gs) {
    const Eigen::Index dim =
        gs.vectors.empty() ? 0 : static_cast<Eigen::Index>(gs.vectors[0].size());
    Eigen::MatrixXcd a(dim, static_cast<Eigen::Index>(gs.vectors.size()));
    for (std::size_t c = 0; c < gs.vectors.size(); ++c) {
        a.col(static_cast<Eigen::Index>(c)) = to_eigen(gs.vectors[c]);
    }
    return a;
}

// Largest singular value of A - B(B^H A): how far span(A) sticks out of
// span(B), for inputs with orthonormal columns. The residual is formed
// explicitly and measured with a thin SVD; going through I - C^H C instead
// would square the small angles and bottom out near sqrt(machine epsilon).
inline double one_sided_projector_distance(const Eigen::MatrixXcd& a,
                                           const Eigen::MatrixXcd& b) {
    const Eigen::MatrixXcd residual = a - b * (b.adjoint() * a);
    const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(residual);
    return svd.singularValues().size() == 0 ? 0.0 : svd.singularValues()(0);
}

} // namespace detail

// Clause a: every kernel vector is an eigenvector of S^2 with the maximal
// eigenvalue (N/2)(N/2+1).
inline ClauseResult verify_clause_a(const GroundSpace& gs, int n,
                                    const Tolerances& tol = {}) {
    ClauseResult r;
    r.name = "max_total_spin";
    const double smax = 0.25 * n * (n + 2.0);
    const double threshold = tol.spin_value_rel * smax;
    r.add("s_squared_expected", smax);
    r.add("threshold", threshold);
    if (gs.vectors.empty()) {
        r.add("note", std::string("ground space is empty"));
        return r;
    }
    const ImplicitOperator s2 = ImplicitOperator::total_spin_squared(n);
    double max_value_dev = 0.0;
    double max_vector_resid = 0.0;
    for (const StateVector& v : gs.vectors) {
        const StateVector s2v = s2.apply(v);
        max_value_dev = std::max(max_value_dev, std::abs(std::real(dot(v, s2v)) - smax));
        double resid_sq = 0.0;
        for (std::size_t p = 0; p < v.size(); ++p) {
            resid_sq += std::norm(s2v.amplitudes[p] - smax * v.amplitudes[p]);
        }
        max_vector_resid = std::max(max_vector_resid, std::sqrt(resid_sq));
    }
    r.add("max_value_deviation", max_value_dev);
    r.add("max_vector_residual", max_vector_resid);
    r.pass = max_value_dev < threshold && max_vector_resid < threshold;
    return r;
}

// Clause b: every kernel vector is an eigenvector of s_i . s_j with
// eigenvalue 1/4 for every pair, edges and non-edges alike.
inline ClauseResult verify_clause_b(const GroundSpace& gs, int n,
                                    const Tolerances& tol = {}) {
    ClauseResult r;
    r.name = "pairwise_alignment";
    r.add("pair_count", static_cast<std::int64_t>(n) * (n - 1) / 2);
    r.add("threshold", tol.alignment);
    if (gs.vectors.empty()) {
        r.add("note", std::string("ground space is empty"));
        return r;
    }
    const ImplicitOperator s2 = ImplicitOperator::total_spin_squared(n);
    double max_resid = 0.0;
    double max_consistency_dev = 0.0;
    for (const StateVector& v : gs.vectors) {
        double pair_expectation_sum = 0.0;
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                const ImplicitOperator sij = ImplicitOperator::pair_coupling(i, j, n);
                const StateVector sv = sij.apply(v);
                pair_expectation_sum += std::real(dot(v, sv));
                double resid_sq = 0.0;
                for (std::size_t p = 0; p < v.size(); ++p) {
                    resid_sq += std::norm(sv.amplitudes[p] - 0.25 * v.amplitudes[p]);
                }
                max_resid = std::max(max_resid, std::sqrt(resid_sq));
            }
        }
        // S^2 = 3N/4 + 2 sum_{i<j} s_i . s_j ties clause b back to clause a.
        const double s2_from_pairs = 0.75 * n + 2.0 * pair_expectation_sum;
        const double s2_direct = std::real(dot(v, s2.apply(v)));
        max_consistency_dev =
            std::max(max_consistency_dev, std::abs(s2_from_pairs - s2_direct));
    }
    r.add("max_residual", max_resid);
    r.add("s_squared_consistency_deviation", max_consistency_dev);
    r.pass = max_resid < tol.alignment;
    return r;
}

// Clause c: N+1 Haar-rotated product states lie in the kernel and span it.
// Nearly dependent samples are redrawn a bounded number of times.
inline SpanCertificate make_span_certificate(const GroundSpace& gs, int n,
                                             std::uint64_t seed,
                                             const Tolerances& tol = {},
                                             const Limits& limits = {}) {
    if (gs.vectors.empty()) {
        throw InvalidParameter("span certificate needs a nonempty ground space");
    }
    const int samples = n + 1;
    const Eigen::MatrixXcd a = detail::ground_matrix(gs);
    const Eigen::Index dim = a.rows();

    constexpr int kMaxAttempts = 5;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        Rng rng(Rng::derive_seed(seed, static_cast<std::uint64_t>(attempt)));
        SpanCertificate cert;
        cert.attempts = attempt + 1;
        cert.dimension_match = gs.vectors.size() == static_cast<std::size_t>(samples);

        Eigen::MatrixXcd w(dim, samples);
        for (int k = 0; k < samples; ++k) {
            const Su2Matrix u = haar_su2(rng);
            cert.rotations.push_back(u);
            w.col(k) = detail::to_eigen(rotated_product_state(u, n, tol, limits));
        }

        const Eigen::MatrixXcd gram = w.adjoint() * w;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ges(gram, Eigen::EigenvaluesOnly);
        if (ges.info() != Eigen::Success) {
            throw EigensolverFailure("gram eigendecomposition failed");
        }
        cert.gram_min_singular_value = std::max(0.0, ges.eigenvalues().minCoeff());
        if (cert.gram_min_singular_value <= tol.gram_min_sv) continue;  // resample

        for (int k = 0; k < samples; ++k) {
            const Eigen::VectorXcd wk = w.col(k);
            const double resid = (wk - a * (a.adjoint() * wk)).norm();
            cert.max_membership_residual = std::max(cert.max_membership_residual, resid);
        }

        const Eigen::MatrixXcd b =
            Eigen::HouseholderQR<Eigen::MatrixXcd>(w).householderQ() *
            Eigen::MatrixXcd::Identity(dim, samples);
        cert.projector_distance =
            std::max(detail::one_sided_projector_distance(a, b),
                     detail::one_sided_projector_distance(b, a));

        const Eigen::VectorXcd target = detail::to_eigen(gs.vectors.front());
        Eigen::VectorXcd alpha = w.colPivHouseholderQr().solve(target);
        cert.alpha_residual = (w * alpha - target).norm();
        cert.alpha.assign(alpha.data(), alpha.data() + alpha.size());
        return cert;
    }
    throw DegenerateRotationSample("gram matrix stayed near-singular after " +
                                   std::to_string(kMaxAttempts) + " rotation samples");
}

inline ClauseResult verify_clause_c(const GroundSpace& gs, int n, std::uint64_t seed,
                                    const Tolerances& tol = {}, const Limits& limits = {}) {
    ClauseResult r;
    r.name = "product_state_span";
    r.add("sample_count", static_cast<std::int64_t>(n) + 1);
    r.add("membership_threshold", tol.span_membership);
    r.add("gram_threshold", tol.gram_min_sv);
    r.add("projector_threshold", tol.projector);
    if (gs.vectors.empty()) {
        r.add("note", std::string("ground space is empty"));
        return r;
    }
    const SpanCertificate cert = make_span_certificate(gs, n, seed, tol, limits);
    r.add("attempts", static_cast<std::int64_t>(cert.attempts));
    r.add("gram_min_singular_value", cert.gram_min_singular_value);
    r.add("max_membership_residual", cert.max_membership_residual);
    r.add("projector_distance", cert.projector_distance);
    r.add("alpha_residual", cert.alpha_residual);
    r.add("dimension_match", cert.dimension_match);
    r.pass = cert.dimension_match &&
             cert.gram_min_singular_value > tol.gram_min_sv &&
             cert.max_membership_residual < tol.span_membership &&
             cert.projector_distance < tol.projector;
    return r;
}

// Lemma: at least two vertices can be removed without disconnecting the
// graph; the constructive pair is revalidated and a full scan counts every
// removable vertex.
inline ClauseResult verify_lemma(const CouplingGraph& g) {
    ClauseResult r;
    r.name = "lemma_pair";
    const auto [i0, j0] = find_removable_pair(g);
    const bool pair_valid = i0 != j0 && is_connected_without(g, i0) &&
                            is_connected_without(g, j0);
    std::int64_t removable = 0;
    for (int v = 0; v < g.vertex_count(); ++v) {
        if (is_connected_without(g, v)) ++removable;
    }
    r.add("i0", static_cast<std::int64_t>(i0));
    r.add("j0", static_cast<std::int64_t>(j0));
    r.add("pair_valid", pair_valid);
    r.add("removable_count", removable);
    r.pass = pair_valid && removable >= 2;
    return r;
}

namespace detail {

inline std::int64_t isqrt64(std::int64_t x) {
    if (x < 0) return -1;
    auto r = static_cast<std::int64_t>(std::sqrt(static_cast<double>(x)));
    while (r > 0 && r * r > x) --r;
    while ((r + 1) * (r + 1) <= x) ++r;
    return r;
}

inline bool is_perfect_square(std::int64_t x, std::int64_t& root) {
    if (x < 0) return false;
    root = isqrt64(x);
    return root * root == x;
}

} // namespace detail

// Branch-by-branch record of the exclusion argument for N+1 spins with one
// pinned pair eigenvalue. All arithmetic is exact integer arithmetic on
// t = 2S; admissible t have the parity of N+1 and lie in [0, N+1].
struct ExclusionOutcome {
    bool minus_branch_excluded = false;  // 4S(S+1) = N^2+4N-5 has no admissible S
    bool reduced_form_excluded = false;  // the (n-k)(n+k+2)=2 or k(k+1)=n(n+3) form
    bool plus_branch_unique = false;     // 4S(S+1) = N^2+4N+3 only at S=(N+1)/2

    bool all() const {
        return minus_branch_excluded && reduced_form_excluded && plus_branch_unique;
    }
};

inline ExclusionOutcome exclusion_details(std::int64_t n) {
    if (n < 2) throw InvalidN("exclusion arithmetic needs N >= 2");
    ExclusionOutcome out;

    // Pair eigenvalue -3/4: 4S(S+1) = N^2+4N-5, i.e. (2S+1)^2 = N^2+4N-4.
    {
        std::int64_t root = 0;
        bool admissible = false;
        if (detail::is_perfect_square(n * n + 4 * n - 4, root) && root >= 1) {
            const std::int64_t t = root - 1;
            admissible = t <= n + 1 && (((t ^ (n + 1)) & 1) == 0);
        }
        out.minus_branch_excluded = !admissible;
    }

    // The same branch in reduced form.
    if (n % 2 == 0) {
        // N = 2n', S = k+1/2: (n'-k)(n'+k+2) = 2. Both factors are positive
        // for admissible k in [0, n'], and they sum to 2n'+2; the positive
        // factorizations of 2 sum to 3, so parity alone decides.
        const std::int64_t half = n / 2;
        bool solvable = false;
        for (std::int64_t d1 : {std::int64_t{1}, std::int64_t{2}}) {
            const std::int64_t d2 = 2 / d1;
            if (d1 + d2 != 2 * half + 2) continue;
            const std::int64_t k = half - d1;
            if (k >= 0) solvable = true;
        }
        out.reduced_form_excluded = !solvable;
    } else {
        // N = 2n'+1, S = k: k(k+1) = n'(n'+3), i.e. (2k+1)^2 = 4n'(n'+3)+1.
        const std::int64_t half = (n - 1) / 2;
        std::int64_t root = 0;
        bool solvable = false;
        if (detail::is_perfect_square(4 * half * (half + 3) + 1, root) &&
            (root & 1) == 1) {
            solvable = (root - 1) / 2 <= half + 1;  // admissible k only
        }
        out.reduced_form_excluded = !solvable;
    }

    // Pair eigenvalue +1/4: 4S(S+1) = N^2+4N+3, i.e. (2S+1)^2 = (N+2)^2,
    // so t = 2S = N+1 is the only candidate (t(t+2) is strictly increasing),
    // and it is admissible.
    {
        const std::int64_t t = n + 1;
        out.plus_branch_unique =
            t * (t + 2) == n * n + 4 * n + 3 && t <= n + 1 &&
            (((t ^ (n + 1)) & 1) == 0);
    }
    return out;
}

inline bool exclusion_arithmetic(std::int64_t n) { return exclusion_details(n).all(); }

inline ClauseResult verify_exclusion(int n) {
    ClauseResult r;
    r.name = "exclusion_arithmetic";
    const ExclusionOutcome out = exclusion_details(n);
    r.add("n", static_cast<std::int64_t>(n));
    r.add("minus_branch_excluded", out.minus_branch_excluded);
    r.add("reduced_form_excluded", out.reduced_form_excluded);
    r.add("plus_branch_unique", out.plus_branch_unique);
    r.pass = out.all();
    return r;
}

// Ground energy: the global minimum over sectors sits in [-psd_slack,
// energy_threshold) and the kernel is nonempty.
inline ClauseResult verify_ground_energy(const GroundSpace& gs,
                                         const Tolerances& tol = {}) {
    ClauseResult r;
    r.name = "ground_energy_zero";
    double min_eig = std::numeric_limits<double>::infinity();
    double max_kernel_resid = 0.0;
    for (const SectorScan& s : gs.scans) {
        min_eig = std::min(min_eig, s.min_eigenvalue);
        max_kernel_resid = std::max(max_kernel_resid, s.max_kernel_residual);
    }
    r.add("min_eigenvalue", min_eig);
    r.add("energy_threshold", gs.energy_threshold);
    r.add("psd_slack", tol.psd_slack);
    r.add("kernel_dimension", static_cast<std::int64_t>(gs.dimension()));
    r.add("max_kernel_residual", max_kernel_resid);
    r.pass = gs.dimension() >= 1 && min_eig >= -tol.psd_slack &&
             min_eig < gs.energy_threshold;
    return r;
}

// Degeneracy: kernel dimension N+1 with exactly one kernel vector per
// sector, each sector's count protected by its gap check.
inline ClauseResult verify_degeneracy(const GroundSpace& gs, int n) {
    ClauseResult r;
    r.name = "degeneracy_N_plus_1";
    const std::int64_t expected = static_cast<std::int64_t>(n) + 1;
    bool per_sector_ok = gs.per_sector_counts.size() == static_cast<std::size_t>(n) + 1;
    for (const auto& [k, count] : gs.per_sector_counts) {
        if (count != 1) per_sector_ok = false;
    }
    double min_gap = std::numeric_limits<double>::infinity();
    for (const SectorScan& s : gs.scans) {
        if (s.next_eigenvalue) min_gap = std::min(min_gap, *s.next_eigenvalue);
    }
    r.add("kernel_dimension", static_cast<std::int64_t>(gs.dimension()));
    r.add("expected", expected);
    r.add("per_sector_counts_all_one", per_sector_ok);
    if (min_gap < std::numeric_limits<double>::infinity()) {
        r.add("min_gap_above_kernel", min_gap);
    }
    r.pass = gs.dimension() == static_cast<std::size_t>(expected) && per_sector_ok;
    return r;
}

// Every edge term (J/2)(1/4 - s_i . s_j) is PSD with spectrum
// {0, 0, 0, J/2}; checked densely once per distinct coupling value.
inline ClauseResult verify_edge_psd(const CouplingGraph& g, const Tolerances& tol = {}) {
    ClauseResult r;
    r.name = "edge_psd";
    std::set<double> distinct;
    for (const Edge& e : g.edges()) distinct.insert(e.coupling);
    double max_dev = 0.0;
    double threshold = 0.0;
    for (double coupling : distinct) {
        max_dev = std::max(max_dev, edge_term_spectrum_deviation(coupling));
        threshold = std::max(threshold, tol.edge_spectrum * scale_of(coupling));
    }
    r.add("distinct_couplings", static_cast<std::int64_t>(distinct.size()));
    r.add("max_spectrum_deviation", max_dev);
    r.add("threshold", threshold);
    r.pass = max_dev < threshold;
    return r;
}

struct VerificationReport {
    GraphSummary graph;
    std::vector<ClauseResult> clauses;
    std::vector<std::pair<std::string, double>> thresholds;
    std::vector<std::pair<std::string, double>> timings_ms;
    std::string version = kVersion;

    bool all_pass() const {
        for (const ClauseResult& c : clauses) {
            if (!c.pass) return false;
        }
        return !clauses.empty();
    }

    const ClauseResult* find(const std::string& name) const {
        for (const ClauseResult& c : clauses) {
            if (c.name == name) return &c;
        }
        return nullptr;
    }
};

// Runs the kernel extraction and every clause check against one graph.
// Solver errors propagate; clause checks that throw are recorded as failed
// clauses so the report stays total.
inline VerificationReport full_verify(const CouplingGraph& g,
                                      const SolverPolicy& policy = {},
                                      std::uint64_t span_seed = 2026) {
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    auto elapsed_ms = [](clock::time_point a, clock::time_point b) {
        return std::chrono::duration<double, std::milli>(b - a).count();
    };

    VerificationReport report;
    report.graph.n = g.vertex_count();
    report.graph.edges = g.edges().size();
    const int n = g.vertex_count();

    const auto t_extract = clock::now();
    const GroundSpace gs = extract_ground_space(g, policy);
    report.timings_ms.emplace_back("extract_ground_space",
                                   elapsed_ms(t_extract, clock::now()));

    auto timed = [&](const char* key, auto&& fn) {
        const auto start = clock::now();
        ClauseResult result;
        try {
            result = fn();
        } catch (const Error& err) {
            result.name = key;
            result.pass = false;
            result.add("error", std::string(err.what()));
        }
        report.timings_ms.emplace_back(key, elapsed_ms(start, clock::now()));
        report.clauses.push_back(std::move(result));
    };

    timed("ground_energy_zero", [&] { return verify_ground_energy(gs, policy.tol); });
    timed("degeneracy_N_plus_1", [&] { return verify_degeneracy(gs, n); });
    timed("max_total_spin", [&] { return verify_clause_a(gs, n, policy.tol); });
    timed("pairwise_alignment", [&] { return verify_clause_b(gs, n, policy.tol); });
    timed("product_state_span",
          [&] { return verify_clause_c(gs, n, span_seed, policy.tol, policy.limits); });
    timed("lemma_pair", [&] { return verify_lemma(g); });
    timed("edge_psd", [&] { return verify_edge_psd(g, policy.tol); });
    timed("exclusion_arithmetic", [&] { return verify_exclusion(n); });

    report.thresholds.emplace_back("energy_threshold", gs.energy_threshold);
    report.thresholds.emplace_back("gap_threshold", gap_threshold(g, policy.tol));
    report.thresholds.emplace_back("psd_slack", policy.tol.psd_slack);
    report.thresholds.emplace_back("spin_value_rel", policy.tol.spin_value_rel);
    report.thresholds.emplace_back("alignment", policy.tol.alignment);
    report.thresholds.emplace_back("span_membership", policy.tol.span_membership);
    report.thresholds.emplace_back("gram_min_sv", policy.tol.gram_min_sv);
    report.thresholds.emplace_back("projector", policy.tol.projector);
    report.thresholds.emplace_back("edge_spectrum", policy.tol.edge_spectrum);

    report.timings_ms.emplace_back("total", elapsed_ms(t0, clock::now()));
    return report;
}

} // namespace ferro
