#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>

namespace ferro {

// All numeric tolerances in one record. The properties being certified are
// exact statements; every threshold below is a floating-point artifact
// decision, kept in one place so a run can be tightened or loosened
// coherently. Factors marked "* scale" multiply max(1, sum of couplings).
struct Tolerances {
    double energy_factor   = 1e-9;   // kernel membership cut, * scale
    double residual_factor = 1e-9;   // eigenpair residual bound, * scale
    double gap_factor      = 1e-6;   // degeneracy gap cut, * min coupling
    double psd_slack       = 1e-12;  // allowed eigenvalue undershoot below 0
    double unitary         = 1e-10;  // SU(2) input validation
    double normalization   = 1e-12;  // unit-norm checks on state vectors
    double dense_symmetry  = 1e-14;  // symmetry of materialized matrices
    double edge_spectrum   = 1e-12;  // per-edge {0,0,0,J/2} spectrum check
    double spin_value_rel  = 1e-9;   // relative S^2 deviation on ground vectors
    double alignment       = 1e-9;   // pairwise s_i.s_j residual bound
    double span_membership = 1e-8;   // product state inside the ground space
    double gram_min_sv     = 1e-6;   // product-state Gram rank certificate
    double projector       = 1e-7;   // two-sided projector distance
    double apply_vs_dense  = 1e-13;  // matrix-free vs materialized action
    double dense_vs_krylov = 1e-9;   // solver cross-validation
};

// Size guards for basis enumeration and dense work.
struct Limits {
    int max_sites = 30;
    std::uint64_t max_sector_states = std::uint64_t{1} << 26;
    int max_full_space_sites = 22;
    std::size_t dense_cap = 4096;
};

inline double scale_of(double coupling_sum) {
    return std::max(1.0, coupling_sum);
}

} // namespace ferro
