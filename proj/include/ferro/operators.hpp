#pragma once

#include <Eigen/Dense>

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ferro/basis.hpp"
#include "ferro/config.hpp"
#include "ferro/errors.hpp"
#include "ferro/graph.hpp"
#include "ferro/rng.hpp"

namespace ferro {

enum class OperatorKind { hamiltonian, total_spin_squared, pair_coupling, swap };

inline const char* to_string(OperatorKind k) {
    switch (k) {
        case OperatorKind::hamiltonian: return "hamiltonian";
        case OperatorKind::total_spin_squared: return "total_spin_squared";
        case OperatorKind::pair_coupling: return "pair_coupling";
        case OperatorKind::swap: return "swap";
    }
    return "?";
}

// Matrix-free Hermitian operator bound to one S^z sector (or to the full
// space when constructed with a null sector). All four kinds are real
// symmetric in the computational basis and commute with total S^z, so the
// action never leaves the bound sector.
//
// Matrix-element rules, fixed by the spin-1/2 algebra with bit i set
// meaning spin i down:
//   edge (i,j,J):  (J/2)(1/4 - s_i.s_j) annihilates states with equal
//                  bits i,j; on differing bits it adds  (J/4) x[m] to
//                  y[m] and -(J/4) x[m] to y[m with bits i,j swapped].
//   swap P_ij:     identity on equal bits, bit exchange otherwise.
//   s_i.s_j    =   P_ij/2 - 1/4.
//   S^2        =   (3N/4 - N(N-1)/4) * 1 + sum_{i<j} P_ij.
class ImplicitOperator {
public:
    static ImplicitOperator hamiltonian(const CouplingGraph& g, SectorPtr sector = nullptr) {
        ImplicitOperator op(OperatorKind::hamiltonian, g.vertex_count(), std::move(sector));
        op.edges_ = g.edges();
        op.coupling_sum_ = g.coupling_sum();
        op.check_binding();
        return op;
    }

    static ImplicitOperator total_spin_squared(int sites, SectorPtr sector = nullptr) {
        ImplicitOperator op(OperatorKind::total_spin_squared, sites, std::move(sector));
        op.check_binding();
        return op;
    }

    static ImplicitOperator pair_coupling(int i, int j, int sites, SectorPtr sector = nullptr) {
        ImplicitOperator op(OperatorKind::pair_coupling, sites, std::move(sector));
        op.set_pair(i, j);
        op.check_binding();
        return op;
    }

    static ImplicitOperator swap(int i, int j, int sites, SectorPtr sector = nullptr) {
        ImplicitOperator op(OperatorKind::swap, sites, std::move(sector));
        op.set_pair(i, j);
        op.check_binding();
        return op;
    }

    OperatorKind kind() const { return kind_; }
    int sites() const { return sites_; }
    bool full_space() const { return sector_ == nullptr; }
    int sector_down() const { return sector_ ? sector_->down() : kFullSpace; }
    const SectorPtr& sector() const { return sector_; }

    std::size_t dimension() const {
        return sector_ ? sector_->size() : (std::size_t{1} << sites_);
    }

    // Crude upper bound on the operator norm, used to scale residual
    // tolerances.
    double norm_bound() const {
        switch (kind_) {
            case OperatorKind::hamiltonian: return 0.5 * coupling_sum_;
            case OperatorKind::total_spin_squared: {
                const double s = 0.5 * sites_;
                return s * (s + 1.0);
            }
            case OperatorKind::pair_coupling: return 0.75;
            case OperatorKind::swap: return 1.0;
        }
        return 1.0;
    }

    // Scale for residual tolerances: max(1, sum J) for the Hamiltonian,
    // max(1, norm bound) otherwise.
    double residual_scale() const {
        return kind_ == OperatorKind::hamiltonian ? scale_of(coupling_sum_)
                                                  : scale_of(norm_bound());
    }

    StateVector apply(const StateVector& x) const {
        if (x.sites != sites_ || x.down != sector_down() || x.size() != dimension()) {
            throw SectorMismatch(std::string("apply: vector not bound to ") +
                                 to_string(kind_) + " operator's sector");
        }
        StateVector y;
        y.sites = sites_;
        y.down = x.down;
        y.amplitudes.assign(x.size(), cplx{0.0, 0.0});
        const std::size_t dim = x.size();
        for (std::size_t p = 0; p < dim; ++p) {
            const cplx xv = x.amplitudes[p];
            if (xv == cplx{0.0, 0.0}) continue;
            const std::uint64_t mask = sector_ ? sector_->state(p) : p;
            for_each_contribution(mask, [&](std::uint64_t target, double coeff) {
                const std::size_t q = sector_ ? sector_->rank(target)
                                              : static_cast<std::size_t>(target);
                y.amplitudes[q] += coeff * xv;
            });
        }
        return y;
    }

    // Scatter pattern of the operator's action on a single basis mask.
    template <typename Fn>
    void for_each_contribution(std::uint64_t mask, Fn&& fn) const {
        switch (kind_) {
            case OperatorKind::hamiltonian: {
                for (const Edge& e : edges_) {
                    const std::uint64_t flip =
                        (std::uint64_t{1} << e.i) | (std::uint64_t{1} << e.j);
                    const bool bit_i = (mask >> e.i) & 1;
                    const bool bit_j = (mask >> e.j) & 1;
                    if (bit_i == bit_j) continue;
                    fn(mask, 0.25 * e.coupling);
                    fn(mask ^ flip, -0.25 * e.coupling);
                }
                break;
            }
            case OperatorKind::total_spin_squared: {
                const double n = static_cast<double>(sites_);
                fn(mask, 0.75 * n - 0.25 * n * (n - 1.0));
                for (int i = 0; i < sites_; ++i) {
                    for (int j = i + 1; j < sites_; ++j) {
                        const bool bit_i = (mask >> i) & 1;
                        const bool bit_j = (mask >> j) & 1;
                        if (bit_i == bit_j) {
                            fn(mask, 1.0);
                        } else {
                            fn(mask ^ ((std::uint64_t{1} << i) | (std::uint64_t{1} << j)), 1.0);
                        }
                    }
                }
                break;
            }
            case OperatorKind::pair_coupling: {
                const bool bit_i = (mask >> site_a_) & 1;
                const bool bit_j = (mask >> site_b_) & 1;
                if (bit_i == bit_j) {
                    fn(mask, 0.25);
                } else {
                    fn(mask, -0.25);
                    fn(mask ^ ((std::uint64_t{1} << site_a_) | (std::uint64_t{1} << site_b_)),
                       0.5);
                }
                break;
            }
            case OperatorKind::swap: {
                const bool bit_i = (mask >> site_a_) & 1;
                const bool bit_j = (mask >> site_b_) & 1;
                if (bit_i == bit_j) {
                    fn(mask, 1.0);
                } else {
                    fn(mask ^ ((std::uint64_t{1} << site_a_) | (std::uint64_t{1} << site_b_)),
                       1.0);
                }
                break;
            }
        }
    }

private:
    ImplicitOperator(OperatorKind kind, int sites, SectorPtr sector)
        : kind_(kind), sites_(sites), sector_(std::move(sector)) {
        if (sites_ < 2) throw InvalidParameter("operator needs at least 2 sites");
    }

    void set_pair(int i, int j) {
        if (i == j) throw InvalidParameter("site pair must be distinct");
        if (i < 0 || j < 0 || i >= sites_ || j >= sites_) {
            throw IndexOutOfRange("site pair (" + std::to_string(i) + "," +
                                  std::to_string(j) + ") out of range");
        }
        site_a_ = std::min(i, j);
        site_b_ = std::max(i, j);
    }

    void check_binding() const {
        if (sector_ && sector_->sites() != sites_) {
            throw SectorMismatch("sector site count does not match operator");
        }
        if (!sector_ && sites_ > Limits{}.max_full_space_sites) {
            throw SectorTooLarge("full-space operator beyond the full-space site cap");
        }
    }

    OperatorKind kind_;
    int sites_;
    int site_a_ = -1;
    int site_b_ = -1;
    std::vector<Edge> edges_;
    double coupling_sum_ = 0.0;
    SectorPtr sector_;
};

// Dense representation, entry (a,b) = <state_a|op|state_b>. Testing and
// small solves only; sector sizes grow as binomial(N, N/2).
inline Eigen::MatrixXd materialize_dense(const ImplicitOperator& op,
                                         const Limits& limits = {}) {
    const std::size_t dim = op.dimension();
    if (dim > limits.dense_cap) {
        throw SectorTooLargeForDense("dimension " + std::to_string(dim) +
                                     " exceeds dense cap " +
                                     std::to_string(limits.dense_cap));
    }
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim),
                                              static_cast<Eigen::Index>(dim));
    const SectorPtr& sector = op.sector();
    for (std::size_t col = 0; col < dim; ++col) {
        const std::uint64_t mask = sector ? sector->state(col) : col;
        op.for_each_contribution(mask, [&](std::uint64_t target, double coeff) {
            const std::size_t row =
                sector ? sector->rank(target) : static_cast<std::size_t>(target);
            m(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) += coeff;
        });
    }
    return m;
}

// Max deviation of the 4x4 single-edge term (J/2)(1/4 - s_i.s_j) from its
// exact spectrum {0, 0, 0, J/2}.
inline double edge_term_spectrum_deviation(double coupling) {
    if (!(coupling > 0.0)) {
        throw NonPositiveCoupling("edge term check needs J > 0");
    }
    const CouplingGraph two_sites(2, {{0, 1, coupling}});
    const Eigen::MatrixXd m = materialize_dense(ImplicitOperator::hamiltonian(two_sites));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    if (es.info() != Eigen::Success) {
        throw EigensolverFailure("edge term eigendecomposition failed");
    }
    const std::array<double, 4> expected{0.0, 0.0, 0.0, 0.5 * coupling};
    double dev = 0.0;
    for (int t = 0; t < 4; ++t) {
        dev = std::max(dev, std::abs(es.eigenvalues()[t] - expected[static_cast<std::size_t>(t)]));
    }
    return dev;
}

// The positivity building block: each edge term is PSD with eigenvalues
// {0, 0, 0, J/2}.
inline bool edge_term_spectrum_check(double coupling, double tol = 1e-12) {
    return edge_term_spectrum_deviation(coupling) < tol;
}

// ---- SU(2) rotations and product states ---------------------------------

// 2x2 complex matrix acting on a single spin in the (|up>, |down>) basis.
struct Su2Matrix {
    cplx u00{1.0, 0.0}, u01{0.0, 0.0};
    cplx u10{0.0, 0.0}, u11{1.0, 0.0};
};

inline void require_special_unitary(const Su2Matrix& u, double tol = 1e-10) {
    // Frobenius norm of u^dagger u - 1.
    const cplx g00 = std::conj(u.u00) * u.u00 + std::conj(u.u10) * u.u10 - 1.0;
    const cplx g01 = std::conj(u.u00) * u.u01 + std::conj(u.u10) * u.u11;
    const cplx g11 = std::conj(u.u01) * u.u01 + std::conj(u.u11) * u.u11 - 1.0;
    const double dev = std::sqrt(std::norm(g00) + 2.0 * std::norm(g01) + std::norm(g11));
    if (dev >= tol) {
        throw NotUnitary("matrix is not unitary (deviation " + std::to_string(dev) + ")");
    }
    const cplx det = u.u00 * u.u11 - u.u01 * u.u10;
    if (std::abs(det - cplx{1.0, 0.0}) >= tol) {
        throw NotSpecialUnitary("matrix determinant is not 1");
    }
}

// Haar-distributed SU(2) sample: two complex Gaussians normalized to the
// 3-sphere fill the first column, the second column is forced by unitarity.
inline Su2Matrix haar_su2(Rng& rng) {
    double r = 0.0;
    cplx a, b;
    do {
        a = cplx{rng.normal(), rng.normal()};
        b = cplx{rng.normal(), rng.normal()};
        r = std::sqrt(std::norm(a) + std::norm(b));
    } while (r < 1e-8);
    a /= r;
    b /= r;
    Su2Matrix u;
    u.u00 = a;
    u.u10 = b;
    u.u01 = -std::conj(b);
    u.u11 = std::conj(a);
    return u;
}

inline Su2Matrix rotation_about_y(double angle) {
    const double c = std::cos(0.5 * angle);
    const double s = std::sin(0.5 * angle);
    Su2Matrix u;
    u.u00 = cplx{c, 0.0};
    u.u01 = cplx{-s, 0.0};
    u.u10 = cplx{s, 0.0};
    u.u11 = cplx{c, 0.0};
    return u;
}

// Product state (u|up>)^(tensor N) over the full space: the amplitude of
// mask m is u00^(N - popcount(m)) * u10^popcount(m).
inline StateVector rotated_product_state(const Su2Matrix& u, int sites,
                                         const Tolerances& tol = {},
                                         const Limits& limits = {}) {
    if (sites < 2) throw InvalidParameter("product state needs at least 2 sites");
    if (sites > limits.max_full_space_sites) {
        throw SectorTooLarge("product state beyond the full-space site cap");
    }
    require_special_unitary(u, tol.unitary);
    std::vector<cplx> up_pow(static_cast<std::size_t>(sites) + 1);
    std::vector<cplx> down_pow(static_cast<std::size_t>(sites) + 1);
    up_pow[0] = down_pow[0] = cplx{1.0, 0.0};
    for (int t = 1; t <= sites; ++t) {
        up_pow[static_cast<std::size_t>(t)] = up_pow[static_cast<std::size_t>(t - 1)] * u.u00;
        down_pow[static_cast<std::size_t>(t)] = down_pow[static_cast<std::size_t>(t - 1)] * u.u10;
    }
    StateVector v;
    v.sites = sites;
    v.down = kFullSpace;
    const std::size_t dim = std::size_t{1} << sites;
    v.amplitudes.resize(dim);
    for (std::size_t mask = 0; mask < dim; ++mask) {
        const int k = std::popcount(mask);
        v.amplitudes[mask] = up_pow[static_cast<std::size_t>(sites - k)] *
                             down_pow[static_cast<std::size_t>(k)];
    }
    return v;
}

// ---- total-spin components (full space) -----------------------------------

enum class Axis { x, y, z };

// S^x, S^y, S^z = sum over sites of the single-spin component. S^x and S^y
// change the down-spin count, so these exist on the full space only.
inline StateVector apply_total_spin_component(Axis axis, const StateVector& x) {
    if (!x.full_space()) {
        throw SectorMismatch("total-spin components act on full-space vectors");
    }
    StateVector y;
    y.sites = x.sites;
    y.down = kFullSpace;
    y.amplitudes.assign(x.size(), cplx{0.0, 0.0});
    const std::size_t dim = x.size();
    for (std::size_t mask = 0; mask < dim; ++mask) {
        const cplx xv = x.amplitudes[mask];
        if (xv == cplx{0.0, 0.0}) continue;
        switch (axis) {
            case Axis::x:
                for (int i = 0; i < x.sites; ++i) {
                    y.amplitudes[mask ^ (std::uint64_t{1} << i)] += 0.5 * xv;
                }
                break;
            case Axis::y:
                for (int i = 0; i < x.sites; ++i) {
                    const bool bit = (mask >> i) & 1;
                    const cplx coeff = bit ? cplx{0.0, -0.5} : cplx{0.0, 0.5};
                    y.amplitudes[mask ^ (std::uint64_t{1} << i)] += coeff * xv;
                }
                break;
            case Axis::z:
                y.amplitudes[mask] +=
                    0.5 * (x.sites - 2 * std::popcount(mask)) * xv;
                break;
        }
    }
    return y;
}

} // namespace ferro
