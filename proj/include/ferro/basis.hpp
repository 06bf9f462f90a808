#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ferro/config.hpp"
#include "ferro/errors.hpp"

namespace ferro {

using cplx = std::complex<double>;

// Sector tag for a state vector bound to the full 2^N space rather than a
// fixed-S^z block.
inline constexpr int kFullSpace = -1;

// Exact binomial coefficient; n is capped well below overflow territory.
inline std::uint64_t binomial(int n, int k) {
    if (n < 0 || k < 0 || k > n) return 0;
    if (n > 62) throw InvalidParameter("binomial: n too large");
    k = std::min(k, n - k);
    std::uint64_t result = 1;
    for (int t = 1; t <= k; ++t) {
        result = result * static_cast<std::uint64_t>(n - k + t) /
                 static_cast<std::uint64_t>(t);
    }
    return result;
}

// One conserved-S^z block of the 2^N computational basis. Bit i set means
// spin i points down, so the all-up product state is mask 0 in the k = 0
// sector. States are listed in increasing integer order.
class SectorBasis {
public:
    SectorBasis(int sites, int down, const Limits& limits = {})
        : sites_(sites), down_(down) {
        if (sites < 1 || sites > limits.max_sites) {
            throw InvalidParameter("site count " + std::to_string(sites) +
                                   " outside [1, " + std::to_string(limits.max_sites) + "]");
        }
        if (down < 0 || down > sites) {
            throw InvalidParameter("down-spin count " + std::to_string(down) +
                                   " outside [0, " + std::to_string(sites) + "]");
        }
        const std::uint64_t count = binomial(sites, down);
        if (count > limits.max_sector_states) {
            throw SectorTooLarge("sector (" + std::to_string(sites) + "," +
                                 std::to_string(down) + ") has " + std::to_string(count) +
                                 " states, budget is " +
                                 std::to_string(limits.max_sector_states));
        }
        states_.reserve(count);
        if (down == 0) {
            states_.push_back(0);
        } else {
            // Gosper's hack: next larger integer with the same popcount.
            std::uint64_t mask = (std::uint64_t{1} << down) - 1;
            const std::uint64_t end = std::uint64_t{1} << sites;
            while (mask < end) {
                states_.push_back(mask);
                const std::uint64_t low = mask & (~mask + 1);
                const std::uint64_t ripple = mask + low;
                mask = ripple | (((mask ^ ripple) >> 2) / low);
            }
        }
    }

    int sites() const { return sites_; }
    int down() const { return down_; }
    std::size_t size() const { return states_.size(); }
    std::uint64_t state(std::size_t position) const { return states_[position]; }
    const std::vector<std::uint64_t>& states() const { return states_; }

    // S^z eigenvalue of every member: (N - 2k)/2.
    double sz() const { return 0.5 * (sites_ - 2 * down_); }

    // Position of a mask within the sector. Binary search over the sorted
    // state list; asking for a mask outside the sector is a defect.
    std::size_t rank(std::uint64_t mask) const {
        const auto it = std::lower_bound(states_.begin(), states_.end(), mask);
        if (it == states_.end() || *it != mask) {
            throw InternalInvariantViolation("mask " + std::to_string(mask) +
                                             " not in sector (" + std::to_string(sites_) +
                                             "," + std::to_string(down_) + ")");
        }
        return static_cast<std::size_t>(it - states_.begin());
    }

private:
    int sites_;
    int down_;
    std::vector<std::uint64_t> states_;
};

using SectorPtr = std::shared_ptr<const SectorBasis>;

inline SectorPtr enumerate_sector(int sites, int down, const Limits& limits = {}) {
    return std::make_shared<const SectorBasis>(sites, down, limits);
}

// Amplitudes over one sector (down >= 0, amplitude p belongs to the p-th
// sector state) or over the full space (down == kFullSpace, amplitude
// index equals the basis mask).
struct StateVector {
    int sites = 0;
    int down = kFullSpace;
    std::vector<cplx> amplitudes;

    std::size_t size() const { return amplitudes.size(); }
    bool full_space() const { return down == kFullSpace; }

    double norm() const {
        double s = 0.0;
        for (const cplx& a : amplitudes) s += std::norm(a);
        return std::sqrt(s);
    }

    void normalize() {
        const double n = norm();
        if (n <= 0.0) {
            throw InvalidParameter("cannot normalize a zero vector");
        }
        const double inv = 1.0 / n;
        for (cplx& a : amplitudes) a *= inv;
    }
};

// Conjugate-linear in the first argument.
inline cplx dot(const StateVector& a, const StateVector& b) {
    if (a.sites != b.sites || a.down != b.down || a.size() != b.size()) {
        throw SectorMismatch("dot product across different sectors");
    }
    cplx s = 0.0;
    for (std::size_t p = 0; p < a.size(); ++p) {
        s += std::conj(a.amplitudes[p]) * b.amplitudes[p];
    }
    return s;
}

inline StateVector all_up_state(int sites) {
    if (sites < 2) throw InvalidParameter("all-up state needs at least 2 sites");
    StateVector v;
    v.sites = sites;
    v.down = 0;
    v.amplitudes = {cplx{1.0, 0.0}};
    return v;
}

// Uniform superposition over one sector: the symmetric (maximal total
// spin) state with k spins down.
inline StateVector dicke_state(int sites, int down, const Limits& limits = {}) {
    const SectorBasis basis(sites, down, limits);
    StateVector v;
    v.sites = sites;
    v.down = down;
    const double amp = 1.0 / std::sqrt(static_cast<double>(basis.size()));
    v.amplitudes.assign(basis.size(), cplx{amp, 0.0});
    return v;
}

// Scatter a sector vector into the full 2^N space.
inline StateVector embed_full(const SectorBasis& basis, const StateVector& x,
                              const Limits& limits = {}) {
    if (x.sites != basis.sites() || x.down != basis.down() || x.size() != basis.size()) {
        throw SectorMismatch("embed_full: vector not bound to the given sector");
    }
    if (basis.sites() > limits.max_full_space_sites) {
        throw SectorTooLarge("full-space embedding beyond " +
                             std::to_string(limits.max_full_space_sites) + " sites");
    }
    StateVector out;
    out.sites = basis.sites();
    out.down = kFullSpace;
    out.amplitudes.assign(std::size_t{1} << basis.sites(), cplx{0.0, 0.0});
    for (std::size_t p = 0; p < basis.size(); ++p) {
        out.amplitudes[basis.state(p)] = x.amplitudes[p];
    }
    return out;
}

} // namespace ferro
