#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include <cmath>

#include "ferro/operators.hpp"
#include "support/oracles.hpp"

using namespace ferro;

namespace {

double max_abs(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

Eigen::MatrixXcd to_complex(const Eigen::MatrixXd& m) {
    return m.cast<cplx>();
}

ImplicitOperator make_op(OperatorKind kind, const CouplingGraph& g, SectorPtr sector) {
    switch (kind) {
        case OperatorKind::hamiltonian:
            return ImplicitOperator::hamiltonian(g, sector);
        case OperatorKind::total_spin_squared:
            return ImplicitOperator::total_spin_squared(g.vertex_count(), sector);
        case OperatorKind::pair_coupling:
            return ImplicitOperator::pair_coupling(0, g.vertex_count() - 1,
                                                   g.vertex_count(), sector);
        case OperatorKind::swap:
            return ImplicitOperator::swap(0, g.vertex_count() - 1, g.vertex_count(),
                                          sector);
    }
    throw std::logic_error("unreachable");
}

Eigen::MatrixXcd oracle_full(OperatorKind kind, const CouplingGraph& g) {
    const int n = g.vertex_count();
    switch (kind) {
        case OperatorKind::hamiltonian:
            return oracles::hamiltonian_dense(n, g.edges());
        case OperatorKind::total_spin_squared:
            return oracles::total_spin_squared_dense(n);
        case OperatorKind::pair_coupling:
            return oracles::pair_coupling_dense(n, 0, n - 1);
        case OperatorKind::swap:
            return oracles::swap_dense(n, 0, n - 1);
    }
    throw std::logic_error("unreachable");
}

} // namespace

TEST_CASE("two-site hamiltonian sector k=1 matches the hand matrix") {
    const CouplingGraph g(2, {{0, 1, 1.0}});
    const ImplicitOperator h = ImplicitOperator::hamiltonian(g, enumerate_sector(2, 1));
    const Eigen::MatrixXd m = materialize_dense(h);
    REQUIRE(m.rows() == 2);
    CHECK(m(0, 0) == 0.25);
    CHECK(m(0, 1) == -0.25);
    CHECK(m(1, 0) == -0.25);
    CHECK(m(1, 1) == 0.25);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    CHECK(std::abs(es.eigenvalues()[0] - 0.0) < 1e-15);
    CHECK(std::abs(es.eigenvalues()[1] - 0.5) < 1e-15);
}

TEST_CASE("single edge term has spectrum {0, 0, 0, J/2}") {
    for (double coupling : {1.0, 0.5, 2.0, 1e-3, 1e3}) {
        CAPTURE(coupling);
        CHECK(edge_term_spectrum_deviation(coupling) < 1e-12 * scale_of(coupling));
        CHECK(edge_term_spectrum_check(coupling, 1e-12 * scale_of(coupling)));
    }
}

TEST_CASE("implicit operators match the pauli-product oracle") {
    Rng rng(17);
    for (int trial = 0; trial < 8; ++trial) {
        const int n = 2 + static_cast<int>(rng.uniform_below(4));  // 2..5
        const CouplingGraph g = make_random_connected(
            n, 0.6, Rng::derive_seed(90, static_cast<std::uint64_t>(trial)),
            CouplingRule::random_in(0.2, 2.0,
                                    Rng::derive_seed(91, static_cast<std::uint64_t>(trial))));
        CAPTURE(n, trial);
        for (OperatorKind kind :
             {OperatorKind::hamiltonian, OperatorKind::total_spin_squared,
              OperatorKind::pair_coupling, OperatorKind::swap}) {
            CAPTURE(to_string(kind));
            const Eigen::MatrixXcd full_oracle = oracle_full(kind, g);
            // full space
            const ImplicitOperator full_op = make_op(kind, g, nullptr);
            CHECK(max_abs(to_complex(materialize_dense(full_op)) - full_oracle) < 1e-13);
            // every sector, via restriction of the full-space oracle
            for (int k = 0; k <= n; ++k) {
                const SectorPtr basis = enumerate_sector(n, k);
                const ImplicitOperator op = make_op(kind, g, basis);
                const Eigen::MatrixXcd restricted =
                    oracles::restrict_to_sector(full_oracle, *basis);
                CHECK(max_abs(to_complex(materialize_dense(op)) - restricted) < 1e-13);
            }
        }
    }
}

TEST_CASE("apply agrees with dense materialization") {
    Rng rng(23);
    for (int trial = 0; trial < 6; ++trial) {
        const int n = 3 + static_cast<int>(rng.uniform_below(4));  // 3..6
        const CouplingGraph g = make_random_connected(
            n, 0.5, Rng::derive_seed(70, static_cast<std::uint64_t>(trial)),
            CouplingRule::random_in(0.1, 2.0,
                                    Rng::derive_seed(71, static_cast<std::uint64_t>(trial))));
        for (OperatorKind kind :
             {OperatorKind::hamiltonian, OperatorKind::total_spin_squared,
              OperatorKind::pair_coupling, OperatorKind::swap}) {
            for (int k = -1; k <= n; ++k) {
                const SectorPtr basis = k < 0 ? nullptr : enumerate_sector(n, k);
                const ImplicitOperator op = make_op(kind, g, basis);
                const Eigen::MatrixXd dense = materialize_dense(op);
                const StateVector x = oracles::random_state(n, k < 0 ? kFullSpace : k, rng);
                const StateVector y = op.apply(x);
                Eigen::VectorXcd xe(static_cast<Eigen::Index>(x.size()));
                for (std::size_t p = 0; p < x.size(); ++p) {
                    xe[static_cast<Eigen::Index>(p)] = x.amplitudes[p];
                }
                const Eigen::VectorXcd ye = dense.cast<cplx>() * xe;
                double dev = 0.0;
                for (std::size_t p = 0; p < y.size(); ++p) {
                    dev = std::max(dev,
                                   std::abs(y.amplitudes[p] - ye[static_cast<Eigen::Index>(p)]));
                }
                CAPTURE(n, to_string(kind), k);
                CHECK(dev < 1e-13 * op.residual_scale());
            }
        }
    }
}

TEST_CASE("dense matrices are symmetric and algebraically consistent") {
    const CouplingGraph g = make_random_connected(5, 0.7, 42,
                                                  CouplingRule::random_in(0.3, 1.7, 5));
    const int n = 5;
    const Eigen::MatrixXd h = materialize_dense(ImplicitOperator::hamiltonian(g));
    const Eigen::MatrixXd s2 =
        materialize_dense(ImplicitOperator::total_spin_squared(n));
    CHECK((h - h.transpose()).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((s2 - s2.transpose()).cwiseAbs().maxCoeff() < 1e-14);

    SECTION("swap squares to the identity and rebuilds pair coupling") {
        const Eigen::MatrixXd p = materialize_dense(ImplicitOperator::swap(1, 3, n));
        const Eigen::MatrixXd sij =
            materialize_dense(ImplicitOperator::pair_coupling(1, 3, n));
        const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(p.rows(), p.cols());
        CHECK((p * p - id).cwiseAbs().maxCoeff() < 1e-14);
        CHECK((sij - (0.5 * p - 0.25 * id)).cwiseAbs().maxCoeff() < 1e-14);
    }
    SECTION("S^2 commutes with H") {
        CHECK((h * s2 - s2 * h).cwiseAbs().maxCoeff() < 1e-12);
    }
    SECTION("dicke states are maximal S^2 eigenvectors") {
        for (int k = 0; k <= n; ++k) {
            const ImplicitOperator s2k =
                ImplicitOperator::total_spin_squared(n, enumerate_sector(n, k));
            const StateVector d = dicke_state(n, k);
            const StateVector s2d = s2k.apply(d);
            const double smax = 0.25 * n * (n + 2);
            double dev = 0.0;
            for (std::size_t p = 0; p < d.size(); ++p) {
                dev = std::max(dev, std::abs(s2d.amplitudes[p] - smax * d.amplitudes[p]));
            }
            CHECK(dev < 1e-13);
        }
    }
}

TEST_CASE("operator binding constraints") {
    const CouplingGraph g = make_chain(4);
    CHECK_THROWS_AS(ImplicitOperator::pair_coupling(2, 2, 4), InvalidParameter);
    CHECK_THROWS_AS(ImplicitOperator::pair_coupling(0, 4, 4), IndexOutOfRange);
    CHECK_THROWS_AS(ImplicitOperator::hamiltonian(g, enumerate_sector(5, 2)),
                    SectorMismatch);
    const ImplicitOperator h = ImplicitOperator::hamiltonian(g, enumerate_sector(4, 2));
    Rng rng(9);
    const StateVector wrong = oracles::random_state(4, 1, rng);
    CHECK_THROWS_AS(h.apply(wrong), SectorMismatch);
    Limits small;
    small.dense_cap = 3;
    CHECK_THROWS_AS(materialize_dense(h, small), SectorTooLargeForDense);
}

TEST_CASE("su2 rotations") {
    SECTION("haar samples are special unitary and deterministic per seed") {
        Rng a(31), b(31), c(32);
        for (int t = 0; t < 20; ++t) {
            const Su2Matrix u = haar_su2(a);
            const Su2Matrix v = haar_su2(b);
            CHECK(u.u00 == v.u00);
            CHECK(u.u10 == v.u10);
            CHECK_NOTHROW(require_special_unitary(u));
        }
        const Su2Matrix w = haar_su2(c);
        CHECK(w.u00 != haar_su2(a).u00);
    }
    SECTION("non-unitary and non-special matrices are rejected") {
        Su2Matrix bad;
        bad.u00 = cplx{2.0, 0.0};
        bad.u11 = cplx{0.5, 0.0};
        bad.u01 = bad.u10 = cplx{0.0, 0.0};
        CHECK_THROWS_AS(require_special_unitary(bad), NotUnitary);
        Su2Matrix reflect;  // unitary, det = -1
        reflect.u00 = cplx{0.0, 0.0};
        reflect.u01 = cplx{1.0, 0.0};
        reflect.u10 = cplx{1.0, 0.0};
        reflect.u11 = cplx{0.0, 0.0};
        CHECK_THROWS_AS(require_special_unitary(reflect), NotSpecialUnitary);
    }
}

TEST_CASE("rotated product states") {
    SECTION("identity rotation gives the all-up full-space state") {
        Su2Matrix id;
        id.u00 = id.u11 = cplx{1.0, 0.0};
        id.u01 = id.u10 = cplx{0.0, 0.0};
        const StateVector v = rotated_product_state(id, 4);
        REQUIRE(v.size() == 16);
        CHECK(v.amplitudes[0] == cplx{1.0, 0.0});
        for (std::size_t m = 1; m < 16; ++m) CHECK(v.amplitudes[m] == cplx{0.0, 0.0});
    }
    SECTION("pi rotation about y flips every spin") {
        const StateVector v = rotated_product_state(rotation_about_y(3.14159265358979324), 3);
        CHECK(std::abs(v.amplitudes[0b111] - cplx{1.0, 0.0}) < 1e-12);
        CHECK(std::abs(v.amplitudes[0]) < 1e-12);
    }
    SECTION("haar product states are normalized with maximal total spin") {
        Rng rng(77);
        for (int t = 0; t < 5; ++t) {
            const int n = 3;
            const StateVector v = rotated_product_state(haar_su2(rng), n);
            CHECK(std::abs(v.norm() - 1.0) < 1e-12);
            const ImplicitOperator s2 = ImplicitOperator::total_spin_squared(n);
            const double val = std::real(dot(v, s2.apply(v)));
            CHECK(std::abs(val - 3.75) < 1e-12);  // (3/2)(5/2)
        }
    }
}

TEST_CASE("total spin component algebra") {
    Rng rng(55);
    const int n = 5;
    const StateVector x = oracles::random_state(n, kFullSpace, rng);
    SECTION("commutator [Sx, Sy] = i Sz") {
        const StateVector sxsy = apply_total_spin_component(Axis::x,
                                     apply_total_spin_component(Axis::y, x));
        const StateVector sysx = apply_total_spin_component(Axis::y,
                                     apply_total_spin_component(Axis::x, x));
        const StateVector sz = apply_total_spin_component(Axis::z, x);
        double dev = 0.0;
        for (std::size_t p = 0; p < x.size(); ++p) {
            const cplx lhs = sxsy.amplitudes[p] - sysx.amplitudes[p];
            const cplx rhs = cplx{0.0, 1.0} * sz.amplitudes[p];
            dev = std::max(dev, std::abs(lhs - rhs));
        }
        CHECK(dev < 1e-13);
    }
    SECTION("components match the pauli oracle") {
        for (char axis : {'x', 'y', 'z'}) {
            Eigen::MatrixXcd total = Eigen::MatrixXcd::Zero(32, 32);
            for (int i = 0; i < n; ++i) total += oracles::spin_op(n, i, axis);
            Eigen::VectorXcd xe(32);
            for (std::size_t p = 0; p < 32; ++p) {
                xe[static_cast<Eigen::Index>(p)] = x.amplitudes[p];
            }
            const Eigen::VectorXcd ye = total * xe;
            const Axis ax = axis == 'x' ? Axis::x : axis == 'y' ? Axis::y : Axis::z;
            const StateVector y = apply_total_spin_component(ax, x);
            double dev = 0.0;
            for (std::size_t p = 0; p < 32; ++p) {
                dev = std::max(dev, std::abs(y.amplitudes[p] - ye[static_cast<Eigen::Index>(p)]));
            }
            CHECK(dev < 1e-14);
        }
    }
    SECTION("sector vectors are rejected") {
        const StateVector sector_vec = oracles::random_state(n, 2, rng);
        CHECK_THROWS_AS(apply_total_spin_component(Axis::x, sector_vec), SectorMismatch);
    }
}
