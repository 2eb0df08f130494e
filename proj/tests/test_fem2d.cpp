#include <doctest.h>

#include <cmath>

#include "radapt/fem2d.hpp"

using namespace radapt;

TEST_SUITE("fem2d") {

TEST_CASE("mesh counting and geometry") {
    TriMesh m = unit_square_mesh(2);
    CHECK(m.nodes.size() == 9);
    CHECK(m.triangles.size() == 8);
    CHECK(m.n_interior() == 1);

    TriMesh big = unit_square_mesh(16);
    CHECK(big.nodes.size() == 17 * 17);
    CHECK(big.triangles.size() == 2 * 16 * 16);
    CHECK(big.n_interior() == 15 * 15);

    // All triangle areas are h^2/2 with positive orientation.
    const double h = big.h();
    for (const auto& t : big.triangles) {
        const auto &a = big.nodes[t[0]], &b = big.nodes[t[1]], &c = big.nodes[t[2]];
        const double area =
            0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
        REQUIRE(area == doctest::Approx(h * h / 2.0));
    }
    CHECK_THROWS_AS(unit_square_mesh(1), std::invalid_argument);
}

TEST_CASE("single interior node: K = [4], M = [h^2/2]") {
    TriMesh m = unit_square_mesh(2);
    DiscreteSystem sys = assemble_fem(m);
    REQUIRE(sys.dim() == 1);
    CHECK(sys.stiffness().coeff(0, 0) == doctest::Approx(4.0));
    CHECK(sys.mass().coeff(0, 0) == doctest::Approx(0.125));
}

TEST_CASE("full stiffness rows sum to zero (constants in the kernel)") {
    // Assemble without boundary elimination; the full K is singular so the
    // triplets are formed directly here.
    TriMesh m = unit_square_mesh(4);
    std::vector<Eigen::Triplet<double>> kt;
    for (const auto& tri : m.triangles) {
        const auto &p0 = m.nodes[tri[0]], &p1 = m.nodes[tri[1]], &p2 = m.nodes[tri[2]];
        const double area =
            0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]));
        const double b[3] = {p1[1] - p2[1], p2[1] - p0[1], p0[1] - p1[1]};
        const double c[3] = {p2[0] - p1[0], p0[0] - p2[0], p1[0] - p0[0]};
        for (int a = 0; a < 3; ++a)
            for (int bb = 0; bb < 3; ++bb)
                kt.emplace_back(tri[a], tri[bb], (b[a] * b[bb] + c[a] * c[bb]) / (4.0 * area));
    }
    SpMat K(m.nodes.size(), m.nodes.size());
    K.setFromTriplets(kt.begin(), kt.end());
    Vec ones = Vec::Ones(K.rows());
    CHECK((K * ones).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("smallest eigenvalue approximates 2 pi^2") {
    TriMesh m = unit_square_mesh(32);
    DiscreteSystem sys = assemble_fem(m);
    const SpectralFactorization& sf = sys.eigendecompose();
    const double exact = 2.0 * M_PI * M_PI;
    CHECK(sf.eigenvalues[0] == doctest::Approx(exact).epsilon(0.02));
    CHECK(sf.eigenvalues[0] >= exact);  // conforming FEM bounds from above
}

TEST_CASE("eigenvalues decrease monotonically under h-refinement") {
    const double exact = 2.0 * M_PI * M_PI;
    double prev = 1e300;
    for (int n : {4, 8, 16}) {
        DiscreteSystem sys = assemble_fem(unit_square_mesh(n));
        const double lam = sys.eigendecompose().eigenvalues[0];
        CHECK(lam < prev);
        CHECK(lam >= exact);
        prev = lam;
    }
}

TEST_CASE("projections of constants") {
    TriMesh m = unit_square_mesh(8);
    DiscreteSystem sys = assemble_fem(m);

    Vec zero = project_L2(m, sys, [](double, double) { return 0.0; });
    CHECK(zero.norm() == 0.0);

    Vec one = project_L2(m, sys, [](double, double) { return 1.0; });
    CHECK(one.minCoeff() > 0.0);
    CHECK(one.maxCoeff() < 3.0);  // boundary-layer overshoot (~1.6 at the corners)
    // Dense oracle for the same linear system.
    Vec load = load_vector(m, [](double, double) { return 1.0; });
    Eigen::MatrixXd Md(sys.mass());
    Vec dense = Md.ldlt().solve(load);
    CHECK((one - dense).norm() <= 1e-10 * dense.norm());

    // Galerkin residual of the defining systems.
    CHECK((sys.mass() * one - load).norm() <= 1e-10 * load.norm());
    Vec h1 = project_H1(m, sys, [](double, double) { return 1.0; });
    CHECK(((sys.stiffness() + sys.mass()) * h1 - load).norm() <= 1e-10 * load.norm());
}

TEST_CASE("projection of an interior basis function is a coordinate vector") {
    TriMesh m = unit_square_mesh(4);
    DiscreteSystem sys = assemble_fem(m);
    const int node = 2 * 5 + 2;  // node (2,2) of the 4x4 grid
    const int dof = m.interior_index[node];
    REQUIRE(dof >= 0);
    // Evaluate the P1 hat of that node through barycentric coordinates.
    auto hatfun = [&](double x, double y) {
        for (const auto& tri : m.triangles) {
            const auto &p0 = m.nodes[tri[0]], &p1 = m.nodes[tri[1]], &p2 = m.nodes[tri[2]];
            const double det =
                (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
            const double l1 =
                ((x - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (y - p0[1])) / det;
            const double l2 =
                ((p1[0] - p0[0]) * (y - p0[1]) - (x - p0[0]) * (p1[1] - p0[1])) / det;
            const double l0 = 1.0 - l1 - l2;
            const double eps = 1e-12;
            if (l0 >= -eps && l1 >= -eps && l2 >= -eps) {
                if (tri[0] == node) return l0;
                if (tri[1] == node) return l1;
                if (tri[2] == node) return l2;
                return 0.0;
            }
        }
        return 0.0;
    };
    Vec proj = project_L2(m, sys, hatfun);
    Vec unit = Vec::Zero(sys.dim());
    unit[dof] = 1.0;
    CHECK((proj - unit).norm() < 1e-10);
}

}  // TEST_SUITE
