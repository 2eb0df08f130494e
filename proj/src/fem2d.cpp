#include "radapt/fem2d.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace radapt {

namespace {

double tri_area(const std::array<double, 2>& a, const std::array<double, 2>& b,
                const std::array<double, 2>& c) {
    return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
}

}  // namespace

TriMesh unit_square_mesh(int n) {
    if (n < 2) throw std::invalid_argument("unit_square_mesh: need n >= 2");
    TriMesh m;
    m.n = n;
    const double h = 1.0 / n;
    m.nodes.resize((n + 1) * (n + 1));
    m.boundary.resize(m.nodes.size());
    m.interior_index.assign(m.nodes.size(), -1);
    int dof = 0;
    for (int j = 0; j <= n; ++j) {
        for (int i = 0; i <= n; ++i) {
            const int id = j * (n + 1) + i;
            m.nodes[id] = {i * h, j * h};
            m.boundary[id] = (i == 0 || i == n || j == 0 || j == n);
            if (!m.boundary[id]) m.interior_index[id] = dof++;
        }
    }
    m.triangles.reserve(2 * n * n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const int v00 = j * (n + 1) + i;
            const int v10 = v00 + 1;
            const int v01 = v00 + (n + 1);
            const int v11 = v01 + 1;
            m.triangles.push_back({v00, v10, v11});
            m.triangles.push_back({v00, v11, v01});
        }
    }
    return m;
}

DiscreteSystem assemble_fem(const TriMesh& mesh) {
    const int n_dof = mesh.n_interior();
    std::vector<Eigen::Triplet<double>> mt, kt;
    for (const auto& tri : mesh.triangles) {
        const auto& p0 = mesh.nodes[tri[0]];
        const auto& p1 = mesh.nodes[tri[1]];
        const auto& p2 = mesh.nodes[tri[2]];
        const double area = tri_area(p0, p1, p2);
        if (!(area > 0.0)) throw std::invalid_argument("assemble_fem: degenerate triangle");
        // P1 gradients: grad phi_i = perp(edge opposite i) / (2 area)
        const double b[3] = {p1[1] - p2[1], p2[1] - p0[1], p0[1] - p1[1]};
        const double c[3] = {p2[0] - p1[0], p0[0] - p2[0], p1[0] - p0[0]};
        for (int a = 0; a < 3; ++a) {
            const int ia = mesh.interior_index[tri[a]];
            if (ia < 0) continue;
            for (int bb = 0; bb < 3; ++bb) {
                const int ib = mesh.interior_index[tri[bb]];
                if (ib < 0) continue;
                kt.emplace_back(ia, ib, (b[a] * b[bb] + c[a] * c[bb]) / (4.0 * area));
                mt.emplace_back(ia, ib, area * (a == bb ? 2.0 : 1.0) / 12.0);
            }
        }
    }
    SpMat M(n_dof, n_dof), K(n_dof, n_dof);
    M.setFromTriplets(mt.begin(), mt.end());
    K.setFromTriplets(kt.begin(), kt.end());
    return DiscreteSystem(std::move(M), std::move(K));
}

Vec load_vector(const TriMesh& mesh, const ScalarField& g) {
    Vec load = Vec::Zero(mesh.n_interior());
    // Edge-midpoint rule: each midpoint has weight area/3; phi_a is 1/2 on the
    // two midpoints of the edges containing node a and 0 on the opposite one.
    for (const auto& tri : mesh.triangles) {
        const auto& p0 = mesh.nodes[tri[0]];
        const auto& p1 = mesh.nodes[tri[1]];
        const auto& p2 = mesh.nodes[tri[2]];
        const double area = tri_area(p0, p1, p2);
        const double gm[3] = {g(0.5 * (p0[0] + p1[0]), 0.5 * (p0[1] + p1[1])),
                              g(0.5 * (p1[0] + p2[0]), 0.5 * (p1[1] + p2[1])),
                              g(0.5 * (p2[0] + p0[0]), 0.5 * (p2[1] + p0[1]))};
        const double w = area / 3.0;
        for (int a = 0; a < 3; ++a) {
            const int ia = mesh.interior_index[tri[a]];
            if (ia < 0) continue;
            // midpoints touching node a: edges (a, a+1) and (a+2, a)
            load[ia] += w * 0.5 * (gm[a] + gm[(a + 2) % 3]);
        }
    }
    return load;
}

Vec project_L2(const TriMesh& mesh, const DiscreteSystem& system, const ScalarField& g) {
    Eigen::SimplicialLDLT<SpMat> solver(system.mass());
    return solver.solve(load_vector(mesh, g));
}

Vec project_H1(const TriMesh& mesh, const DiscreteSystem& system, const ScalarField& g,
               const GradField& grad_g) {
    Vec rhs = load_vector(mesh, g);
    if (grad_g) {
        for (const auto& tri : mesh.triangles) {
            const auto& p0 = mesh.nodes[tri[0]];
            const auto& p1 = mesh.nodes[tri[1]];
            const auto& p2 = mesh.nodes[tri[2]];
            const double area = tri_area(p0, p1, p2);
            const double b[3] = {p1[1] - p2[1], p2[1] - p0[1], p0[1] - p1[1]};
            const double c[3] = {p2[0] - p1[0], p0[0] - p2[0], p1[0] - p0[0]};
            const std::array<std::array<double, 2>, 3> mid = {{
                {0.5 * (p0[0] + p1[0]), 0.5 * (p0[1] + p1[1])},
                {0.5 * (p1[0] + p2[0]), 0.5 * (p1[1] + p2[1])},
                {0.5 * (p2[0] + p0[0]), 0.5 * (p2[1] + p0[1])},
            }};
            for (int a = 0; a < 3; ++a) {
                const int ia = mesh.interior_index[tri[a]];
                if (ia < 0) continue;
                const double gx[2] = {b[a] / (2.0 * area), c[a] / (2.0 * area)};
                double acc = 0.0;
                for (const auto& mp : mid) {
                    const auto dg = grad_g(mp[0], mp[1]);
                    acc += dg[0] * gx[0] + dg[1] * gx[1];
                }
                rhs[ia] += area / 3.0 * acc;
            }
        }
    }
    SpMat A = system.stiffness() + system.mass();
    Eigen::SimplicialLDLT<SpMat> solver(A);
    return solver.solve(rhs);
}

void write_trimesh(const TriMesh& mesh, std::ostream& os) {
    os.precision(17);
    os << "nodes " << mesh.nodes.size() << "\n";
    for (const auto& p : mesh.nodes) os << p[0] << " " << p[1] << "\n";
    os << "triangles " << mesh.triangles.size() << "\n";
    for (const auto& t : mesh.triangles) os << t[0] << " " << t[1] << " " << t[2] << "\n";
}

}  // namespace radapt
