#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <vector>

#include "radapt/discrete_system.hpp"

namespace radapt {

/// Structured P1 triangulation of the unit square. Every grid cell is split
/// along the lower-left to upper-right diagonal.
struct TriMesh {
    int n = 0;                                      // cells per side, h = 1/n
    std::vector<std::array<double, 2>> nodes;       // (n+1)^2 entries
    std::vector<std::array<int, 3>> triangles;      // 2 n^2 entries, ccw
    std::vector<bool> boundary;                     // per node
    std::vector<int> interior_index;                // node -> interior dof or -1

    double h() const { return 1.0 / n; }
    int n_interior() const { return (n - 1) * (n - 1); }
};

TriMesh unit_square_mesh(int n);

/// Mass and stiffness of -Delta on S^1_0 (homogeneous Dirichlet rows and
/// columns eliminated), exact element integration.
DiscreteSystem assemble_fem(const TriMesh& mesh);

using ScalarField = std::function<double(double, double)>;
using GradField = std::function<std::array<double, 2>(double, double)>;

/// L2 load vector on interior nodes, edge-midpoint quadrature (exact for
/// elementwise quadratics).
Vec load_vector(const TriMesh& mesh, const ScalarField& g);

/// Solve M x = load(g).
Vec project_L2(const TriMesh& mesh, const DiscreteSystem& system, const ScalarField& g);

/// Solve (K + M) x = h1load(g) with the full H1 inner product. grad_g may be
/// null for gradient-free data such as constants.
Vec project_H1(const TriMesh& mesh, const DiscreteSystem& system, const ScalarField& g,
               const GradField& grad_g = nullptr);

/// Node/triangle list export.
void write_trimesh(const TriMesh& mesh, std::ostream& os);

}  // namespace radapt
