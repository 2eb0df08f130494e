#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace radapt {

/// Partition of [0, t_end] into closed elements T_i = [t_i, t_{i+1}].
///
/// Meshes are created uniform and refined only by trisection, so every
/// element has size h0 * 3^{-level}. The per-element levels are the ground
/// truth for sizes and for all refinement decisions; breakpoints carry the
/// positions and are never recomputed for surviving elements.
struct TimeMesh {
    double t_end = 0.0;
    double h0 = 0.0;
    std::vector<double> breakpoints;  // n+1 entries, breakpoints[0] == 0
    std::vector<int> levels;          // n entries

    int n_elements() const { return static_cast<int>(levels.size()); }
    double left(int elem) const { return breakpoints[elem]; }
    double right(int elem) const { return breakpoints[elem + 1]; }
    /// Element size derived from the refinement level (exact up to one rounding).
    double size(int elem) const;
    /// Gap between the closed intervals T_a and T_b; 0 for adjacent elements.
    double dist(int a, int b) const;

    /// Same elements in the sense of exact refinement history (levels agree).
    bool same_as(const TimeMesh& other) const;
};

/// Order in which trisection scans refinement candidates. The final mesh is
/// independent of this (tested); it only changes intermediate states.
enum class ScanOrder { LeftToRight, RightToLeft };

/// n equal elements on [0, t_end], all at level 0.
TimeMesh uniform_mesh(double t_end, int n);

/// Split element `elem` into three equal children; beforehand recursively
/// trisect every element T' with dist(T, T') <= G|T| and |T'|/|T| >= 3.
/// Distance comparisons are exact (integer arithmetic in units of the
/// finest level involved).
TimeMesh trisect(const TimeMesh& mesh, int elem, int G,
                 ScanOrder order = ScanOrder::LeftToRight);

/// Level-based variant: recurses into elements T' with
/// dist(T, T') <= G_tilde * 3^{-(level(T)+1)} and level(T') == level(T) - 1.
/// For a uniform initial mesh and integer G, G_tilde = 3*G*h0 reproduces
/// trisect() exactly.
TimeMesh trisect_level(const TimeMesh& mesh, int elem, double G_tilde,
                       ScanOrder order = ScanOrder::LeftToRight);

/// Check |T_i|/|T_j| <= C_g * g0^{-|i-j|} for all pairs (direct O(n^2) scan).
bool check_grading(const TimeMesh& mesh, double C_g, double g0);

/// Elements selected for refinement by Doerfler marking.
struct MarkSet {
    std::vector<int> indices;  // ascending
    double theta = 0.0;
};

/// Minimal-cardinality set with sum of marked eta^2 >= theta * total.
/// Deterministic tie-break: descending eta^2, then ascending index.
/// An all-zero input yields an empty set.
MarkSet doerfler_mark(const std::vector<double>& eta_sq, double theta);

/// Serialize in the CLI dump format: header `t_end=<v> h0=<v>`, one
/// breakpoint per line, then one line `levels= l0 l1 ...`.
void write_mesh(const TimeMesh& mesh, std::ostream& os);
TimeMesh read_mesh(std::istream& is);

}  // namespace radapt
