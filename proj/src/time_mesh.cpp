#include "radapt/time_mesh.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace radapt {

namespace {

using int128 = __int128;

// Exact powers of three for the integer distance arithmetic.
int128 pow3(int e) {
    if (e < 0 || e > 70) {
        throw std::runtime_error("time_mesh: refinement depth out of the supported range");
    }
    int128 r = 1;
    for (int i = 0; i < e; ++i) r *= 3;
    return r;
}

int find_element(const TimeMesh& m, double left, int level) {
    // Breakpoints of surviving elements are never recomputed, so exact
    // double comparison identifies an element across refinements.
    auto it = std::lower_bound(m.breakpoints.begin(), m.breakpoints.end() - 1, left);
    if (it == m.breakpoints.end() - 1 || *it != left) return -1;
    int idx = static_cast<int>(it - m.breakpoints.begin());
    return m.levels[idx] == level ? idx : -1;
}

// Sum of the level-derived sizes strictly between elements a and b, in units
// of h0 * 3^{-scale}. Exact for meshes created by trisection.
int128 dist_units(const TimeMesh& m, int a, int b, int scale) {
    if (a > b) std::swap(a, b);
    int128 sum = 0;
    for (int i = a + 1; i < b; ++i) sum += pow3(scale - m.levels[i]);
    return sum;
}

void split_element(TimeMesh& m, int idx) {
    const double a = m.breakpoints[idx];
    const double s = m.size(idx);
    m.breakpoints.insert(m.breakpoints.begin() + idx + 1, {a + s / 3.0, a + 2.0 * s / 3.0});
    const int child = m.levels[idx] + 1;
    m.levels[idx] = child;
    m.levels.insert(m.levels.begin() + idx + 1, {child, child});
}

struct Key {
    double left;
    int level;
};

// Shared recursion for both trisection variants. `within_range(target, cand)`
// decides whether a surviving candidate forces a recursive call; geometric
// positions and sizes of surviving elements never change, so the predicate
// is stable and may be evaluated lazily.
template <typename Pred>
void trisect_impl(TimeMesh& m, Key target, const Pred& within_range, ScanOrder order) {
    int ti = find_element(m, target.left, target.level);
    if (ti < 0) return;  // already refined by an outer call
    std::vector<Key> candidates;
    candidates.reserve(m.levels.size() - 1);
    for (int i = 0; i < m.n_elements(); ++i) {
        if (i != ti) candidates.push_back({m.breakpoints[i], m.levels[i]});
    }
    if (order == ScanOrder::RightToLeft) std::reverse(candidates.begin(), candidates.end());
    for (const Key& cand : candidates) {
        int ci = find_element(m, cand.left, cand.level);
        if (ci < 0) continue;  // removed by an earlier recursive call
        ti = find_element(m, target.left, target.level);
        if (within_range(m, ti, ci)) {
            trisect_impl(m, cand, within_range, order);
        }
    }
    ti = find_element(m, target.left, target.level);
    split_element(m, ti);
}

int max_level(const TimeMesh& m) {
    return *std::max_element(m.levels.begin(), m.levels.end());
}

}  // namespace

double TimeMesh::size(int elem) const {
    return h0 * std::pow(3.0, -levels[elem]);
}

double TimeMesh::dist(int a, int b) const {
    double gap = std::max(left(b) - right(a), left(a) - right(b));
    return std::max(gap, 0.0);
}

bool TimeMesh::same_as(const TimeMesh& other) const {
    return t_end == other.t_end && h0 == other.h0 && levels == other.levels;
}

TimeMesh uniform_mesh(double t_end, int n) {
    if (n < 1 || !(t_end > 0.0)) {
        throw std::invalid_argument("uniform_mesh: need t_end > 0 and n >= 1");
    }
    TimeMesh m;
    m.t_end = t_end;
    m.h0 = t_end / n;
    m.breakpoints.resize(n + 1);
    for (int i = 0; i <= n; ++i) m.breakpoints[i] = i * m.h0;
    m.breakpoints[n] = t_end;
    m.levels.assign(n, 0);
    return m;
}

TimeMesh trisect(const TimeMesh& mesh, int elem, int G, ScanOrder order) {
    if (elem < 0 || elem >= mesh.n_elements()) {
        throw std::invalid_argument("trisect: element index out of range");
    }
    if (G < 1) throw std::invalid_argument("trisect: grading parameter G must be >= 1");
    TimeMesh m = mesh;
    auto within = [G](const TimeMesh& cur, int t, int c) {
        if (cur.levels[c] > cur.levels[t] - 1) return false;  // |T'|/|T| < 3
        const int scale = max_level(cur);
        return dist_units(cur, t, c, scale) <= int128(G) * pow3(scale - cur.levels[t]);
    };
    trisect_impl(m, {m.breakpoints[elem], m.levels[elem]}, within, order);
    return m;
}

TimeMesh trisect_level(const TimeMesh& mesh, int elem, double G_tilde, ScanOrder order) {
    if (elem < 0 || elem >= mesh.n_elements()) {
        throw std::invalid_argument("trisect_level: element index out of range");
    }
    if (!(G_tilde > 0.0)) throw std::invalid_argument("trisect_level: G_tilde must be > 0");
    TimeMesh m = mesh;
    // Threshold dist <= G_tilde * 3^{-(level+1)} in units of h0 * 3^{-scale}
    // is (G_tilde/h0) * 3^{scale-level-1}. When G_tilde/h0 is integral (the
    // 3*G*h0 case) the comparison is done exactly in integers.
    const double g_over_h0 = G_tilde / mesh.h0;
    const double g_rounded = std::round(g_over_h0);
    const bool integral = std::abs(g_over_h0 - g_rounded) <= 1e-9 * std::max(1.0, g_over_h0);
    auto within = [&](const TimeMesh& cur, int t, int c) {
        if (cur.levels[c] != cur.levels[t] - 1) return false;
        const int scale = max_level(cur) + 1;  // keeps 3^{scale-level-1} integral
        const int128 d = dist_units(cur, t, c, scale);
        if (integral) {
            return d <= int128(static_cast<long long>(g_rounded)) * pow3(scale - cur.levels[t] - 1);
        }
        const double thr = g_over_h0 * std::pow(3.0, scale - cur.levels[t] - 1);
        return static_cast<double>(d) <= thr * (1.0 + 1e-12);
    };
    trisect_impl(m, {m.breakpoints[elem], m.levels[elem]}, within, order);
    return m;
}

bool check_grading(const TimeMesh& mesh, double C_g, double g0) {
    if (!(C_g >= 1.0) || !(g0 > 0.0 && g0 < 1.0)) {
        throw std::invalid_argument("check_grading: need C_g >= 1 and g0 in (0,1)");
    }
    const int n = mesh.n_elements();
    const double log3 = std::log(3.0);
    const double log_Cg = std::log(C_g);
    const double log_inv_g0 = -std::log(g0);
    // |T_i|/|T_j| = 3^{level_j - level_i}; compare in log space.
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double lhs = (mesh.levels[j] - mesh.levels[i]) * log3;
            const double rhs = log_Cg + std::abs(i - j) * log_inv_g0;
            if (lhs > rhs + 1e-9) return false;
        }
    }
    return true;
}

MarkSet doerfler_mark(const std::vector<double>& eta_sq, double theta) {
    if (!(theta > 0.0 && theta <= 1.0)) {
        throw std::invalid_argument("doerfler_mark: theta must be in (0,1]");
    }
    double total = 0.0;
    for (double e : eta_sq) {
        if (!(e >= 0.0) || !std::isfinite(e)) {
            throw std::invalid_argument("doerfler_mark: indicators must be finite and >= 0");
        }
        total += e;
    }
    MarkSet marks;
    marks.theta = theta;
    if (total == 0.0) return marks;  // estimator zero: nothing to refine

    std::vector<int> order(eta_sq.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (eta_sq[a] != eta_sq[b]) return eta_sq[a] > eta_sq[b];
        return a < b;
    });
    double acc = 0.0;
    for (int idx : order) {
        marks.indices.push_back(idx);
        acc += eta_sq[idx];
        if (acc >= theta * total) break;
    }
    std::sort(marks.indices.begin(), marks.indices.end());
    return marks;
}

void write_mesh(const TimeMesh& mesh, std::ostream& os) {
    os.precision(17);
    os << "t_end=" << mesh.t_end << " h0=" << mesh.h0 << "\n";
    for (double b : mesh.breakpoints) os << b << "\n";
    os << "levels=";
    for (int l : mesh.levels) os << " " << l;
    os << "\n";
}

TimeMesh read_mesh(std::istream& is) {
    TimeMesh m;
    std::string line;
    if (!std::getline(is, line)) throw std::invalid_argument("read_mesh: empty input");
    {
        std::istringstream header(line);
        std::string tok;
        while (header >> tok) {
            if (tok.rfind("t_end=", 0) == 0) m.t_end = std::stod(tok.substr(6));
            else if (tok.rfind("h0=", 0) == 0) m.h0 = std::stod(tok.substr(3));
        }
    }
    while (std::getline(is, line)) {
        if (line.rfind("levels=", 0) == 0) {
            std::istringstream ls(line.substr(7));
            int l;
            while (ls >> l) m.levels.push_back(l);
            break;
        }
        if (!line.empty()) m.breakpoints.push_back(std::stod(line));
    }
    if (m.breakpoints.size() != m.levels.size() + 1) {
        throw std::invalid_argument("read_mesh: inconsistent breakpoint/level counts");
    }
    return m;
}

}  // namespace radapt
