#pragma once
// Independent reference computations used by the tests.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

/// Minimum-cost coupling by enumerating every spanning tree of the complete
/// bipartite graph (the basic solutions of the transportation polytope).
inline double min_coupling_cost(const std::vector<double> &a, const std::vector<double> &b, const Eigen::MatrixXd &c) {
    const int m = static_cast<int>(a.size()), n = static_cast<int>(b.size());
    const int cells = m * n, need = m + n - 1;
    double best = INFINITY;
    std::vector<int> pick;
    std::function<void(int)> rec = [&](int start) {
        if (static_cast<int>(pick.size()) == need) {
            // acyclic?
            std::vector<int> parent(m + n);
            std::iota(parent.begin(), parent.end(), 0);
            std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
            for (int cell : pick) {
                const int r = find(cell / n), s = find(m + cell % n);
                if (r == s) return;
                parent[r] = s;
            }
            // peel leaves
            std::vector<double> rest(m + n);
            for (int i = 0; i < m; ++i) rest[i] = a[i];
            for (int j = 0; j < n; ++j) rest[m + j] = b[j];
            std::vector<char> used(pick.size(), 0);
            double cost = 0.0;
            for (int round = 0; round < need; ++round) {
                std::vector<int> deg(m + n, 0), last(m + n, -1);
                for (std::size_t e = 0; e < pick.size(); ++e) {
                    if (used[e]) continue;
                    const int u = pick[e] / n, v = m + pick[e] % n;
                    ++deg[u];
                    ++deg[v];
                    last[u] = last[v] = static_cast<int>(e);
                }
                int leaf = -1;
                for (int v = 0; v < m + n; ++v)
                    if (deg[v] == 1) {
                        leaf = v;
                        break;
                    }
                const int e = last[leaf];
                const double flow = rest[leaf];
                if (flow < -1e-12) return;
                const int u = pick[e] / n, v = m + pick[e] % n;
                rest[u] -= flow;
                rest[v] -= flow;
                used[e] = 1;
                cost += flow * c(u, v - m);
            }
            best = std::min(best, cost);
            return;
        }
        for (int cell = start; cell < cells; ++cell) {
            pick.push_back(cell);
            rec(cell + 1);
            pick.pop_back();
        }
    };
    rec(0);
    return best;
}

/// Fraction of the uniform cap of radius r on S^2 lying within s of the center.
inline double cap_fraction(double s, double r) { return (1.0 - std::cos(s)) / (1.0 - std::cos(r)); }

/// Arc length of the hyperboloid curve through a and b obtained by normalising
/// the chord, by composite Simpson on the Minkowski speed.
inline double hyperbolic_chord_length(const Eigen::Vector3d &a, const Eigen::Vector3d &b, int n = 20000) {
    auto mink = [](const Eigen::Vector3d &u, const Eigen::Vector3d &v) { return -u(0) * v(0) + u(1) * v(1) + u(2) * v(2); };
    auto p = [&](double t) {
        const Eigen::Vector3d c = (1.0 - t) * a + t * b;
        return Eigen::Vector3d(c / std::sqrt(-mink(c, c)));
    };
    auto speed = [&](double t) {
        const double h = 1e-6;
        const Eigen::Vector3d d = (p(t + h) - p(t - h)) / (2.0 * h);
        return std::sqrt(std::max(0.0, mink(d, d)));
    };
    double s = speed(0.0) + speed(1.0);
    for (int k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * speed(static_cast<double>(k) / n);
    return s / (3.0 * n);
}

} // namespace oracle
