#include "geoflock/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "geoflock/errors.hpp"

namespace geoflock {

std::vector<int> solve_assignment(const Eigen::MatrixXd &cost) {
    const int n = static_cast<int>(cost.rows());
    if (cost.cols() != n) throw UsageError("assignment needs a square cost matrix");
    if (n == 0) return {};
    const double inf = std::numeric_limits<double>::infinity();
    // 1-based potentials; column 0 is the virtual start.
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> col_of_row(n, -1);
    for (int j = 1; j <= n; ++j) col_of_row[p[j] - 1] = j - 1;
    return col_of_row;
}

namespace {

struct Basis {
    int m, n;
    std::vector<double> x;          // m*n, meaningful on basic cells
    std::vector<char> basic;        // m*n
    std::vector<std::vector<int>> row_cols, col_rows;

    Basis(int m_, int n_)
        : m(m_), n(n_), x(static_cast<std::size_t>(m_) * n_, 0.0),
          basic(static_cast<std::size_t>(m_) * n_, 0), row_cols(m_), col_rows(n_) {}

    std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * n + j; }

    void add(int i, int j, double mass) {
        basic[idx(i, j)] = 1;
        x[idx(i, j)] = mass;
        row_cols[i].push_back(j);
        col_rows[j].push_back(i);
    }
    void remove(int i, int j) {
        basic[idx(i, j)] = 0;
        x[idx(i, j)] = 0.0;
        std::erase(row_cols[i], j);
        std::erase(col_rows[j], i);
    }
};

// Tree nodes: rows 0..m-1, columns m..m+n-1.
void compute_potentials(const Basis &b, const Eigen::MatrixXd &c, std::vector<double> &u, std::vector<double> &v) {
    std::vector<char> seen(b.m + b.n, 0);
    std::vector<int> stack{0};
    u.assign(b.m, 0.0);
    v.assign(b.n, 0.0);
    seen[0] = 1;
    while (!stack.empty()) {
        const int node = stack.back();
        stack.pop_back();
        if (node < b.m) {
            for (int j : b.row_cols[node]) {
                if (seen[b.m + j]) continue;
                seen[b.m + j] = 1;
                v[j] = c(node, j) - u[node];
                stack.push_back(b.m + j);
            }
        } else {
            const int j = node - b.m;
            for (int i : b.col_rows[j]) {
                if (seen[i]) continue;
                seen[i] = 1;
                u[i] = c(i, j) - v[j];
                stack.push_back(i);
            }
        }
    }
}

// Cells on the tree path from row `ie` to column `je`, in order.
std::vector<std::pair<int, int>> tree_path(const Basis &b, int ie, int je) {
    const int total = b.m + b.n;
    std::vector<int> parent(total, -2);
    std::vector<int> queue{b.m + je};
    parent[b.m + je] = -1;
    for (std::size_t q = 0; q < queue.size(); ++q) {
        const int node = queue[q];
        if (node == ie) break;
        if (node < b.m) {
            for (int j : b.row_cols[node])
                if (parent[b.m + j] == -2) {
                    parent[b.m + j] = node;
                    queue.push_back(b.m + j);
                }
        } else {
            for (int i : b.col_rows[node - b.m])
                if (parent[i] == -2) {
                    parent[i] = node;
                    queue.push_back(i);
                }
        }
    }
    if (parent[ie] == -2) throw std::logic_error("transportation basis is not a spanning tree");
    std::vector<std::pair<int, int>> cells;
    for (int node = ie; parent[node] != -1; node = parent[node]) {
        const int next = parent[node];
        if (node < b.m)
            cells.emplace_back(node, next - b.m);
        else
            cells.emplace_back(next, node - b.m);
    }
    return cells;
}

} // namespace

TransportSolution solve_transportation(const Eigen::VectorXd &supply, const Eigen::VectorXd &demand,
                                       const Eigen::MatrixXd &cost) {
    const int m = static_cast<int>(supply.size());
    const int n = static_cast<int>(demand.size());
    if (m == 0 || n == 0) throw UsageError("transportation problem with no sources or targets");
    if (cost.rows() != m || cost.cols() != n) throw UsageError("cost matrix shape does not match marginals");
    if ((supply.array() < 0).any() || (demand.array() < 0).any())
        throw UsageError("negative supply or demand");
    if (std::abs(supply.sum() - demand.sum()) > 1e-9) throw UsageError("supply and demand totals differ");

    Basis b(m, n);
    {
        std::vector<double> ra(supply.data(), supply.data() + m), rb(demand.data(), demand.data() + n);
        int i = 0, j = 0;
        while (true) {
            const double q = std::min(ra[i], rb[j]);
            b.add(i, j, q);
            ra[i] -= q;
            rb[j] -= q;
            if (i == m - 1 && j == n - 1) break;
            if (j == n - 1 || (i < m - 1 && ra[i] <= rb[j]))
                ++i;
            else
                ++j;
        }
    }

    const double tol = 1e-12 * (1.0 + cost.cwiseAbs().maxCoeff());
    const long max_pivots = std::max<long>(100000, 20L * (m + n) * (m + n));
    std::vector<double> u, v;
    int degenerate_run = 0;
    TransportSolution out;

    for (long pivot = 0;; ++pivot) {
        if (pivot > max_pivots) throw ResourceError("transportation simplex exceeded its pivot cap");
        compute_potentials(b, cost, u, v);
        const bool bland = degenerate_run > 20;
        int ie = -1, je = -1;
        double best = -tol;
        for (int i = 0; i < m && !(bland && ie >= 0); ++i) {
            for (int j = 0; j < n; ++j) {
                if (b.basic[b.idx(i, j)]) continue;
                const double r = cost(i, j) - u[i] - v[j];
                if (r < best) {
                    best = r;
                    ie = i;
                    je = j;
                    if (bland) break;
                }
            }
        }
        if (ie < 0) break;

        const auto path = tree_path(b, ie, je);
        double theta = std::numeric_limits<double>::infinity();
        int leave = -1;
        for (std::size_t k = 0; k < path.size(); k += 2) {
            const auto [i, j] = path[k];
            const double q = b.x[b.idx(i, j)];
            const int li = leave < 0 ? -1 : static_cast<int>(b.idx(path[leave].first, path[leave].second));
            if (q < theta || (q == theta && static_cast<int>(b.idx(i, j)) < li)) {
                theta = q;
                leave = static_cast<int>(k);
            }
        }
        degenerate_run = theta > 0.0 ? 0 : degenerate_run + 1;
        for (std::size_t k = 0; k < path.size(); ++k) {
            const auto [i, j] = path[k];
            if (k % 2 == 0)
                b.x[b.idx(i, j)] = static_cast<int>(k) == leave ? 0.0 : b.x[b.idx(i, j)] - theta;
            else
                b.x[b.idx(i, j)] += theta;
        }
        b.remove(path[leave].first, path[leave].second);
        b.add(ie, je, theta);
        ++out.pivots;
    }

    for (int i = 0; i < m; ++i) {
        for (int j : b.row_cols[i]) {
            const double q = b.x[b.idx(i, j)];
            if (q <= 0.0) continue;
            out.flows.push_back({i, j, q});
        }
    }
    std::sort(out.flows.begin(), out.flows.end(), [](const Flow &a, const Flow &c) {
        return a.source != c.source ? a.source < c.source : a.target < c.target;
    });
    for (const Flow &f : out.flows) out.cost += f.mass * cost(f.source, f.target);
    return out;
}

} // namespace geoflock
