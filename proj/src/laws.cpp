#include "bsekit/laws.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace bsekit {

DiscreteLaw::DiscreteLaw(MatrixXd a, VectorXd w, VectorXd mw)
    : atoms(std::move(a)), weights(std::move(w)), metric_weights(std::move(mw)) {
    if (atoms.cols() != weights.size() || atoms.cols() == 0)
        throw DimensionError("law needs one positive weight per atom");
    if ((weights.array() <= 0.0).any()) throw DomainError("law weights must be positive");
    if (std::abs(weights.sum() - 1.0) > 1e-12) throw DomainError("law weights must sum to 1");
    if (metric_weights.size() != 0 && metric_weights.size() != atoms.rows())
        throw DimensionError("metric weights must match the atom dimension");
    if (metric_weights.size() != 0 && (metric_weights.array() <= 0.0).any())
        throw DomainError("metric weights must be positive");
}

DiscreteLaw empirical_law(const FiniteFilteredSpace& space, const RandomVectord& x,
                          const VectorXd& metric_weights) {
    detail::check_node_count(space, x.level(), x.size());
    const MatrixXd& v = x.values();
    const VectorXd& p = space.probabilities(x.level());
    std::vector<Index> order(static_cast<std::size_t>(v.cols()));
    std::iota(order.begin(), order.end(), Index{0});
    auto less = [&](Index a, Index b) {
        for (Index r = 0; r < v.rows(); ++r) {
            if (v(r, a) < v(r, b)) return true;
            if (v(r, b) < v(r, a)) return false;
        }
        return false;
    };
    std::stable_sort(order.begin(), order.end(), less);
    std::vector<Index> heads;
    std::vector<double> w;
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (i == 0 || less(order[i - 1], order[i])) {
            heads.push_back(order[i]);
            w.push_back(0.0);
        }
        w.back() += p[order[i]];
    }
    MatrixXd atoms(v.rows(), static_cast<Index>(heads.size()));
    VectorXd weights(static_cast<Index>(heads.size()));
    for (std::size_t i = 0; i < heads.size(); ++i) {
        atoms.col(static_cast<Index>(i)) = v.col(heads[i]);
        weights[static_cast<Index>(i)] = w[i];
    }
    return DiscreteLaw(std::move(atoms), std::move(weights), metric_weights);
}

namespace {

double quantile_w2_squared(const DiscreteLaw& a, const DiscreteLaw& b) {
    auto sorted = [](const DiscreteLaw& l) {
        std::vector<std::pair<double, double>> s;
        for (Index i = 0; i < l.size(); ++i) s.emplace_back(l.atoms(0, i), l.weights[i]);
        std::sort(s.begin(), s.end());
        return s;
    };
    const auto sa = sorted(a), sb = sorted(b);
    std::size_t i = 0, j = 0;
    double ra = sa[0].second, rb = sb[0].second, acc = 0.0;
    while (i < sa.size() && j < sb.size()) {
        const double w = std::min(ra, rb);
        const double diff = sa[i].first - sb[j].first;
        acc += w * diff * diff;
        ra -= w;
        rb -= w;
        if (ra <= rb) {
            if (++i < sa.size()) ra += sa[i].second;
        } else {
            if (++j < sb.size()) rb += sb[j].second;
        }
    }
    return acc;
}

struct Cell {
    Index i, j;
    double x;
};

}  // namespace

MatrixXd transport_plan(const VectorXd& a, const VectorXd& b, const MatrixXd& cost) {
    const Index m = a.size(), n = b.size();
    if (cost.rows() != m || cost.cols() != n) throw DimensionError("cost matrix shape mismatch");

    // North-west corner start: exactly m + n - 1 basic cells (some possibly degenerate).
    std::vector<Cell> basis;
    {
        VectorXd s = a, d = b;
        Index i = 0, j = 0;
        while (true) {
            const double x = std::max(0.0, std::min(s[i], d[j]));
            basis.push_back({i, j, x});
            s[i] -= x;
            d[j] -= x;
            if (i == m - 1 && j == n - 1) break;
            if (i == m - 1) ++j;
            else if (j == n - 1) ++i;
            else if (s[i] <= d[j]) ++i;
            else ++j;
        }
    }

    const double eps = 1e-13 * std::max(1.0, cost.cwiseAbs().maxCoeff());
    const Index nodes = m + n;
    std::vector<std::vector<std::size_t>> adj(static_cast<std::size_t>(nodes));
    std::vector<double> pot(static_cast<std::size_t>(nodes));
    std::vector<Index> from_node(static_cast<std::size_t>(nodes));
    std::vector<std::size_t> from_cell(static_cast<std::size_t>(nodes));
    std::vector<char> seen(static_cast<std::size_t>(nodes));

    // BFS over the basis tree from `root`; fills potentials and parent links.
    auto traverse = [&](Index root) {
        for (auto& l : adj) l.clear();
        for (std::size_t c = 0; c < basis.size(); ++c) {
            adj[static_cast<std::size_t>(basis[c].i)].push_back(c);
            adj[static_cast<std::size_t>(m + basis[c].j)].push_back(c);
        }
        std::fill(seen.begin(), seen.end(), 0);
        std::vector<Index> queue{root};
        seen[static_cast<std::size_t>(root)] = 1;
        pot[static_cast<std::size_t>(root)] = 0.0;
        for (std::size_t h = 0; h < queue.size(); ++h) {
            const Index u = queue[h];
            for (std::size_t c : adj[static_cast<std::size_t>(u)]) {
                const Index v = (u < m) ? m + basis[c].j : basis[c].i;
                if (seen[static_cast<std::size_t>(v)]) continue;
                seen[static_cast<std::size_t>(v)] = 1;
                from_node[static_cast<std::size_t>(v)] = u;
                from_cell[static_cast<std::size_t>(v)] = c;
                // u_i + v_j = c_ij
                pot[static_cast<std::size_t>(v)] = cost(basis[c].i, basis[c].j) - pot[static_cast<std::size_t>(u)];
                queue.push_back(v);
            }
        }
    };

    for (long iter = 0;; ++iter) {
        if (iter > 1000000) throw Error("transportation simplex did not terminate");
        traverse(0);
        // Bland: first improving cell in row-major order.
        Index ei = -1, ej = -1;
        for (Index i = 0; i < m && ei < 0; ++i)
            for (Index j = 0; j < n; ++j) {
                const double rc = cost(i, j) - pot[static_cast<std::size_t>(i)] - pot[static_cast<std::size_t>(m + j)];
                if (rc < -eps) {
                    ei = i;
                    ej = j;
                    break;
                }
            }
        if (ei < 0) break;

        // Cycle: entering cell plus the tree path from column ej back to row ei.
        traverse(ei);
        std::vector<std::size_t> path;
        for (Index v = m + ej; v != ei; v = from_node[static_cast<std::size_t>(v)])
            path.push_back(from_cell[static_cast<std::size_t>(v)]);
        // path[0] touches column ej and gets -, then signs alternate.
        double theta = INFINITY;
        std::size_t leave = 0;
        for (std::size_t k = 0; k < path.size(); k += 2) {
            const Cell& c = basis[path[k]];
            const Cell& best = basis[leave];
            if (c.x < theta || (c.x == theta && (c.i < best.i || (c.i == best.i && c.j < best.j)))) {
                theta = c.x;
                leave = path[k];
            }
        }
        for (std::size_t k = 0; k < path.size(); ++k) basis[path[k]].x += (k % 2 == 0) ? -theta : theta;
        basis[leave] = {ei, ej, theta};
    }

    MatrixXd plan = MatrixXd::Zero(m, n);
    for (const Cell& c : basis) plan(c.i, c.j) += std::max(0.0, c.x);
    return plan;
}

namespace {

// Strict order on laws so that the two argument orders run the same computation.
bool precedes(const DiscreteLaw& a, const DiscreteLaw& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    for (Index i = 0; i < a.atoms.size(); ++i)
        if (a.atoms.data()[i] != b.atoms.data()[i]) return a.atoms.data()[i] < b.atoms.data()[i];
    for (Index i = 0; i < a.size(); ++i)
        if (a.weights[i] != b.weights[i]) return a.weights[i] < b.weights[i];
    return false;
}

}  // namespace

double wasserstein2(const DiscreteLaw& first, const DiscreteLaw& second, Index atom_limit) {
    if (first.dim() != second.dim()) throw DimensionError("laws live in different dimensions");
    const bool swap = precedes(second, first);
    const DiscreteLaw& a = swap ? second : first;
    const DiscreteLaw& b = swap ? first : second;
    if (a.metric_weights.size() != b.metric_weights.size() ||
        (a.metric_weights.size() && a.metric_weights != b.metric_weights))
        throw DimensionError("laws carry different metrics");
    if (a.atoms == b.atoms && a.weights == b.weights) return 0.0;
    const VectorXd mw = a.metric_weights.size() ? a.metric_weights : VectorXd::Ones(a.dim());
    if (a.dim() == 1) return std::sqrt(std::max(0.0, mw[0] * quantile_w2_squared(a, b)));
    if (a.size() > atom_limit || b.size() > atom_limit)
        throw DomainError("W2 in dimension > 1 supports at most " + std::to_string(atom_limit) +
                          " atoms per law");
    MatrixXd cost(a.size(), b.size());
    for (Index i = 0; i < a.size(); ++i)
        for (Index j = 0; j < b.size(); ++j)
            cost(i, j) = (mw.array() * (a.atoms.col(i) - b.atoms.col(j)).array().square()).sum();
    const MatrixXd plan = transport_plan(a.weights, b.weights, cost);
    return std::sqrt(std::max(0.0, (plan.array() * cost.array()).sum()));
}

}  // namespace bsekit
