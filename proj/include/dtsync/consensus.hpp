#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dtsync {

// Undirected connectivity graph. Edges are stored with the smaller node first.
struct TopologyGraph {
    int n = 0;
    std::vector<std::pair<int, int>> edges;

    void add_edge(int a, int b) {
        if (a == b) throw std::invalid_argument("topology: self-loops not allowed");
        if (a < 0 || b < 0 || a >= n || b >= n)
            throw std::invalid_argument("topology: node index out of range");
        if (a > b) std::swap(a, b);
        if (!has_edge(a, b)) edges.emplace_back(a, b);
    }

    bool has_edge(int a, int b) const {
        if (a > b) std::swap(a, b);
        return std::find(edges.begin(), edges.end(), std::make_pair(a, b)) != edges.end();
    }

    int degree(int v) const {
        int d = 0;
        for (const auto& [a, b] : edges)
            if (a == v || b == v) ++d;
        return d;
    }

    bool is_connected() const {
        if (n == 0) return false;
        std::vector<int> stack{0};
        std::vector<bool> seen(std::size_t(n), false);
        seen[0] = true;
        int count = 1;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            for (const auto& [a, b] : edges) {
                int u = (a == v) ? b : (b == v) ? a : -1;
                if (u >= 0 && !seen[std::size_t(u)]) {
                    seen[std::size_t(u)] = true;
                    ++count;
                    stack.push_back(u);
                }
            }
        }
        return count == n;
    }

    // Edge list in node-id lexicographic order (the fixed TDMA visit order).
    std::vector<std::pair<int, int>> sorted_edges() const {
        auto e = edges;
        std::sort(e.begin(), e.end());
        return e;
    }
};

// Named four-node presets matching the tested connectivity configurations.
inline TopologyGraph topology_preset(const std::string& name) {
    TopologyGraph g;
    g.n = 4;
    if (name == "3conn") {
        g.add_edge(0, 1);
        g.add_edge(1, 2);
        g.add_edge(2, 3);
    } else if (name == "4conn-ring") {
        g.add_edge(0, 1);
        g.add_edge(1, 2);
        g.add_edge(2, 3);
        g.add_edge(0, 3);
    } else if (name == "5conn") {
        g.add_edge(0, 1);
        g.add_edge(1, 2);
        g.add_edge(2, 3);
        g.add_edge(0, 3);
        g.add_edge(0, 2);
    } else if (name == "full") {
        for (int a = 0; a < 4; ++a)
            for (int b = a + 1; b < 4; ++b) g.add_edge(a, b);
    } else {
        throw std::invalid_argument("unknown topology preset: " + name);
    }
    return g;
}

// Symmetric, doubly stochastic, sparsity-matching mixing matrix.
struct MixingMatrix {
    int n = 0;
    std::vector<double> w;  // row-major n x n

    double at(int i, int j) const { return w[std::size_t(i) * std::size_t(n) + std::size_t(j)]; }
    double& at(int i, int j) { return w[std::size_t(i) * std::size_t(n) + std::size_t(j)]; }

    bool satisfies_invariants(const TopologyGraph& g, double tol = 1e-12) const {
        for (int i = 0; i < n; ++i) {
            double row = 0.0, col = 0.0;
            for (int j = 0; j < n; ++j) {
                if (at(i, j) < -tol) return false;
                if (std::abs(at(i, j) - at(j, i)) > tol) return false;
                if (i != j && !g.has_edge(i, j) && at(i, j) != 0.0) return false;
                row += at(i, j);
                col += at(j, i);
            }
            if (std::abs(row - 1.0) > tol || std::abs(col - 1.0) > tol) return false;
        }
        return true;
    }
};

// Metropolis-Hastings constant edge weights: only local degree information.
inline MixingMatrix metropolis_hastings_weights(const TopologyGraph& g) {
    if (g.n < 1) throw std::invalid_argument("metropolis_hastings_weights: empty graph");
    MixingMatrix m;
    m.n = g.n;
    m.w.assign(std::size_t(g.n) * std::size_t(g.n), 0.0);
    for (const auto& [a, b] : g.edges) {
        const double w = 1.0 / (double(std::max(g.degree(a), g.degree(b))) + 1.0);
        m.at(a, b) = w;
        m.at(b, a) = w;
    }
    for (int i = 0; i < g.n; ++i) {
        double off = 0.0;
        for (int j = 0; j < g.n; ++j)
            if (j != i) off += m.at(i, j);
        m.at(i, i) = 1.0 - off;
    }
    return m;
}

// One consensus update: each node adds its weighted neighborhood-average
// offset, (W Delta)_ii. delta(j,i) holds the measurement Delta_ji kept at
// node i about neighbor j; the diagonal must be zero.
inline std::vector<double> consensus_step(const std::vector<double>& times,
                                          const std::vector<std::vector<double>>& delta,
                                          const MixingMatrix& w) {
    const std::size_t n = times.size();
    if (std::size_t(w.n) != n || delta.size() != n)
        throw std::invalid_argument("consensus_step: dimension mismatch");
    std::vector<double> out(times);
    for (std::size_t i = 0; i < n; ++i) {
        if (delta[i].size() != n) throw std::invalid_argument("consensus_step: dimension mismatch");
        double avg = 0.0;
        for (std::size_t j = 0; j < n; ++j) avg += w.at(int(i), int(j)) * delta[j][i];
        out[i] += avg;
    }
    return out;
}

// Per-iteration convergence series: max |Delta| over edges and its log
// magnitude in dBps (10 log10(|Delta| / 1 ps)).
struct ConvergenceMetrics {
    std::vector<double> max_abs_offset;  // seconds
    std::vector<double> max_abs_dbps;
};

inline ConvergenceMetrics convergence_metrics(
    const std::vector<std::vector<double>>& offsets_history) {
    if (offsets_history.empty())
        throw std::invalid_argument("convergence_metrics: no iterations recorded");
    ConvergenceMetrics m;
    for (const auto& iter : offsets_history) {
        double mx = 0.0;
        for (double d : iter) mx = std::max(mx, std::abs(d));
        m.max_abs_offset.push_back(mx);
        m.max_abs_dbps.push_back(10.0 * std::log10(std::max(mx, 1e-30) / 1e-12));
    }
    return m;
}

// First iteration after which the max offset stays below the threshold.
inline std::optional<std::size_t> threshold_crossing(const std::vector<double>& max_abs_offset,
                                                     double threshold) {
    std::optional<std::size_t> cross;
    for (std::size_t k = 0; k < max_abs_offset.size(); ++k) {
        if (max_abs_offset[k] < threshold) {
            if (!cross) cross = k;
        } else {
            cross.reset();
        }
    }
    return cross;
}

}  // namespace dtsync
