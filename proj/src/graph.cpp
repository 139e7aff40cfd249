#include "blindctl/graph.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace blindctl {

Graph::Graph(int n, std::vector<std::pair<int, int>> edges) : n_(n) {
    if (n <= 0) throw std::invalid_argument("Graph: need at least one vertex");
    for (auto& [u, v] : edges) {
        if (u < 0 || v < 0 || u >= n || v >= n)
            throw std::invalid_argument("Graph: vertex index out of range: (" +
                                        std::to_string(u) + "," + std::to_string(v) + ")");
        if (u == v)
            throw std::invalid_argument("Graph: self-loop at vertex " + std::to_string(u + 1));
        if (u > v) std::swap(u, v);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    edges_ = std::move(edges);
    degrees_.assign(n_, 0);
    for (auto [u, v] : edges_) {
        ++degrees_[u];
        ++degrees_[v];
    }
}

bool Graph::has_edge(int u, int v) const {
    if (u > v) std::swap(u, v);
    return std::binary_search(edges_.begin(), edges_.end(), std::make_pair(u, v));
}

bool Graph::is_cubic() const {
    return std::all_of(degrees_.begin(), degrees_.end(), [](int d) { return d == 3; });
}

Eigen::MatrixXd Graph::adjacency() const {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n_, n_);
    for (auto [u, v] : edges_) {
        A(u, v) = 1.0;
        A(v, u) = 1.0;
    }
    return A;
}

std::vector<std::uint64_t> Graph::neighbor_masks() const {
    if (n_ > 64) throw std::invalid_argument("Graph: neighbor masks need n <= 64");
    std::vector<std::uint64_t> masks(n_, 0);
    for (auto [u, v] : edges_) {
        masks[u] |= std::uint64_t(1) << v;
        masks[v] |= std::uint64_t(1) << u;
    }
    return masks;
}

}  // namespace blindctl
