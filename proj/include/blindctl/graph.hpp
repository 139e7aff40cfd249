#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <utility>
#include <vector>

namespace blindctl {

/**
Undirected simple graph on vertices 0..n-1 (files use 1-based labels).
Edges are stored canonically: u < v, sorted, duplicates collapsed.
Self-loops are rejected.
*/
class Graph {
public:
    Graph(int n, std::vector<std::pair<int, int>> edges);

    int num_vertices() const { return n_; }
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }
    int num_edges() const { return static_cast<int>(edges_.size()); }

    bool has_edge(int u, int v) const;
    int degree(int v) const { return degrees_[v]; }
    const std::vector<int>& degrees() const { return degrees_; }

    /// Every vertex has degree exactly 3.
    bool is_cubic() const;

    /// Dense 0-1 adjacency matrix.
    Eigen::MatrixXd adjacency() const;

    /// Neighbor bitmask per vertex; only valid when n <= 64.
    std::vector<std::uint64_t> neighbor_masks() const;

private:
    int n_;
    std::vector<std::pair<int, int>> edges_;
    std::vector<int> degrees_;
};

}  // namespace blindctl
