#pragma once

#include "rtdc/model.hpp"
#include "rtdc/state.hpp"

#include <json.hpp>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace rtdc {

enum class NodeType : std::uint8_t { Controllable, Uncontrollable, DisjunctHub, ConjunctHub, Wait };
enum class EdgeType : std::uint8_t { Constraint, Membership, Contingency };

inline constexpr std::size_t kNodeFeatureDim = 5;
/// lb class (10) | ub class (10) | type (3) | lb negative, ub negative (2) | unbounded (1)
inline constexpr std::size_t kEdgeFeatureDim = 26;
inline constexpr std::size_t kDistanceClasses = 10;

struct GraphEdge {
    std::size_t i = 0;
    std::size_t j = 0;  // i < j; both directions share `features`
    std::vector<float> features;
    friend bool operator==(const GraphEdge&, const GraphEdge&) = default;
};

struct ActiveNode {
    std::size_t node = 0;
    Action choice;
    friend bool operator==(const ActiveNode&, const ActiveNode&) = default;
};

struct GraphEncoding {
    std::vector<std::vector<float>> node_features;
    std::vector<GraphEdge> edges;
    std::vector<ActiveNode> active;
    TimeValue d_max;

    [[nodiscard]] std::size_t num_nodes() const noexcept { return node_features.size(); }
    /// Dense symmetric 0/1 matrix.
    [[nodiscard]] std::vector<std::vector<std::uint8_t>> adjacency() const;
    /// Neighbours of each node with the index of the connecting edge.
    [[nodiscard]] std::vector<std::vector<std::pair<std::size_t, std::size_t>>> neighbours() const;

    friend bool operator==(const GraphEncoding&, const GraphEncoding&) = default;
};

class DegenerateHorizon : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class OutOfRange : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// floor(10 x) clamped to 9; x must lie in [0, 1].
int distance_class(double x);
/// Exact variant for |v| / d_max, d_max > 0 finite, |v| <= d_max.
int distance_class(const TimeValue& v, const TimeValue& d_max);

/// Graph of the state about to expand a d-OR. Times are relative to s.time
/// and scaled by the largest finite magnitude among the remaining
/// constraints, activation windows and unactivated contingency links.
/// Throws DegenerateHorizon when that magnitude is zero or absent.
GraphEncoding to_graph(const Dtnu& d, const DtnuState& s);

/// {"node_features", "edges":[{"i","j","features"}], "active":[{"node","choice"}]}
/// with choice a timepoint name or "WAIT".
nlohmann::json graph_to_json(const Dtnu& d, const GraphEncoding& g);
/// Inverse of graph_to_json; d_max is not part of the record and stays 0.
GraphEncoding graph_from_json(const Dtnu& d, const nlohmann::json& j);

}  // namespace rtdc
