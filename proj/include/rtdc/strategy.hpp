#pragma once

#include "rtdc/model.hpp"
#include "rtdc/propagation.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace rtdc {

struct TreeNode;

/// One node of a timed R-TDC strategy tree.
///
/// The controller executes `executions` (all at `start` except at leaves,
/// where stored DTN times may be later), then waits until `wait_end` with
/// the reactive rules, and moves to the child whose `outcome` equals the set
/// of uncontrollables observed during the wait. Leaves have no wait.
struct StrategyNode {
    std::vector<TimepointId> outcome;
    TimeValue start;
    std::vector<std::pair<TimepointId, TimeValue>> executions;
    std::optional<TimeValue> wait_end;
    /// Uncontrollables certain to occur by `wait_end`; one occurring exactly at
    /// `wait_end` is observed in this wait only if listed here.
    std::vector<TimepointId> certain;
    ReactiveMap reactive;
    std::vector<StrategyNode> children;

    friend bool operator==(const StrategyNode&, const StrategyNode&) = default;
};

class NoStrategy : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class MalformedStrategy : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Selects the chosen child of every OR node and all children of AND nodes.
StrategyNode extract_strategy(const Dtnu& d, const TreeNode& root);

std::string strategy_to_json(const Dtnu& d, const StrategyNode& s);
StrategyNode strategy_from_json(const Dtnu& d, std::string_view text);

/// Number of strategy nodes.
std::size_t strategy_size(const StrategyNode& s);

/// Offset of each uncontrollable after its source executes.
using OffsetDraw = std::map<TimepointId, TimeValue>;

/// Length of the range sampled in place of an unbounded contingency tail.
inline constexpr std::int64_t kUnboundedSpan = 100;

/// Offset drawn uniformly (by length) over the union of a link's intervals,
/// rounded to a multiple of 1e-6 inside the chosen interval.
TimeValue sample_offset(const ContingencyLink& link, std::mt19937_64& rng);

struct ExecutionTrace {
    std::map<TimepointId, TimeValue> occurrences;
    std::map<TimepointId, TimeValue> executions;
    std::vector<bool> satisfied;  // per disjunct
    [[nodiscard]] bool violated() const;
};

struct SimulationReport {
    std::size_t runs = 0;
    std::size_t violations = 0;
    std::vector<ExecutionTrace> traces;
};

/// Runs the strategy against a fixed draw of contingency offsets.
/// Throws MalformedStrategy when an observation has no matching child or
/// consecutive waits do not tile.
ExecutionTrace execute(const Dtnu& d, const StrategyNode& s, const OffsetDraw& draw);

/// Offset draws at interval endpoints, at most `cap` combinations.
std::vector<OffsetDraw> corner_draws(const Dtnu& d, std::size_t cap = 256);

/// Random draw, reproducible from `seed`.
OffsetDraw random_draw(const Dtnu& d, std::uint64_t seed);

/// Corner draws followed by `samples` random draws.
SimulationReport simulate_execution(const Dtnu& d, const StrategyNode& s, std::size_t samples, std::uint64_t seed,
                                    bool keep_traces = false);

}  // namespace rtdc
