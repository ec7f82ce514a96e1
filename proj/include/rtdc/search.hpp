#pragma once

#include "rtdc/state.hpp"
#include "rtdc/strategy.hpp"

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <vector>

namespace rtdc {

enum class Truth : std::uint8_t { Unknown, True, False };

/// Node of the AND/OR search tree. Children are created lazily; `arity` is the
/// full child count so OR/AND nodes can be decided before all are explored.
struct TreeNode {
    enum class Kind : std::uint8_t { Dtnu, DOr, WOr, Wait, And };

    Kind kind = Kind::Dtnu;
    TreeNode* parent = nullptr;
    std::vector<std::unique_ptr<TreeNode>> children;
    std::size_t arity = 0;
    std::size_t decided_false = 0;
    std::size_t decided_true = 0;
    const TreeNode* chosen = nullptr;  // OR nodes: first True child

    // Dtnu: present while the node is open.
    std::unique_ptr<DtnuState> state;
    TimeValue time;
    std::optional<TimepointId> scheduled;   // Dtnu child of a d-OR
    std::vector<TimepointId> outcome;       // Dtnu child of an AND (Lambda)
    std::vector<TimepointId> certain;       // And: H of the wait
    bool leaf = false;
    std::map<TimepointId, TimeValue> leaf_times;
    std::set<std::vector<std::uint32_t>> tried;  // chain root: schedule combinations seen

    TimeValue duration;   // Wait
    ReactiveMap reactive; // And

    [[nodiscard]] Truth truth() const noexcept { return truth_; }
    /// Write-once; throws std::logic_error on a second assignment.
    void set_truth(Truth t);

private:
    Truth truth_ = Truth::Unknown;
};

/// Assigns `value` to `n` and pushes it upward: Dtnu and Wait parents copy
/// it, OR parents take True at once and False once every child is False, AND
/// parents the dual. Stops at the first parent that is undecided by the rule
/// or already decided.
void propagate_truth(TreeNode& n, Truth value);

struct WaitComputation {
    std::optional<TimeValue> delta1, delta2, delta3;
    [[nodiscard]] std::optional<TimeValue> duration() const;
};

/// Candidate wait durations at `s`; nullopt when waiting is not eligible
/// (nothing activated and no Bounded conjunct) or no candidate is positive.
std::optional<WaitComputation> wait_duration(const DtnuState& s);

struct OutcomeSets {
    std::vector<TimepointId> may;      // Z
    std::vector<TimepointId> certain;  // H
    /// H united with each subset of Z, in binary subset order (empty first).
    std::vector<std::vector<TimepointId>> combinations;
    /// Occurrence interval assumed for each member of Z and H.
    std::map<TimepointId, Interval> occurrence;
};

OutcomeSets enumerate_outcomes(const DtnuState& s, const TimeValue& delta);

struct ReactiveChoice {
    std::vector<TimepointId> eligible;             // Phi
    std::map<TimepointId, TimepointId> trigger;    // phi -> u
    std::vector<ReactiveMap> strategies;           // one per subset of Phi
};

/// Unscheduled controllables with a conjunct u - phi in [0, y] for some u that
/// may occur in the wait. Each phi reacts to the first such u in declaration
/// order. A phi that activates an uncontrollable is eligible only when that
/// uncontrollable cannot occur before the wait ends.
ReactiveChoice enumerate_reactive(const Dtnu& d, const DtnuState& s, const OutcomeSets& outcomes,
                                  const TimeValue& wait_end);

/// Child state at `wait_end` for one outcome combination under `reactive`.
DtnuState after_wait(const Dtnu& d, const DtnuState& s, const OutcomeSets& outcomes,
                     const std::vector<TimepointId>& lambda, const ReactiveMap& reactive, const TimeValue& wait_end);

/// Orders d-OR children; used while the d-OR depth is within `max_depth`.
class Heuristic {
public:
    virtual ~Heuristic() = default;
    /// Returns a permutation of `baseline`.
    [[nodiscard]] virtual std::vector<Action> rank(const Dtnu& d, const DtnuState& s,
                                                   const std::vector<Action>& baseline) const = 0;
};

struct SearchConfig {
    enum class ChildOrder : std::uint8_t { Declaration, Random };

    std::chrono::duration<double> timeout{20.0};  // <= 0 disables
    const Heuristic* heuristic = nullptr;
    int max_depth = 15;
    ChildOrder child_order = ChildOrder::Declaration;
    std::uint64_t seed = 0;

    bool constraint_check = true;
    bool symmetric_subtrees = true;
    bool truth_checks = true;

    /// Restricts the root d-OR to this single child.
    std::optional<Action> root_action;
};

struct Verdict {
    enum class Kind : std::uint8_t { Rtdc, NotRtdc, Timeout };

    Kind kind = Kind::Timeout;
    std::optional<StrategyNode> strategy;
    double elapsed_s = 0;
    std::uint64_t nodes = 0;
};

const char* to_string(Verdict::Kind k) noexcept;

/// Baseline d-OR children at `s`: unscheduled controllables in declaration
/// order, then WAIT when a wait duration exists.
std::vector<Action> baseline_actions(const Dtnu& d, const DtnuState& s);

Verdict check_rtdc(const Dtnu& d, const SearchConfig& cfg = {});

}  // namespace rtdc
