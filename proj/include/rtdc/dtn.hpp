#pragma once

#include "rtdc/model.hpp"

#include <map>
#include <optional>
#include <span>
#include <vector>

namespace rtdc {

/// A disjunctive temporal network over controllables only, with an implicit
/// lower bound `floor` on every variable.
struct DtnProblem {
    std::vector<TimepointId> variables;
    std::vector<Disjunct> disjuncts;
    TimeValue floor;
};

struct DtnSolution {
    std::map<TimepointId, TimeValue> assignment;
    friend bool operator==(const DtnSolution&, const DtnSolution&) = default;
};

/// Consistency of a conjunction of Distance/Bounded conjuncts over
/// `variables`, each at least `floor`. Returns the earliest solution.
/// Conjuncts mentioning ids outside `variables` are rejected with
/// std::invalid_argument.
std::optional<DtnSolution> stn_consistent(std::span<const Conjunct> conjuncts, std::span<const TimepointId> variables,
                                          const TimeValue& floor);

/// Depth-first search over one-conjunct-per-disjunct selections in
/// declaration order; every partial selection is checked for STN consistency.
std::optional<DtnSolution> solve_dtn(const DtnProblem& problem);

/// True when `solution` satisfies every disjunct and the floor.
bool verify_dtn(const DtnProblem& problem, const DtnSolution& solution);

}  // namespace rtdc
