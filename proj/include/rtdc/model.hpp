#pragma once

#include "rtdc/time_value.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rtdc {

/// Index of a timepoint inside its Dtnu (declaration order).
struct TimepointId {
    std::uint32_t index = 0;
    friend auto operator<=>(const TimepointId&, const TimepointId&) = default;
};

enum class TimepointKind : std::uint8_t { Controllable, Uncontrollable };

struct Timepoint {
    std::string name;
    TimepointKind kind = TimepointKind::Controllable;
    friend bool operator==(const Timepoint&, const Timepoint&) = default;
};

/// Atomic relation. Distance: to - from in [lb, ub]. Bounded: tp in [lb, ub].
/// True/False are literals left behind by propagation.
struct Conjunct {
    enum class Kind : std::uint8_t { Distance, Bounded, True, False };

    Kind kind = Kind::True;
    TimepointId to{};    // Distance: minuend; Bounded: the timepoint
    TimepointId from{};  // Distance: subtrahend
    TimeValue lb;
    TimeValue ub;

    static Conjunct distance(TimepointId to, TimepointId from, TimeValue lb, TimeValue ub)
    {
        return {Kind::Distance, to, from, lb, ub};
    }
    static Conjunct bounded(TimepointId tp, TimeValue lb, TimeValue ub) { return {Kind::Bounded, tp, tp, lb, ub}; }
    static Conjunct literal(bool value) { return {value ? Kind::True : Kind::False, {}, {}, {}, {}}; }

    [[nodiscard]] bool is_literal() const noexcept { return kind == Kind::True || kind == Kind::False; }
    [[nodiscard]] bool mentions(TimepointId id) const noexcept
    {
        return (kind == Kind::Distance && (to == id || from == id)) || (kind == Kind::Bounded && to == id);
    }

    friend bool operator==(const Conjunct& a, const Conjunct& b) noexcept;
};

/// Logical OR of conjuncts.
struct Disjunct {
    std::vector<Conjunct> conjuncts;
    friend bool operator==(const Disjunct&, const Disjunct&) = default;
};

/// After `source` executes, `target` occurs inside one of `intervals`
/// (offsets relative to the source's execution time).
struct ContingencyLink {
    TimepointId source{};
    TimepointId target{};
    std::vector<Interval> intervals;
    friend bool operator==(const ContingencyLink&, const ContingencyLink&) = default;
};

class Dtnu {
public:
    Dtnu() = default;
    /// Validates every structural invariant; throws ModelError on failure.
    Dtnu(std::vector<Timepoint> timepoints, std::vector<Disjunct> constraints,
         std::vector<ContingencyLink> contingencies);

    [[nodiscard]] const std::vector<Timepoint>& timepoints() const noexcept { return timepoints_; }
    [[nodiscard]] const std::vector<Disjunct>& constraints() const noexcept { return constraints_; }
    [[nodiscard]] const std::vector<ContingencyLink>& contingencies() const noexcept { return contingencies_; }

    [[nodiscard]] std::size_t size() const noexcept { return timepoints_.size(); }
    [[nodiscard]] const Timepoint& timepoint(TimepointId id) const { return timepoints_.at(id.index); }
    [[nodiscard]] const std::string& name(TimepointId id) const { return timepoint(id).name; }
    [[nodiscard]] bool is_controllable(TimepointId id) const
    {
        return timepoint(id).kind == TimepointKind::Controllable;
    }
    [[nodiscard]] std::optional<TimepointId> find(std::string_view name) const;

    [[nodiscard]] std::vector<TimepointId> controllables() const;
    [[nodiscard]] std::vector<TimepointId> uncontrollables() const;
    [[nodiscard]] std::size_t num_controllables() const;
    [[nodiscard]] std::size_t num_uncontrollables() const;

    /// Link whose target is `u`, if any.
    [[nodiscard]] const ContingencyLink* link_to(TimepointId u) const;
    /// Links sourced at `a` (a controllable may trigger several uncontrollables).
    [[nodiscard]] std::vector<const ContingencyLink*> links_from(TimepointId a) const;

    friend bool operator==(const Dtnu&, const Dtnu&) = default;

private:
    void validate() const;

    std::vector<Timepoint> timepoints_;
    std::vector<Disjunct> constraints_;
    std::vector<ContingencyLink> contingencies_;
    std::vector<std::int32_t> link_of_target_;
};

class ModelError : public std::runtime_error {
public:
    /// UnknownTimepoint also covers references of the wrong kind (a link whose
    /// source is not controllable). DuplicateContingency covers any
    /// uncontrollable that is not the target of exactly one link.
    enum class Code { SyntaxError, UnknownTimepoint, EmptyDisjunct, BadInterval, DuplicateContingency };

    ModelError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
    [[nodiscard]] Code code() const noexcept { return code_; }

private:
    Code code_;
};

/// Reads the JSON problem format (see README).
Dtnu parse_dtnu(std::string_view text);
std::string serialize_dtnu(const Dtnu& d);

Dtnu load_dtnu(const std::string& path);
void save_dtnu(const Dtnu& d, const std::string& path);

}  // namespace rtdc
