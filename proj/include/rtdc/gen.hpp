#pragma once

#include "rtdc/encode.hpp"
#include "rtdc/search.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <functional>
#include <vector>

namespace rtdc {

struct GeneratorConfig {
    int n1_min = 10, n1_max = 20;  // controllables
    int n2_min = 1, n2_max = 3;    // uncontrollables
    int bound_max = 100;           // bounds are multiples of 0.01 in [0, bound_max]
    int max_conjuncts = 5;
    double extra_disjunct_prob = 0.20;
    std::uint64_t seed = 0;

    /// Throws std::invalid_argument on empty ranges or a bad probability.
    void validate() const;
};

/// Controllables a1..an1 then uncontrollables u1..un2, each uncontrollable
/// linked from a distinct controllable. Deterministic in cfg.
Dtnu generate_dtnu(const GeneratorConfig& cfg);

struct LabelingConfig {
    int nu = 25;
    std::chrono::duration<double> tau{3.0};  // infinite disables the timeout
    std::uint64_t seed = 0;

    void validate() const;
};

struct Label {
    std::size_t node = 0;
    int y = 0;
    bool timeout = false;  // every exploration timed out
    int runs = 0;          // explorations performed
    friend bool operator==(const Label&, const Label&) = default;
};

struct TrainingExample {
    GraphEncoding graph;
    std::vector<Label> labels;  // one per root d-OR child, in child order
    std::uint64_t seed = 0;
};

using Explorer = std::function<Verdict(const Dtnu&, const SearchConfig&)>;

/// Explores each root d-OR child up to nu times with random child ordering
/// and per-run timeout tau; the first decisive run fixes the label. `explore`
/// defaults to check_rtdc.
TrainingExample label_instance(const Dtnu& d, const LabelingConfig& cfg, std::uint64_t seed = 0,
                               const Explorer& explore = {});

/// Graph record plus "labels":[{"node","y","timeout"}] and "seed".
nlohmann::json example_to_json(const Dtnu& d, const TrainingExample& ex);

}  // namespace rtdc
