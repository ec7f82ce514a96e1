#include "rtdc/strategy.hpp"

#include "rtdc/json_time.hpp"
#include "rtdc/search.hpp"

#include <algorithm>

namespace rtdc {

namespace {

StrategyNode extract_from(const TreeNode& dtnu)
{
    StrategyNode out;
    out.start = dtnu.time;
    out.outcome = dtnu.outcome;
    const TreeNode* cur = &dtnu;
    while (true) {
        if (cur->truth() != Truth::True)
            throw NoStrategy("strategy path reaches a node that is not true");
        if (cur->leaf) {
            for (const auto& [tp, t] : cur->leaf_times)
                out.executions.emplace_back(tp, t);
            return out;
        }
        if (cur->children.empty() || cur->children.front()->chosen == nullptr)
            throw NoStrategy("true node without a chosen decision");
        const TreeNode* pick = cur->children.front()->chosen;
        if (pick->kind == TreeNode::Kind::Dtnu) {
            out.executions.emplace_back(*pick->scheduled, cur->time);
            cur = pick;
            continue;
        }
        out.wait_end = cur->time + pick->duration;
        const TreeNode* wor = pick->children.front().get();
        const TreeNode* conj = wor->chosen;
        out.reactive = conj->reactive;
        out.certain = conj->certain;
        for (const auto& child : conj->children)
            out.children.push_back(extract_from(*child));
        return out;
    }
}

using json = nlohmann::ordered_json;

json names(const Dtnu& d, const std::vector<TimepointId>& ids)
{
    json out = json::array();
    for (auto id : ids)
        out.push_back(d.name(id));
    return out;
}

json node_to_json(const Dtnu& d, const StrategyNode& s)
{
    json j;
    j["outcome"] = names(d, s.outcome);
    j["start"] = time_to_json(s.start);
    j["executions"] = json::array();
    for (const auto& [tp, t] : s.executions)
        j["executions"].push_back({{"tp", d.name(tp)}, {"time", time_to_json(t)}});
    if (s.wait_end) {
        j["wait_end"] = time_to_json(*s.wait_end);
        j["certain"] = names(d, s.certain);
        j["reactive"] = json::array();
        for (const auto& r : s.reactive)
            j["reactive"].push_back({{"trigger", d.name(r.trigger)}, {"controllables", names(d, r.controllables)}});
    }
    j["children"] = json::array();
    for (const auto& c : s.children)
        j["children"].push_back(node_to_json(d, c));
    return j;
}

TimepointId lookup(const Dtnu& d, const json& j)
{
    auto id = d.find(j.get<std::string>());
    if (!id)
        throw MalformedStrategy("strategy names unknown timepoint '" + j.get<std::string>() + "'");
    return *id;
}

std::vector<TimepointId> lookup_all(const Dtnu& d, const json& j)
{
    std::vector<TimepointId> out;
    for (const auto& x : j)
        out.push_back(lookup(d, x));
    return out;
}

StrategyNode node_from_json(const Dtnu& d, const json& j)
{
    StrategyNode s;
    s.outcome = lookup_all(d, j.at("outcome"));
    std::sort(s.outcome.begin(), s.outcome.end());
    s.start = time_from_json(j.at("start"));
    for (const auto& e : j.at("executions"))
        s.executions.emplace_back(lookup(d, e.at("tp")), time_from_json(e.at("time")));
    if (j.contains("wait_end")) {
        s.wait_end = time_from_json(j.at("wait_end"));
        s.certain = lookup_all(d, j.value("certain", json::array()));
        for (const auto& r : j.value("reactive", json::array()))
            s.reactive.push_back({lookup(d, r.at("trigger")), lookup_all(d, r.at("controllables"))});
    }
    for (const auto& c : j.value("children", json::array()))
        s.children.push_back(node_from_json(d, c));
    return s;
}

bool holds(const Conjunct& c, const std::map<TimepointId, TimeValue>& values)
{
    auto value = [&](TimepointId id) -> const TimeValue* {
        auto it = values.find(id);
        return it == values.end() ? nullptr : &it->second;
    };
    switch (c.kind) {
    case Conjunct::Kind::True:
        return true;
    case Conjunct::Kind::False:
        return false;
    case Conjunct::Kind::Bounded: {
        const auto* x = value(c.to);
        return x != nullptr && c.lb <= *x && *x <= c.ub;
    }
    case Conjunct::Kind::Distance: {
        const auto* a = value(c.to);
        const auto* b = value(c.from);
        if (a == nullptr || b == nullptr)
            return false;
        const TimeValue diff = *a - *b;
        return c.lb <= diff && diff <= c.ub;
    }
    }
    return false;
}

std::vector<TimeValue> endpoints(const ContingencyLink& link)
{
    std::vector<TimeValue> out;
    for (const auto& i : link.intervals) {
        out.push_back(i.lo);
        out.push_back(i.hi.is_finite() ? i.hi : i.lo + TimeValue(kUnboundedSpan));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

OffsetDraw draw_with(const Dtnu& d, std::mt19937_64& rng)
{
    OffsetDraw out;
    for (auto u : d.uncontrollables())
        out.emplace(u, sample_offset(*d.link_to(u), rng));
    return out;
}

}  // namespace

StrategyNode extract_strategy(const Dtnu& d, const TreeNode& root)
{
    (void)d;
    if (root.truth() != Truth::True)
        throw NoStrategy("root is not true");
    return extract_from(root);
}

std::string strategy_to_json(const Dtnu& d, const StrategyNode& s) { return node_to_json(d, s).dump(1); }

StrategyNode strategy_from_json(const Dtnu& d, std::string_view text)
{
    try {
        return node_from_json(d, json::parse(text));
    } catch (const json::exception& e) {
        throw MalformedStrategy(std::string("unreadable strategy: ") + e.what());
    }
}

std::size_t strategy_size(const StrategyNode& s)
{
    std::size_t n = 1;
    for (const auto& c : s.children)
        n += strategy_size(c);
    return n;
}

TimeValue sample_offset(const ContingencyLink& link, std::mt19937_64& rng)
{
    std::vector<double> lengths;
    double total = 0;
    for (const auto& i : link.intervals) {
        const double len = i.hi.is_finite() ? (i.hi - i.lo).to_double() : static_cast<double>(kUnboundedSpan);
        lengths.push_back(len);
        total += len;
    }
    if (total <= 0) {
        std::uniform_int_distribution<std::size_t> pick(0, link.intervals.size() - 1);
        return link.intervals[pick(rng)].lo;
    }
    double r = std::uniform_real_distribution<double>(0.0, total)(rng);
    std::size_t k = 0;
    while (k + 1 < lengths.size() && r >= lengths[k]) {
        r -= lengths[k];
        ++k;
    }
    const auto& chosen = link.intervals[k];
    const TimeValue hi = chosen.hi.is_finite() ? chosen.hi : chosen.lo + TimeValue(kUnboundedSpan);
    TimeValue v = chosen.lo + TimeValue::from_double(r);
    return min(max(v, chosen.lo), hi);
}

bool ExecutionTrace::violated() const
{
    return std::find(satisfied.begin(), satisfied.end(), false) != satisfied.end();
}

ExecutionTrace execute(const Dtnu& d, const StrategyNode& root, const OffsetDraw& draw)
{
    ExecutionTrace trace;
    std::map<TimepointId, TimeValue> pending;

    auto run = [&](TimepointId a, const TimeValue& t) {
        if (trace.executions.count(a) != 0)
            throw MalformedStrategy("controllable '" + d.name(a) + "' executed twice");
        trace.executions.emplace(a, t);
        for (const auto* link : d.links_from(a))
            pending[link->target] = t + draw.at(link->target);
    };

    if (root.start != TimeValue(0))
        throw MalformedStrategy("strategy does not start at time 0");
    const StrategyNode* node = &root;
    while (true) {
        for (const auto& [a, t] : node->executions)
            run(a, t);
        if (!node->wait_end)
            break;
        const TimeValue& e = *node->wait_end;
        if (e <= node->start)
            throw MalformedStrategy("wait does not advance time");

        std::vector<TimepointId> seen;
        while (true) {
            // Next observable occurrence, earliest first.
            std::optional<std::pair<TimepointId, TimeValue>> next;
            for (const auto& [u, tau] : pending) {
                const bool observable =
                    tau < e || (tau == e && std::find(node->certain.begin(), node->certain.end(), u) !=
                                                node->certain.end());
                if (observable && (!next || tau < next->second))
                    next.emplace(u, tau);
            }
            if (!next)
                break;
            const auto [u, tau] = *next;
            pending.erase(u);
            trace.occurrences.emplace(u, tau);
            seen.push_back(u);
            for (const auto& rule : node->reactive)
                if (rule.trigger == u)
                    for (auto phi : rule.controllables)
                        run(phi, tau);
        }
        std::sort(seen.begin(), seen.end());
        const StrategyNode* child = nullptr;
        for (const auto& c : node->children)
            if (c.outcome == seen) {
                child = &c;
                break;
            }
        if (child == nullptr) {
            std::string what = "no branch for outcome {";
            for (std::size_t i = 0; i < seen.size(); ++i)
                what += (i ? "," : "") + d.name(seen[i]);
            throw MalformedStrategy(what + "} at " + e.to_string());
        }
        if (child->start != e)
            throw MalformedStrategy("branch starts at " + child->start.to_string() + " but the wait ends at " +
                                    e.to_string());
        node = child;
    }
    for (const auto& [u, tau] : pending)
        trace.occurrences.emplace(u, tau);

    std::map<TimepointId, TimeValue> values = trace.executions;
    values.insert(trace.occurrences.begin(), trace.occurrences.end());
    for (const auto& disj : d.constraints())
        trace.satisfied.push_back(
            std::any_of(disj.conjuncts.begin(), disj.conjuncts.end(), [&](const Conjunct& c) { return holds(c, values); }));
    return trace;
}

std::vector<OffsetDraw> corner_draws(const Dtnu& d, std::size_t cap)
{
    const auto us = d.uncontrollables();
    std::vector<std::vector<TimeValue>> choices;
    std::size_t total = 1;
    for (auto u : us) {
        choices.push_back(endpoints(*d.link_to(u)));
        total = total > cap ? total : total * choices.back().size();
    }
    std::vector<OffsetDraw> out;
    if (total <= cap) {
        for (std::size_t k = 0; k < total; ++k) {
            OffsetDraw draw;
            std::size_t rest = k;
            for (std::size_t i = 0; i < us.size(); ++i) {
                draw.emplace(us[i], choices[i][rest % choices[i].size()]);
                rest /= choices[i].size();
            }
            out.push_back(std::move(draw));
        }
        return out;
    }
    std::mt19937_64 rng(0);
    for (std::size_t k = 0; k < cap; ++k) {
        OffsetDraw draw;
        for (std::size_t i = 0; i < us.size(); ++i)
            draw.emplace(us[i], choices[i][std::uniform_int_distribution<std::size_t>(0, choices[i].size() - 1)(rng)]);
        out.push_back(std::move(draw));
    }
    return out;
}

OffsetDraw random_draw(const Dtnu& d, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    return draw_with(d, rng);
}

SimulationReport simulate_execution(const Dtnu& d, const StrategyNode& s, std::size_t samples, std::uint64_t seed,
                                    bool keep_traces)
{
    SimulationReport report;
    auto record = [&](const OffsetDraw& draw) {
        auto trace = execute(d, s, draw);
        ++report.runs;
        if (trace.violated())
            ++report.violations;
        if (keep_traces)
            report.traces.push_back(std::move(trace));
    };
    if (d.num_uncontrollables() == 0) {
        record({});
        return report;
    }
    for (const auto& draw : corner_draws(d))
        record(draw);
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < samples; ++i)
        record(draw_with(d, rng));
    return report;
}

}  // namespace rtdc
