#include "rtdc/model.hpp"

#include "rtdc/json_time.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>
#include <unordered_map>

namespace rtdc {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

bool operator==(const Conjunct& a, const Conjunct& b) noexcept
{
    if (a.kind != b.kind)
        return false;
    switch (a.kind) {
    case Conjunct::Kind::Distance:
        return a.to == b.to && a.from == b.from && a.lb == b.lb && a.ub == b.ub;
    case Conjunct::Kind::Bounded:
        return a.to == b.to && a.lb == b.lb && a.ub == b.ub;
    default:
        return true;
    }
}

namespace {

[[noreturn]] void fail(ModelError::Code code, const std::string& what) { throw ModelError(code, what); }

void check_interval(const TimeValue& lb, const TimeValue& ub, const std::string& where)
{
    if (ub < lb || lb.is_pos_inf() || ub.is_neg_inf())
        fail(ModelError::Code::BadInterval, "bad interval [" + lb.to_string() + ", " + ub.to_string() + "] in " + where);
}

}  // namespace

Dtnu::Dtnu(std::vector<Timepoint> timepoints, std::vector<Disjunct> constraints,
           std::vector<ContingencyLink> contingencies)
    : timepoints_(std::move(timepoints)), constraints_(std::move(constraints)), contingencies_(std::move(contingencies))
{
    validate();
    link_of_target_.assign(timepoints_.size(), -1);
    for (std::size_t i = 0; i < contingencies_.size(); ++i)
        link_of_target_[contingencies_[i].target.index] = static_cast<std::int32_t>(i);
}

void Dtnu::validate() const
{
    std::unordered_map<std::string_view, std::size_t> names;
    for (std::size_t i = 0; i < timepoints_.size(); ++i) {
        if (timepoints_[i].name.empty())
            fail(ModelError::Code::SyntaxError, "empty timepoint id");
        if (!names.emplace(timepoints_[i].name, i).second)
            fail(ModelError::Code::SyntaxError, "duplicate timepoint id '" + timepoints_[i].name + "'");
    }
    auto check_id = [&](TimepointId id) {
        if (id.index >= timepoints_.size())
            fail(ModelError::Code::UnknownTimepoint, "timepoint index " + std::to_string(id.index) + " out of range");
    };

    for (std::size_t k = 0; k < constraints_.size(); ++k) {
        const auto& d = constraints_[k];
        if (d.conjuncts.empty())
            fail(ModelError::Code::EmptyDisjunct, "constraint " + std::to_string(k) + " has no conjuncts");
        for (const auto& c : d.conjuncts) {
            switch (c.kind) {
            case Conjunct::Kind::Distance:
                check_id(c.from);
                [[fallthrough]];
            case Conjunct::Kind::Bounded:
                check_id(c.to);
                check_interval(c.lb, c.ub, "constraint " + std::to_string(k));
                break;
            default:
                fail(ModelError::Code::SyntaxError, "literal conjunct in problem constraints");
            }
        }
    }

    std::vector<int> targeted(timepoints_.size(), 0);
    for (const auto& link : contingencies_) {
        check_id(link.source);
        check_id(link.target);
        if (timepoints_[link.source.index].kind != TimepointKind::Controllable)
            fail(ModelError::Code::UnknownTimepoint,
                 "contingency source '" + timepoints_[link.source.index].name + "' is not controllable");
        if (timepoints_[link.target.index].kind != TimepointKind::Uncontrollable)
            fail(ModelError::Code::UnknownTimepoint,
                 "contingency target '" + timepoints_[link.target.index].name + "' is not uncontrollable");
        if (++targeted[link.target.index] > 1)
            fail(ModelError::Code::DuplicateContingency,
                 "uncontrollable '" + timepoints_[link.target.index].name + "' has several contingency links");
        if (link.intervals.empty())
            fail(ModelError::Code::BadInterval, "contingency without intervals");
        const std::string where = "contingency of '" + timepoints_[link.target.index].name + "'";
        TimeValue prev_hi = 0;
        for (std::size_t k = 0; k < link.intervals.size(); ++k) {
            const auto& iv = link.intervals[k];
            check_interval(iv.lo, iv.hi, where);
            if (iv.lo < prev_hi || iv.lo < TimeValue(0))
                fail(ModelError::Code::BadInterval, "contingency intervals must be non-negative and ordered in " + where);
            if (iv.hi.is_pos_inf() && k + 1 != link.intervals.size())
                fail(ModelError::Code::BadInterval, "only the last contingency interval may be unbounded in " + where);
            prev_hi = iv.hi;
        }
    }
    for (std::size_t i = 0; i < timepoints_.size(); ++i)
        if (timepoints_[i].kind == TimepointKind::Uncontrollable && targeted[i] != 1)
            fail(ModelError::Code::DuplicateContingency,
                 "uncontrollable '" + timepoints_[i].name + "' has no contingency link");
}

std::optional<TimepointId> Dtnu::find(std::string_view name) const
{
    for (std::size_t i = 0; i < timepoints_.size(); ++i)
        if (timepoints_[i].name == name)
            return TimepointId{static_cast<std::uint32_t>(i)};
    return std::nullopt;
}

std::vector<TimepointId> Dtnu::controllables() const
{
    std::vector<TimepointId> out;
    for (std::size_t i = 0; i < timepoints_.size(); ++i)
        if (timepoints_[i].kind == TimepointKind::Controllable)
            out.push_back({static_cast<std::uint32_t>(i)});
    return out;
}

std::vector<TimepointId> Dtnu::uncontrollables() const
{
    std::vector<TimepointId> out;
    for (std::size_t i = 0; i < timepoints_.size(); ++i)
        if (timepoints_[i].kind == TimepointKind::Uncontrollable)
            out.push_back({static_cast<std::uint32_t>(i)});
    return out;
}

std::size_t Dtnu::num_controllables() const { return controllables().size(); }
std::size_t Dtnu::num_uncontrollables() const { return timepoints_.size() - num_controllables(); }

const ContingencyLink* Dtnu::link_to(TimepointId u) const
{
    if (u.index >= link_of_target_.size() || link_of_target_[u.index] < 0)
        return nullptr;
    return &contingencies_[static_cast<std::size_t>(link_of_target_[u.index])];
}

std::vector<const ContingencyLink*> Dtnu::links_from(TimepointId a) const
{
    std::vector<const ContingencyLink*> out;
    for (const auto& l : contingencies_)
        if (l.source == a)
            out.push_back(&l);
    return out;
}

// ---------------------------------------------------------------------------
// File format

Dtnu parse_dtnu(std::string_view text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(ModelError::Code::SyntaxError, std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object())
        fail(ModelError::Code::SyntaxError, "problem file must be a JSON object");

    auto read_time = [](const json& j, const char* what) -> TimeValue {
        try {
            return time_from_json(j);
        } catch (const std::exception& e) {
            fail(ModelError::Code::SyntaxError, std::string("bad number for ") + what + ": " + e.what());
        }
    };
    auto string_list = [&](const char* key) {
        std::vector<std::string> out;
        if (!doc.contains(key))
            return out;
        if (!doc[key].is_array())
            fail(ModelError::Code::SyntaxError, std::string("'") + key + "' must be an array");
        for (const auto& v : doc[key]) {
            if (!v.is_string())
                fail(ModelError::Code::SyntaxError, std::string("'") + key + "' entries must be strings");
            out.push_back(v.get<std::string>());
        }
        return out;
    };

    std::vector<Timepoint> tps;
    for (auto& n : string_list("controllables"))
        tps.push_back({std::move(n), TimepointKind::Controllable});
    for (auto& n : string_list("uncontrollables"))
        tps.push_back({std::move(n), TimepointKind::Uncontrollable});

    std::unordered_map<std::string, TimepointId> ids;
    for (std::size_t i = 0; i < tps.size(); ++i)
        if (!ids.emplace(tps[i].name, TimepointId{static_cast<std::uint32_t>(i)}).second)
            fail(ModelError::Code::SyntaxError, "duplicate timepoint id '" + tps[i].name + "'");
    auto lookup = [&](const json& j, const char* field) -> TimepointId {
        if (!j.is_object() || !j.contains(field) || !j[field].is_string())
            fail(ModelError::Code::SyntaxError, std::string("missing timepoint field '") + field + "'");
        auto name = j[field].get<std::string>();
        auto it = ids.find(name);
        if (it == ids.end())
            fail(ModelError::Code::UnknownTimepoint, "undeclared timepoint '" + name + "'");
        return it->second;
    };
    auto bound = [&](const json& j, const char* field) -> TimeValue {
        if (!j.contains(field))
            fail(ModelError::Code::SyntaxError, std::string("missing bound '") + field + "'");
        return read_time(j[field], field);
    };

    std::vector<Disjunct> constraints;
    if (doc.contains("constraints")) {
        if (!doc["constraints"].is_array())
            fail(ModelError::Code::SyntaxError, "'constraints' must be an array");
        for (const auto& jd : doc["constraints"]) {
            if (!jd.is_array())
                fail(ModelError::Code::SyntaxError, "each constraint must be an array of conjuncts");
            Disjunct d;
            for (const auto& jc : jd) {
                if (!jc.is_object() || !jc.contains("kind") || !jc["kind"].is_string())
                    fail(ModelError::Code::SyntaxError, "conjunct without 'kind'");
                auto kind = jc["kind"].get<std::string>();
                if (kind == "distance")
                    d.conjuncts.push_back(
                        Conjunct::distance(lookup(jc, "to"), lookup(jc, "from"), bound(jc, "lb"), bound(jc, "ub")));
                else if (kind == "bounded")
                    d.conjuncts.push_back(Conjunct::bounded(lookup(jc, "tp"), bound(jc, "lb"), bound(jc, "ub")));
                else
                    fail(ModelError::Code::SyntaxError, "unknown conjunct kind '" + kind + "'");
            }
            constraints.push_back(std::move(d));
        }
    }

    std::vector<ContingencyLink> links;
    if (doc.contains("contingencies")) {
        if (!doc["contingencies"].is_array())
            fail(ModelError::Code::SyntaxError, "'contingencies' must be an array");
        for (const auto& jl : doc["contingencies"]) {
            ContingencyLink l;
            l.source = lookup(jl, "source");
            l.target = lookup(jl, "target");
            if (!jl.contains("intervals") || !jl["intervals"].is_array())
                fail(ModelError::Code::SyntaxError, "contingency without 'intervals'");
            for (const auto& ji : jl["intervals"]) {
                if (!ji.is_array() || ji.size() != 2)
                    fail(ModelError::Code::SyntaxError, "contingency interval must be [lb, ub]");
                l.intervals.push_back({read_time(ji[0], "lb"), read_time(ji[1], "ub")});
            }
            links.push_back(std::move(l));
        }
    }
    return Dtnu(std::move(tps), std::move(constraints), std::move(links));
}

std::string serialize_dtnu(const Dtnu& d)
{
    ordered_json doc;
    doc["controllables"] = json::array();
    doc["uncontrollables"] = json::array();
    for (const auto& tp : d.timepoints())
        doc[tp.kind == TimepointKind::Controllable ? "controllables" : "uncontrollables"].push_back(tp.name);
    doc["constraints"] = json::array();
    for (const auto& dj : d.constraints()) {
        ordered_json jd = ordered_json::array();
        for (const auto& c : dj.conjuncts) {
            ordered_json jc;
            if (c.kind == Conjunct::Kind::Distance) {
                jc["kind"] = "distance";
                jc["to"] = d.name(c.to);
                jc["from"] = d.name(c.from);
            } else {
                jc["kind"] = "bounded";
                jc["tp"] = d.name(c.to);
            }
            jc["lb"] = time_to_json(c.lb);
            jc["ub"] = time_to_json(c.ub);
            jd.push_back(std::move(jc));
        }
        doc["constraints"].push_back(std::move(jd));
    }
    doc["contingencies"] = json::array();
    for (const auto& l : d.contingencies()) {
        ordered_json jl;
        jl["source"] = d.name(l.source);
        jl["target"] = d.name(l.target);
        jl["intervals"] = ordered_json::array();
        for (const auto& iv : l.intervals)
            jl["intervals"].push_back(ordered_json::array({time_to_json(iv.lo), time_to_json(iv.hi)}));
        doc["contingencies"].push_back(std::move(jl));
    }
    return doc.dump(1);
}

Dtnu load_dtnu(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_dtnu(ss.str());
}

void save_dtnu(const Dtnu& d, const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write '" + path + "'");
    out << serialize_dtnu(d) << '\n';
}

}  // namespace rtdc
