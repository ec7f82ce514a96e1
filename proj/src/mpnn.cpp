#include "rtdc/mpnn.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <sstream>

namespace rtdc {

using nlohmann::json;

std::vector<int> Model::widths() const
{
    std::vector<int> w;
    for (const auto& l : layers)
        w.push_back(static_cast<int>(l.out()));
    return w;
}

namespace {

const std::vector<int> kWidths{32, 32, 32, 32, 1};

Eigen::MatrixXf matrix_from(const json& j, const char* what)
{
    if (!j.is_array() || j.empty() || !j.front().is_array() || j.front().empty())
        throw FormatError(std::string(what) + ": expected a non-empty matrix");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j.front().size());
    Eigen::MatrixXf m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
            throw FormatError(std::string(what) + ": ragged matrix");
        for (Eigen::Index c = 0; c < cols; ++c) {
            if (!row[static_cast<std::size_t>(c)].is_number())
                throw FormatError(std::string(what) + ": non-numeric entry");
            m(r, c) = row[static_cast<std::size_t>(c)].get<float>();
        }
    }
    return m;
}

Eigen::VectorXf vector_from(const json& j, const char* what)
{
    if (!j.is_array() || j.empty())
        throw FormatError(std::string(what) + ": expected a non-empty vector");
    Eigen::VectorXf v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number())
            throw FormatError(std::string(what) + ": non-numeric entry");
        v(static_cast<Eigen::Index>(i)) = j[i].get<float>();
    }
    return v;
}

json to_json_matrix(const Eigen::MatrixXf& m)
{
    json out = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            row.push_back(m(r, c));
        out.push_back(std::move(row));
    }
    return out;
}

json to_json_vector(const Eigen::VectorXf& v) { return std::vector<float>(v.data(), v.data() + v.size()); }

void expect(bool ok, const std::string& what)
{
    if (!ok)
        throw DimensionMismatch(what);
}

void validate(const Model& m, const std::vector<int>& widths)
{
    if (m.layers.size() != Model::kLayers || widths.size() != Model::kLayers || widths.back() != 1)
        throw FormatError("expected five layers ending in width 1");
    Eigen::Index in = m.node_feature_dim;
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
        const auto& L = m.layers[l];
        const Eigen::Index out = widths[l];
        const std::string at = "layer " + std::to_string(l) + ": ";
        expect(L.w1.cols() == m.edge_feature_dim, at + "w1 does not take the edge features");
        expect(L.b1.size() == L.w1.rows(), at + "b1 does not match w1");
        expect(L.w2.cols() == L.w1.rows(), at + "w2 does not take the hidden layer");
        expect(L.w2.rows() == out * in, at + "w2 does not produce an " + std::to_string(out) + "x" +
                                             std::to_string(in) + " message matrix");
        expect(L.b2.size() == L.w2.rows(), at + "b2 does not match w2");
        for (const auto* v : {&L.mean, &L.var, &L.gamma, &L.beta})
            expect(v->size() == out, at + "batch-norm statistics do not match the width");
        if (L.skip_proj)
            expect(L.skip_proj->rows() == out && L.skip_proj->cols() == in, at + "skip_proj has the wrong shape");
        if ((L.var.array() <= 0.0F).any())
            throw FormatError(at + "batch-norm variance must be positive");
        in = out;
    }
}

}  // namespace

Model parse_weights(std::string_view text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw FormatError(std::string("weight file is not valid JSON: ") + e.what());
    }
    Model m;
    std::vector<int> widths;
    try {
        const auto& meta = j.at("meta");
        m.node_feature_dim = meta.at("node_feature_dim").get<int>();
        m.edge_feature_dim = meta.at("edge_feature_dim").get<int>();
        widths = meta.at("widths").get<std::vector<int>>();
        if (meta.contains("bn_eps"))
            m.bn_eps = meta.at("bn_eps").get<float>();
        const auto& layers = j.at("layers");
        if (!layers.is_array() || layers.size() != widths.size())
            throw FormatError("layer list does not match the width list");
        for (const auto& jl : layers) {
            MpnnLayer L;
            const auto& mlp = jl.at("mlp");
            L.w1 = matrix_from(mlp.at("w1"), "w1");
            L.b1 = vector_from(mlp.at("b1"), "b1");
            L.w2 = matrix_from(mlp.at("w2"), "w2");
            L.b2 = vector_from(mlp.at("b2"), "b2");
            if (!jl.contains("bn"))
                throw MissingStatistics("layer without batch-norm statistics");
            const auto& bn = jl.at("bn");
            for (const char* key : {"mean", "var", "gamma", "beta"})
                if (!bn.contains(key))
                    throw MissingStatistics(std::string("batch-norm block without '") + key + "'");
            L.mean = vector_from(bn.at("mean"), "mean");
            L.var = vector_from(bn.at("var"), "var");
            L.gamma = vector_from(bn.at("gamma"), "gamma");
            L.beta = vector_from(bn.at("beta"), "beta");
            if (jl.contains("skip_proj") && !jl.at("skip_proj").is_null())
                L.skip_proj = matrix_from(jl.at("skip_proj"), "skip_proj");
            m.layers.push_back(std::move(L));
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed weight file: ") + e.what());
    }
    validate(m, widths);
    return m;
}

Model load_weights(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw FormatError("cannot read weight file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_weights(buf.str());
}

std::string weights_to_json(const Model& m)
{
    json layers = json::array();
    for (const auto& L : m.layers) {
        json jl{{"mlp",
                 {{"w1", to_json_matrix(L.w1)},
                  {"b1", to_json_vector(L.b1)},
                  {"w2", to_json_matrix(L.w2)},
                  {"b2", to_json_vector(L.b2)}}},
                {"bn",
                 {{"mean", to_json_vector(L.mean)},
                  {"var", to_json_vector(L.var)},
                  {"gamma", to_json_vector(L.gamma)},
                  {"beta", to_json_vector(L.beta)}}}};
        if (L.skip_proj)
            jl["skip_proj"] = to_json_matrix(*L.skip_proj);
        layers.push_back(std::move(jl));
    }
    json j{{"meta",
            {{"node_feature_dim", m.node_feature_dim},
             {"edge_feature_dim", m.edge_feature_dim},
             {"widths", m.widths()},
             {"bn_eps", m.bn_eps}}},
           {"layers", std::move(layers)}};
    return j.dump();
}

namespace {

Model shaped_model(const std::vector<int>& widths, int hidden, bool with_skip_proj)
{
    Model m;
    Eigen::Index in = m.node_feature_dim;
    for (int out : widths) {
        MpnnLayer L;
        L.w1 = Eigen::MatrixXf::Zero(hidden, m.edge_feature_dim);
        L.b1 = Eigen::VectorXf::Zero(hidden);
        L.w2 = Eigen::MatrixXf::Zero(out * in, hidden);
        L.b2 = Eigen::VectorXf::Zero(out * in);
        L.mean = Eigen::VectorXf::Zero(out);
        L.var = Eigen::VectorXf::Ones(out);
        L.gamma = Eigen::VectorXf::Ones(out);
        L.beta = Eigen::VectorXf::Zero(out);
        if (with_skip_proj && out != in)
            L.skip_proj = Eigen::MatrixXf::Zero(out, in);
        m.layers.push_back(std::move(L));
        in = out;
    }
    return m;
}

}  // namespace

Model zero_model(const std::vector<int>& widths) { return shaped_model(widths, 128, true); }

Model random_model(std::uint64_t seed, float scale, const std::vector<int>& widths, int hidden, bool with_skip_proj)
{
    Model m = shaped_model(widths, hidden, with_skip_proj);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> u(-scale, scale);
    std::uniform_real_distribution<float> pos(0.5F, 1.5F);
    auto fill = [&](auto& x, auto& dist) {
        for (Eigen::Index i = 0; i < x.size(); ++i)
            x.data()[i] = dist(rng);
    };
    for (auto& L : m.layers) {
        fill(L.w1, u);
        fill(L.b1, u);
        fill(L.w2, u);
        fill(L.b2, u);
        fill(L.mean, u);
        fill(L.var, pos);
        fill(L.gamma, pos);
        fill(L.beta, u);
        if (L.skip_proj)
            fill(*L.skip_proj, u);
    }
    return m;
}

std::vector<float> forward(const Model& m, const GraphEncoding& g)
{
    const auto n = static_cast<Eigen::Index>(g.num_nodes());
    for (const auto& f : g.node_features)
        if (static_cast<int>(f.size()) != m.node_feature_dim)
            throw DimensionMismatch("node features do not match the model");
    for (const auto& e : g.edges)
        if (static_cast<int>(e.features.size()) != m.edge_feature_dim || e.i >= g.num_nodes() ||
            e.j >= g.num_nodes())
            throw DimensionMismatch("edge features do not match the model");

    Eigen::MatrixXf h(n, m.node_feature_dim);
    for (Eigen::Index i = 0; i < n; ++i)
        for (int c = 0; c < m.node_feature_dim; ++c)
            h(i, c) = g.node_features[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)];
    const auto adj = g.neighbours();

    for (std::size_t l = 0; l < m.layers.size(); ++l) {
        const auto& L = m.layers[l];
        const Eigen::Index in = h.cols();
        const Eigen::Index out = L.out();

        // Identical edge features share one message matrix.
        std::map<std::vector<float>, Eigen::MatrixXf> cache;
        std::vector<const Eigen::MatrixXf*> msg(g.edges.size());
        for (std::size_t k = 0; k < g.edges.size(); ++k) {
            const auto& feat = g.edges[k].features;
            auto it = cache.find(feat);
            if (it == cache.end()) {
                const Eigen::Map<const Eigen::VectorXf> a(feat.data(), static_cast<Eigen::Index>(feat.size()));
                const Eigen::VectorXf hidden = (L.w1 * a + L.b1).cwiseMax(0.0F);
                const Eigen::VectorXf v = L.w2 * hidden + L.b2;
                it = cache.emplace(feat, Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic,
                                                                         Eigen::RowMajor>>(v.data(), out, in))
                         .first;
            }
            msg[k] = &it->second;
        }

        Eigen::MatrixXf next(n, out);
        std::vector<std::vector<float>> parts(static_cast<std::size_t>(out));
        for (Eigen::Index i = 0; i < n; ++i) {
            for (auto& p : parts)
                p.clear();
            for (const auto& [j, k] : adj[static_cast<std::size_t>(i)]) {
                const Eigen::VectorXf c = *msg[k] * h.row(static_cast<Eigen::Index>(j)).transpose();
                for (Eigen::Index o = 0; o < out; ++o)
                    parts[static_cast<std::size_t>(o)].push_back(c(o));
            }
            for (Eigen::Index o = 0; o < out; ++o) {
                auto& p = parts[static_cast<std::size_t>(o)];
                std::sort(p.begin(), p.end());
                float sum = 0.0F;
                for (float x : p)
                    sum += x;
                next(i, o) = sum;
            }
        }

        for (Eigen::Index o = 0; o < out; ++o) {
            const float scale = L.gamma(o) / std::sqrt(L.var(o) + m.bn_eps);
            next.col(o) = ((next.col(o).array() - L.mean(o)) * scale + L.beta(o)).matrix();
        }
        if (L.skip_proj)
            next += h * L.skip_proj->transpose();
        else if (in == out)
            next += h;
        if (l + 1 < m.layers.size())
            next = next.cwiseMax(0.0F);
        h = std::move(next);
    }

    constexpr float lo = std::numeric_limits<float>::min();
    const float hi = std::nextafter(1.0F, 0.0F);
    std::vector<float> p(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
        p[static_cast<std::size_t>(i)] = std::clamp(1.0F / (1.0F + std::exp(-h(i, 0))), lo, hi);
    return p;
}

std::vector<Action> rank_children(const std::vector<float>& p, const GraphEncoding& g,
                                  const std::vector<Action>& baseline, int depth, int max_depth)
{
    if (depth > max_depth)
        return baseline;
    auto score = [&](const Action& a) {
        for (const auto& n : g.active)
            if (n.choice == a)
                return p.at(n.node);
        return -1.0F;
    };
    std::vector<std::pair<float, Action>> scored;
    for (const auto& a : baseline)
        scored.emplace_back(score(a), a);
    std::stable_sort(scored.begin(), scored.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
    std::vector<Action> out;
    for (const auto& [s, a] : scored)
        out.push_back(a);
    return out;
}

std::vector<Action> MpnnHeuristic::rank(const Dtnu& d, const DtnuState& s, const std::vector<Action>& baseline) const
{
    GraphEncoding g;
    try {
        g = to_graph(d, s);
    } catch (const DegenerateHorizon&) {
        return baseline;
    }
    return rank_children(forward(model_, g), g, baseline, 0, 0);
}

}  // namespace rtdc
