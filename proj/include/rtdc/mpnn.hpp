#pragma once

#include "rtdc/encode.hpp"
#include "rtdc/search.hpp"

#include <Eigen/Core>

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rtdc {

/// One message-passing layer. The edge network maps edge features a to the
/// (out x in) message matrix reshape(w2 relu(w1 a + b1) + b2), row-major.
struct MpnnLayer {
    Eigen::MatrixXf w1;  // hidden x edge_dim
    Eigen::VectorXf b1;
    Eigen::MatrixXf w2;  // (out * in) x hidden
    Eigen::VectorXf b2;
    Eigen::VectorXf mean, var, gamma, beta;
    std::optional<Eigen::MatrixXf> skip_proj;  // out x in

    [[nodiscard]] Eigen::Index in() const noexcept { return w2.rows() / std::max<Eigen::Index>(out(), 1); }
    [[nodiscard]] Eigen::Index out() const noexcept { return mean.size(); }
};

struct Model {
    static constexpr std::size_t kLayers = 5;

    int node_feature_dim = static_cast<int>(kNodeFeatureDim);
    int edge_feature_dim = static_cast<int>(kEdgeFeatureDim);
    float bn_eps = 1e-5F;
    std::vector<MpnnLayer> layers;

    [[nodiscard]] std::vector<int> widths() const;
};

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
class DimensionMismatch : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
class MissingStatistics : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

Model parse_weights(std::string_view text);
Model load_weights(const std::string& path);
std::string weights_to_json(const Model& m);

/// Model with every parameter zero, unit variance and unit scale.
Model zero_model(const std::vector<int>& widths = {32, 32, 32, 32, 1});
/// Parameters drawn uniformly from [-scale, scale]; variances from [0.5, 1.5].
Model random_model(std::uint64_t seed, float scale = 0.3F, const std::vector<int>& widths = {32, 32, 32, 32, 1},
                   int hidden = 128, bool with_skip_proj = true);

/// Per-node probabilities. Neighbour messages are summed per component in
/// ascending order, so the result does not depend on node numbering.
std::vector<float> forward(const Model& m, const GraphEncoding& g);

/// Children of `baseline` by descending probability of their active node,
/// ties kept in baseline order; `baseline` unchanged when depth > max_depth.
std::vector<Action> rank_children(const std::vector<float>& p, const GraphEncoding& g,
                                  const std::vector<Action>& baseline, int depth, int max_depth);

class MpnnHeuristic : public Heuristic {
public:
    explicit MpnnHeuristic(Model m) : model_(std::move(m)) {}
    /// Falls back to `baseline` when the state has a degenerate horizon.
    [[nodiscard]] std::vector<Action> rank(const Dtnu& d, const DtnuState& s,
                                           const std::vector<Action>& baseline) const override;
    [[nodiscard]] const Model& model() const noexcept { return model_; }

private:
    Model model_;
};

}  // namespace rtdc
