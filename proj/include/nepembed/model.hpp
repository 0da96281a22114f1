#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "nepembed/rng.hpp"

namespace nepembed {

// Shape of the transformer encoder. The two presets mirror the small
// fine-tuned model and the large reference model.
struct ModelConfig {
    std::size_t num_layers = 0;
    std::size_t num_heads = 0;
    std::size_t hidden_dim = 0;
    std::size_t ff_dim = 0;
    std::size_t vocab_size = 0;
    std::size_t max_len = 0;
    double dropout = 0.0;

    // 6 layers, 6 heads, 300 hidden, feed-forward 4x hidden.
    static ModelConfig small_preset(std::size_t vocab_size, std::size_t max_len);
    // 12 layers, 12 heads, 768 hidden.
    static ModelConfig oracle_preset(std::size_t vocab_size, std::size_t max_len);

    // Throws UsageError: positive fields, hidden_dim divisible by num_heads,
    // dropout in [0,1).
    void validate() const;

    bool operator==(const ModelConfig&) const = default;
};

nlohmann::json config_to_json(const ModelConfig& cfg);
ModelConfig config_from_json(const nlohmann::json& j);

struct TensorShape {
    std::string name;
    std::size_t rows = 0;
    std::size_t cols = 0;
};

// Names and shapes of every parameter tensor implied by the config, in
// registry (serialization) order.
std::vector<TensorShape> expected_tensor_shapes(const ModelConfig& cfg);

// Exact (erf-based) GELU and its derivative.
double gelu(double x);
double gelu_grad(double x);

// One corrupted training batch: ids after corruption, attention masks, and
// the supervised positions with their pre-corruption tokens.
struct MlmBatch {
    std::vector<std::vector<std::uint32_t>> ids;
    std::vector<std::vector<std::uint8_t>> mask;
    std::vector<std::vector<std::size_t>> label_pos;
    std::vector<std::vector<std::uint32_t>> labels;

    std::size_t total_labels() const;
};

struct ForwardOptions {
    bool want_logits = true;
    bool want_attention = false;
};

struct SeqForward {
    Eigen::MatrixXd hidden;  // [T, hidden_dim], after the final layer norm
    Eigen::MatrixXd logits;  // [T, vocab_size] when requested
    // [layer][head] -> [T, T] row-stochastic over unmasked key positions.
    std::vector<std::vector<Eigen::MatrixXd>> attention;
};

// Pre-norm transformer encoder with a masked-token prediction head. All
// compute is double precision; parameters live in a named registry whose
// order is the canonical serialization order.
class Model {
public:
    struct Param {
        std::string name;
        Eigen::MatrixXd value;
    };

    // Zero-valued parameters (layer-norm gains included).
    explicit Model(ModelConfig cfg);
    // Seeded random initialization: weights N(0, 0.02), biases and layer-norm
    // shifts zero, layer-norm gains one.
    static Model init(const ModelConfig& cfg, std::uint64_t seed);

    const ModelConfig& config() const { return config_; }
    const std::vector<Param>& params() const { return params_; }
    std::vector<Param>& params() { return params_; }
    std::size_t param_index(const std::string& name) const;  // throws DataError when absent
    Eigen::MatrixXd& param(const std::string& name);
    const Eigen::MatrixXd& param(const std::string& name) const;
    std::size_t num_scalars() const;

    // Single-sequence encode; batching is mapping this over sequences.
    // Requires ids/mask the same length T with 0 < T <= max_len, every id
    // below vocab_size, and at least one unmasked position.
    SeqForward forward(std::span<const std::uint32_t> ids, std::span<const std::uint8_t> mask,
                       const ForwardOptions& opts = {}) const;

    // Mean cross-entropy over the batch's label positions; logits are only
    // formed at those positions. Zero label positions -> loss 0. A non-null
    // dropout_rng enables training-mode dropout.
    double loss(const MlmBatch& batch, Rng* dropout_rng = nullptr) const;
    // Same loss plus analytic gradients, accumulated into grads (resized and
    // zeroed here; indices align with params()).
    double loss_and_grads(const MlmBatch& batch, std::vector<Eigen::MatrixXd>& grads,
                          Rng* dropout_rng = nullptr) const;

private:
    enum class Init : std::uint8_t { Zero, One, Normal };

    ModelConfig config_;
    std::vector<Param> params_;
    std::vector<Init> init_kind_;
    std::unordered_map<std::string, std::size_t> index_;

    void register_params();
};

} // namespace nepembed
