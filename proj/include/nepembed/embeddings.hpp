#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "nepembed/checkpoint.hpp"
#include "nepembed/tokenizer.hpp"

namespace nepembed {

// Row-aligned keyed vectors plus a provenance note (checkpoint id, pooling).
struct EmbeddingMatrix {
    Eigen::MatrixXd vectors;
    std::vector<std::string> item_keys;
    std::string source;

    // Row/key alignment and finiteness; throws DataError.
    void validate() const;
};

enum class Pooling { Mean, Cls };

// Contextual embedding extraction over one checkpoint + vocabulary pair.
// All functions are pure given the construction inputs.
class Embedder {
public:
    Embedder(const Checkpoint& ckpt, Vocab vocab);

    const ModelConfig& config() const { return model_.config(); }
    const Vocab& vocab() const { return vocab_; }

    // Final-layer states at the word-piece positions (framing specials and
    // padding excluded), in sequence order. Empty text -> 0 rows.
    Eigen::MatrixXd embed_tokens(std::string_view text) const;

    // Mean over every subword position of every occurrence of word across
    // the context sentences. A context without the word is an error naming
    // that sentence.
    Eigen::VectorXd embed_word(std::string_view word,
                               std::span<const std::string> contexts) const;

    // Mean over word-piece states (or the CLS state). Text with zero word
    // pieces is rejected.
    Eigen::VectorXd embed_sentence(std::string_view text, Pooling pooling = Pooling::Mean) const;

private:
    Model model_;
    Vocab vocab_;
};

// Text format: header "n_items hidden_dim", then one "key v1 v2 ... vd" line
// per item. Values print with enough digits to round-trip doubles exactly.
// Keys must be unique and whitespace-free.
void export_vectors(const EmbeddingMatrix& matrix, const std::filesystem::path& path);
EmbeddingMatrix import_vectors(const std::filesystem::path& path);

} // namespace nepembed
