#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "nepembed/checkpoint.hpp"
#include "nepembed/model.hpp"
#include "nepembed/tokenizer.hpp"

namespace nepembed {

// Masked-token training hyperparameters.
struct TrainSpec {
    double mask_prob = 0.15;
    std::size_t epochs = 60;
    std::size_t batch_size = 16;
    double learning_rate = 5e-5;
    std::uint64_t seed = 0;

    // mask_prob in (0,1), batch_size >= 1, learning_rate > 0. epochs may be
    // zero (fine-tuning degenerates to the identity).
    void validate() const;

    bool operator==(const TrainSpec&) const = default;
};

struct Corruption {
    std::vector<std::uint32_t> ids;       // post-corruption
    std::vector<std::size_t> label_pos;   // supervised positions
    std::vector<std::uint32_t> labels;    // pre-corruption tokens there
};

// Seeded 80/10/10 corruption over non-special positions: each is selected
// with probability mask_prob; selected positions become MASK (80%), a random
// non-special token (10%), or stay unchanged (10%). No eligible position ->
// identity with no labels.
Corruption mlm_corrupt(std::span<const std::uint32_t> ids, std::size_t vocab_size,
                       double mask_prob, std::uint64_t seed);

// Encode every document, one padded sequence per document, in corpus order.
std::vector<Encoded> encode_corpus(const Corpus& corpus, const Vocab& vocab,
                                   std::size_t max_len);

// Adam (b1 0.9, b2 0.999) at a fixed learning rate with gradient clipping at
// global norm 1.0. Owns the double-precision model between steps; optimizer
// state resumes from a checkpoint when present.
class Trainer {
public:
    Trainer(Model model, TrainSpec spec);
    Trainer(const Checkpoint& ckpt, TrainSpec spec);

    const Model& model() const { return model_; }
    std::uint64_t step() const { return step_; }

    // Corruption is seeded per (spec.seed, step); sequences are truncated to
    // their real length. A batch with zero label positions leaves the
    // weights unchanged and reports loss 0.
    double train_step(std::span<const Encoded> batch);
    // One update from pre-corrupted supervision.
    double step_batch(const MlmBatch& batch);

    Checkpoint to_checkpoint(bool with_optimizer = true) const;

private:
    Model model_;
    TrainSpec spec_;
    std::vector<Eigen::MatrixXd> adam_m_, adam_v_;
    std::uint64_t adam_t_ = 0;
    std::uint64_t step_ = 0;

    void apply_update(std::vector<Eigen::MatrixXd>& grads);
};

struct FinetuneOptions {
    std::ostream* log = nullptr;                    // per-epoch NDJSON records
    const std::vector<Encoded>* heldout = nullptr;  // adds perplexity to the log
};

// spec.epochs passes over seeded shuffles of the sequences. Returns the
// trained checkpoint with optimizer state.
Checkpoint finetune(const Checkpoint& ckpt, const std::vector<Encoded>& seqs,
                    const TrainSpec& spec, const FinetuneOptions& opts = {});
Checkpoint finetune(const Checkpoint& ckpt, const Corpus& corpus, const Vocab& vocab,
                    const TrainSpec& spec, const FinetuneOptions& opts = {});

// Checkpoint-level single step, for stepwise inspection.
std::pair<Checkpoint, double> train_step(const Checkpoint& ckpt, std::span<const Encoded> batch,
                                         const TrainSpec& spec);

// exp(mean masked-token cross-entropy) under seeded corruption of the
// held-out sequences. Rejects input that yields zero label positions.
double perplexity(const Checkpoint& ckpt, const std::vector<Encoded>& heldout,
                  double mask_prob, std::uint64_t seed);
double perplexity(const Checkpoint& ckpt, const Corpus& corpus, const Vocab& vocab,
                  double mask_prob, std::uint64_t seed);

} // namespace nepembed
