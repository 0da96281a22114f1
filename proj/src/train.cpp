#include "nepembed/train.hpp"

#include <cmath>
#include <numeric>
#include <ostream>

#include "nepembed/errors.hpp"

namespace nepembed {

namespace {

constexpr double kClipNorm = 1.0;
constexpr double kAdamB1 = 0.9;
constexpr double kAdamB2 = 0.999;
constexpr double kAdamEps = 1e-8;

// Substream tags keep corruption, shuffling, and dropout draws independent.
constexpr std::uint64_t kCorruptStream = 0x636f727275707431ULL;
constexpr std::uint64_t kShuffleStream = 0x73687566666c6531ULL;
constexpr std::uint64_t kDropoutStream = 0x64726f706f757431ULL;

MlmBatch corrupt_batch(std::span<const Encoded> batch, std::size_t vocab_size,
                       double mask_prob, std::uint64_t base_seed) {
    MlmBatch out;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto& enc = batch[i];
        std::vector<std::uint32_t> ids(enc.ids.begin(),
                                       enc.ids.begin() + static_cast<std::ptrdiff_t>(enc.real_len));
        Corruption c =
            mlm_corrupt(ids, vocab_size, mask_prob, Rng::mix(base_seed, i));
        out.ids.push_back(std::move(c.ids));
        out.mask.push_back(std::vector<std::uint8_t>(enc.real_len, 1));
        out.label_pos.push_back(std::move(c.label_pos));
        out.labels.push_back(std::move(c.labels));
    }
    return out;
}

} // namespace

void TrainSpec::validate() const {
    if (!(mask_prob > 0.0) || !(mask_prob < 1.0)) {
        throw UsageError("mask_prob must lie in (0,1)");
    }
    if (batch_size == 0) {
        throw UsageError("batch_size must be positive");
    }
    if (!(learning_rate > 0.0)) {
        throw UsageError("learning_rate must be positive");
    }
}

Corruption mlm_corrupt(std::span<const std::uint32_t> ids, std::size_t vocab_size,
                       double mask_prob, std::uint64_t seed) {
    if (!(mask_prob >= 0.0) || mask_prob >= 1.0) {
        throw UsageError("mask_prob must lie in [0,1)");
    }
    Corruption out;
    out.ids.assign(ids.begin(), ids.end());
    Rng rng(seed);
    const std::size_t regular = vocab_size > Vocab::kNumSpecials
                                    ? vocab_size - Vocab::kNumSpecials
                                    : 0;
    for (std::size_t t = 0; t < ids.size(); ++t) {
        if (ids[t] < Vocab::kNumSpecials || ids[t] >= vocab_size) {
            continue;
        }
        if (rng.uniform() >= mask_prob) {
            continue;
        }
        out.label_pos.push_back(t);
        out.labels.push_back(ids[t]);
        const double r = rng.uniform();
        if (r < 0.8 || regular == 0) {
            out.ids[t] = Vocab::kMask;
        } else if (r < 0.9) {
            out.ids[t] = static_cast<std::uint32_t>(Vocab::kNumSpecials + rng.below(regular));
        }
        // else: keep the original token, still supervised.
    }
    return out;
}

std::vector<Encoded> encode_corpus(const Corpus& corpus, const Vocab& vocab,
                                   std::size_t max_len) {
    std::vector<Encoded> out;
    out.reserve(corpus.size());
    for (const auto& doc : corpus.documents()) {
        out.push_back(encode(doc.text, vocab, max_len));
    }
    return out;
}

Trainer::Trainer(Model model, TrainSpec spec) : model_(std::move(model)), spec_(spec) {
    spec_.validate();
    adam_m_.reserve(model_.params().size());
    adam_v_.reserve(model_.params().size());
    for (const auto& p : model_.params()) {
        adam_m_.push_back(Eigen::MatrixXd::Zero(p.value.rows(), p.value.cols()));
        adam_v_.push_back(Eigen::MatrixXd::Zero(p.value.rows(), p.value.cols()));
    }
}

Trainer::Trainer(const Checkpoint& ckpt, TrainSpec spec)
    : Trainer(model_from_checkpoint(ckpt), spec) {
    step_ = ckpt.step;
    if (ckpt.optimizer_state.empty()) {
        return;
    }
    // model_from_checkpoint already validated the optimizer layout.
    const auto& params = model_.params();
    adam_t_ = static_cast<std::uint64_t>(ckpt.optimizer_state[0].data.at(0));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const auto& mt = ckpt.optimizer_state[1 + i];
        const auto& vt = ckpt.optimizer_state[1 + params.size() + i];
        for (std::uint64_t r = 0; r < mt.rows; ++r) {
            for (std::uint64_t c = 0; c < mt.cols; ++c) {
                adam_m_[i](static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                    static_cast<double>(mt.data[r * mt.cols + c]);
                adam_v_[i](static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                    static_cast<double>(vt.data[r * vt.cols + c]);
            }
        }
    }
}

void Trainer::apply_update(std::vector<Eigen::MatrixXd>& grads) {
    double sq = 0.0;
    for (const auto& g : grads) {
        sq += g.squaredNorm();
    }
    const double norm = std::sqrt(sq);
    if (!std::isfinite(norm)) {
        throw NumericError("non-finite gradient norm at step " + std::to_string(step_));
    }
    if (norm > kClipNorm) {
        const double scale = kClipNorm / norm;
        for (auto& g : grads) {
            g *= scale;
        }
    }
    adam_t_ += 1;
    const double c1 = 1.0 - std::pow(kAdamB1, static_cast<double>(adam_t_));
    const double c2 = 1.0 - std::pow(kAdamB2, static_cast<double>(adam_t_));
    auto& params = model_.params();
    for (std::size_t p = 0; p < params.size(); ++p) {
        adam_m_[p] = kAdamB1 * adam_m_[p] + (1.0 - kAdamB1) * grads[p];
        adam_v_[p] = kAdamB2 * adam_v_[p].array() +
                     (1.0 - kAdamB2) * grads[p].array().square();
        params[p].value.array() -=
            spec_.learning_rate * (adam_m_[p].array() / c1) /
            ((adam_v_[p].array() / c2).sqrt() + kAdamEps);
    }
}

double Trainer::step_batch(const MlmBatch& batch) {
    if (batch.total_labels() == 0) {
        step_ += 1;
        return 0.0;
    }
    std::vector<Eigen::MatrixXd> grads;
    double loss = 0.0;
    if (model_.config().dropout > 0.0) {
        Rng drop_rng(Rng::mix(Rng::mix(spec_.seed, kDropoutStream), step_));
        loss = model_.loss_and_grads(batch, grads, &drop_rng);
    } else {
        loss = model_.loss_and_grads(batch, grads);
    }
    apply_update(grads);
    step_ += 1;
    return loss;
}

double Trainer::train_step(std::span<const Encoded> batch) {
    const MlmBatch corrupted =
        corrupt_batch(batch, model_.config().vocab_size, spec_.mask_prob,
                      Rng::mix(Rng::mix(spec_.seed, kCorruptStream), step_));
    return step_batch(corrupted);
}

Checkpoint Trainer::to_checkpoint(bool with_optimizer) const {
    Checkpoint ckpt = checkpoint_from_model(model_, step_);
    if (!with_optimizer) {
        return ckpt;
    }
    NamedTensor t;
    t.name = "adam.t";
    t.rows = 1;
    t.cols = 1;
    t.data.push_back(static_cast<float>(adam_t_));
    ckpt.optimizer_state.push_back(std::move(t));
    const auto& params = model_.params();
    for (std::size_t half = 0; half < 2; ++half) {
        const auto& src = half == 0 ? adam_m_ : adam_v_;
        for (std::size_t i = 0; i < params.size(); ++i) {
            NamedTensor s;
            s.name = (half == 0 ? "adam_m." : "adam_v.") + params[i].name;
            s.rows = static_cast<std::uint64_t>(src[i].rows());
            s.cols = static_cast<std::uint64_t>(src[i].cols());
            s.data.reserve(s.rows * s.cols);
            for (Eigen::Index r = 0; r < src[i].rows(); ++r) {
                for (Eigen::Index c = 0; c < src[i].cols(); ++c) {
                    s.data.push_back(static_cast<float>(src[i](r, c)));
                }
            }
            ckpt.optimizer_state.push_back(std::move(s));
        }
    }
    return ckpt;
}

Checkpoint finetune(const Checkpoint& ckpt, const std::vector<Encoded>& seqs,
                    const TrainSpec& spec, const FinetuneOptions& opts) {
    spec.validate();
    if (seqs.empty()) {
        throw DataError("cannot fine-tune on an empty corpus");
    }
    Trainer trainer(ckpt, spec);
    std::vector<std::size_t> order(seqs.size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t epoch = 0; epoch < spec.epochs; ++epoch) {
        Rng shuffle_rng(Rng::mix(Rng::mix(spec.seed, kShuffleStream), epoch));
        shuffle_rng.shuffle(order);
        double loss_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += spec.batch_size) {
            const std::size_t stop = std::min(order.size(), start + spec.batch_size);
            std::vector<Encoded> batch;
            batch.reserve(stop - start);
            for (std::size_t i = start; i < stop; ++i) {
                batch.push_back(seqs[order[i]]);
            }
            loss_sum += trainer.train_step(batch);
            batches += 1;
        }
        if (opts.log != nullptr) {
            nlohmann::json record{
                {"epoch", epoch},
                {"step", trainer.step()},
                {"loss", loss_sum / static_cast<double>(batches)},
            };
            if (opts.heldout != nullptr) {
                record["perplexity"] = perplexity(trainer.to_checkpoint(false), *opts.heldout,
                                                  spec.mask_prob, spec.seed);
            }
            *opts.log << record.dump() << "\n";
        }
    }
    return trainer.to_checkpoint();
}

Checkpoint finetune(const Checkpoint& ckpt, const Corpus& corpus, const Vocab& vocab,
                    const TrainSpec& spec, const FinetuneOptions& opts) {
    return finetune(ckpt, encode_corpus(corpus, vocab, ckpt.config.max_len), spec, opts);
}

std::pair<Checkpoint, double> train_step(const Checkpoint& ckpt, std::span<const Encoded> batch,
                                         const TrainSpec& spec) {
    Trainer trainer(ckpt, spec);
    const double loss = trainer.train_step(batch);
    return {trainer.to_checkpoint(), loss};
}

double perplexity(const Checkpoint& ckpt, const std::vector<Encoded>& heldout,
                  double mask_prob, std::uint64_t seed) {
    if (heldout.empty()) {
        throw DataError("perplexity needs a non-empty held-out corpus");
    }
    const Model model = model_from_checkpoint(ckpt);
    const MlmBatch batch = corrupt_batch(heldout, model.config().vocab_size, mask_prob,
                                         Rng::mix(seed, kCorruptStream));
    if (batch.total_labels() == 0) {
        throw DataError("held-out corpus produced no masked positions");
    }
    return std::exp(model.loss(batch));
}

double perplexity(const Checkpoint& ckpt, const Corpus& corpus, const Vocab& vocab,
                  double mask_prob, std::uint64_t seed) {
    return perplexity(ckpt, encode_corpus(corpus, vocab, ckpt.config.max_len), mask_prob, seed);
}

} // namespace nepembed
