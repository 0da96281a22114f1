#include "nepembed/embeddings.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "nepembed/errors.hpp"
#include "nepembed/utf8.hpp"

namespace nepembed {

void EmbeddingMatrix::validate() const {
    if (static_cast<std::size_t>(vectors.rows()) != item_keys.size()) {
        throw DataError("embedding matrix has " + std::to_string(vectors.rows()) +
                        " rows but " + std::to_string(item_keys.size()) + " keys");
    }
    if (!vectors.allFinite()) {
        throw DataError("embedding matrix contains non-finite values");
    }
}

Embedder::Embedder(const Checkpoint& ckpt, Vocab vocab)
    : model_(model_from_checkpoint(ckpt)), vocab_(std::move(vocab)) {
    if (vocab_.size() != model_.config().vocab_size) {
        throw DataError("vocabulary size " + std::to_string(vocab_.size()) +
                        " does not match checkpoint vocab_size " +
                        std::to_string(model_.config().vocab_size));
    }
}

namespace {

// Padding never influences real positions, so forward only the real prefix.
SeqForward forward_real(const Model& model, const Encoded& enc) {
    const std::span<const std::uint32_t> ids(enc.ids.data(), enc.real_len);
    const std::vector<std::uint8_t> mask(enc.real_len, 1);
    ForwardOptions opts;
    opts.want_logits = false;
    return model.forward(ids, mask, opts);
}

} // namespace

Eigen::MatrixXd Embedder::embed_tokens(std::string_view text) const {
    const Encoded enc = encode(text, vocab_, model_.config().max_len);
    const std::size_t pieces = enc.real_len - 2;  // CLS and SEP framing
    Eigen::MatrixXd out(pieces, model_.config().hidden_dim);
    if (pieces == 0) {
        return out;
    }
    const SeqForward fwd = forward_real(model_, enc);
    out = fwd.hidden.middleRows(1, static_cast<Eigen::Index>(pieces));
    return out;
}

Eigen::VectorXd Embedder::embed_word(std::string_view word,
                                     std::span<const std::string> contexts) const {
    if (contexts.empty()) {
        throw DataError("embed_word needs at least one context sentence");
    }
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(model_.config().hidden_dim);
    std::size_t count = 0;
    for (const auto& context : contexts) {
        const EncodedWords ew = encode_with_words(context, vocab_, model_.config().max_len);
        const SeqForward fwd = forward_real(model_, ew.enc);
        std::size_t here = 0;
        for (const auto& span : ew.words) {
            if (span.word != word) {
                continue;
            }
            for (std::size_t pos = span.begin; pos < span.end; ++pos) {
                sum += fwd.hidden.row(static_cast<Eigen::Index>(pos)).transpose();
                ++here;
            }
        }
        if (here == 0) {
            throw DataError("word " + std::string(word) +
                            " does not occur in context: " + context);
        }
        count += here;
    }
    return sum / static_cast<double>(count);
}

Eigen::VectorXd Embedder::embed_sentence(std::string_view text, Pooling pooling) const {
    const Encoded enc = encode(text, vocab_, model_.config().max_len);
    const std::size_t pieces = enc.real_len - 2;
    if (pieces == 0) {
        throw DataError("text encodes to zero word pieces: " + std::string(text));
    }
    const SeqForward fwd = forward_real(model_, enc);
    if (pooling == Pooling::Cls) {
        return fwd.hidden.row(0).transpose();
    }
    return fwd.hidden.middleRows(1, static_cast<Eigen::Index>(pieces)).colwise().mean().transpose();
}

void export_vectors(const EmbeddingMatrix& matrix, const std::filesystem::path& path) {
    matrix.validate();
    std::unordered_set<std::string> seen;
    for (const auto& key : matrix.item_keys) {
        if (key.empty()) {
            throw DataError("empty item key");
        }
        for (const char ch : key) {
            if (text::is_space(static_cast<unsigned char>(ch))) {
                throw DataError("item key contains whitespace: " + key);
            }
        }
        if (!seen.insert(key).second) {
            throw DataError("duplicate item key: " + key);
        }
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    out << matrix.vectors.rows() << " " << matrix.vectors.cols() << "\n";
    char buf[40];
    for (Eigen::Index r = 0; r < matrix.vectors.rows(); ++r) {
        out << matrix.item_keys[static_cast<std::size_t>(r)];
        for (Eigen::Index c = 0; c < matrix.vectors.cols(); ++c) {
            std::snprintf(buf, sizeof(buf), "%.17g", matrix.vectors(r, c));
            out << " " << buf;
        }
        out << "\n";
    }
    if (!out) {
        throw DataError("short write to " + path.string());
    }
}

EmbeddingMatrix import_vectors(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot read " + path.string());
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError("missing header line in " + path.string());
    }
    std::istringstream header(line);
    std::size_t n_items = 0;
    std::size_t dim = 0;
    if (!(header >> n_items >> dim) || !(header >> std::ws).eof()) {
        throw DataError("malformed header line in " + path.string());
    }

    EmbeddingMatrix matrix;
    matrix.vectors.resize(static_cast<Eigen::Index>(n_items), static_cast<Eigen::Index>(dim));
    matrix.source = path.string();
    std::unordered_set<std::string> seen;
    for (std::size_t r = 0; r < n_items; ++r) {
        if (!std::getline(in, line)) {
            throw DataError("expected " + std::to_string(n_items) + " items, found " +
                            std::to_string(r) + " in " + path.string());
        }
        std::istringstream row(line);
        std::string key;
        if (!(row >> key)) {
            throw DataError("empty item line " + std::to_string(r) + " in " + path.string());
        }
        if (!seen.insert(key).second) {
            throw DataError("duplicate item key: " + key);
        }
        matrix.item_keys.push_back(key);
        for (std::size_t c = 0; c < dim; ++c) {
            double v = 0.0;
            if (!(row >> v)) {
                throw DataError("item " + key + " has fewer than " + std::to_string(dim) +
                                " values");
            }
            matrix.vectors(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
        }
        if (!(row >> std::ws).eof()) {
            throw DataError("item " + key + " has more than " + std::to_string(dim) +
                            " values");
        }
    }
    if (std::getline(in, line)) {
        throw DataError("trailing content after " + std::to_string(n_items) + " items in " +
                        path.string());
    }
    matrix.validate();
    return matrix;
}

} // namespace nepembed
