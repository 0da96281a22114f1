#include "nepembed/model.hpp"

#include <cmath>
#include <limits>

#include "nepembed/errors.hpp"

namespace nepembed {

namespace {

constexpr double kLnEps = 1e-12;
constexpr double kInitStd = 0.02;
constexpr double kInvSqrt2Pi = 0.3989422804014327;

// Parameter registry layout: tok_emb, pos_emb, then 16 tensors per layer,
// then the final layer norm and the 6 prediction-head tensors.
constexpr std::size_t kTokEmb = 0;
constexpr std::size_t kPosEmb = 1;
constexpr std::size_t kPerLayer = 16;
enum LayerSlot : std::size_t {
    oLn1G = 0, oLn1B, oWq, oBq, oWk, oBk, oWv, oBv,
    oWo, oBo, oLn2G, oLn2B, oW1, oB1, oW2, oB2,
};
enum TailSlot : std::size_t {
    oFinalG = 0, oFinalB, oMlmW1, oMlmB1, oMlmLnG, oMlmLnB, oMlmW2, oMlmB2,
};

std::size_t layer_base(std::size_t l) { return 2 + l * kPerLayer; }
std::size_t tail_base(const ModelConfig& cfg) { return 2 + cfg.num_layers * kPerLayer; }

struct LnCache {
    Eigen::MatrixXd xhat;
    Eigen::VectorXd inv_std;
};

Eigen::MatrixXd ln_forward(const Eigen::MatrixXd& x, const Eigen::MatrixXd& g,
                           const Eigen::MatrixXd& b, LnCache* cache) {
    Eigen::MatrixXd xhat(x.rows(), x.cols());
    Eigen::VectorXd inv_std(x.rows());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        const double mu = x.row(r).mean();
        const double var = (x.row(r).array() - mu).square().mean();
        const double is = 1.0 / std::sqrt(var + kLnEps);
        xhat.row(r) = (x.row(r).array() - mu) * is;
        inv_std(r) = is;
    }
    Eigen::MatrixXd y =
        (xhat.array().rowwise() * g.row(0).array()).rowwise() + b.row(0).array();
    if (cache != nullptr) {
        cache->xhat = std::move(xhat);
        cache->inv_std = std::move(inv_std);
    }
    return y;
}

Eigen::MatrixXd ln_backward(const Eigen::MatrixXd& dy, const LnCache& c,
                            const Eigen::MatrixXd& g, Eigen::MatrixXd& dg,
                            Eigen::MatrixXd& db) {
    const Eigen::MatrixXd dxhat = dy.array().rowwise() * g.row(0).array();
    Eigen::MatrixXd dx(dy.rows(), dy.cols());
    for (Eigen::Index r = 0; r < dy.rows(); ++r) {
        const double m1 = dxhat.row(r).mean();
        const double m2 = (dxhat.row(r).array() * c.xhat.row(r).array()).mean();
        dx.row(r) =
            c.inv_std(r) * (dxhat.row(r).array() - m1 - c.xhat.row(r).array() * m2);
    }
    dg.row(0).array() += (dy.array() * c.xhat.array()).colwise().sum();
    db.row(0).array() += dy.array().colwise().sum();
    return dx;
}

// Softmax per row over unmasked key positions; masked columns get exact zero.
Eigen::MatrixXd masked_softmax(const Eigen::MatrixXd& s, std::span<const std::uint8_t> mask) {
    Eigen::MatrixXd p(s.rows(), s.cols());
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
        double mx = -std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < s.cols(); ++j) {
            if (mask[static_cast<std::size_t>(j)] != 0) {
                mx = std::max(mx, s(i, j));
            }
        }
        double sum = 0.0;
        for (Eigen::Index j = 0; j < s.cols(); ++j) {
            const double e =
                mask[static_cast<std::size_t>(j)] != 0 ? std::exp(s(i, j) - mx) : 0.0;
            p(i, j) = e;
            sum += e;
        }
        p.row(i) /= sum;
    }
    return p;
}

Eigen::MatrixXd dropout_mask(Eigen::Index rows, Eigen::Index cols, double p, Rng& rng) {
    Eigen::MatrixXd m(rows, cols);
    const double scale = 1.0 / (1.0 - p);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(r, c) = rng.uniform() < p ? 0.0 : scale;
        }
    }
    return m;
}

struct LayerCache {
    LnCache ln1, ln2;
    Eigen::MatrixXd n1, q, k, v;
    std::vector<Eigen::MatrixXd> probs;  // per head [T,T]
    Eigen::MatrixXd concat;
    Eigen::MatrixXd n2, ff_pre, ff_act;
    Eigen::MatrixXd attn_drop, ff_drop;  // empty when dropout is off
};

struct SeqCache {
    Eigen::MatrixXd emb_drop;
    std::vector<LayerCache> layers;
    LnCache ln_final, ln_head;
    Eigen::MatrixXd z, t1, n3, probs;  // prediction head over label rows
};

void check_sequence(const ModelConfig& cfg, std::span<const std::uint32_t> ids,
                    std::span<const std::uint8_t> mask) {
    if (ids.empty() || ids.size() != mask.size()) {
        throw DataError("ids and mask must be the same non-zero length");
    }
    if (ids.size() > cfg.max_len) {
        throw DataError("sequence length " + std::to_string(ids.size()) +
                        " exceeds max_len " + std::to_string(cfg.max_len));
    }
    bool any_real = false;
    for (std::size_t t = 0; t < ids.size(); ++t) {
        if (ids[t] >= cfg.vocab_size) {
            throw DataError("token id " + std::to_string(ids[t]) +
                            " out of range for vocab_size " + std::to_string(cfg.vocab_size));
        }
        any_real = any_real || mask[t] != 0;
    }
    if (!any_real) {
        throw DataError("attention mask has no unmasked position");
    }
}

} // namespace

ModelConfig ModelConfig::small_preset(std::size_t vocab_size, std::size_t max_len) {
    ModelConfig cfg;
    cfg.num_layers = 6;
    cfg.num_heads = 6;
    cfg.hidden_dim = 300;
    cfg.ff_dim = 1200;
    cfg.vocab_size = vocab_size;
    cfg.max_len = max_len;
    cfg.dropout = 0.0;
    return cfg;
}

ModelConfig ModelConfig::oracle_preset(std::size_t vocab_size, std::size_t max_len) {
    ModelConfig cfg;
    cfg.num_layers = 12;
    cfg.num_heads = 12;
    cfg.hidden_dim = 768;
    cfg.ff_dim = 3072;
    cfg.vocab_size = vocab_size;
    cfg.max_len = max_len;
    cfg.dropout = 0.0;
    return cfg;
}

void ModelConfig::validate() const {
    if (num_layers == 0 || num_heads == 0 || hidden_dim == 0 || ff_dim == 0 ||
        vocab_size == 0 || max_len == 0) {
        throw UsageError("all model dimensions must be positive");
    }
    if (hidden_dim % num_heads != 0) {
        throw UsageError("hidden_dim " + std::to_string(hidden_dim) +
                         " is not divisible by num_heads " + std::to_string(num_heads));
    }
    if (!(dropout >= 0.0) || dropout >= 1.0) {
        throw UsageError("dropout must lie in [0,1)");
    }
}

nlohmann::json config_to_json(const ModelConfig& cfg) {
    return nlohmann::json{
        {"num_layers", cfg.num_layers},   {"num_heads", cfg.num_heads},
        {"hidden_dim", cfg.hidden_dim},   {"ff_dim", cfg.ff_dim},
        {"vocab_size", cfg.vocab_size},   {"max_len", cfg.max_len},
        {"dropout", cfg.dropout},
    };
}

ModelConfig config_from_json(const nlohmann::json& j) {
    ModelConfig cfg;
    try {
        cfg.num_layers = j.at("num_layers").get<std::size_t>();
        cfg.num_heads = j.at("num_heads").get<std::size_t>();
        cfg.hidden_dim = j.at("hidden_dim").get<std::size_t>();
        cfg.ff_dim = j.at("ff_dim").get<std::size_t>();
        cfg.vocab_size = j.at("vocab_size").get<std::size_t>();
        cfg.max_len = j.at("max_len").get<std::size_t>();
        cfg.dropout = j.at("dropout").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed model config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * M_SQRT1_2)); }

double gelu_grad(double x) {
    const double phi_big = 0.5 * (1.0 + std::erf(x * M_SQRT1_2));
    const double phi_small = kInvSqrt2Pi * std::exp(-0.5 * x * x);
    return phi_big + x * phi_small;
}

std::size_t MlmBatch::total_labels() const {
    std::size_t n = 0;
    for (const auto& lp : label_pos) {
        n += lp.size();
    }
    return n;
}

Model::Model(ModelConfig cfg) : config_(std::move(cfg)) {
    config_.validate();
    register_params();
}

namespace {

struct ParamSpec {
    std::string name;
    std::size_t rows = 0;
    std::size_t cols = 0;
    int kind = 0;  // 0 zero, 1 one, 2 normal
};

std::vector<ParamSpec> build_param_specs(const ModelConfig& cfg) {
    const std::size_t h = cfg.hidden_dim;
    const std::size_t f = cfg.ff_dim;
    std::vector<ParamSpec> specs;
    specs.push_back({"tok_emb", cfg.vocab_size, h, 2});
    specs.push_back({"pos_emb", cfg.max_len, h, 2});
    for (std::size_t l = 0; l < cfg.num_layers; ++l) {
        const std::string p = "layer" + std::to_string(l) + ".";
        specs.push_back({p + "ln1.g", 1, h, 1});
        specs.push_back({p + "ln1.b", 1, h, 0});
        specs.push_back({p + "attn.wq", h, h, 2});
        specs.push_back({p + "attn.bq", 1, h, 0});
        specs.push_back({p + "attn.wk", h, h, 2});
        specs.push_back({p + "attn.bk", 1, h, 0});
        specs.push_back({p + "attn.wv", h, h, 2});
        specs.push_back({p + "attn.bv", 1, h, 0});
        specs.push_back({p + "attn.wo", h, h, 2});
        specs.push_back({p + "attn.bo", 1, h, 0});
        specs.push_back({p + "ln2.g", 1, h, 1});
        specs.push_back({p + "ln2.b", 1, h, 0});
        specs.push_back({p + "ff.w1", h, f, 2});
        specs.push_back({p + "ff.b1", 1, f, 0});
        specs.push_back({p + "ff.w2", f, h, 2});
        specs.push_back({p + "ff.b2", 1, h, 0});
    }
    specs.push_back({"final_ln.g", 1, h, 1});
    specs.push_back({"final_ln.b", 1, h, 0});
    specs.push_back({"mlm.w1", h, h, 2});
    specs.push_back({"mlm.b1", 1, h, 0});
    specs.push_back({"mlm.ln.g", 1, h, 1});
    specs.push_back({"mlm.ln.b", 1, h, 0});
    specs.push_back({"mlm.w2", h, cfg.vocab_size, 2});
    specs.push_back({"mlm.b2", 1, cfg.vocab_size, 0});
    return specs;
}

} // namespace

std::vector<TensorShape> expected_tensor_shapes(const ModelConfig& cfg) {
    std::vector<TensorShape> shapes;
    for (auto& s : build_param_specs(cfg)) {
        shapes.push_back({std::move(s.name), s.rows, s.cols});
    }
    return shapes;
}

void Model::register_params() {
    for (auto& s : build_param_specs(config_)) {
        index_.emplace(s.name, params_.size());
        params_.push_back({std::move(s.name),
                           Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(s.rows),
                                                 static_cast<Eigen::Index>(s.cols))});
        init_kind_.push_back(s.kind == 1 ? Init::One : s.kind == 2 ? Init::Normal : Init::Zero);
    }
}

Model Model::init(const ModelConfig& cfg, std::uint64_t seed) {
    Model m(cfg);
    Rng rng(seed);
    for (std::size_t p = 0; p < m.params_.size(); ++p) {
        Eigen::MatrixXd& t = m.params_[p].value;
        switch (m.init_kind_[p]) {
        case Init::Zero:
            break;
        case Init::One:
            t.setOnes();
            break;
        case Init::Normal:
            for (Eigen::Index r = 0; r < t.rows(); ++r) {
                for (Eigen::Index c = 0; c < t.cols(); ++c) {
                    t(r, c) = rng.normal(0.0, kInitStd);
                }
            }
            break;
        }
    }
    return m;
}

std::size_t Model::param_index(const std::string& name) const {
    const auto it = index_.find(name);
    if (it == index_.end()) {
        throw DataError("unknown parameter tensor: " + name);
    }
    return it->second;
}

Eigen::MatrixXd& Model::param(const std::string& name) {
    return params_[param_index(name)].value;
}

const Eigen::MatrixXd& Model::param(const std::string& name) const {
    return params_[param_index(name)].value;
}

std::size_t Model::num_scalars() const {
    std::size_t n = 0;
    for (const auto& p : params_) {
        n += static_cast<std::size_t>(p.value.size());
    }
    return n;
}

namespace {

// Shared encoder trunk. Returns the final-LN hidden states [T,H]; fills the
// cache (and dropout masks) when given.
Eigen::MatrixXd run_trunk(const ModelConfig& cfg, const std::vector<Model::Param>& params,
                          std::span<const std::uint32_t> ids,
                          std::span<const std::uint8_t> mask, SeqCache* cache,
                          std::vector<std::vector<Eigen::MatrixXd>>* attention_out,
                          Rng* dropout_rng) {
    const auto T = static_cast<Eigen::Index>(ids.size());
    const auto H = static_cast<Eigen::Index>(cfg.hidden_dim);
    const std::size_t heads = cfg.num_heads;
    const Eigen::Index dh = H / static_cast<Eigen::Index>(heads);
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
    const bool drop = dropout_rng != nullptr && cfg.dropout > 0.0;

    const Eigen::MatrixXd& tok = params[kTokEmb].value;
    const Eigen::MatrixXd& pos = params[kPosEmb].value;
    Eigen::MatrixXd x(T, H);
    for (Eigen::Index t = 0; t < T; ++t) {
        x.row(t) = tok.row(static_cast<Eigen::Index>(ids[static_cast<std::size_t>(t)])) +
                   pos.row(t);
    }
    if (drop) {
        Eigen::MatrixXd m = dropout_mask(T, H, cfg.dropout, *dropout_rng);
        x = x.cwiseProduct(m);
        if (cache != nullptr) {
            cache->emb_drop = std::move(m);
        }
    }
    if (cache != nullptr) {
        cache->layers.resize(cfg.num_layers);
    }
    if (attention_out != nullptr) {
        attention_out->assign(cfg.num_layers, {});
    }

    for (std::size_t l = 0; l < cfg.num_layers; ++l) {
        const std::size_t b = layer_base(l);
        LayerCache* lc = cache != nullptr ? &cache->layers[l] : nullptr;
        const Eigen::MatrixXd n1 = ln_forward(x, params[b + oLn1G].value,
                                              params[b + oLn1B].value,
                                              lc != nullptr ? &lc->ln1 : nullptr);
        Eigen::MatrixXd q = (n1 * params[b + oWq].value).rowwise() + params[b + oBq].value.row(0);
        Eigen::MatrixXd k = (n1 * params[b + oWk].value).rowwise() + params[b + oBk].value.row(0);
        Eigen::MatrixXd v = (n1 * params[b + oWv].value).rowwise() + params[b + oBv].value.row(0);

        Eigen::MatrixXd concat(T, H);
        std::vector<Eigen::MatrixXd> probs(heads);
        for (std::size_t hd = 0; hd < heads; ++hd) {
            const auto off = static_cast<Eigen::Index>(hd) * dh;
            const Eigen::MatrixXd s =
                q.middleCols(off, dh) * k.middleCols(off, dh).transpose() * scale;
            probs[hd] = masked_softmax(s, mask);
            concat.middleCols(off, dh) = probs[hd] * v.middleCols(off, dh);
        }
        Eigen::MatrixXd attn_out =
            (concat * params[b + oWo].value).rowwise() + params[b + oBo].value.row(0);
        if (drop) {
            Eigen::MatrixXd m = dropout_mask(T, H, cfg.dropout, *dropout_rng);
            attn_out = attn_out.cwiseProduct(m);
            if (lc != nullptr) {
                lc->attn_drop = std::move(m);
            }
        }
        if (attention_out != nullptr) {
            (*attention_out)[l] = probs;
        }
        if (lc != nullptr) {
            lc->n1 = n1;
            lc->q = std::move(q);
            lc->k = std::move(k);
            lc->v = std::move(v);
            lc->probs = std::move(probs);
            lc->concat = std::move(concat);
        }
        x += attn_out;

        const Eigen::MatrixXd n2 = ln_forward(x, params[b + oLn2G].value,
                                              params[b + oLn2B].value,
                                              lc != nullptr ? &lc->ln2 : nullptr);
        Eigen::MatrixXd ff_pre =
            (n2 * params[b + oW1].value).rowwise() + params[b + oB1].value.row(0);
        const Eigen::MatrixXd ff_act = ff_pre.unaryExpr([](double u) { return gelu(u); });
        Eigen::MatrixXd ff_out =
            (ff_act * params[b + oW2].value).rowwise() + params[b + oB2].value.row(0);
        if (drop) {
            Eigen::MatrixXd m = dropout_mask(T, H, cfg.dropout, *dropout_rng);
            ff_out = ff_out.cwiseProduct(m);
            if (lc != nullptr) {
                lc->ff_drop = std::move(m);
            }
        }
        if (lc != nullptr) {
            lc->n2 = n2;
            lc->ff_pre = std::move(ff_pre);
            lc->ff_act = ff_act;
        }
        x += ff_out;
    }

    const std::size_t tb = tail_base(cfg);
    return ln_forward(x, params[tb + oFinalG].value, params[tb + oFinalB].value,
                      cache != nullptr ? &cache->ln_final : nullptr);
}

// Prediction head over selected rows of the trunk output.
Eigen::MatrixXd run_head(const ModelConfig& cfg, const std::vector<Model::Param>& params,
                         const Eigen::MatrixXd& rows, SeqCache* cache) {
    const std::size_t tb = tail_base(cfg);
    Eigen::MatrixXd t1 =
        (rows * params[tb + oMlmW1].value).rowwise() + params[tb + oMlmB1].value.row(0);
    const Eigen::MatrixXd act = t1.unaryExpr([](double u) { return gelu(u); });
    Eigen::MatrixXd n3 = ln_forward(act, params[tb + oMlmLnG].value,
                                    params[tb + oMlmLnB].value,
                                    cache != nullptr ? &cache->ln_head : nullptr);
    Eigen::MatrixXd logits =
        (n3 * params[tb + oMlmW2].value).rowwise() + params[tb + oMlmB2].value.row(0);
    if (cache != nullptr) {
        cache->z = rows;
        cache->t1 = std::move(t1);
        cache->n3 = std::move(n3);
    }
    return logits;
}

// Row softmax plus summed negative log-likelihood of the targets.
double softmax_nll(const Eigen::MatrixXd& logits, std::span<const std::uint32_t> targets,
                   Eigen::MatrixXd* probs_out) {
    Eigen::MatrixXd probs(logits.rows(), logits.cols());
    double nll = 0.0;
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        const double mx = logits.row(i).maxCoeff();
        const double lse =
            mx + std::log((logits.row(i).array() - mx).exp().sum());
        probs.row(i) = (logits.row(i).array() - lse).exp();
        nll += lse - logits(i, static_cast<Eigen::Index>(targets[static_cast<std::size_t>(i)]));
    }
    if (probs_out != nullptr) {
        *probs_out = std::move(probs);
    }
    return nll;
}

void check_batch(const ModelConfig& cfg, const MlmBatch& batch) {
    if (batch.ids.size() != batch.mask.size() || batch.ids.size() != batch.label_pos.size() ||
        batch.ids.size() != batch.labels.size()) {
        throw DataError("batch fields must have the same number of sequences");
    }
    for (std::size_t i = 0; i < batch.ids.size(); ++i) {
        check_sequence(cfg, batch.ids[i], batch.mask[i]);
        if (batch.label_pos[i].size() != batch.labels[i].size()) {
            throw DataError("label positions and labels must align");
        }
        for (std::size_t j = 0; j < batch.label_pos[i].size(); ++j) {
            if (batch.label_pos[i][j] >= batch.ids[i].size()) {
                throw DataError("label position out of range");
            }
            if (batch.labels[i][j] >= cfg.vocab_size) {
                throw DataError("label id out of range");
            }
        }
    }
}

} // namespace

SeqForward Model::forward(std::span<const std::uint32_t> ids,
                          std::span<const std::uint8_t> mask,
                          const ForwardOptions& opts) const {
    check_sequence(config_, ids, mask);
    SeqForward out;
    out.hidden = run_trunk(config_, params_, ids, mask, nullptr,
                           opts.want_attention ? &out.attention : nullptr, nullptr);
    if (opts.want_logits) {
        out.logits = run_head(config_, params_, out.hidden, nullptr);
    }
    return out;
}

double Model::loss(const MlmBatch& batch, Rng* dropout_rng) const {
    check_batch(config_, batch);
    const std::size_t n = batch.total_labels();
    if (n == 0) {
        return 0.0;
    }
    double nll = 0.0;
    for (std::size_t i = 0; i < batch.ids.size(); ++i) {
        if (batch.label_pos[i].empty()) {
            continue;
        }
        const Eigen::MatrixXd hidden = run_trunk(config_, params_, batch.ids[i],
                                                 batch.mask[i], nullptr, nullptr, dropout_rng);
        Eigen::MatrixXd rows(batch.label_pos[i].size(), config_.hidden_dim);
        for (std::size_t j = 0; j < batch.label_pos[i].size(); ++j) {
            rows.row(static_cast<Eigen::Index>(j)) =
                hidden.row(static_cast<Eigen::Index>(batch.label_pos[i][j]));
        }
        const Eigen::MatrixXd logits = run_head(config_, params_, rows, nullptr);
        nll += softmax_nll(logits, batch.labels[i], nullptr);
    }
    const double value = nll / static_cast<double>(n);
    if (!std::isfinite(value)) {
        throw NumericError("non-finite loss");
    }
    return value;
}

double Model::loss_and_grads(const MlmBatch& batch, std::vector<Eigen::MatrixXd>& grads,
                             Rng* dropout_rng) const {
    check_batch(config_, batch);
    grads.resize(params_.size());
    for (std::size_t p = 0; p < params_.size(); ++p) {
        grads[p] = Eigen::MatrixXd::Zero(params_[p].value.rows(), params_[p].value.cols());
    }
    const std::size_t n_total = batch.total_labels();
    if (n_total == 0) {
        return 0.0;
    }
    const auto H = static_cast<Eigen::Index>(config_.hidden_dim);
    const std::size_t heads = config_.num_heads;
    const Eigen::Index dh = H / static_cast<Eigen::Index>(heads);
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
    const std::size_t tb = tail_base(config_);
    const double inv_n = 1.0 / static_cast<double>(n_total);
    double nll = 0.0;

    for (std::size_t i = 0; i < batch.ids.size(); ++i) {
        if (batch.label_pos[i].empty()) {
            continue;
        }
        const auto& ids = batch.ids[i];
        const auto& mask = batch.mask[i];
        const auto& lpos = batch.label_pos[i];
        const auto T = static_cast<Eigen::Index>(ids.size());

        SeqCache cache;
        const Eigen::MatrixXd hidden =
            run_trunk(config_, params_, ids, mask, &cache, nullptr, dropout_rng);
        Eigen::MatrixXd rows(lpos.size(), config_.hidden_dim);
        for (std::size_t j = 0; j < lpos.size(); ++j) {
            rows.row(static_cast<Eigen::Index>(j)) =
                hidden.row(static_cast<Eigen::Index>(lpos[j]));
        }
        const Eigen::MatrixXd logits = run_head(config_, params_, rows, &cache);
        nll += softmax_nll(logits, batch.labels[i], &cache.probs);

        // Head backward: d(mean nll)/dlogits = (probs - onehot) / n_total.
        Eigen::MatrixXd dlogits = cache.probs * inv_n;
        for (std::size_t j = 0; j < lpos.size(); ++j) {
            dlogits(static_cast<Eigen::Index>(j),
                    static_cast<Eigen::Index>(batch.labels[i][j])) -= inv_n;
        }
        grads[tb + oMlmW2] += cache.n3.transpose() * dlogits;
        grads[tb + oMlmB2].row(0).array() += dlogits.array().colwise().sum();
        const Eigen::MatrixXd dn3 = dlogits * params_[tb + oMlmW2].value.transpose();
        const Eigen::MatrixXd dact = ln_backward(dn3, cache.ln_head,
                                                 params_[tb + oMlmLnG].value,
                                                 grads[tb + oMlmLnG], grads[tb + oMlmLnB]);
        const Eigen::MatrixXd dt1 =
            dact.cwiseProduct(cache.t1.unaryExpr([](double u) { return gelu_grad(u); }));
        grads[tb + oMlmW1] += cache.z.transpose() * dt1;
        grads[tb + oMlmB1].row(0).array() += dt1.array().colwise().sum();
        const Eigen::MatrixXd dz = dt1 * params_[tb + oMlmW1].value.transpose();

        Eigen::MatrixXd dhidden = Eigen::MatrixXd::Zero(T, H);
        for (std::size_t j = 0; j < lpos.size(); ++j) {
            dhidden.row(static_cast<Eigen::Index>(lpos[j])) +=
                dz.row(static_cast<Eigen::Index>(j));
        }
        Eigen::MatrixXd dx = ln_backward(dhidden, cache.ln_final,
                                         params_[tb + oFinalG].value, grads[tb + oFinalG],
                                         grads[tb + oFinalB]);

        for (std::size_t l = config_.num_layers; l-- > 0;) {
            const std::size_t b = layer_base(l);
            LayerCache& lc = cache.layers[l];

            // Feed-forward block.
            Eigen::MatrixXd dff = dx;
            if (lc.ff_drop.size() != 0) {
                dff = dff.cwiseProduct(lc.ff_drop);
            }
            grads[b + oW2] += lc.ff_act.transpose() * dff;
            grads[b + oB2].row(0).array() += dff.array().colwise().sum();
            const Eigen::MatrixXd dff_act = dff * params_[b + oW2].value.transpose();
            const Eigen::MatrixXd dff_pre = dff_act.cwiseProduct(
                lc.ff_pre.unaryExpr([](double u) { return gelu_grad(u); }));
            grads[b + oW1] += lc.n2.transpose() * dff_pre;
            grads[b + oB1].row(0).array() += dff_pre.array().colwise().sum();
            const Eigen::MatrixXd dn2 = dff_pre * params_[b + oW1].value.transpose();
            dx += ln_backward(dn2, lc.ln2, params_[b + oLn2G].value, grads[b + oLn2G],
                              grads[b + oLn2B]);

            // Attention block.
            Eigen::MatrixXd dattn = dx;
            if (lc.attn_drop.size() != 0) {
                dattn = dattn.cwiseProduct(lc.attn_drop);
            }
            grads[b + oWo] += lc.concat.transpose() * dattn;
            grads[b + oBo].row(0).array() += dattn.array().colwise().sum();
            const Eigen::MatrixXd dconcat = dattn * params_[b + oWo].value.transpose();
            Eigen::MatrixXd dq(T, H), dk(T, H), dv(T, H);
            for (std::size_t hd = 0; hd < heads; ++hd) {
                const auto off = static_cast<Eigen::Index>(hd) * dh;
                const Eigen::MatrixXd& p = lc.probs[hd];
                const Eigen::MatrixXd doh = dconcat.middleCols(off, dh);
                const Eigen::MatrixXd dp = doh * lc.v.middleCols(off, dh).transpose();
                dv.middleCols(off, dh) = p.transpose() * doh;
                Eigen::MatrixXd ds(T, T);
                for (Eigen::Index r = 0; r < T; ++r) {
                    const double dot = dp.row(r).dot(p.row(r));
                    ds.row(r) = p.row(r).array() * (dp.row(r).array() - dot);
                }
                dq.middleCols(off, dh) = ds * lc.k.middleCols(off, dh) * scale;
                dk.middleCols(off, dh) = ds.transpose() * lc.q.middleCols(off, dh) * scale;
            }
            grads[b + oWq] += lc.n1.transpose() * dq;
            grads[b + oBq].row(0).array() += dq.array().colwise().sum();
            grads[b + oWk] += lc.n1.transpose() * dk;
            grads[b + oBk].row(0).array() += dk.array().colwise().sum();
            grads[b + oWv] += lc.n1.transpose() * dv;
            grads[b + oBv].row(0).array() += dv.array().colwise().sum();
            const Eigen::MatrixXd dn1 = dq * params_[b + oWq].value.transpose() +
                                        dk * params_[b + oWk].value.transpose() +
                                        dv * params_[b + oWv].value.transpose();
            dx += ln_backward(dn1, lc.ln1, params_[b + oLn1G].value, grads[b + oLn1G],
                              grads[b + oLn1B]);
        }

        if (cache.emb_drop.size() != 0) {
            dx = dx.cwiseProduct(cache.emb_drop);
        }
        for (Eigen::Index t = 0; t < T; ++t) {
            grads[kTokEmb].row(static_cast<Eigen::Index>(ids[static_cast<std::size_t>(t)])) +=
                dx.row(t);
            grads[kPosEmb].row(t) += dx.row(t);
        }
    }
    const double value = nll / static_cast<double>(n_total);
    if (!std::isfinite(value)) {
        throw NumericError("non-finite loss");
    }
    return value;
}

} // namespace nepembed
