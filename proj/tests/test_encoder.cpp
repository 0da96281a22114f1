#include <doctest.h>

#include <nepembed/checkpoint.hpp>
#include <nepembed/errors.hpp>
#include <nepembed/model.hpp>
#include <nepembed/rng.hpp>
#include <nepembed/train.hpp>

#include "test_support.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

using namespace nepembed;
using testsupport::TempDir;

namespace {

ModelConfig tiny_config() {
    ModelConfig cfg;
    cfg.num_layers = 2;
    cfg.num_heads = 2;
    cfg.hidden_dim = 8;
    cfg.ff_dim = 16;
    cfg.vocab_size = 20;
    cfg.max_len = 12;
    return cfg;
}

MlmBatch hand_batch() {
    MlmBatch batch;
    batch.ids = {{2, 6, 7, 8, 3}};
    batch.mask = {{1, 1, 1, 1, 1}};
    batch.label_pos = {{1, 3}};
    batch.labels = {{9, 10}};
    return batch;
}

bool mat_eq(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

bool params_equal(const Model& a, const Model& b) {
    if (a.params().size() != b.params().size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.params().size(); ++i) {
        if (a.params()[i].name != b.params()[i].name ||
            !mat_eq(a.params()[i].value, b.params()[i].value)) {
            return false;
        }
    }
    return true;
}

} // namespace

TEST_CASE("presets carry the published shapes") {
    const ModelConfig small = ModelConfig::small_preset(16000, 128);
    CHECK(small.num_layers == 6);
    CHECK(small.num_heads == 6);
    CHECK(small.hidden_dim == 300);
    CHECK(small.ff_dim == 1200);
    CHECK(small.vocab_size == 16000);
    CHECK(small.max_len == 128);
    CHECK_NOTHROW(small.validate());

    const ModelConfig oracle = ModelConfig::oracle_preset(16000, 128);
    CHECK(oracle.num_layers == 12);
    CHECK(oracle.num_heads == 12);
    CHECK(oracle.hidden_dim == 768);
    CHECK(oracle.ff_dim == 3072);
    CHECK_NOTHROW(oracle.validate());
}

TEST_CASE("config validation rejects impossible shapes") {
    ModelConfig cfg = tiny_config();
    CHECK_NOTHROW(cfg.validate());

    cfg.num_heads = 3; // 8 % 3 != 0
    CHECK_THROWS_AS(cfg.validate(), UsageError);

    cfg = tiny_config();
    cfg.hidden_dim = 0;
    CHECK_THROWS_AS(cfg.validate(), UsageError);

    cfg = tiny_config();
    cfg.dropout = 1.0;
    CHECK_THROWS_AS(cfg.validate(), UsageError);
    cfg.dropout = -0.1;
    CHECK_THROWS_AS(cfg.validate(), UsageError);
}

TEST_CASE("config survives its JSON round-trip") {
    ModelConfig cfg = tiny_config();
    cfg.dropout = 0.1;
    CHECK(config_from_json(config_to_json(cfg)) == cfg);
}

TEST_CASE("the tensor registry lists every parameter with its shape, in order") {
    const ModelConfig cfg = tiny_config();
    const auto shapes = expected_tensor_shapes(cfg);

    // 2 embeddings + 16 per layer + 2 final norm + 6 head tensors.
    REQUIRE(shapes.size() == 2 + 16 * cfg.num_layers + 2 + 6);
    CHECK(shapes[0].name == "tok_emb");
    CHECK(shapes[0].rows == 20);
    CHECK(shapes[0].cols == 8);
    CHECK(shapes[1].name == "pos_emb");
    CHECK(shapes[1].rows == 12);

    const auto& w1 = shapes[2 + 16 + 12]; // layer1.ff.w1
    CHECK(w1.name == "layer1.ff.w1");
    CHECK(w1.rows == 8);
    CHECK(w1.cols == 16);

    CHECK(shapes.back().name == "mlm.b2");
    CHECK(shapes.back().rows == 1);
    CHECK(shapes.back().cols == 20);

    const Model m = Model::init(cfg, 1);
    REQUIRE(m.params().size() == shapes.size());
    std::size_t scalars = 0;
    for (std::size_t i = 0; i < shapes.size(); ++i) {
        CHECK(m.params()[i].name == shapes[i].name);
        CHECK(m.params()[i].value.rows() == static_cast<Eigen::Index>(shapes[i].rows));
        CHECK(m.params()[i].value.cols() == static_cast<Eigen::Index>(shapes[i].cols));
        scalars += shapes[i].rows * shapes[i].cols;
    }
    CHECK(m.num_scalars() == scalars);
}

TEST_CASE("seeded initialization is deterministic with the documented fill rules") {
    const ModelConfig cfg = tiny_config();
    const Model a = Model::init(cfg, 42);
    const Model b = Model::init(cfg, 42);
    const Model c = Model::init(cfg, 43);
    CHECK(params_equal(a, b));
    CHECK(!params_equal(a, c));

    CHECK(a.param("layer0.ln1.g").isOnes());
    CHECK(a.param("final_ln.g").isOnes());
    CHECK(a.param("layer0.attn.bq").isZero());
    CHECK(a.param("mlm.b2").isZero());
    CHECK(!a.param("tok_emb").isZero());

    // Weight draws follow N(0, 0.02): check the sample std on a big tensor.
    ModelConfig wide = cfg;
    wide.vocab_size = 2000;
    const Eigen::MatrixXd& emb = Model::init(wide, 7).param("tok_emb");
    const double mean = emb.mean();
    const double sd = std::sqrt((emb.array() - mean).square().mean());
    CHECK(std::abs(mean) < 0.001);
    CHECK(sd > 0.0195);
    CHECK(sd < 0.0205);
}

TEST_CASE("attention is row-stochastic over unmasked keys") {
    const Model m = Model::init(tiny_config(), 5);
    const std::vector<std::uint32_t> ids = {2, 6, 7, 8, 3, 0, 0};
    const std::vector<std::uint8_t> mask = {1, 1, 1, 1, 1, 0, 0};

    ForwardOptions opts;
    opts.want_attention = true;
    const SeqForward f = m.forward(ids, mask, opts);

    REQUIRE(f.attention.size() == 2);
    for (const auto& layer : f.attention) {
        REQUIRE(layer.size() == 2);
        for (const auto& head : layer) {
            REQUIRE(head.rows() == 7);
            REQUIRE(head.cols() == 7);
            for (Eigen::Index i = 0; i < head.rows(); ++i) {
                CHECK(head.row(i).sum() == doctest::Approx(1.0).epsilon(1e-9));
                for (Eigen::Index j = 0; j < head.cols(); ++j) {
                    CHECK(head(i, j) >= 0.0);
                    if (mask[static_cast<std::size_t>(j)] == 0) {
                        CHECK(head(i, j) == 0.0);
                    }
                }
            }
        }
    }
}

TEST_CASE("padding never leaks into real positions") {
    const Model m = Model::init(tiny_config(), 9);
    const std::vector<std::uint32_t> real_ids = {2, 6, 7, 8, 3};
    const std::vector<std::uint8_t> real_mask = {1, 1, 1, 1, 1};
    std::vector<std::uint32_t> padded_ids = real_ids;
    std::vector<std::uint8_t> padded_mask = real_mask;
    padded_ids.insert(padded_ids.end(), {0, 0, 0});
    padded_mask.insert(padded_mask.end(), {0, 0, 0});

    const SeqForward a = m.forward(real_ids, real_mask);
    const SeqForward b = m.forward(padded_ids, padded_mask);

    // Bit-exact: masked keys are excluded from the softmax, not down-weighted.
    CHECK(mat_eq(a.hidden, b.hidden.topRows(a.hidden.rows())));
    CHECK(mat_eq(a.logits, b.logits.topRows(a.logits.rows())));
}

TEST_CASE("forward validates its inputs") {
    const Model m = Model::init(tiny_config(), 1);
    const std::vector<std::uint8_t> ones3 = {1, 1, 1};
    CHECK_THROWS_AS(m.forward(std::vector<std::uint32_t>{}, std::vector<std::uint8_t>{}),
                    DataError);
    CHECK_THROWS_AS(m.forward(std::vector<std::uint32_t>{2, 3}, ones3), DataError); // length skew
    CHECK_THROWS_AS(m.forward(std::vector<std::uint32_t>{2, 99, 3}, ones3), DataError);
    CHECK_THROWS_AS(m.forward(std::vector<std::uint32_t>{2, 6, 3}, std::vector<std::uint8_t>{0, 0, 0}),
                    DataError);
    const std::vector<std::uint32_t> toolong(13, 6);
    CHECK_THROWS_AS(m.forward(toolong, std::vector<std::uint8_t>(13, 1)), DataError);
}

TEST_CASE("a zero-valued model scores every token uniformly") {
    const ModelConfig cfg = tiny_config();
    const Model zero(cfg);
    CHECK(zero.loss(hand_batch()) == doctest::Approx(std::log(20.0)).epsilon(1e-12));

    // Checkpoint form: perplexity equals the vocabulary size.
    const Checkpoint ckpt = checkpoint_from_model(zero);
    std::vector<Encoded> heldout;
    Encoded e;
    e.ids = {2, 6, 7, 8, 9, 10, 11, 3};
    e.mask.assign(8, 1);
    e.real_len = 8;
    heldout.assign(6, e);
    const double ppl = perplexity(ckpt, heldout, 0.5, 11);
    CHECK(ppl == doctest::Approx(20.0).epsilon(0.01));
}

TEST_CASE("a randomly initialized model starts near the uniform loss") {
    ModelConfig cfg = tiny_config();
    cfg.vocab_size = 16000;
    const Model m = Model::init(cfg, 2);
    MlmBatch batch = hand_batch();
    batch.labels = {{900, 1500}};
    const double loss = m.loss(batch);
    CHECK(loss > 0.9 * std::log(16000.0));
    CHECK(loss < 1.1 * std::log(16000.0));
}

TEST_CASE("loss over zero label positions is zero") {
    const Model m = Model::init(tiny_config(), 3);
    MlmBatch batch = hand_batch();
    batch.label_pos = {{}};
    batch.labels = {{}};
    CHECK(m.loss(batch) == 0.0);
}

TEST_CASE("gelu matches its analytic derivative") {
    CHECK(gelu(0.0) == 0.0);
    CHECK(gelu(10.0) == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(std::abs(gelu(-10.0)) < 1e-12);

    for (const double x : {-2.5, -1.0, -0.3, 0.0, 0.7, 1.9, 3.2}) {
        const double h = 1e-6;
        const double numeric = (gelu(x + h) - gelu(x - h)) / (2 * h);
        CHECK(gelu_grad(x) == doctest::Approx(numeric).epsilon(1e-6));
    }
}

TEST_CASE("analytic gradients agree with central differences") {
    ModelConfig cfg;
    cfg.num_layers = 1;
    cfg.num_heads = 2;
    cfg.hidden_dim = 4;
    cfg.ff_dim = 8;
    cfg.vocab_size = 12;
    cfg.max_len = 6;

    Model m = Model::init(cfg, 123);
    MlmBatch batch;
    batch.ids = {{2, 6, 7, 8, 3}, {2, 9, 10, 3, 0}};
    batch.mask = {{1, 1, 1, 1, 1}, {1, 1, 1, 1, 0}};
    batch.label_pos = {{1, 3}, {2}};
    batch.labels = {{9, 10}, {6}};

    std::vector<Eigen::MatrixXd> grads;
    m.loss_and_grads(batch, grads);
    REQUIRE(grads.size() == m.params().size());

    const double h = 1e-5;
    for (std::size_t p = 0; p < m.params().size(); ++p) {
        Eigen::MatrixXd& value = m.params()[p].value;
        const Eigen::Index n = value.size();
        // First, middle and last coordinate of every tensor.
        for (const Eigen::Index flat : {Eigen::Index{0}, n / 2, n - 1}) {
            const double saved = value(flat);
            value(flat) = saved + h;
            const double up = m.loss(batch);
            value(flat) = saved - h;
            const double down = m.loss(batch);
            value(flat) = saved;

            const double numeric = (up - down) / (2 * h);
            const double analytic = grads[p](flat);
            const double rel =
                std::abs(numeric - analytic) / std::max(1.0, std::abs(numeric) + std::abs(analytic));
            INFO("tensor ", m.params()[p].name, " flat index ", flat);
            CHECK(rel < 1e-4);
        }
    }
}

TEST_CASE("mlm_corrupt is deterministic per seed and never touches specials") {
    const std::vector<std::uint32_t> ids = {2, 6, 7, 8, 9, 10, 3};
    const Corruption a = mlm_corrupt(ids, 20, 0.5, 77);
    const Corruption b = mlm_corrupt(ids, 20, 0.5, 77);
    CHECK(a.ids == b.ids);
    CHECK(a.label_pos == b.label_pos);
    CHECK(a.labels == b.labels);

    const Corruption c = mlm_corrupt(ids, 20, 0.5, 78);
    CHECK((a.ids != c.ids || a.label_pos != c.label_pos)); // seed matters

    for (int seed = 0; seed < 200; ++seed) {
        const Corruption r = mlm_corrupt(ids, 20, 0.9, static_cast<std::uint64_t>(seed));
        CHECK(r.ids.front() == 2);
        CHECK(r.ids.back() == 3);
        for (const std::size_t pos : r.label_pos) {
            CHECK(pos >= 1);
            CHECK(pos <= 5);
        }
        for (std::size_t i = 0; i < r.label_pos.size(); ++i) {
            CHECK(r.labels[i] == ids[r.label_pos[i]]);
        }
    }

    // All-special input degenerates to the identity.
    const std::vector<std::uint32_t> specials_only = {2, 3, 0, 0};
    const Corruption none = mlm_corrupt(specials_only, 20, 0.9, 1);
    CHECK(none.ids == specials_only);
    CHECK(none.label_pos.empty());

    CHECK_THROWS_AS(mlm_corrupt(ids, 20, 1.0, 0), UsageError);
    CHECK_THROWS_AS(mlm_corrupt(ids, 20, -0.1, 0), UsageError);
}

TEST_CASE("mlm_corrupt hits the documented selection and 80/10/10 rates") {
    std::vector<std::uint32_t> ids(102);
    ids[0] = 2;
    ids[101] = 3;
    for (std::size_t i = 1; i <= 100; ++i) {
        ids[i] = static_cast<std::uint32_t>(5 + (i % 995));
    }

    std::uint64_t selected = 0;
    std::uint64_t masked = 0;
    std::uint64_t replaced = 0;
    std::uint64_t kept = 0;
    const int trials = 1000;
    for (int t = 0; t < trials; ++t) {
        const Corruption c = mlm_corrupt(ids, 1000, 0.15, static_cast<std::uint64_t>(t));
        selected += c.label_pos.size();
        for (std::size_t i = 0; i < c.label_pos.size(); ++i) {
            const std::uint32_t now = c.ids[c.label_pos[i]];
            if (now == 4) {
                ++masked;
            } else if (now == c.labels[i]) {
                ++kept;
            } else {
                ++replaced;
            }
        }
    }

    const double sel_rate = static_cast<double>(selected) / (100.0 * trials);
    CHECK(sel_rate == doctest::Approx(0.15).epsilon(0.07)); // +-0.01 absolute
    const double denom = static_cast<double>(selected);
    CHECK(static_cast<double>(masked) / denom == doctest::Approx(0.8).epsilon(0.025));
    CHECK(static_cast<double>(replaced) / denom == doctest::Approx(0.1).epsilon(0.11));
    CHECK(static_cast<double>(kept) / denom == doctest::Approx(0.1).epsilon(0.11));
}

TEST_CASE("checkpoints round-trip models and bytes exactly") {
    const ModelConfig cfg = tiny_config();
    const Model m = Model::init(cfg, 2024);
    const Checkpoint ckpt = checkpoint_from_model(m, 17);
    CHECK(ckpt.step == 17);
    CHECK(ckpt.format_version == kCheckpointFormatVersion);

    const Model back = model_from_checkpoint(ckpt);
    CHECK(back.config() == cfg);
    // Weights pass through float32, so compare after the same truncation.
    for (std::size_t i = 0; i < m.params().size(); ++i) {
        const auto& orig = m.params()[i].value;
        const auto& rt = back.params()[i].value;
        REQUIRE(orig.rows() == rt.rows());
        for (Eigen::Index k = 0; k < orig.size(); ++k) {
            CHECK(static_cast<double>(static_cast<float>(orig(k))) == rt(k));
        }
    }

    TempDir dir("ckpt_io");
    save_checkpoint(ckpt, dir / "m.nepc");
    const Checkpoint loaded = load_checkpoint(dir / "m.nepc");
    CHECK(loaded == ckpt);

    // Byte determinism: saving the loaded copy reproduces the file.
    save_checkpoint(loaded, dir / "m2.nepc");
    CHECK(testsupport::read_file(dir / "m.nepc") == testsupport::read_file(dir / "m2.nepc"));

    // init_checkpoint is exactly the checkpoint of a seeded init at step 0.
    const Checkpoint init = init_checkpoint(cfg, 5);
    CHECK(init.step == 0);
    CHECK(init == checkpoint_from_model(Model::init(cfg, 5), 0));
}

TEST_CASE("checkpoint loading rejects corrupt containers") {
    const ModelConfig cfg = tiny_config();
    TempDir dir("ckpt_bad");
    save_checkpoint(init_checkpoint(cfg, 3), dir / "good.nepc");

    const std::string bytes = testsupport::read_file(dir / "good.nepc");

    testsupport::write_file(dir / "trunc.nepc", bytes.substr(0, bytes.size() / 2));
    CHECK_THROWS_AS(load_checkpoint(dir / "trunc.nepc"), DataError);

    std::string magic = bytes;
    magic[0] = 'X';
    testsupport::write_file(dir / "magic.nepc", magic);
    CHECK_THROWS_AS(load_checkpoint(dir / "magic.nepc"), DataError);

    CHECK_THROWS_AS(load_checkpoint(dir / "absent.nepc"), DataError);
}

TEST_CASE("model reconstruction validates tensor names and shapes") {
    const ModelConfig cfg = tiny_config();
    Checkpoint reshaped = init_checkpoint(cfg, 4);
    // Transposing the stored shape keeps the payload length but breaks the
    // registry contract; the error names the tensor.
    for (auto& t : reshaped.weights) {
        if (t.name == "layer0.ff.w1") {
            std::swap(t.rows, t.cols);
        }
    }
    CHECK_THROWS_WITH_AS(model_from_checkpoint(reshaped), doctest::Contains("layer0.ff.w1"),
                         DataError);

    Checkpoint renamed = init_checkpoint(cfg, 4);
    renamed.weights[0].name = "word_emb";
    CHECK_THROWS_AS(model_from_checkpoint(renamed), DataError);

    Checkpoint missing = init_checkpoint(cfg, 4);
    missing.weights.pop_back();
    CHECK_THROWS_AS(model_from_checkpoint(missing), DataError);
}

TEST_CASE("training steps are deterministic and resumable mid-run") {
    const ModelConfig cfg = tiny_config();
    TrainSpec spec;
    spec.mask_prob = 0.3;
    spec.epochs = 1;
    spec.batch_size = 2;
    spec.learning_rate = 1e-3;
    spec.seed = 99;

    std::vector<Encoded> seqs;
    for (std::uint32_t base = 6; base < 12; ++base) {
        Encoded e;
        e.ids = {2, base, base + 1, base + 2, 3, 0};
        e.mask = {1, 1, 1, 1, 1, 0};
        e.real_len = 5;
        seqs.push_back(e);
    }
    const Checkpoint start = init_checkpoint(cfg, 7);

    SUBCASE("same seed, same steps, same checkpoint") {
        Trainer a(start, spec);
        Trainer b(start, spec);
        for (int s = 0; s < 4; ++s) {
            CHECK(a.train_step(seqs) == b.train_step(seqs));
        }
        CHECK(a.to_checkpoint() == b.to_checkpoint());
    }

    SUBCASE("resume after a checkpoint matches an uninterrupted run") {
        Trainer straight(start, spec);
        for (int s = 0; s < 4; ++s) {
            straight.train_step(seqs);
        }

        Trainer first_half(start, spec);
        first_half.train_step(seqs);
        first_half.train_step(seqs);
        const Checkpoint middle = first_half.to_checkpoint();
        CHECK(middle.step == 2);

        Trainer resumed(middle, spec);
        CHECK(resumed.step() == 2);
        resumed.train_step(seqs);
        resumed.train_step(seqs);

        // The stored weights pass through float32 at the checkpoint boundary,
        // so the resumed run tracks the straight one only to that precision.
        const Checkpoint sc = straight.to_checkpoint();
        const Checkpoint rc = resumed.to_checkpoint();
        CHECK(sc.step == rc.step);
        REQUIRE(sc.weights.size() == rc.weights.size());
        for (std::size_t i = 0; i < sc.weights.size(); ++i) {
            REQUIRE(sc.weights[i].data.size() == rc.weights[i].data.size());
            for (std::size_t k = 0; k < sc.weights[i].data.size(); ++k) {
                CHECK(sc.weights[i].data[k] ==
                      doctest::Approx(rc.weights[i].data[k]).epsilon(1e-6).scale(1.0));
            }
        }

        // Two resumptions from the same checkpoint are bit-identical.
        Trainer resumed2(middle, spec);
        resumed2.train_step(seqs);
        resumed2.train_step(seqs);
        CHECK(rc == resumed2.to_checkpoint());
    }

    SUBCASE("a batch with no eligible positions leaves the weights alone") {
        Trainer t(start, spec);
        Encoded empty;
        empty.ids = {2, 3};
        empty.mask = {1, 1};
        empty.real_len = 2;
        const std::vector<Encoded> batch = {empty};
        CHECK(t.train_step(batch) == 0.0);
        CHECK(t.step() == 1);
        Checkpoint after = t.to_checkpoint(false);
        after.step = 0;
        CHECK(after == start);
    }
}

TEST_CASE("finetune lowers the loss on a small repetitive corpus and logs NDJSON") {
    const ModelConfig cfg = tiny_config();
    TrainSpec spec;
    spec.mask_prob = 0.3;
    spec.epochs = 25;
    spec.batch_size = 4;
    spec.learning_rate = 2e-3;
    spec.seed = 5;

    std::vector<Encoded> seqs;
    for (int i = 0; i < 8; ++i) {
        Encoded e;
        e.ids = {2, 6, 7, 8, 9, 3};
        e.mask.assign(6, 1);
        e.real_len = 6;
        seqs.push_back(e);
    }

    std::ostringstream log;
    FinetuneOptions opts;
    opts.log = &log;
    opts.heldout = &seqs;
    const Checkpoint start = init_checkpoint(cfg, 21);
    const Checkpoint tuned = finetune(start, seqs, spec, opts);
    CHECK(tuned.step == 50); // 25 epochs x 2 batches

    std::istringstream lines(log.str());
    std::string line;
    double first_loss = -1.0;
    double last_loss = -1.0;
    std::size_t records = 0;
    while (std::getline(lines, line)) {
        const auto rec = nlohmann::json::parse(line);
        CHECK(rec.contains("epoch"));
        CHECK(rec.contains("step"));
        CHECK(rec.at("perplexity").get<double>() > 0.0);
        if (records == 0) {
            first_loss = rec.at("loss").get<double>();
        }
        last_loss = rec.at("loss").get<double>();
        ++records;
    }
    CHECK(records == 25);
    CHECK(last_loss < first_loss);

    // Held-out perplexity of the tuned model beats the fresh one.
    const double before = perplexity(start, seqs, 0.3, 5);
    const double after = perplexity(tuned, seqs, 0.3, 5);
    CHECK(after < before);
}

TEST_CASE("zero-epoch fine-tuning is the identity on the weights") {
    const Checkpoint start = init_checkpoint(tiny_config(), 8);
    TrainSpec spec;
    spec.epochs = 0;
    Encoded e;
    e.ids = {2, 6, 3};
    e.mask = {1, 1, 1};
    e.real_len = 3;
    const Checkpoint out = finetune(start, {e}, spec);
    CHECK(out.config == start.config);
    CHECK(out.step == start.step);
    CHECK(out.weights == start.weights);
}

TEST_CASE("fine-tuning and perplexity reject degenerate corpora") {
    const Checkpoint start = init_checkpoint(tiny_config(), 8);
    TrainSpec spec;
    CHECK_THROWS_AS(finetune(start, std::vector<Encoded>{}, spec), DataError);
    CHECK_THROWS_AS(perplexity(start, std::vector<Encoded>{}, 0.15, 0), DataError);

    Encoded bare;
    bare.ids = {2, 3};
    bare.mask = {1, 1};
    bare.real_len = 2;
    CHECK_THROWS_AS(perplexity(start, {bare}, 0.15, 0), DataError);

    TrainSpec bad = spec;
    bad.mask_prob = 0.0;
    CHECK_THROWS_AS(finetune(start, {bare}, bad), UsageError);
    bad = spec;
    bad.learning_rate = 0.0;
    CHECK_THROWS_AS(bad.validate(), UsageError);
    bad = spec;
    bad.batch_size = 0;
    CHECK_THROWS_AS(bad.validate(), UsageError);
}
