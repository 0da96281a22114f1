#include "nepembed/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "nepembed/errors.hpp"

namespace nepembed {

namespace {

// Accumulates "<location>: <message>" entries so a bad document reports every
// problem in one pass.
struct Collector {
    std::vector<std::string>& errors;

    void add(const std::string& location, const std::string& message) {
        errors.push_back(location + ": " + message);
    }
};

void reject_unknown_keys(const nlohmann::json& obj, const std::string& prefix,
                         const std::set<std::string>& known, Collector& out) {
    for (const auto& [key, value] : obj.items()) {
        if (!known.contains(key)) {
            out.add(prefix.empty() ? key : prefix + "." + key, "unknown field");
        }
    }
}

std::uint64_t get_u64(const nlohmann::json& obj, const std::string& prefix,
                      const std::string& key, std::uint64_t fallback, Collector& out) {
    if (!obj.contains(key)) {
        return fallback;
    }
    const auto& v = obj.at(key);
    // Accept any integral JSON value >= 0; the unsigned/signed storage tag is a
    // parser detail, not part of the document contract.
    if (v.is_number_unsigned()) {
        return v.get<std::uint64_t>();
    }
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
        return static_cast<std::uint64_t>(v.get<std::int64_t>());
    }
    out.add(prefix + key, "expected a non-negative integer");
    return fallback;
}

double get_double(const nlohmann::json& obj, const std::string& prefix, const std::string& key,
                  double fallback, Collector& out) {
    if (!obj.contains(key)) {
        return fallback;
    }
    const auto& v = obj.at(key);
    if (!v.is_number()) {
        out.add(prefix + key, "expected a number");
        return fallback;
    }
    return v.get<double>();
}

std::string get_string(const nlohmann::json& obj, const std::string& prefix,
                       const std::string& key, std::string fallback, Collector& out) {
    if (!obj.contains(key)) {
        return fallback;
    }
    const auto& v = obj.at(key);
    if (!v.is_string()) {
        out.add(prefix + key, "expected a string");
        return fallback;
    }
    return v.get<std::string>();
}

// An empty value means "not configured"; a non-empty one must point at an
// existing file or directory.
std::filesystem::path get_input_path(const nlohmann::json& obj, const std::string& prefix,
                                     const std::string& key, Collector& out) {
    const std::string raw = get_string(obj, prefix, key, "", out);
    if (raw.empty()) {
        return {};
    }
    const std::filesystem::path p(raw);
    if (!std::filesystem::exists(p)) {
        out.add(prefix + key, "no such path: " + raw);
    }
    return p;
}

std::vector<std::filesystem::path> get_input_path_list(const nlohmann::json& obj,
                                                       const std::string& prefix,
                                                       const std::string& key, Collector& out) {
    std::vector<std::filesystem::path> result;
    if (!obj.contains(key)) {
        return result;
    }
    const auto& v = obj.at(key);
    if (!v.is_array()) {
        out.add(prefix + key, "expected an array of paths");
        return result;
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
        const std::string loc = prefix + key + "[" + std::to_string(i) + "]";
        if (!v.at(i).is_string()) {
            out.add(loc, "expected a string");
            continue;
        }
        const std::string raw = v.at(i).get<std::string>();
        if (raw.empty()) {
            out.add(loc, "empty path");
            continue;
        }
        const std::filesystem::path p(raw);
        if (!std::filesystem::exists(p)) {
            out.add(loc, "no such path: " + raw);
        }
        result.push_back(p);
    }
    return result;
}

} // namespace

std::filesystem::path default_output_dir() {
    if (const char* env = std::getenv("NEPEMBED_OUT"); env != nullptr && *env != '\0') {
        return env;
    }
    return "out";
}

ConfigResult validate_config_json(const nlohmann::json& doc) {
    ConfigResult result;
    result.config.output_dir = default_output_dir();
    Collector out{result.errors};
    if (!doc.is_object()) {
        out.add("config", "expected a JSON object");
        return result;
    }
    reject_unknown_keys(doc, "", {"seed", "output_dir", "paths", "model", "train"}, out);

    RunConfig& cfg = result.config;
    cfg.seed = get_u64(doc, "", "seed", 0, out);
    const std::string out_dir = get_string(doc, "", "output_dir", "", out);
    if (!out_dir.empty()) {
        cfg.output_dir = out_dir;
    }

    if (doc.contains("paths")) {
        const auto& paths = doc.at("paths");
        if (!paths.is_object()) {
            out.add("paths", "expected an object");
        } else {
            reject_unknown_keys(paths, "paths",
                                {"corpus_dirs", "hindi_lexicon", "normalization_map",
                                 "suffix_table", "vocab", "checkpoint", "intrinsic_sets",
                                 "classification_train", "classification_test"},
                                out);
            cfg.corpus_dirs = get_input_path_list(paths, "paths.", "corpus_dirs", out);
            cfg.hindi_lexicon = get_input_path(paths, "paths.", "hindi_lexicon", out);
            cfg.normalization_map = get_input_path(paths, "paths.", "normalization_map", out);
            cfg.suffix_table = get_input_path(paths, "paths.", "suffix_table", out);
            cfg.vocab_file = get_input_path(paths, "paths.", "vocab", out);
            cfg.checkpoint_file = get_input_path(paths, "paths.", "checkpoint", out);
            cfg.intrinsic_sets = get_input_path_list(paths, "paths.", "intrinsic_sets", out);
            cfg.classification_train = get_input_path(paths, "paths.", "classification_train", out);
            cfg.classification_test = get_input_path(paths, "paths.", "classification_test", out);
        }
    }

    std::size_t vocab_size = 16000;
    std::size_t max_len = 128;
    double dropout = 0.0;
    if (doc.contains("model")) {
        const auto& model = doc.at("model");
        if (!model.is_object()) {
            out.add("model", "expected an object");
        } else {
            reject_unknown_keys(model, "model",
                                {"preset", "vocab_size", "max_len", "dropout", "num_layers",
                                 "num_heads", "hidden_dim", "ff_dim"},
                                out);
            cfg.preset = get_string(model, "model.", "preset", "small", out);
            vocab_size = get_u64(model, "model.", "vocab_size", vocab_size, out);
            max_len = get_u64(model, "model.", "max_len", max_len, out);
            dropout = get_double(model, "model.", "dropout", dropout, out);
            if (cfg.preset != "custom") {
                for (const char* key : {"num_layers", "num_heads", "hidden_dim", "ff_dim"}) {
                    if (model.contains(key)) {
                        out.add(std::string("model.") + key,
                                "only valid with preset \"custom\"");
                    }
                }
            }
        }
    }
    if (cfg.preset == "small") {
        cfg.model = ModelConfig::small_preset(vocab_size, max_len);
    } else if (cfg.preset == "oracle") {
        cfg.model = ModelConfig::oracle_preset(vocab_size, max_len);
    } else if (cfg.preset == "custom") {
        cfg.model.vocab_size = vocab_size;
        cfg.model.max_len = max_len;
        const auto& model = doc.contains("model") && doc.at("model").is_object()
                                ? doc.at("model")
                                : nlohmann::json::object();
        cfg.model.num_layers = get_u64(model, "model.", "num_layers", 0, out);
        cfg.model.num_heads = get_u64(model, "model.", "num_heads", 0, out);
        cfg.model.hidden_dim = get_u64(model, "model.", "hidden_dim", 0, out);
        cfg.model.ff_dim = get_u64(model, "model.", "ff_dim", 0, out);
    } else {
        out.add("model.preset", "expected \"small\", \"oracle\", or \"custom\"");
        cfg.model = ModelConfig::small_preset(vocab_size, max_len);
    }
    cfg.model.dropout = dropout;
    try {
        cfg.model.validate();
    } catch (const std::exception& e) {
        out.add("model", e.what());
    }

    if (doc.contains("train")) {
        const auto& train = doc.at("train");
        if (!train.is_object()) {
            out.add("train", "expected an object");
        } else {
            reject_unknown_keys(train, "train",
                                {"mask_prob", "epochs", "batch_size", "learning_rate"}, out);
            cfg.train.mask_prob = get_double(train, "train.", "mask_prob", 0.15, out);
            cfg.train.epochs = get_u64(train, "train.", "epochs", 60, out);
            cfg.train.batch_size = get_u64(train, "train.", "batch_size", 16, out);
            cfg.train.learning_rate = get_double(train, "train.", "learning_rate", 5e-5, out);
        }
    }
    cfg.train.seed = cfg.seed;
    if (!(cfg.train.mask_prob > 0.0 && cfg.train.mask_prob < 1.0)) {
        out.add("train.mask_prob", "must be strictly between 0 and 1");
    }
    if (cfg.train.batch_size == 0) {
        out.add("train.batch_size", "must be at least 1");
    }
    if (!(cfg.train.learning_rate > 0.0)) {
        out.add("train.learning_rate", "must be positive");
    }
    return result;
}

ConfigResult validate_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        ConfigResult result;
        result.config.output_dir = default_output_dir();
        result.errors.push_back("config: cannot read " + path.string());
        return result;
    }
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        ConfigResult result;
        result.config.output_dir = default_output_dir();
        result.errors.push_back("config: " + path.string() + " is not valid JSON: " + e.what());
        return result;
    }
    return validate_config_json(doc);
}

RunConfig load_config(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) {
        throw UsageError("cannot read config file: " + path.string());
    }
    ConfigResult result = validate_config(path);
    if (!result.ok()) {
        std::string joined = "invalid config " + path.string() + ":";
        for (const auto& e : result.errors) {
            joined += "\n  " + e;
        }
        throw DataError(joined);
    }
    return result.config;
}

nlohmann::json run_config_to_json(const RunConfig& config) {
    nlohmann::json paths;
    nlohmann::json corpus_dirs = nlohmann::json::array();
    for (const auto& p : config.corpus_dirs) {
        corpus_dirs.push_back(p.generic_string());
    }
    nlohmann::json intrinsic = nlohmann::json::array();
    for (const auto& p : config.intrinsic_sets) {
        intrinsic.push_back(p.generic_string());
    }
    paths["corpus_dirs"] = corpus_dirs;
    paths["hindi_lexicon"] = config.hindi_lexicon.generic_string();
    paths["normalization_map"] = config.normalization_map.generic_string();
    paths["suffix_table"] = config.suffix_table.generic_string();
    paths["vocab"] = config.vocab_file.generic_string();
    paths["checkpoint"] = config.checkpoint_file.generic_string();
    paths["intrinsic_sets"] = intrinsic;
    paths["classification_train"] = config.classification_train.generic_string();
    paths["classification_test"] = config.classification_test.generic_string();

    nlohmann::json model;
    model["preset"] = config.preset;
    model["vocab_size"] = config.model.vocab_size;
    model["max_len"] = config.model.max_len;
    model["dropout"] = config.model.dropout;
    if (config.preset == "custom") {
        model["num_layers"] = config.model.num_layers;
        model["num_heads"] = config.model.num_heads;
        model["hidden_dim"] = config.model.hidden_dim;
        model["ff_dim"] = config.model.ff_dim;
    }

    nlohmann::json train;
    train["mask_prob"] = config.train.mask_prob;
    train["epochs"] = config.train.epochs;
    train["batch_size"] = config.train.batch_size;
    train["learning_rate"] = config.train.learning_rate;

    return {{"seed", config.seed},
            {"output_dir", config.output_dir.generic_string()},
            {"paths", paths},
            {"model", model},
            {"train", train}};
}

void write_config_echo(const RunConfig& config) {
    std::filesystem::create_directories(config.output_dir);
    const std::filesystem::path path = config.output_dir / "config.json";
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    out << run_config_to_json(config).dump(2) << "\n";
    if (!out) {
        throw DataError("short write to " + path.string());
    }
}

} // namespace nepembed
