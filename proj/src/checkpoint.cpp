#include "nepembed/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "nepembed/errors.hpp"

namespace nepembed {

namespace {

constexpr char kMagic[4] = {'N', 'E', 'P', 'C'};

std::string shape_string(std::uint64_t rows, std::uint64_t cols) {
    return std::to_string(rows) + "x" + std::to_string(cols);
}

// Weight table must match the config-implied registry exactly; a non-empty
// optimizer table must hold adam.t plus m/v companions for every weight.
void validate_tables(const Checkpoint& ckpt) {
    const auto expected = expected_tensor_shapes(ckpt.config);
    if (ckpt.weights.size() != expected.size()) {
        throw DataError("checkpoint holds " + std::to_string(ckpt.weights.size()) +
                        " weight tensors, config implies " + std::to_string(expected.size()));
    }
    for (std::size_t i = 0; i < expected.size(); ++i) {
        const auto& got = ckpt.weights[i];
        const auto& want = expected[i];
        if (got.name != want.name) {
            throw DataError("weight tensor " + std::to_string(i) + " is named " + got.name +
                            ", expected " + want.name);
        }
        if (got.rows != want.rows || got.cols != want.cols) {
            throw DataError("tensor " + got.name + " has shape " +
                            shape_string(got.rows, got.cols) + ", config implies " +
                            shape_string(want.rows, want.cols));
        }
        if (got.data.size() != got.rows * got.cols) {
            throw DataError("tensor " + got.name + " payload does not match its shape");
        }
    }
    if (ckpt.optimizer_state.empty()) {
        return;
    }
    if (ckpt.optimizer_state.size() != 2 * expected.size() + 1) {
        throw DataError("optimizer state holds " + std::to_string(ckpt.optimizer_state.size()) +
                        " tensors, expected " + std::to_string(2 * expected.size() + 1));
    }
    const auto& t = ckpt.optimizer_state[0];
    if (t.name != "adam.t" || t.rows != 1 || t.cols != 1 || t.data.size() != 1) {
        throw DataError("optimizer state must start with the 1x1 tensor adam.t");
    }
    for (std::size_t i = 0; i < expected.size(); ++i) {
        for (std::size_t half = 0; half < 2; ++half) {
            const auto& got = ckpt.optimizer_state[1 + half * expected.size() + i];
            const std::string want_name =
                (half == 0 ? "adam_m." : "adam_v.") + expected[i].name;
            if (got.name != want_name) {
                throw DataError("optimizer tensor is named " + got.name + ", expected " +
                                want_name);
            }
            if (got.rows != expected[i].rows || got.cols != expected[i].cols ||
                got.data.size() != got.rows * got.cols) {
                throw DataError("optimizer tensor " + got.name + " has shape " +
                                shape_string(got.rows, got.cols) + ", expected " +
                                shape_string(expected[i].rows, expected[i].cols));
            }
        }
    }
}

void append_u32le(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 24) & 0xff));
}

nlohmann::json tensor_table(const std::vector<NamedTensor>& tensors) {
    nlohmann::json table = nlohmann::json::array();
    for (const auto& t : tensors) {
        table.push_back({{"name", t.name}, {"rows", t.rows}, {"cols", t.cols}});
    }
    return table;
}

std::vector<NamedTensor> parse_table(const nlohmann::json& table) {
    std::vector<NamedTensor> out;
    for (const auto& row : table) {
        NamedTensor t;
        t.name = row.at("name").get<std::string>();
        t.rows = row.at("rows").get<std::uint64_t>();
        t.cols = row.at("cols").get<std::uint64_t>();
        out.push_back(std::move(t));
    }
    return out;
}

} // namespace

Checkpoint checkpoint_from_model(const Model& model, std::uint64_t step) {
    Checkpoint ckpt;
    ckpt.config = model.config();
    ckpt.step = step;
    for (const auto& p : model.params()) {
        NamedTensor t;
        t.name = p.name;
        t.rows = static_cast<std::uint64_t>(p.value.rows());
        t.cols = static_cast<std::uint64_t>(p.value.cols());
        t.data.reserve(t.rows * t.cols);
        for (Eigen::Index r = 0; r < p.value.rows(); ++r) {
            for (Eigen::Index c = 0; c < p.value.cols(); ++c) {
                t.data.push_back(static_cast<float>(p.value(r, c)));
            }
        }
        ckpt.weights.push_back(std::move(t));
    }
    return ckpt;
}

Model model_from_checkpoint(const Checkpoint& ckpt) {
    ckpt.config.validate();
    validate_tables(ckpt);
    Model model(ckpt.config);
    auto& params = model.params();
    for (std::size_t i = 0; i < params.size(); ++i) {
        const auto& t = ckpt.weights[i];
        Eigen::MatrixXd& m = params[i].value;
        for (std::uint64_t r = 0; r < t.rows; ++r) {
            for (std::uint64_t c = 0; c < t.cols; ++c) {
                m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                    static_cast<double>(t.data[r * t.cols + c]);
            }
        }
    }
    return model;
}

Checkpoint init_checkpoint(const ModelConfig& cfg, std::uint64_t seed) {
    return checkpoint_from_model(Model::init(cfg, seed), 0);
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
    validate_tables(ckpt);
    nlohmann::json header{
        {"format_version", ckpt.format_version},
        {"config", config_to_json(ckpt.config)},
        {"step", ckpt.step},
        {"weights", tensor_table(ckpt.weights)},
        {"optimizer", tensor_table(ckpt.optimizer_state)},
    };
    const std::string header_bytes = header.dump();

    std::string out;
    out.append(kMagic, sizeof(kMagic));
    append_u32le(out, static_cast<std::uint32_t>(header_bytes.size()));
    out += header_bytes;
    const auto append_payload = [&out](const std::vector<NamedTensor>& tensors) {
        for (const auto& t : tensors) {
            const std::size_t bytes = t.data.size() * sizeof(float);
            const std::size_t pos = out.size();
            out.resize(pos + bytes);
            std::memcpy(out.data() + pos, t.data.data(), bytes);
        }
    };
    append_payload(ckpt.weights);
    append_payload(ckpt.optimizer_state);

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) {
        throw DataError("cannot write " + path.string());
    }
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) {
        throw DataError("short write to " + path.string());
    }
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        throw DataError("cannot read " + path.string());
    }
    std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

    if (bytes.size() < sizeof(kMagic) + 4 ||
        std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
        throw DataError("not a checkpoint file: " + path.string());
    }
    std::uint32_t header_len = 0;
    for (int i = 3; i >= 0; --i) {
        header_len = (header_len << 8) |
                     static_cast<unsigned char>(bytes[sizeof(kMagic) + static_cast<std::size_t>(i)]);
    }
    const std::size_t header_off = sizeof(kMagic) + 4;
    if (bytes.size() < header_off + header_len) {
        throw DataError("truncated checkpoint file: " + path.string());
    }

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(bytes.substr(header_off, header_len));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed checkpoint header: ") + e.what());
    }

    Checkpoint ckpt;
    try {
        ckpt.format_version = header.at("format_version").get<std::int32_t>();
        if (ckpt.format_version != kCheckpointFormatVersion) {
            throw DataError("unsupported checkpoint format version " +
                            std::to_string(ckpt.format_version) + ", expected " +
                            std::to_string(kCheckpointFormatVersion));
        }
        ckpt.config = config_from_json(header.at("config"));
        ckpt.step = header.at("step").get<std::uint64_t>();
        ckpt.weights = parse_table(header.at("weights"));
        ckpt.optimizer_state = parse_table(header.at("optimizer"));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed checkpoint header: ") + e.what());
    }

    std::size_t payload = 0;
    for (const auto& t : ckpt.weights) {
        payload += t.rows * t.cols * sizeof(float);
    }
    for (const auto& t : ckpt.optimizer_state) {
        payload += t.rows * t.cols * sizeof(float);
    }
    const std::size_t body_off = header_off + header_len;
    if (bytes.size() < body_off + payload) {
        throw DataError("truncated checkpoint file: " + path.string());
    }
    if (bytes.size() > body_off + payload) {
        throw DataError("trailing bytes after checkpoint payload: " + path.string());
    }

    std::size_t off = body_off;
    const auto read_payload = [&](std::vector<NamedTensor>& tensors) {
        for (auto& t : tensors) {
            const std::size_t n = t.rows * t.cols;
            t.data.resize(n);
            std::memcpy(t.data.data(), bytes.data() + off, n * sizeof(float));
            off += n * sizeof(float);
        }
    };
    read_payload(ckpt.weights);
    read_payload(ckpt.optimizer_state);

    validate_tables(ckpt);
    return ckpt;
}

} // namespace nepembed
