#include "poseidon/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

namespace poseidon {

namespace {

constexpr char kMagic[8] = {'P', 'O', 'S', 'E', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "checkpoint io assumes a little-endian host");

using json = nlohmann::ordered_json;

json layer_to_json(const LayerKind& l) {
    json j;
    switch (l.op) {
        case LayerOp::Conv2D:
            j["op"] = "conv2d";
            j["out_channels"] = l.out_channels;
            j["kernel_h"] = l.kernel_h;
            j["kernel_w"] = l.kernel_w;
            j["stride"] = l.stride;
            j["padding"] = l.padding;
            break;
        case LayerOp::MaxPool2x2: j["op"] = "maxpool2x2"; break;
        case LayerOp::UpSample2x2: j["op"] = "upsample2x2"; break;
        case LayerOp::ZeroPad:
            j["op"] = "zeropad";
            j["rows"] = l.pad_rows;
            j["cols"] = l.pad_cols;
            break;
        case LayerOp::Dense:
            j["op"] = "dense";
            j["out_units"] = l.out_units;
            break;
        case LayerOp::Tanh: j["op"] = "tanh"; break;
        case LayerOp::Dropout:
            j["op"] = "dropout";
            j["rate"] = l.rate;
            break;
        case LayerOp::Flatten: j["op"] = "flatten"; break;
    }
    return j;
}

LayerKind layer_from_json(const json& j) {
    const std::string op = j.at("op").get<std::string>();
    if (op == "conv2d") {
        return LayerKind::conv2d(j.at("out_channels"), j.at("kernel_h"), j.at("kernel_w"),
                                 j.at("stride"), j.at("padding"));
    }
    if (op == "maxpool2x2") return LayerKind::maxpool2x2();
    if (op == "upsample2x2") return LayerKind::upsample2x2();
    if (op == "zeropad") return LayerKind::zeropad(j.at("rows"), j.at("cols"));
    if (op == "dense") return LayerKind::dense(j.at("out_units"));
    if (op == "tanh") return LayerKind::tanh_act();
    if (op == "dropout") return LayerKind::dropout(j.at("rate"));
    if (op == "flatten") return LayerKind::flatten();
    throw CheckpointError("checkpoint: unknown layer op '" + op + "'");
}

void write_u32(std::ostream& os, std::uint32_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void write_u64(std::ostream& os, std::uint64_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint32_t read_u32(std::istream& is) {
    std::uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}

std::uint64_t read_u64(std::istream& is) {
    std::uint64_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}

void write_tensor(std::ostream& os, const Tensor& t) {
    write_u32(os, static_cast<std::uint32_t>(t.order()));
    for (int i = 0; i < t.order(); ++i) write_u32(os, static_cast<std::uint32_t>(t.dim(i)));
    os.write(reinterpret_cast<const char*>(t.data()),
             static_cast<std::streamsize>(t.numel() * sizeof(double)));
}

Tensor read_tensor(std::istream& is) {
    const std::uint32_t order = read_u32(is);
    if (order > 4) throw CheckpointError("checkpoint: corrupt tensor header");
    std::vector<int> shape(order);
    for (auto& d : shape) d = static_cast<int>(read_u32(is));
    Tensor t(shape);
    is.read(reinterpret_cast<char*>(t.data()),
            static_cast<std::streamsize>(t.numel() * sizeof(double)));
    if (!is) throw CheckpointError("checkpoint: truncated tensor data");
    return t;
}

void write_param_group(std::ostream& os, const std::vector<LayerParams>& group) {
    write_u32(os, static_cast<std::uint32_t>(group.size()));
    for (const auto& p : group) {
        write_u32(os, p.empty() ? 0 : 1);
        if (!p.empty()) {
            write_tensor(os, p.weights);
            write_tensor(os, p.bias);
        }
    }
}

std::vector<LayerParams> read_param_group(std::istream& is) {
    const std::uint32_t n = read_u32(is);
    std::vector<LayerParams> group(n);
    for (auto& p : group) {
        if (read_u32(is)) {
            p.weights = read_tensor(is);
            p.bias = read_tensor(is);
        }
    }
    return group;
}

} // namespace

void save_checkpoint(const std::filesystem::path& path, const NetworkSpec& spec,
                     const ModelState& state, const CheckpointMeta& meta) {
    json header;
    header["name"] = spec.name;
    header["input_shape"] = spec.input_shape;
    json layers = json::array();
    for (const auto& l : spec.layers) layers.push_back(layer_to_json(l));
    header["layers"] = std::move(layers);
    header["epoch"] = meta.epoch;
    header["euler_convention"] = meta.euler_convention;
    header["norm_scales"] = meta.norm_scales;
    header["seed"] = meta.seed;
    json opt;
    opt["kind"] = meta.optimizer.kind == OptimizerConfig::Kind::SGD ? "sgd" : "adadelta";
    opt["learning_rate"] = meta.optimizer.learning_rate;
    opt["halve_every_epochs"] = meta.optimizer.halve_every_epochs;
    opt["adadelta_rho"] = meta.optimizer.adadelta_rho;
    opt["adadelta_eps"] = meta.optimizer.adadelta_eps;
    opt["minibatch_size"] = meta.optimizer.minibatch_size;
    header["optimizer"] = std::move(opt);
    header["extra"] = meta.extra;

    const std::string header_text = header.dump();

    std::ofstream os(path, std::ios::binary);
    if (!os) throw CheckpointError("checkpoint: cannot write " + path.string());
    os.write(kMagic, sizeof kMagic);
    write_u32(os, kVersion);
    write_u64(os, header_text.size());
    os.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
    write_param_group(os, state.params);
    write_param_group(os, state.slot_grad_sq);
    write_param_group(os, state.slot_upd_sq);
    if (!os) throw CheckpointError("checkpoint: write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw CheckpointError("checkpoint: cannot open " + path.string());
    char magic[8];
    is.read(magic, sizeof magic);
    if (!is || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
        throw CheckpointError("checkpoint: bad magic in " + path.string());
    }
    const std::uint32_t version = read_u32(is);
    if (version != kVersion) {
        throw CheckpointError("checkpoint: unsupported format version " +
                              std::to_string(version));
    }
    const std::uint64_t header_len = read_u64(is);
    std::string header_text(header_len, '\0');
    is.read(header_text.data(), static_cast<std::streamsize>(header_len));
    if (!is) throw CheckpointError("checkpoint: truncated header");

    json header;
    try {
        header = json::parse(header_text);
    } catch (const std::exception& e) {
        throw CheckpointError(std::string("checkpoint: header parse error: ") + e.what());
    }

    Checkpoint ck;
    ck.spec.name = header.at("name").get<std::string>();
    ck.spec.input_shape = header.at("input_shape").get<std::vector<int>>();
    for (const auto& jl : header.at("layers")) ck.spec.layers.push_back(layer_from_json(jl));
    ck.spec.validate();

    ck.meta.epoch = header.at("epoch").get<int>();
    ck.meta.euler_convention = header.at("euler_convention").get<std::string>();
    const auto scales = header.at("norm_scales").get<std::vector<double>>();
    if (scales.size() == 3) {
        ck.meta.norm_scales = {scales[0], scales[1], scales[2]};
    }
    ck.meta.seed = header.at("seed").get<std::uint64_t>();
    const auto& opt = header.at("optimizer");
    ck.meta.optimizer.kind = opt.at("kind").get<std::string>() == "adadelta"
                                 ? OptimizerConfig::Kind::Adadelta
                                 : OptimizerConfig::Kind::SGD;
    ck.meta.optimizer.learning_rate = opt.at("learning_rate").get<double>();
    ck.meta.optimizer.halve_every_epochs = opt.at("halve_every_epochs").get<int>();
    ck.meta.optimizer.adadelta_rho = opt.at("adadelta_rho").get<double>();
    ck.meta.optimizer.adadelta_eps = opt.at("adadelta_eps").get<double>();
    ck.meta.optimizer.minibatch_size = opt.at("minibatch_size").get<int>();
    ck.meta.extra = header.at("extra").get<std::map<std::string, std::string>>();

    ck.state.params = read_param_group(is);
    ck.state.slot_grad_sq = read_param_group(is);
    ck.state.slot_upd_sq = read_param_group(is);
    if (ck.state.params.size() != ck.spec.layers.size()) {
        throw CheckpointError("checkpoint: parameter count does not match layer list");
    }
    return ck;
}

} // namespace poseidon
