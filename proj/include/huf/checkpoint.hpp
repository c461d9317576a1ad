#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "huf/errors.hpp"
#include "huf/model.hpp"
#include "huf/tensor.hpp"

#include "json.hpp"

namespace huf {

inline constexpr int kCheckpointFormatVersion = 1;

namespace detail {

struct ParamRef {
    std::string name;
    const Tensor* tensor;
    bool is_buffer;
};

inline void collect_store(std::vector<ParamRef>& out, const std::string& prefix,
                          const ParamStore& store) {
    for (const auto& e : store.entries()) out.push_back({prefix + e.name, &e.value, false});
    for (const auto& b : store.buffers()) out.push_back({prefix + b.name, &b.value, true});
}

/// Every tensor in the model, in a fixed serialization order.
inline std::vector<ParamRef> collect_params(const HufModel& m) {
    std::vector<ParamRef> refs;
    refs.push_back({"norm.mean", &m.norm_mean, true});
    refs.push_back({"norm.std", &m.norm_std, true});
    for (std::size_t i = 0; i < m.dr_saes.size(); ++i) {
        collect_store(refs, "dr_sae." + std::to_string(i) + ".", m.dr_saes[i].net.params());
    }
    for (std::size_t u = 0; u < m.lff_aes.size(); ++u) {
        collect_store(refs, "lff." + std::to_string(u) + ".", m.lff_aes[u].net.params());
    }
    if (m.gff_ae) collect_store(refs, "gff.", m.gff_ae->net.params());
    if (m.classifier) collect_store(refs, "classifier.", m.classifier->params());
    return refs;
}

inline void write_doubles_le(std::ofstream& out, const Tensor& t) {
    for (std::size_t i = 0; i < t.size(); ++i) {
        std::uint64_t bits;
        double v = t[i];
        std::memcpy(&bits, &v, sizeof bits);
        unsigned char bytes[8];
        for (int b = 0; b < 8; ++b) bytes[b] = static_cast<unsigned char>(bits >> (8 * b));
        out.write(reinterpret_cast<const char*>(bytes), 8);
    }
}

inline void read_doubles_le(std::ifstream& in, Tensor& t) {
    for (std::size_t i = 0; i < t.size(); ++i) {
        unsigned char bytes[8];
        in.read(reinterpret_cast<char*>(bytes), 8);
        if (!in) throw DataError("checkpoint: params.bin truncated");
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
        double v;
        std::memcpy(&v, &bits, sizeof v);
        t[i] = v;
    }
}

inline nlohmann::ordered_json layout_json(const SensorLayout& l) {
    nlohmann::ordered_json j;
    j["n_units"] = l.n_units;
    j["unit_names"] = l.unit_names;
    std::vector<bool> mask;
    for (auto a : l.active_mask) mask.push_back(a != 0);
    j["active_mask"] = mask;
    return j;
}

inline SensorLayout layout_from_json(const nlohmann::json& j) {
    SensorLayout l;
    l.n_units = j.at("n_units").get<std::size_t>();
    l.unit_names = j.at("unit_names").get<std::vector<std::string>>();
    for (bool b : j.at("active_mask").get<std::vector<bool>>())
        l.active_mask.push_back(b ? 1 : 0);
    l.validate();
    return l;
}

}  // namespace detail

/// Writes the checkpoint directory: manifest.json (format version,
/// configs, parameter index, training metadata) and params.bin
/// (little-endian f64, row-major, concatenated in manifest order).
inline void save_checkpoint(const HufModel& model, const nlohmann::ordered_json& training_meta,
                            const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    auto refs = detail::collect_params(model);

    nlohmann::ordered_json manifest;
    manifest["format_version"] = kCheckpointFormatVersion;
    nlohmann::ordered_json cfg;
    cfg["layout"] = detail::layout_json(model.layout);
    cfg["dr_sae"] = {{"channels", model.dr_cfg.channels},
                     {"kernel_size", model.dr_cfg.kernel_size},
                     {"share_weights", model.dr_cfg.share_weights}};
    cfg["lff"] = {{"channels", model.lff_cfg.channels},
                  {"kernel_size", model.lff_cfg.kernel_size},
                  {"pool_sizes", model.lff_cfg.pool_sizes},
                  {"pool_stride", model.lff_cfg.pool_stride}};
    cfg["gff"] = {{"channels", model.gff_cfg.channels},
                  {"kernel_size", model.gff_cfg.kernel_size},
                  {"pool_sizes", model.gff_cfg.pool_sizes},
                  {"pool_stride", model.gff_cfg.pool_stride}};
    cfg["classifier"] = {{"hidden", model.cls_cfg.hidden}};
    cfg["window_size"] = model.window_size;
    cfg["num_classes"] = model.num_classes;
    cfg["class_names"] = model.class_names;
    cfg["has_gff"] = model.gff_ae.has_value();
    cfg["has_classifier"] = model.classifier.has_value();
    manifest["config"] = cfg;
    manifest["training"] = training_meta;

    nlohmann::ordered_json params = nlohmann::ordered_json::array();
    std::size_t offset = 0;
    for (const auto& r : refs) {
        nlohmann::ordered_json p;
        p["name"] = r.name;
        p["kind"] = r.is_buffer ? "buffer" : "param";
        p["shape"] = r.tensor->shape();
        p["dtype"] = "f64";
        p["byte_offset"] = offset;
        p["byte_length"] = r.tensor->size() * 8;
        params.push_back(std::move(p));
        offset += r.tensor->size() * 8;
    }
    manifest["params"] = params;

    {
        std::ofstream mf(dir / "manifest.json");
        if (!mf) throw DataError("cannot write " + (dir / "manifest.json").string());
        mf << manifest.dump(2) << "\n";
    }
    {
        std::ofstream bf(dir / "params.bin", std::ios::binary);
        if (!bf) throw DataError("cannot write " + (dir / "params.bin").string());
        for (const auto& r : refs) detail::write_doubles_le(bf, *r.tensor);
        if (!bf) throw DataError("write failed: " + (dir / "params.bin").string());
    }
}

struct LoadedCheckpoint {
    HufModel model;
    nlohmann::ordered_json training_meta;
};

/// Rebuilds the model from a checkpoint directory. The round trip is
/// bit-exact; a version mismatch or any offset/size inconsistency is
/// rejected before any tensor is filled in.
inline LoadedCheckpoint load_checkpoint(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    fs::path manifest_path = dir / "manifest.json";
    std::ifstream mf(manifest_path);
    if (!mf) throw DataError("checkpoint: missing " + manifest_path.string());
    nlohmann::json manifest;
    try {
        mf >> manifest;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("checkpoint: corrupt manifest: " + std::string(e.what()));
    }
    int version = manifest.at("format_version").get<int>();
    if (version != kCheckpointFormatVersion) {
        throw DataError("checkpoint: format version " + std::to_string(version) +
                        " not supported (expected " +
                        std::to_string(kCheckpointFormatVersion) + ")");
    }

    const auto& cfg = manifest.at("config");
    SensorLayout layout = detail::layout_from_json(cfg.at("layout"));
    DrSaeConfig dr;
    dr.channels = cfg.at("dr_sae").at("channels").get<std::vector<std::size_t>>();
    dr.kernel_size = cfg.at("dr_sae").at("kernel_size").get<std::size_t>();
    dr.share_weights = cfg.at("dr_sae").at("share_weights").get<bool>();
    auto fusion_from = [](const nlohmann::json& j) {
        FusionAeConfig f;
        auto ch = j.at("channels").get<std::vector<std::size_t>>();
        if (ch.size() != 4) throw DataError("checkpoint: fusion channels must have 4 entries");
        std::copy(ch.begin(), ch.end(), f.channels.begin());
        f.kernel_size = j.at("kernel_size").get<std::size_t>();
        auto ps = j.at("pool_sizes").get<std::vector<std::size_t>>();
        if (ps.size() != 2) throw DataError("checkpoint: pool_sizes must have 2 entries");
        std::copy(ps.begin(), ps.end(), f.pool_sizes.begin());
        f.pool_stride = j.at("pool_stride").get<std::size_t>();
        return f;
    };
    FusionAeConfig lff = fusion_from(cfg.at("lff"));
    FusionAeConfig gff = fusion_from(cfg.at("gff"));
    ClassifierConfig cls;
    cls.hidden = cfg.at("classifier").at("hidden").get<std::vector<std::size_t>>();

    LoadedCheckpoint loaded;
    loaded.model = build_huf_model(layout, dr, lff, gff, cls, 0);
    HufModel& model = loaded.model;
    model.window_size = cfg.at("window_size").get<std::size_t>();
    model.num_classes = cfg.at("num_classes").get<std::size_t>();
    model.class_names = cfg.at("class_names").get<std::vector<std::string>>();
    if (cfg.at("has_gff").get<bool>() != model.gff_ae.has_value()) {
        throw DataError("checkpoint: GFF presence inconsistent with layout");
    }
    if (cfg.at("has_classifier").get<bool>()) {
        model.classifier = build_classifier(model.classifier_input_dim(model.window_size),
                                            model.num_classes, cls, 0);
    }
    if (manifest.contains("training")) loaded.training_meta = manifest.at("training");

    // Validate the parameter index against the file before loading.
    fs::path bin_path = dir / "params.bin";
    std::uintmax_t file_size;
    try {
        file_size = fs::file_size(bin_path);
    } catch (const fs::filesystem_error&) {
        throw DataError("checkpoint: missing " + bin_path.string());
    }
    auto refs = detail::collect_params(model);
    const auto& params = manifest.at("params");
    if (params.size() != refs.size()) {
        throw DataError("checkpoint: manifest lists " + std::to_string(params.size()) +
                        " tensors, model expects " + std::to_string(refs.size()));
    }
    std::size_t offset = 0;
    for (std::size_t i = 0; i < refs.size(); ++i) {
        const auto& p = params.at(i);
        if (p.at("name").get<std::string>() != refs[i].name) {
            throw DataError("checkpoint: unexpected tensor '" +
                            p.at("name").get<std::string>() + "', expected '" + refs[i].name +
                            "'");
        }
        if (p.at("dtype").get<std::string>() != "f64") {
            throw DataError("checkpoint: unsupported dtype for " + refs[i].name);
        }
        auto shape = p.at("shape").get<std::vector<std::size_t>>();
        if (shape != refs[i].tensor->shape()) {
            throw DataError("checkpoint: shape mismatch for " + refs[i].name);
        }
        if (p.at("byte_offset").get<std::size_t>() != offset) {
            throw DataError("checkpoint: unexpected byte offset for " + refs[i].name);
        }
        if (p.at("byte_length").get<std::size_t>() != refs[i].tensor->size() * 8) {
            throw DataError("checkpoint: byte length mismatch for " + refs[i].name);
        }
        offset += refs[i].tensor->size() * 8;
    }
    if (offset != file_size) {
        throw DataError("checkpoint: params.bin has " + std::to_string(file_size) +
                        " bytes, manifest expects " + std::to_string(offset));
    }

    std::ifstream bf(bin_path, std::ios::binary);
    if (!bf) throw DataError("checkpoint: cannot open " + bin_path.string());
    for (auto& r : refs) {
        detail::read_doubles_le(bf, *const_cast<Tensor*>(r.tensor));
    }
    // Loaded blocks are trained; freeze them until a stage unfreezes.
    for (auto& ae : model.dr_saes) ae.net.params().freeze_all();
    for (auto& ae : model.lff_aes) ae.net.params().freeze_all();
    if (model.gff_ae) model.gff_ae->net.params().freeze_all();
    if (model.classifier) model.classifier->params().freeze_all();
    return loaded;
}

}  // namespace huf
