#include "run_config.hpp"

#include <initializer_list>

#include <nlohmann/json.hpp>

#include "cornerseg/error.hpp"
#include "cornerseg/tensorio.hpp"

namespace cornerseg::cli {

namespace {

using json = nlohmann::json;

class Section {
public:
    Section(const json& node, std::string path, std::initializer_list<const char*> keys)
        : node_(node), path_(std::move(path)) {
        if (!node_.is_object()) throw ConfigError(path_ + ": expected an object");
        for (const auto& [key, value] : node_.items()) {
            bool known = false;
            for (const char* k : keys) known = known || key == k;
            if (!known) throw ConfigError("unknown config key \"" + path_ + "." + key + "\"");
        }
    }

    template <typename T>
    void read(const char* key, T& out) const {
        const auto it = node_.find(key);
        if (it == node_.end()) return;
        try {
            out = it->get<T>();
        } catch (const json::exception&) {
            throw ConfigError("config key \"" + path_ + "." + key + "\" has the wrong type");
        }
    }

    const json* child(const char* key) const {
        const auto it = node_.find(key);
        return it == node_.end() ? nullptr : &*it;
    }

    std::string child_path(const char* key) const { return path_ + "." + key; }

private:
    const json& node_;
    std::string path_;
};

void read_pipeline(const json& node, PipelineConfig& p) {
    const Section s(node, "pipeline",
                    {"corner_score_threshold", "corner_nms_iou", "min_short_side", "ss_ratio_max", "g", "tau",
                     "final_nms_iou", "threads"});
    s.read("corner_score_threshold", p.corner_score_threshold);
    s.read("corner_nms_iou", p.corner_nms_iou);
    s.read("min_short_side", p.min_short_side);
    s.read("ss_ratio_max", p.ss_ratio_max);
    s.read("g", p.g);
    s.read("tau", p.tau);
    s.read("final_nms_iou", p.final_nms_iou);
    s.read("threads", p.threads);
}

void read_default_boxes(const json& node, DefaultBoxConfig& d) {
    const Section s(node, "default_boxes", {"input_width", "input_height", "layers"});
    s.read("input_width", d.input_width);
    s.read("input_height", d.input_height);
    if (const json* layers = s.child("layers")) {
        if (!layers->is_array()) throw ConfigError("default_boxes.layers must be an array");
        d.layers.clear();
        for (std::size_t i = 0; i < layers->size(); ++i) {
            const Section ls((*layers)[i], "default_boxes.layers[" + std::to_string(i) + "]",
                             {"name", "stride", "scales"});
            FeatureLayer layer;
            ls.read("name", layer.name);
            ls.read("stride", layer.stride);
            ls.read("scales", layer.scales);
            if (layer.name.empty()) layer.name = "L" + std::to_string(i);
            d.layers.push_back(std::move(layer));
        }
    }
}

void read_noise(const json& node, NoiseConfig& n) {
    const Section s(node, "synth.noise",
                    {"corner_jitter_sigma", "corner_score_noise", "drop_prob", "spurious_rate", "seg_flip_rate"});
    s.read("corner_jitter_sigma", n.corner_jitter_sigma);
    s.read("corner_score_noise", n.corner_score_noise);
    if (const json* drop = s.child("drop_prob")) {
        if (drop->is_number()) {
            n.drop_prob.fill(drop->get<double>());
        } else if (drop->is_array() && drop->size() == 4) {
            for (std::size_t i = 0; i < 4; ++i) n.drop_prob[i] = (*drop)[i].get<double>();
        } else {
            throw ConfigError("synth.noise.drop_prob must be a number or an array of 4 (TL, TR, BR, BL)");
        }
    }
    s.read("spurious_rate", n.spurious_rate);
    s.read("seg_flip_rate", n.seg_flip_rate);
}

void read_synth(const json& node, SynthConfig& c) {
    const Section s(node, "synth",
                    {"image_width", "image_height", "min_boxes", "max_boxes", "theta_min_deg", "theta_max_deg",
                     "short_side_min", "short_side_max", "aspect_min", "aspect_max", "min_separation", "margin",
                     "max_corner_square_iou", "g", "max_attempts_per_box", "noise"});
    s.read("image_width", c.image_width);
    s.read("image_height", c.image_height);
    s.read("min_boxes", c.min_boxes);
    s.read("max_boxes", c.max_boxes);
    s.read("theta_min_deg", c.theta_min_deg);
    s.read("theta_max_deg", c.theta_max_deg);
    s.read("short_side_min", c.short_side_min);
    s.read("short_side_max", c.short_side_max);
    s.read("aspect_min", c.aspect_min);
    s.read("aspect_max", c.aspect_max);
    s.read("min_separation", c.min_separation);
    s.read("margin", c.margin);
    s.read("max_corner_square_iou", c.max_corner_square_iou);
    s.read("g", c.g);
    s.read("max_attempts_per_box", c.max_attempts_per_box);
    if (const json* noise = s.child("noise")) read_noise(*noise, c.noise);
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text, const std::string& source) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw FormatError(source, FormatError::Location::ByteOffset, e.byte, "invalid JSON");
    }
    RunConfig cfg;
    try {
        const Section s(root, "config", {"pipeline", "default_boxes", "targets", "synth"});
        if (const json* p = s.child("pipeline")) read_pipeline(*p, cfg.pipeline);
        if (const json* d = s.child("default_boxes")) read_default_boxes(*d, cfg.default_boxes);
        if (const json* t = s.child("targets")) {
            const Section ts(*t, "targets", {"match_threshold"});
            ts.read("match_threshold", cfg.match_threshold);
        }
        if (const json* sy = s.child("synth")) read_synth(*sy, cfg.synth);
    } catch (const ConfigError& e) {
        throw ConfigError(source + ": " + e.what());
    }
    cfg.pipeline.validate();
    cfg.default_boxes.validate();
    cfg.synth.validate();
    if (!(cfg.match_threshold > 0.0 && cfg.match_threshold <= 1.0)) {
        throw ConfigError(source + ": targets.match_threshold must lie in (0, 1]");
    }
    return cfg;
}

RunConfig load_run_config(const std::string& path) { return parse_run_config(read_file(path), path); }

std::string dump_run_config(const RunConfig& cfg) {
    json root;
    const PipelineConfig& p = cfg.pipeline;
    root["pipeline"] = {{"corner_score_threshold", p.corner_score_threshold},
                        {"corner_nms_iou", p.corner_nms_iou},
                        {"min_short_side", p.min_short_side},
                        {"ss_ratio_max", p.ss_ratio_max},
                        {"g", p.g},
                        {"tau", p.tau},
                        {"final_nms_iou", p.final_nms_iou},
                        {"threads", p.threads}};
    json layers = json::array();
    for (const FeatureLayer& l : cfg.default_boxes.layers) {
        layers.push_back({{"name", l.name}, {"stride", l.stride}, {"scales", l.scales}});
    }
    root["default_boxes"] = {{"input_width", cfg.default_boxes.input_width},
                             {"input_height", cfg.default_boxes.input_height},
                             {"layers", layers}};
    root["targets"] = {{"match_threshold", cfg.match_threshold}};
    const SynthConfig& s = cfg.synth;
    root["synth"] = {{"image_width", s.image_width},
                     {"image_height", s.image_height},
                     {"min_boxes", s.min_boxes},
                     {"max_boxes", s.max_boxes},
                     {"theta_min_deg", s.theta_min_deg},
                     {"theta_max_deg", s.theta_max_deg},
                     {"short_side_min", s.short_side_min},
                     {"short_side_max", s.short_side_max},
                     {"aspect_min", s.aspect_min},
                     {"aspect_max", s.aspect_max},
                     {"min_separation", s.min_separation},
                     {"margin", s.margin},
                     {"max_corner_square_iou", s.max_corner_square_iou},
                     {"g", s.g},
                     {"max_attempts_per_box", s.max_attempts_per_box},
                     {"noise",
                      {{"corner_jitter_sigma", s.noise.corner_jitter_sigma},
                       {"corner_score_noise", s.noise.corner_score_noise},
                       {"drop_prob", s.noise.drop_prob},
                       {"spurious_rate", s.noise.spurious_rate},
                       {"seg_flip_rate", s.noise.seg_flip_rate}}}};
    return root.dump(2) + "\n";
}

}  // namespace cornerseg::cli
