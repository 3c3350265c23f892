#include "commands.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cornerseg/error.hpp"
#include "cornerseg/eval.hpp"
#include "cornerseg/losses.hpp"
#include "cornerseg/pipeline.hpp"
#include "cornerseg/svg.hpp"
#include "cornerseg/synth.hpp"
#include "cornerseg/targets.hpp"
#include "cornerseg/tensorio.hpp"
#include "run_config.hpp"

namespace cornerseg::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

// Logit written for matched / unmatched slots when exporting targets as maps.
constexpr float kSaturatedLogit = 10.0f;
// Noise draws use a stream separate from scene placement.
constexpr std::uint64_t kNoiseSeedSalt = 0x9E3779B97F4A7C15ull;

struct PipelineFlags {
    PipelineConfig values;
    CLI::Option* corner_threshold = nullptr;
    CLI::Option* corner_nms = nullptr;
    CLI::Option* min_short_side = nullptr;
    CLI::Option* ss_ratio = nullptr;
    CLI::Option* g = nullptr;
    CLI::Option* tau = nullptr;
    CLI::Option* nms_iou = nullptr;
    CLI::Option* threads = nullptr;

    void add_to(CLI::App& app) {
        corner_threshold = app.add_option("--corner-threshold", values.corner_score_threshold,
                                          "Keep corners with score above this");
        corner_nms = app.add_option("--corner-nms", values.corner_nms_iou, "IoU for per-type corner NMS");
        min_short_side = app.add_option("--min-short-side", values.min_short_side,
                                        "Grouped boxes need a short side above this (px)");
        ss_ratio = app.add_option("--ss-ratio", values.ss_ratio_max, "Largest allowed short-side ratio of a pair");
        g = app.add_option("--g", values.g, "Position-sensitive grid order");
        tau = app.add_option("--tau", values.tau, "Segmentation score threshold");
        nms_iou = app.add_option("--nms-iou", values.final_nms_iou, "Rotated IoU for the final NMS");
        threads = app.add_option("--threads", values.threads, "Worker threads for candidate scoring");
    }

    void apply(PipelineConfig& cfg) const {
        if (corner_threshold->count() > 0) cfg.corner_score_threshold = values.corner_score_threshold;
        if (corner_nms->count() > 0) cfg.corner_nms_iou = values.corner_nms_iou;
        if (min_short_side->count() > 0) cfg.min_short_side = values.min_short_side;
        if (ss_ratio->count() > 0) cfg.ss_ratio_max = values.ss_ratio_max;
        if (g->count() > 0) cfg.g = values.g;
        if (tau->count() > 0) cfg.tau = values.tau;
        if (nms_iou->count() > 0) cfg.final_nms_iou = values.final_nms_iou;
        if (threads->count() > 0) cfg.threads = values.threads;
        cfg.validate();
    }
};

RunConfig config_from(const std::string& path) { return path.empty() ? RunConfig{} : load_run_config(path); }

void make_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError(dir, "cannot create directory: " + ec.message());
}

std::string join(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

std::vector<RotatedRect> rects_of(const std::vector<BoxRecord>& records) {
    std::vector<RotatedRect> out;
    out.reserve(records.size());
    for (const BoxRecord& r : records) out.push_back(r.box);
    return out;
}

std::vector<Detection> detections_of(const std::vector<BoxRecord>& records) {
    std::vector<Detection> out;
    out.reserve(records.size());
    for (const BoxRecord& r : records) out.push_back({r.box, r.score.value_or(1.0)});
    return out;
}

json rates_json(const Counts& c, const Rates& r) {
    return {{"tp", c.true_positives}, {"fp", c.false_positives}, {"fn", c.false_negatives},
            {"precision", r.precision}, {"recall", r.recall}, {"f_measure", r.f_measure}};
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
    std::string config;
    std::uint64_t seed = 0;
    std::string out_dir;
};

void run_synth(const SynthArgs& args, std::ostream& out) {
    const RunConfig cfg = config_from(args.config);
    const SynthScene clean = generate_scene(cfg.synth, args.seed);
    const SynthScene noisy = corrupt(clean, cfg.synth.noise, args.seed ^ kNoiseSeedSalt, cfg.synth.short_side_min,
                                     cfg.synth.short_side_max);

    make_dir(args.out_dir);
    write_annotation(clean.annotation, join(args.out_dir, "scene.json"));
    std::vector<BoxRecord> gt;
    for (const RotatedRect& r : clean.annotation.boxes) gt.push_back({r, std::nullopt});
    write_boxes(gt, join(args.out_dir, "gt.jsonl"));
    write_corners(noisy.corners, join(args.out_dir, "corners.jsonl"));
    write_tensor(noisy.masks, join(args.out_dir, "seg.cft"));
    write_tensor(clean.masks, join(args.out_dir, "masks.cft"));
    out << "wrote " << clean.annotation.boxes.size() << " boxes to " << args.out_dir << "\n";
}

// ---------------------------------------------------------- encode-targets

struct EncodeArgs {
    std::string config;
    std::string gt;
    std::string out_dir;
};

void run_encode(const EncodeArgs& args, std::ostream& out) {
    const RunConfig cfg = config_from(args.config);
    const DefaultBoxConfig& dbc = cfg.default_boxes;

    std::vector<RotatedRect> gt;
    for (const BoxRecord& rec : read_boxes(args.gt)) {
        gt.push_back(canonical_corner_order(min_area_rect(rec.box.corners)));
    }

    std::vector<CornerSquare> squares;
    for (const RotatedRect& r : gt) {
        for (const CornerSquare& s : corner_squares(r)) squares.push_back(s);
    }
    const std::vector<DefaultBox> boxes = generate_default_boxes(dbc);
    const MatchResult m = match(boxes, squares, cfg.match_threshold);

    std::vector<LayerMaps> maps;
    for (const FeatureLayer& layer : dbc.layers) {
        const std::size_t k = layer.scales.size();
        const auto h = static_cast<std::size_t>(dbc.input_height / layer.stride);
        const auto w = static_cast<std::size_t>(dbc.input_width / layer.stride);
        maps.push_back({Tensor3D(k * 8, h, w), Tensor3D(k * 16, h, w)});
    }

    std::ostringstream matches;
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        const DefaultBox& b = boxes[i];
        LayerMaps& lm = maps[static_cast<std::size_t>(b.layer_index)];
        const auto row = static_cast<std::size_t>(b.row);
        const auto col = static_cast<std::size_t>(b.col);
        for (int t = 0; t < 4; ++t) {
            const std::size_t slot = static_cast<std::size_t>(b.scale_index) * 4 + static_cast<std::size_t>(t);
            const long sq = m.labels[i * 4 + static_cast<std::size_t>(t)];
            lm.scores.at(slot * 2 + 1, row, col) = sq >= 0 ? kSaturatedLogit : -kSaturatedLogit;
            if (sq < 0) continue;
            const OffsetTarget o = encode_offsets(b, squares[static_cast<std::size_t>(sq)]);
            const auto v = o.as_array();
            for (std::size_t j = 0; j < 4; ++j) lm.offsets.at(slot * 4 + j, row, col) = static_cast<float>(v[j]);
            json line = {{"box", i},
                         {"layer", dbc.layers[static_cast<std::size_t>(b.layer_index)].name},
                         {"row", b.row},
                         {"col", b.col},
                         {"scale", b.scale_index},
                         {"type", corner_type_name(static_cast<CornerType>(t))},
                         {"square", sq},
                         {"iou", m.overlaps[i * 4 + static_cast<std::size_t>(t)]},
                         {"dx", o.dx},
                         {"dy", o.dy},
                         {"dss", o.dss}};
            matches << line.dump() << "\n";
        }
    }

    std::ostringstream square_lines;
    for (std::size_t j = 0; j < squares.size(); ++j) {
        const CornerSquare& s = squares[j];
        json line = {{"box", j / 4},
                     {"type", corner_type_name(s.type)},
                     {"x", s.center.x},
                     {"y", s.center.y},
                     {"ss", s.side}};
        square_lines << line.dump() << "\n";
    }

    make_dir(args.out_dir);
    make_dir(join(args.out_dir, "maps"));
    write_tensor(ps_masks(gt, cfg.pipeline.g, static_cast<std::size_t>(dbc.input_height),
                          static_cast<std::size_t>(dbc.input_width)),
                 join(args.out_dir, "masks.cft"));
    write_file(join(args.out_dir, "matches.jsonl"), matches.str());
    write_file(join(args.out_dir, "corner_squares.jsonl"), square_lines.str());
    for (std::size_t l = 0; l < maps.size(); ++l) {
        write_tensor(maps[l].scores, join(args.out_dir, "maps/score_" + dbc.layers[l].name + ".cft"));
        write_tensor(maps[l].offsets, join(args.out_dir, "maps/offset_" + dbc.layers[l].name + ".cft"));
    }
    const json summary = {{"boxes", gt.size()},
                          {"corner_squares", squares.size()},
                          {"default_boxes", boxes.size()},
                          {"positives", m.num_positives()}};
    write_file(join(args.out_dir, "summary.json"), summary.dump(2) + "\n");
    out << "matched " << m.num_positives() << " default-box slots for " << squares.size() << " corner squares\n";
}

// ------------------------------------------------------------------ detect

struct DetectArgs {
    std::string config;
    std::string corners;
    std::string maps_dir;
    std::string seg;
    std::string out;
    std::string overlay;
    std::string gt;
    PipelineFlags flags;
};

void run_detect(const DetectArgs& args, std::ostream& out) {
    RunConfig cfg = config_from(args.config);
    args.flags.apply(cfg.pipeline);
    const Tensor3D seg = read_tensor(args.seg);

    std::vector<Detection> dets;
    if (!args.corners.empty()) {
        dets = detect(read_corners(args.corners), seg, cfg.pipeline);
    } else {
        std::vector<LayerMaps> maps;
        for (const FeatureLayer& layer : cfg.default_boxes.layers) {
            maps.push_back({read_tensor(join(args.maps_dir, "score_" + layer.name + ".cft")),
                            read_tensor(join(args.maps_dir, "offset_" + layer.name + ".cft"))});
        }
        dets = detect(maps, cfg.default_boxes, seg, cfg.pipeline);
    }

    std::vector<BoxRecord> records;
    for (const Detection& d : dets) records.push_back({d.rect, d.score});
    write_boxes(records, args.out);

    if (!args.overlay.empty()) {
        std::vector<RotatedRect> gt;
        if (!args.gt.empty()) gt = rects_of(read_boxes(args.gt));
        write_file(args.overlay, render_overlay_svg(static_cast<int>(seg.width()), static_cast<int>(seg.height()),
                                                    gt, dets));
    }
    out << "detected " << dets.size() << " boxes\n";
}

// -------------------------------------------------------------------- loss

struct LossArgs {
    std::string batch_dir;
    double lambda1 = 1.0;
    double lambda2 = 10.0;
    std::size_t ohem_ratio = kOhemNegativeRatio;
};

Tensor3D read_rows(const std::string& path, std::size_t cols) {
    Tensor3D t = read_tensor(path);
    if (t.channels() != 1 || t.width() != cols) {
        throw ConfigError(path + ": expected shape [1, N, " + std::to_string(cols) + "]");
    }
    return t;
}

void run_loss(const LossArgs& args, std::ostream& out) {
    const std::string& dir = args.batch_dir;
    const Tensor3D logits = read_rows(join(dir, "conf_logits.cft"), 2);
    const Tensor3D labels_t = read_rows(join(dir, "conf_labels.cft"), 1);
    const Tensor3D loc_pred = read_rows(join(dir, "loc_pred.cft"), 4);
    const Tensor3D loc_target = read_rows(join(dir, "loc_target.cft"), 4);
    const Tensor3D seg_pred = read_tensor(join(dir, "seg_pred.cft"));
    const Tensor3D seg_label = read_tensor(join(dir, "seg_label.cft"));

    if (labels_t.height() != logits.height()) {
        throw ConfigError(join(dir, "conf_labels.cft") + ": label count differs from conf_logits rows");
    }
    if (!loc_pred.same_shape(loc_target)) throw ConfigError(join(dir, "loc_target.cft") + ": shape differs from loc_pred");
    if (!seg_pred.same_shape(seg_label)) throw ConfigError(join(dir, "seg_label.cft") + ": shape differs from seg_pred");

    ConfBatch conf;
    conf.logits.assign(logits.data().begin(), logits.data().end());
    for (float v : labels_t.data()) {
        if (v != 0.0f && v != 1.0f) throw ConfigError(join(dir, "conf_labels.cft") + ": labels must be 0 or 1");
        conf.labels.push_back(v == 1.0f ? 1 : 0);
    }
    LocBatch loc;
    loc.predictions.assign(loc_pred.data().begin(), loc_pred.data().end());
    loc.targets.assign(loc_target.data().begin(), loc_target.data().end());
    SegBatch segb;
    segb.predictions.assign(seg_pred.data().begin(), seg_pred.data().end());
    segb.labels.assign(seg_label.data().begin(), seg_label.data().end());

    const std::vector<double> ce = per_sample_cross_entropy(conf);
    const OhemSelection sel = ohem_select(ce, conf.labels, args.ohem_ratio);
    const double conf_value = sel.indices.empty() ? 0.0 : conf_loss(conf, sel.indices).value;
    const double loc_value = loc_loss(loc).value;
    const double seg_value = dice_loss(segb).value;

    LossWeights w;
    w.lambda1 = args.lambda1;
    w.lambda2 = args.lambda2;
    w.num_positive = sel.num_positives;
    w.num_pixels = segb.labels.size();
    const TotalLoss total = total_loss(conf_value, loc_value, seg_value, w);

    const json report = {{"conf", conf_value},
                         {"loc", loc_value},
                         {"seg", seg_value},
                         {"num_positive", w.num_positive},
                         {"num_pixels", w.num_pixels},
                         {"ohem_negatives", sel.num_negatives},
                         {"no_positives", total.no_positives},
                         {"conf_term", total.conf_term},
                         {"loc_term", total.loc_term},
                         {"seg_term", total.seg_term},
                         {"total", total.value}};
    out << report.dump(2) << "\n";
}

// -------------------------------------------------------------------- eval

struct EvalArgs {
    std::vector<std::string> det;
    std::vector<std::string> gt;
    double iou = kDefaultEvalIou;
    std::string out;
};

void run_eval(const EvalArgs& args, std::ostream& out) {
    if (args.det.size() != args.gt.size()) {
        throw ConfigError("--det and --gt must be given the same number of times");
    }
    if (!(args.iou > 0.0 && args.iou <= 1.0)) throw ConfigError("--iou must lie in (0, 1]");
    std::vector<Assignment> per_image;
    for (std::size_t i = 0; i < args.det.size(); ++i) {
        const std::vector<Detection> dets = detections_of(read_boxes(args.det[i]));
        const std::vector<RotatedRect> gts = rects_of(read_boxes(args.gt[i]));
        per_image.push_back(match_detections(dets, gts, args.iou));
    }
    const EvalReport rep = report(per_image);
    json images = json::array();
    for (std::size_t i = 0; i < per_image.size(); ++i) {
        json entry = rates_json(rep.per_image[i], rep.per_image_rates[i]);
        entry["det"] = args.det[i];
        entry["gt"] = args.gt[i];
        images.push_back(entry);
    }
    const json doc = {{"iou_threshold", args.iou}, {"images", images}, {"total", rates_json(rep.totals, rep.rates)}};
    const std::string text = doc.dump(2) + "\n";
    if (args.out.empty()) {
        out << text;
    } else {
        write_file(args.out, text);
    }
}

// ----------------------------------------------------------------- overlay

struct OverlayArgs {
    int width = 512;
    int height = 512;
    std::string gt;
    std::string det;
    std::string out;
};

void run_overlay(const OverlayArgs& args) {
    if (args.width <= 0 || args.height <= 0) throw ConfigError("--width and --height must be positive");
    std::vector<RotatedRect> gt;
    std::vector<Detection> dets;
    if (!args.gt.empty()) gt = rects_of(read_boxes(args.gt));
    if (!args.det.empty()) dets = detections_of(read_boxes(args.det));
    write_file(args.out, render_overlay_svg(args.width, args.height, gt, dets));
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Corner-localization and position-sensitive segmentation text detector", "cornerseg"};
    app.option_defaults()->always_capture_default();
    app.require_subcommand(1);

    SynthArgs synth_args;
    CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic scene with ground truth, corners and masks");
    synth->add_option("--config", synth_args.config, "Run configuration JSON")->check(CLI::ExistingFile);
    synth->add_option("--seed", synth_args.seed, "Random seed");
    synth->add_option("--out-dir", synth_args.out_dir, "Output directory")->required();

    EncodeArgs encode_args;
    CLI::App* encode = app.add_subcommand("encode-targets", "Build matching, offset and mask targets for boxes");
    encode->add_option("--config", encode_args.config, "Run configuration JSON")->check(CLI::ExistingFile);
    encode->add_option("--gt", encode_args.gt, "Ground-truth boxes (JSON lines)")->required();
    encode->add_option("--out-dir", encode_args.out_dir, "Output directory")->required();

    DetectArgs detect_args;
    CLI::App* det = app.add_subcommand("detect", "Group corners, score with segmentation maps and run NMS");
    det->add_option("--config", detect_args.config, "Run configuration JSON")->check(CLI::ExistingFile);
    CLI::Option* corners_opt = det->add_option("--corners", detect_args.corners, "Corner detections (JSON lines)");
    CLI::Option* maps_opt =
        det->add_option("--maps", detect_args.maps_dir, "Directory with score_<layer>.cft and offset_<layer>.cft");
    corners_opt->excludes(maps_opt);
    det->add_option("--seg", detect_args.seg, "Position-sensitive segmentation maps (.cft)")->required();
    det->add_option("--out", detect_args.out, "Detections output (JSON lines)")->required();
    det->add_option("--overlay", detect_args.overlay, "Optional SVG overlay output");
    det->add_option("--gt", detect_args.gt, "Ground truth drawn in the overlay");
    detect_args.flags.add_to(*det);

    LossArgs loss_args;
    CLI::App* loss = app.add_subcommand("loss", "Evaluate the training objective on a stored batch");
    loss->add_option("--batch-dir", loss_args.batch_dir, "Directory with the six batch tensors")->required();
    loss->add_option("--lambda1", loss_args.lambda1, "Weight of the localization term");
    loss->add_option("--lambda2", loss_args.lambda2, "Weight of the segmentation term");
    loss->add_option("--ohem-ratio", loss_args.ohem_ratio, "Hard negatives kept per positive");

    EvalArgs eval_args;
    CLI::App* ev = app.add_subcommand("eval", "Precision, recall and F-measure of detections");
    ev->add_option("--det", eval_args.det, "Detections file, repeat once per image")->required();
    ev->add_option("--gt", eval_args.gt, "Ground-truth file, paired with --det by position")->required();
    ev->add_option("--iou", eval_args.iou, "Rotated IoU needed for a match");
    ev->add_option("--out", eval_args.out, "Write the report here instead of stdout");

    OverlayArgs overlay_args;
    CLI::App* ov = app.add_subcommand("overlay", "Render boxes as an SVG");
    ov->add_option("--width", overlay_args.width, "Canvas width (px)");
    ov->add_option("--height", overlay_args.height, "Canvas height (px)");
    ov->add_option("--gt", overlay_args.gt, "Ground-truth boxes (green)");
    ov->add_option("--det", overlay_args.det, "Detections (red)");
    ov->add_option("--out", overlay_args.out, "SVG output")->required();

    std::string print_config_path;
    CLI::App* pc = app.add_subcommand("print-config", "Print the effective run configuration");
    pc->add_option("--config", print_config_path, "Run configuration JSON")->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInvalid;
    }

    try {
        if (synth->parsed()) {
            run_synth(synth_args, out);
        } else if (encode->parsed()) {
            run_encode(encode_args, out);
        } else if (det->parsed()) {
            if (corners_opt->count() == 0 && maps_opt->count() == 0) {
                throw ConfigError("detect needs one of --corners or --maps");
            }
            run_detect(detect_args, out);
        } else if (loss->parsed()) {
            run_loss(loss_args, out);
        } else if (ev->parsed()) {
            run_eval(eval_args, out);
        } else if (ov->parsed()) {
            run_overlay(overlay_args);
        } else if (pc->parsed()) {
            out << dump_run_config(config_from(print_config_path));
        }
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitInvalid;
    }
    return kExitOk;
}

}  // namespace cornerseg::cli
