// gcmdet: command-line front end for the GCM-DET numerical kernels.
// Subcommands: gamma, upsample, ssm-check, loss-check, eval, stats, synth, demo.
// Exit codes: 0 success, 1 verification failure, 2 input/configuration error.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gcm/blocks.hpp"
#include "gcm/carafe.hpp"
#include "gcm/dataset.hpp"
#include "gcm/eval.hpp"
#include "gcm/focal_iou.hpp"
#include "gcm/gamma.hpp"
#include "gcm/io.hpp"
#include "gcm/pipeline.hpp"
#include "gcm/reference.hpp"
#include "gcm/ssm.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct GlobalOpts {
    std::string config_path;
    std::uint64_t seed = 0;
    std::string out;
    bool quiet = false;
};

// Config file support: flat JSON object, applied to any option the user did
// not pass on the command line. Precedence: flag > config file > default.
struct ConfigFile {
    json data = json::object();

    void load(const std::string& path) {
        if (path.empty()) return;
        std::ifstream f(path);
        if (!f) throw gcm::ParseError(path + ": cannot open config file");
        try {
            data = json::parse(f);
        } catch (const json::parse_error& e) {
            throw gcm::ParseError(path + ": " + e.what());
        }
        if (!data.is_object()) throw gcm::ParseError(path + ": config must be a JSON object");
    }

    template <typename T>
    void apply(const CLI::Option* opt, const char* key, T& var) const {
        if (opt != nullptr && opt->count() > 0) return;
        if (!data.contains(key)) return;
        try {
            var = data.at(key).get<T>();
        } catch (const json::exception& e) {
            throw gcm::ParseError(std::string("config key '") + key + "': " + e.what());
        }
    }
};

std::string fmt6(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::vector<double> parse_thresholds(const std::string& spec) {
    std::vector<double> out;
    if (spec.find(':') != std::string::npos) {
        double lo, step, hi;
        if (std::sscanf(spec.c_str(), "%lf:%lf:%lf", &lo, &step, &hi) != 3 || step <= 0.0) {
            throw gcm::ValueError("thresholds: expected 'lo:step:hi', got '" + spec + "'");
        }
        for (double t = lo; t <= hi + 1e-9; t += step) out.push_back(t);
    } else {
        std::size_t pos = 0;
        while (pos < spec.size()) {
            std::size_t comma = spec.find(',', pos);
            if (comma == std::string::npos) comma = spec.size();
            out.push_back(std::stod(spec.substr(pos, comma - pos)));
            pos = comma + 1;
        }
    }
    if (out.empty()) throw gcm::ValueError("thresholds: empty list");
    for (double t : out) {
        if (!(t > 0.0 && t <= 1.0)) throw gcm::ValueError("thresholds must lie in (0,1]");
    }
    return out;
}

json shape_json(const std::vector<std::size_t>& shape) {
    json arr = json::array();
    for (std::size_t d : shape) arr.push_back(d);
    return arr;
}

// ---------------------------------------------------------------------------
// gamma

struct GammaArgs {
    std::string in;
    double g_min = 0.5, g_max = 2.0, eps = 1e-6;
};

int cmd_gamma(const GlobalOpts& g, const GammaArgs& a) {
    if (g.out.empty()) throw gcm::ValueError("gamma: --out is required");
    const gcm::Tensor img = gcm::load_image_ppm(a.in);
    const gcm::GammaConfig cfg{a.g_min, a.g_max, a.eps};
    const gcm::CorrectionResult r = gcm::correct(img, cfg);
    gcm::save_image_ppm(g.out, r.corrected);
    std::cout << "{\"gamma\": " << fmt6(r.gamma) << ", \"gray_mean\": " << fmt6(r.gray_mean)
              << ", \"gray_std\": " << fmt6(r.gray_std) << "}\n";
    return 0;
}

// ---------------------------------------------------------------------------
// upsample

struct UpsampleArgs {
    std::string in;
    std::string weights;
    std::string dump_weights;
    std::size_t scale = 2, k_up = 5, k_encoder = 3, c_mid = 0;
    bool raw_kernels = false;
    bool gamma = false;
    double g_min = 0.5, g_max = 2.0, eps = 1e-6;
};

int cmd_upsample(const GlobalOpts& g, const UpsampleArgs& a) {
    if (g.out.empty()) throw gcm::ValueError("upsample: --out is required");
    gcm::Tensor img = gcm::load_image_ppm(a.in);
    if (a.gamma) {
        img = gcm::correct(img, gcm::GammaConfig{a.g_min, a.g_max, a.eps}).corrected;
    }
    gcm::CarafeConfig cfg;
    cfg.scale = a.scale;
    cfg.k_up = a.k_up;
    cfg.k_encoder = a.k_encoder;
    cfg.c_mid = a.c_mid;
    cfg.softmax_normalize = !a.raw_kernels;

    gcm::CarafeWeights w;
    if (!a.weights.empty()) {
        w = gcm::unpack_carafe_weights(gcm::load_weights(a.weights));
        if (w.compress.kernel.dim(1) != img.dim(0)) {
            throw gcm::ShapeError("upsample: weight file expects " +
                                  std::to_string(w.compress.kernel.dim(1)) +
                                  " input channels, image has " + std::to_string(img.dim(0)));
        }
    } else {
        gcm::Rng rng(g.seed);
        w = gcm::make_carafe_weights(img.dim(0), cfg, rng);
    }
    if (!a.dump_weights.empty()) gcm::save_weights(a.dump_weights, gcm::pack_carafe_weights(w));

    const gcm::Tensor y = gcm::carafe_forward(img, w, cfg);
    gcm::save_image_ppm(g.out, y);
    std::cout << "{\"in_shape\": " << shape_json(img.shape()).dump()
              << ", \"out_shape\": " << shape_json(y.shape()).dump() << "}\n";
    return 0;
}

// ---------------------------------------------------------------------------
// ssm-check

struct SsmCheckArgs {
    std::size_t n = 4, l = 32, count = 100;
    double tol = 1e-8;
    bool corrupt = false;
};

int cmd_ssm_check(const GlobalOpts& g, const SsmCheckArgs& a) {
    if (a.n == 0 || a.l == 0 || a.count == 0) {
        throw gcm::ValueError("ssm-check: n, l and count must be positive");
    }
    gcm::Rng rng(g.seed);
    double worst = 0.0;
    for (std::size_t i = 0; i < a.count; ++i) {
        const gcm::SsmParams p = gcm::make_random_ssm(a.n, rng);
        const gcm::DiscreteSsm d = gcm::zoh_discretize(p);
        std::vector<double> x(a.l);
        for (auto& v : x) v = rng.uniform(-1.0, 1.0);
        const std::vector<double> ys = gcm::scan(d, x);
        gcm::SsmKernel k = gcm::build_kernel(d, a.l);
        if (a.corrupt) k.k_bar[0] += 1.0; // failure-path hook
        const std::vector<double> yc = gcm::conv_apply(k, x);
        for (std::size_t t = 0; t < a.l; ++t) {
            worst = std::max(worst, std::fabs(ys[t] - yc[t]));
        }
    }
    const bool pass = worst <= a.tol;
    std::printf("ssm-check: %zu systems (n=%zu, l=%zu), max |scan - conv| = %.3e, tol = %.1e -> %s\n",
                a.count, a.n, a.l, worst, a.tol, pass ? "PASS" : "FAIL");
    return pass ? 0 : 1;
}

// ---------------------------------------------------------------------------
// loss-check

struct LossCheckArgs {
    std::size_t count = 1000;
    double h = 1e-5, tol = 1e-4;
    double iou_thresh = 0.5, alpha_high = 1.0, alpha_low = 0.25, focusing_gamma = 2.0;
};

int cmd_loss_check(const GlobalOpts& g, const LossCheckArgs& a) {
    const gcm::FocalIouConfig cfg{a.iou_thresh, a.alpha_high, a.alpha_low, a.focusing_gamma};
    gcm::Rng rng(g.seed);
    auto random_box = [&rng]() {
        const double x1 = rng.uniform(0.0, 6.0), y1 = rng.uniform(0.0, 6.0);
        return gcm::BBox{x1, y1, x1 + rng.uniform(0.5, 4.0), y1 + rng.uniform(0.5, 4.0)};
    };
    auto general_position = [&cfg](const gcm::BBox& p, const gcm::BBox& t) {
        const double margin = 1e-3;
        const double iw = std::min(p.x2, t.x2) - std::max(p.x1, t.x1);
        const double ih = std::min(p.y2, t.y2) - std::max(p.y1, t.y1);
        if (std::fabs(iw) < margin || std::fabs(ih) < margin) return false;
        if (std::fabs(p.x1 - t.x1) < margin || std::fabs(p.x2 - t.x2) < margin) return false;
        if (std::fabs(p.y1 - t.y1) < margin || std::fabs(p.y2 - t.y2) < margin) return false;
        return std::fabs(gcm::iou(p, t) - cfg.iou_thresh) >= margin;
    };

    double worst = 0.0;
    std::size_t done = 0;
    while (done < a.count) {
        const gcm::BBox p = random_box(), t = random_box();
        if (!general_position(p, t)) continue;
        ++done;
        const auto ga = gcm::loss_gradient(p, t, cfg);
        double scale = 0.0;
        std::array<double, 4> gf{};
        for (int i = 0; i < 4; ++i) {
            gcm::BBox lo = p, hi = p;
            double* plo = i == 0 ? &lo.x1 : i == 1 ? &lo.y1 : i == 2 ? &lo.x2 : &lo.y2;
            double* phi = i == 0 ? &hi.x1 : i == 1 ? &hi.y1 : i == 2 ? &hi.x2 : &hi.y2;
            *plo -= a.h;
            *phi += a.h;
            gf[i] = (gcm::sample_loss(hi, t, cfg).loss - gcm::sample_loss(lo, t, cfg).loss) /
                    (2.0 * a.h);
            scale = std::max(scale, std::fabs(gf[i]));
        }
        for (int i = 0; i < 4; ++i) {
            worst = std::max(worst, std::fabs(ga[i] - gf[i]) / std::max(scale, 1e-6));
        }
    }
    const bool pass = worst <= a.tol;
    std::printf("loss-check: %zu box pairs, max rel |analytic - fd| = %.3e, tol = %.1e -> %s\n",
                a.count, worst, a.tol, pass ? "PASS" : "FAIL");
    return pass ? 0 : 1;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
    std::string dets, gts;
    int classes = 100;
    std::string thresholds = "0.5:0.05:0.95";
    std::string ap_mode = "allpoint";
};

// Loads one annotation/detection file per image from a directory, or a
// single file treated as one image named after its stem.
template <typename Loader>
auto load_per_image(const std::string& path, Loader&& loader) {
    std::vector<std::pair<std::string, decltype(loader(std::string{}))>> out;
    if (fs::is_directory(path)) {
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(path)) {
            if (e.is_regular_file() && e.path().extension() == ".txt") files.push_back(e.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) out.emplace_back(f.stem().string(), loader(f.string()));
    } else if (fs::exists(path)) {
        out.emplace_back(fs::path(path).stem().string(), loader(path));
    } else {
        throw gcm::ParseError(path + ": no such file or directory");
    }
    return out;
}

int cmd_eval(const GlobalOpts& g, const EvalArgs& a) {
    const std::vector<double> thresholds = parse_thresholds(a.thresholds);
    const gcm::ApMode mode = a.ap_mode == "coco101" ? gcm::ApMode::Coco101
                             : a.ap_mode == "allpoint"
                                 ? gcm::ApMode::AllPoint
                                 : throw gcm::ValueError("eval: --ap-mode must be allpoint or coco101");

    const auto gt_files = load_per_image(a.gts, [&](const std::string& p) {
        return gcm::load_labels(p, a.classes);
    });
    const auto det_files = load_per_image(a.dets, [&](const std::string& p) {
        return gcm::load_detections(p, a.classes);
    });

    std::vector<gcm::GroundTruthBox> gts;
    std::vector<gcm::Detection> dets;
    gcm::DatasetStats gt_stats;
    for (const auto& [id, annots] : gt_files) {
        for (const auto& ann : annots) {
            gts.push_back({id, ann.class_id, gcm::annotation_to_bbox(ann)});
            ++gt_stats.class_counts[ann.class_id];
            gt_stats.centers.emplace_back(ann.cx, ann.cy);
            gt_stats.sizes.emplace_back(ann.w, ann.h);
        }
    }
    for (const auto& [id, entries] : det_files) {
        for (const auto& d : entries) {
            dets.push_back({id, d.box.class_id, gcm::annotation_to_bbox(d.box), d.confidence});
        }
    }

    const gcm::EvalResult r = gcm::evaluate(dets, gts, thresholds, mode);
    bool has50 = false;
    for (double t : thresholds) has50 |= std::fabs(t - 0.5) < 1e-12;
    gcm::EvalResult r50;
    if (!has50) r50 = gcm::evaluate(dets, gts, {0.5}, mode);
    const double map50 = has50 ? r.map_50 : r50.map_50;
    const auto& matches = has50 ? r.matches_at_50 : r50.matches_at_50;

    json report;
    report["version"] = kVersion;
    json cfg;
    cfg["ap_mode"] = a.ap_mode;
    cfg["classes"] = a.classes;
    cfg["dets"] = a.dets;
    cfg["gts"] = a.gts;
    json thr = json::array();
    for (double t : thresholds) thr.push_back(t);
    cfg["thresholds"] = thr;
    report["config"] = cfg;

    report["map_50"] = map50;
    report["map_50_95"] = r.map_50_95;

    // per-class summary: AP at 0.5 and the mean over the threshold list
    std::map<int, json> per_class;
    for (const auto& te : r.thresholds) {
        for (const auto& ce : te.per_class) {
            json& row = per_class[ce.class_id];
            if (row.is_null()) {
                row["class_id"] = ce.class_id;
                row["n_gt"] = ce.n_gt;
                row["n_det"] = ce.n_det;
                row["in_mean"] = ce.in_mean;
                row["ap_mean"] = 0.0;
                row["ap_50"] = has50 ? 0.0 : -1.0;
            }
            row["ap_mean"] = row["ap_mean"].get<double>() + ce.ap / static_cast<double>(thresholds.size());
            if (std::fabs(te.iou_t - 0.5) < 1e-12) row["ap_50"] = ce.ap;
        }
    }
    if (!has50) {
        for (const auto& te : r50.thresholds) {
            for (const auto& ce : te.per_class) {
                if (per_class.count(ce.class_id)) per_class[ce.class_id]["ap_50"] = ce.ap;
            }
        }
    }
    json pc = json::array();
    for (const auto& [cid, row] : per_class) pc.push_back(row);
    report["per_class"] = pc;

    json ms = json::array();
    for (const auto& m : matches) {
        json row;
        row["class_id"] = m.class_id;
        row["confidence"] = m.confidence;
        row["image_id"] = m.image_id;
        row["iou"] = m.iou;
        row["tp"] = m.tp;
        ms.push_back(row);
    }
    report["matches"] = ms;

    json stats;
    json counts = json::object();
    for (const auto& [cid, n] : gt_stats.class_counts) counts[std::to_string(cid)] = n;
    stats["class_counts"] = counts;
    json centers = json::array(), sizes = json::array();
    for (const auto& [cx, cy] : gt_stats.centers) centers.push_back(json::array({cx, cy}));
    for (const auto& [w, h] : gt_stats.sizes) sizes.push_back(json::array({w, h}));
    stats["centers"] = centers;
    stats["sizes"] = sizes;
    stats["total"] = gt_stats.total();
    report["gt_stats"] = stats;

    if (!g.out.empty()) gcm::save_json(g.out, report);
    std::cout << "mAP@0.5 = " << fmt6(map50) << "\n";
    std::cout << "mAP@0.5:0.95 = " << fmt6(r.map_50_95) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// stats

struct StatsArgs {
    std::string data;
    int classes = 100;
    std::string class_names;
};

int cmd_stats(const GlobalOpts& g, const StatsArgs& a) {
    std::vector<std::string> names;
    if (!a.class_names.empty()) {
        std::size_t pos = 0;
        while (pos <= a.class_names.size()) {
            std::size_t comma = a.class_names.find(',', pos);
            if (comma == std::string::npos) comma = a.class_names.size();
            names.push_back(a.class_names.substr(pos, comma - pos));
            pos = comma + 1;
        }
    }
    auto label_of = [&names](int cid) {
        return cid >= 0 && static_cast<std::size_t>(cid) < names.size()
                   ? names[static_cast<std::size_t>(cid)]
                   : "class_" + std::to_string(cid);
    };

    std::vector<gcm::LabeledImage> items;
    if (!fs::is_directory(a.data)) throw gcm::ParseError(a.data + ": not a directory");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(a.data)) {
        if (e.is_regular_file() && e.path().extension() == ".txt") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        gcm::LabeledImage item;
        item.id = f.stem().string();
        item.annotations = gcm::load_labels(f.string(), a.classes);
        items.push_back(std::move(item));
    }
    const gcm::DatasetStats stats = gcm::dataset_stats(items);

    json report;
    report["version"] = kVersion;
    json cfg;
    cfg["classes"] = a.classes;
    cfg["data"] = a.data;
    report["config"] = cfg;
    json counts = json::object();
    for (const auto& [cid, n] : stats.class_counts) counts[label_of(cid)] = n;
    report["class_counts"] = counts;
    json centers = json::array(), sizes = json::array();
    for (const auto& [cx, cy] : stats.centers) centers.push_back(json::array({cx, cy}));
    for (const auto& [w, h] : stats.sizes) sizes.push_back(json::array({w, h}));
    report["centers"] = centers;
    report["sizes"] = sizes;
    report["images"] = items.size();
    report["total"] = stats.total();

    if (!g.out.empty()) gcm::save_json(g.out, report);
    std::cout << "stats: " << items.size() << " images, " << stats.total() << " annotations\n";
    return 0;
}

// ---------------------------------------------------------------------------
// synth

struct SynthArgs {
    std::size_t images = 16;
    int classes = 5;
    std::size_t size = 64;
    bool emit_detections = false;
};

int cmd_synth(const GlobalOpts& g, const SynthArgs& a) {
    if (g.out.empty()) throw gcm::ValueError("synth: --out is required");
    const auto items = gcm::synth_dataset(g.seed, a.images, a.classes, a.size);
    fs::create_directories(fs::path(g.out) / "images");
    fs::create_directories(fs::path(g.out) / "labels");
    if (a.emit_detections) fs::create_directories(fs::path(g.out) / "detections");

    gcm::DatasetStats stats = gcm::dataset_stats(items);
    for (const auto& item : items) {
        gcm::save_image_ppm((fs::path(g.out) / "images" / (item.id + ".ppm")).string(), item.image);
        gcm::save_labels((fs::path(g.out) / "labels" / (item.id + ".txt")).string(),
                         item.annotations);
        if (a.emit_detections) {
            std::vector<gcm::ScoredAnnotation> dets;
            for (const auto& ann : item.annotations) dets.push_back({ann, 1.0});
            gcm::save_detections((fs::path(g.out) / "detections" / (item.id + ".txt")).string(),
                                 dets);
        }
    }

    json manifest;
    manifest["version"] = kVersion;
    manifest["seed"] = g.seed;
    manifest["images"] = a.images;
    manifest["classes"] = a.classes;
    manifest["size"] = a.size;
    manifest["emit_detections"] = a.emit_detections;
    json counts = json::object();
    for (const auto& [cid, n] : stats.class_counts) counts[std::to_string(cid)] = n;
    manifest["class_counts"] = counts;
    manifest["total"] = stats.total();
    gcm::save_json((fs::path(g.out) / "manifest.json").string(), manifest);

    std::cout << "synth: wrote " << items.size() << " images to " << g.out << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// demo

struct DemoArgs {
    std::size_t size = 32;
    std::size_t stem_channels = 8;
    std::size_t merge_channels = 16;
    std::size_t state_size = 4;
    std::string weights;
};

int cmd_demo(const GlobalOpts& g, const DemoArgs& a) {
    if (g.out.empty()) throw gcm::ValueError("demo: --out is required");
    if (a.size < 16 || a.size % 8 != 0) {
        throw gcm::ValueError("demo: --size must be >= 16 and divisible by 8");
    }
    gcm::PipelineConfig cfg;
    cfg.image_size = a.size;
    cfg.stem_channels = a.stem_channels;
    cfg.merge_channels = a.merge_channels;
    cfg.state_size = a.state_size;

    gcm::PipelineWeights w;
    if (!a.weights.empty()) {
        w = gcm::unpack_pipeline_weights(gcm::load_weights(a.weights), cfg);
    } else {
        gcm::Rng rng(g.seed);
        w = gcm::make_pipeline_weights(cfg, rng);
    }
    fs::create_directories(g.out);
    gcm::save_weights((fs::path(g.out) / "weights.bin").string(), gcm::pack_pipeline_weights(w));

    json stages = json::array();
    double gamma_used = 0.0;
    // Each stage is materialized through the text format so the dumped file
    // is exactly what the next stage consumed; replays reproduce every stage
    // with zero deviation.
    auto emit = [&](const char* file, const char* name, const gcm::Tensor& t) {
        const std::string path = (fs::path(g.out) / file).string();
        gcm::save_tensor_text(path, t);
        json st;
        st["file"] = file;
        st["name"] = name;
        st["shape"] = shape_json(t.shape());
        stages.push_back(st);
        return gcm::load_tensor_text(path);
    };

    const auto items = gcm::synth_dataset(g.seed, 1, 5, a.size);
    gcm::Tensor x = emit("00_input.txt", "input", items[0].image);
    {
        const gcm::CorrectionResult r = gcm::correct(x, cfg.gamma);
        gamma_used = r.gamma;
        x = emit("01_gamma.txt", "gamma", r.corrected);
    }
    x = emit("02_stem.txt", "stem", gcm::simple_stem(x, w.stem));
    x = emit("03_clue_merge.txt", "clue_merge", gcm::vision_clue_merge(x, w.merge));
    x = emit("04_odss.txt", "odss", gcm::odss_block(x, w.odss));
    x = emit("05_carafe.txt", "carafe", gcm::carafe_forward(x, w.carafe, cfg.carafe));

    json manifest;
    manifest["version"] = kVersion;
    manifest["seed"] = g.seed;
    json mc;
    mc["image_size"] = cfg.image_size;
    mc["stem_channels"] = cfg.stem_channels;
    mc["merge_channels"] = cfg.merge_channels;
    mc["state_size"] = cfg.state_size;
    json gj;
    gj["g_min"] = cfg.gamma.g_min;
    gj["g_max"] = cfg.gamma.g_max;
    gj["epsilon"] = cfg.gamma.epsilon;
    mc["gamma"] = gj;
    json cj;
    cj["c_mid"] = gcm::carafe_mid_channels(cfg.merge_channels, cfg.carafe);
    cj["k_encoder"] = cfg.carafe.k_encoder;
    cj["k_up"] = cfg.carafe.k_up;
    cj["scale"] = cfg.carafe.scale;
    mc["carafe"] = cj;
    manifest["config"] = mc;
    manifest["gamma_applied"] = gamma_used;
    manifest["stages"] = stages;
    manifest["weights_file"] = "weights.bin";
    gcm::save_json((fs::path(g.out) / "manifest.json").string(), manifest);

    std::cout << "demo: wrote " << stages.size() << " stages to " << g.out << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"GCM-DET defect-detection numerical kernels"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--config", g.config_path, "JSON config file (flags override file values)");
    const CLI::Option* seed_opt = app.add_option("--seed", g.seed, "RNG seed")->capture_default_str();
    const CLI::Option* out_opt = app.add_option("--out", g.out, "output path (file or directory)");
    const CLI::Option* quiet_opt = app.add_flag("--quiet", g.quiet, "suppress stderr progress/timing");

    GammaArgs ga;
    CLI::App* gamma_cmd = app.add_subcommand("gamma", "adaptive gamma correction of a PPM image");
    const CLI::Option* ga_in = gamma_cmd->add_option("--in", ga.in, "input PPM")->required();
    const CLI::Option* ga_gmin = gamma_cmd->add_option("--g-min", ga.g_min, "")->capture_default_str();
    const CLI::Option* ga_gmax = gamma_cmd->add_option("--g-max", ga.g_max, "")->capture_default_str();
    const CLI::Option* ga_eps = gamma_cmd->add_option("--eps", ga.eps, "")->capture_default_str();

    UpsampleArgs ua;
    CLI::App* up_cmd = app.add_subcommand("upsample", "CARAFE content-aware upsampling of a PPM image");
    const CLI::Option* ua_in = up_cmd->add_option("--in", ua.in, "input PPM")->required();
    const CLI::Option* ua_scale = up_cmd->add_option("--scale", ua.scale, "")->capture_default_str();
    const CLI::Option* ua_kup = up_cmd->add_option("--k-up", ua.k_up, "")->capture_default_str();
    const CLI::Option* ua_kenc = up_cmd->add_option("--k-encoder", ua.k_encoder, "")->capture_default_str();
    const CLI::Option* ua_cmid = up_cmd->add_option("--c-mid", ua.c_mid, "0 = auto")->capture_default_str();
    const CLI::Option* ua_w = up_cmd->add_option("--weights", ua.weights, "weight file (else seeded)");
    const CLI::Option* ua_dw = up_cmd->add_option("--dump-weights", ua.dump_weights, "");
    const CLI::Option* ua_raw = up_cmd->add_flag("--raw-kernels", ua.raw_kernels, "skip softmax normalization");
    const CLI::Option* ua_gamma = up_cmd->add_flag("--gamma", ua.gamma, "apply gamma correction first");
    const CLI::Option* ua_gmin = up_cmd->add_option("--g-min", ua.g_min, "")->capture_default_str();
    const CLI::Option* ua_gmax = up_cmd->add_option("--g-max", ua.g_max, "")->capture_default_str();
    const CLI::Option* ua_eps = up_cmd->add_option("--eps", ua.eps, "")->capture_default_str();

    SsmCheckArgs sa;
    CLI::App* ssm_cmd = app.add_subcommand("ssm-check", "verify scan/convolution duality");
    const CLI::Option* sa_n = ssm_cmd->add_option("--n", sa.n, "state size")->capture_default_str();
    const CLI::Option* sa_l = ssm_cmd->add_option("--l", sa.l, "sequence length")->capture_default_str();
    const CLI::Option* sa_count = ssm_cmd->add_option("--count", sa.count, "")->capture_default_str();
    const CLI::Option* sa_tol = ssm_cmd->add_option("--tol", sa.tol, "")->capture_default_str();
    const CLI::Option* sa_corrupt = ssm_cmd->add_flag("--corrupt", sa.corrupt, "corrupt the kernel (failure-path hook)");

    LossCheckArgs la;
    CLI::App* loss_cmd = app.add_subcommand("loss-check", "verify focal IoU gradients against finite differences");
    const CLI::Option* la_count = loss_cmd->add_option("--count", la.count, "")->capture_default_str();
    const CLI::Option* la_h = loss_cmd->add_option("--step", la.h, "finite-difference step")->capture_default_str();
    const CLI::Option* la_tol = loss_cmd->add_option("--tol", la.tol, "")->capture_default_str();
    const CLI::Option* la_it = loss_cmd->add_option("--iou-thresh", la.iou_thresh, "")->capture_default_str();
    const CLI::Option* la_ah = loss_cmd->add_option("--alpha-high", la.alpha_high, "")->capture_default_str();
    const CLI::Option* la_al = loss_cmd->add_option("--alpha-low", la.alpha_low, "")->capture_default_str();
    const CLI::Option* la_fg = loss_cmd->add_option("--focusing-gamma", la.focusing_gamma, "")->capture_default_str();

    EvalArgs ea;
    CLI::App* eval_cmd = app.add_subcommand("eval", "AP/mAP detection evaluation");
    const CLI::Option* ea_dets = eval_cmd->add_option("--dets", ea.dets, "detections dir or file")->required();
    const CLI::Option* ea_gts = eval_cmd->add_option("--gts", ea.gts, "ground-truth dir or file")->required();
    const CLI::Option* ea_classes = eval_cmd->add_option("--classes", ea.classes, "")->capture_default_str();
    const CLI::Option* ea_thr = eval_cmd->add_option("--thresholds", ea.thresholds, "'lo:step:hi' or comma list")->capture_default_str();
    const CLI::Option* ea_mode = eval_cmd->add_option("--ap-mode", ea.ap_mode, "allpoint|coco101")->capture_default_str();

    StatsArgs ta;
    CLI::App* stats_cmd = app.add_subcommand("stats", "dataset statistics from label files");
    const CLI::Option* ta_data = stats_cmd->add_option("--data", ta.data, "label directory")->required();
    const CLI::Option* ta_classes = stats_cmd->add_option("--classes", ta.classes, "")->capture_default_str();
    const CLI::Option* ta_names = stats_cmd->add_option("--class-names", ta.class_names, "comma-separated names");

    SynthArgs ya;
    CLI::App* synth_cmd = app.add_subcommand("synth", "generate a synthetic labeled dataset");
    const CLI::Option* ya_images = synth_cmd->add_option("--images", ya.images, "")->capture_default_str();
    const CLI::Option* ya_classes = synth_cmd->add_option("--classes", ya.classes, "")->capture_default_str();
    const CLI::Option* ya_size = synth_cmd->add_option("--size", ya.size, "")->capture_default_str();
    const CLI::Option* ya_emit = synth_cmd->add_flag("--emit-detections", ya.emit_detections,
                                                     "also write detections copied from labels");

    DemoArgs da;
    CLI::App* demo_cmd = app.add_subcommand("demo", "run the forward chain and dump every stage");
    const CLI::Option* da_size = demo_cmd->add_option("--size", da.size, "")->capture_default_str();
    const CLI::Option* da_stem = demo_cmd->add_option("--stem-channels", da.stem_channels, "")->capture_default_str();
    const CLI::Option* da_merge = demo_cmd->add_option("--merge-channels", da.merge_channels, "")->capture_default_str();
    const CLI::Option* da_state = demo_cmd->add_option("--state-size", da.state_size, "")->capture_default_str();
    const CLI::Option* da_w = demo_cmd->add_option("--weights", da.weights, "weight file (else seeded)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const auto t0 = std::chrono::steady_clock::now();
    int rc = 2;
    std::string name = "?";
    try {
        ConfigFile cfg;
        cfg.load(g.config_path);
        cfg.apply(seed_opt, "seed", g.seed);
        cfg.apply(out_opt, "out", g.out);
        cfg.apply(quiet_opt, "quiet", g.quiet);

        if (gamma_cmd->parsed()) {
            name = "gamma";
            cfg.apply(ga_in, "in", ga.in);
            cfg.apply(ga_gmin, "g_min", ga.g_min);
            cfg.apply(ga_gmax, "g_max", ga.g_max);
            cfg.apply(ga_eps, "eps", ga.eps);
            rc = cmd_gamma(g, ga);
        } else if (up_cmd->parsed()) {
            name = "upsample";
            cfg.apply(ua_in, "in", ua.in);
            cfg.apply(ua_scale, "scale", ua.scale);
            cfg.apply(ua_kup, "k_up", ua.k_up);
            cfg.apply(ua_kenc, "k_encoder", ua.k_encoder);
            cfg.apply(ua_cmid, "c_mid", ua.c_mid);
            cfg.apply(ua_w, "weights", ua.weights);
            cfg.apply(ua_dw, "dump_weights", ua.dump_weights);
            cfg.apply(ua_raw, "raw_kernels", ua.raw_kernels);
            cfg.apply(ua_gamma, "gamma", ua.gamma);
            cfg.apply(ua_gmin, "g_min", ua.g_min);
            cfg.apply(ua_gmax, "g_max", ua.g_max);
            cfg.apply(ua_eps, "eps", ua.eps);
            rc = cmd_upsample(g, ua);
        } else if (ssm_cmd->parsed()) {
            name = "ssm-check";
            cfg.apply(sa_n, "n", sa.n);
            cfg.apply(sa_l, "l", sa.l);
            cfg.apply(sa_count, "count", sa.count);
            cfg.apply(sa_tol, "tol", sa.tol);
            cfg.apply(sa_corrupt, "corrupt", sa.corrupt);
            rc = cmd_ssm_check(g, sa);
        } else if (loss_cmd->parsed()) {
            name = "loss-check";
            cfg.apply(la_count, "count", la.count);
            cfg.apply(la_h, "step", la.h);
            cfg.apply(la_tol, "tol", la.tol);
            cfg.apply(la_it, "iou_thresh", la.iou_thresh);
            cfg.apply(la_ah, "alpha_high", la.alpha_high);
            cfg.apply(la_al, "alpha_low", la.alpha_low);
            cfg.apply(la_fg, "focusing_gamma", la.focusing_gamma);
            rc = cmd_loss_check(g, la);
        } else if (eval_cmd->parsed()) {
            name = "eval";
            cfg.apply(ea_dets, "dets", ea.dets);
            cfg.apply(ea_gts, "gts", ea.gts);
            cfg.apply(ea_classes, "classes", ea.classes);
            cfg.apply(ea_thr, "thresholds", ea.thresholds);
            cfg.apply(ea_mode, "ap_mode", ea.ap_mode);
            rc = cmd_eval(g, ea);
        } else if (stats_cmd->parsed()) {
            name = "stats";
            cfg.apply(ta_data, "data", ta.data);
            cfg.apply(ta_classes, "classes", ta.classes);
            cfg.apply(ta_names, "class_names", ta.class_names);
            rc = cmd_stats(g, ta);
        } else if (synth_cmd->parsed()) {
            name = "synth";
            cfg.apply(ya_images, "images", ya.images);
            cfg.apply(ya_classes, "classes", ya.classes);
            cfg.apply(ya_size, "size", ya.size);
            cfg.apply(ya_emit, "emit_detections", ya.emit_detections);
            rc = cmd_synth(g, ya);
        } else if (demo_cmd->parsed()) {
            name = "demo";
            cfg.apply(da_size, "size", da.size);
            cfg.apply(da_stem, "stem_channels", da.stem_channels);
            cfg.apply(da_merge, "merge_channels", da.merge_channels);
            cfg.apply(da_state, "state_size", da.state_size);
            cfg.apply(da_w, "weights", da.weights);
            rc = cmd_demo(g, da);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    if (!g.quiet) {
        const double ms = std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - t0)
                              .count();
        std::fprintf(stderr, "timing_ms: %.3f (%s)\n", ms, name.c_str());
    }
    return rc;
}
