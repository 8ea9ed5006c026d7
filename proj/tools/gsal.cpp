// gsal: saliency, foveation, scanpaths, top-down search, evaluation and timing.

#include <CLI11.hpp>

#include <atomic>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "gsal/gsal.hpp"

namespace fs = std::filesystem;
using namespace gsal;

namespace {

enum ExitCode { kOk = 0, kOther = 1, kUsage = 2, kMissingFile = 3, kInvalid = 4, kFormat = 5 };

struct Global {
    std::string out_dir = ".";
    int jobs = 0;
};

fs::path under(const Global& g, const std::string& p) {
    const fs::path path(p);
    const fs::path full = path.is_absolute() ? path : fs::path(g.out_dir) / path;
    if (full.has_parent_path()) fs::create_directories(full.parent_path());
    return full;
}

int resolve_jobs(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("GSAL_JOBS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(i) for i in [0, n) on up to `jobs` threads; the lowest-index
/// failure is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn fn) {
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t threads = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

RunConfig config_or_default(const std::string& path) { return path.empty() ? RunConfig{} : load_config(path); }

SaliencyMap map_for(const RgbImage& image, const RunConfig& cfg) {
    const EngineConfig e = cfg.engine();
    RgbImage working = to_working_resolution(image, e.saliency.resize);
    if (cfg.foveate) working = foveate(working, {working.width() / 2, working.height() / 2}, cfg.foveation()).pixels;
    return post_process(channel_saliency(rgb_to_lab(working), e.saliency.stack, e.saliency.stride), e.saliency.post);
}

Tensor map_tensor(const SaliencyMap& m) { return tensor_from_grids({m.values}); }

// ---- saliency ----

struct SaliencyArgs {
    std::string input, manifest, params, out_map, out_png;
    double overlay = 0.0;
};

void write_map_outputs(const Global& g, const RgbImage& image, const SaliencyMap& map, const RunConfig& cfg,
                       const std::string& out_map, const std::string& out_png, double overlay) {
    if (!out_map.empty()) write_tensor(under(g, out_map).string(), map_tensor(map));
    if (!out_png.empty()) {
        std::optional<RgbImage> underlay;
        if (overlay > 0) underlay = to_working_resolution(image, cfg.engine().saliency.resize);
        save_image(under(g, out_png).string(), render_heatmap(map.values, underlay, overlay > 0 ? overlay : 0.5));
    }
}

int cmd_saliency(const Global& g, const SaliencyArgs& a) {
    const RunConfig cfg = config_or_default(a.params);
    if (!a.input.empty()) {
        const RgbImage image = load_image(a.input);
        const SaliencyMap map = map_for(image, cfg);
        const std::string stem = fs::path(a.input).stem().string();
        write_map_outputs(g, image, map, cfg, a.out_map.empty() && a.out_png.empty() ? stem + ".gsal" : a.out_map,
                          a.out_png, a.overlay);
        return kOk;
    }
    if (a.manifest.empty()) throw ValidationError("saliency needs --input or --manifest");
    const DatasetManifest m = load_manifest(a.manifest);
    const std::string dir = a.out_map.empty() ? "maps" : a.out_map;
    parallel_for(m.entries.size(), resolve_jobs(g.jobs), [&](std::size_t i) {
        const auto& e = m.entries[i];
        const RgbImage image = load_image(e.image.string());
        const SaliencyMap map = map_for(image, cfg);
        write_map_outputs(g, image, map, cfg, (fs::path(dir) / (e.id + ".gsal")).string(),
                          a.out_png.empty() ? "" : (fs::path(a.out_png) / (e.id + ".png")).string(), a.overlay);
    });
    return kOk;
}

// ---- foveate ----

struct FoveateArgs {
    std::string input, out;
    int x = -1, y = -1;
    double resolution = 16.0;
    int levels = 6;
};

int cmd_foveate(const Global& g, const FoveateArgs& a) {
    const RgbImage image = load_image(a.input);
    const FoveationParams p{a.levels, 3, a.resolution};
    const Point at{a.x < 0 ? image.width() / 2 : a.x, a.y < 0 ? image.height() / 2 : a.y};
    save_image(under(g, a.out).string(), foveate(image, at, p).pixels);
    return kOk;
}

// ---- scanpath ----

struct ScanpathArgs {
    std::string input, config, out_trace = "trace.tsv", out_frames, annotated_png, out_map;
};

int cmd_scanpath(const Global& g, const ScanpathArgs& a) {
    const RunConfig cfg = config_or_default(a.config);
    const RgbImage image = load_image(a.input);
    const EngineConfig e = cfg.engine();
    const CycleResult r = run_cycle(image, e);
    write_trace(under(g, a.out_trace), r.trace);
    const RgbImage working = to_working_resolution(image, e.saliency.resize);
    if (!a.out_frames.empty()) {
        const fs::path dir = under(g, a.out_frames + "/x").parent_path();
        for (std::size_t i = 0; i < r.scans.size(); ++i)
            for (std::size_t f = 0; f < r.scans[i].frames.size(); ++f)
                save_image((dir / ("fix" + std::to_string(i + 1) + "_frame" + std::to_string(f + 1) + ".png")).string(),
                           r.scans[i].frames[f]);
    }
    if (!a.annotated_png.empty()) save_image(under(g, a.annotated_png).string(), render_trace(working, r.trace));
    if (!a.out_map.empty()) write_tensor(under(g, a.out_map).string(), map_tensor(map_for(image, cfg)));
    std::cout << r.trace.fixations.size() << " fixations, stop: " << to_string(r.trace.stop_reason) << "\n";
    return kOk;
}

// ---- topdown ----

struct TrainArgs {
    std::string manifest, features_dir, out_model = "model.tsv", config;
};

FeatureMapStack load_features(const std::string& path, double spatial_scale) {
    FeatureMapStack s;
    s.maps = grids_from_tensor(read_tensor(path));
    s.source_tag = path;
    s.spatial_scale = spatial_scale;
    return s;
}

int cmd_train(const Global& g, const TrainArgs& a) {
    const RunConfig cfg = config_or_default(a.config);
    const DatasetManifest m = load_manifest(a.manifest);
    std::vector<TrainingExample> training;
    for (const auto& e : m.entries) {
        if (!e.class_id || e.boxes.empty()) continue;
        const fs::path feat = fs::path(a.features_dir) / (e.id + ".gsal");
        if (!fs::exists(feat)) throw IoError("feature tensor not found: " + feat.string(), feat.string());
        const FeatureMapStack stack = load_features(feat.string(), m.spatial_scale);
        for (const auto& b : e.boxes) training.push_back({stack, {e.id, *e.class_id, b}});
    }
    if (training.empty()) throw ValidationError("manifest has no labeled boxes");
    const TrainingResult r = learn_weights(training, cfg.kernel_specs(), cfg.alpha);
    write_model(under(g, a.out_model), r.model);
    for (const auto& f : r.floored)
        std::cerr << "floored outside saliency: image " << f.image_id << " map " << f.map_index << "\n";
    std::cout << r.model.classes.size() << " classes, " << training.size() << " boxes, " << r.floored.size()
              << " floored terms\n";
    return kOk;
}

struct SearchArgs {
    std::string image, features, model, class_id, out_trace = "search.tsv", config, target, annotated_png;
    double spatial_scale = 1.0;
};

int cmd_search(const Global& g, const SearchArgs& a) {
    const RunConfig cfg = config_or_default(a.config);
    const EngineConfig e = cfg.engine();
    const RgbImage image = load_image(a.image);
    const RgbImage working = to_working_resolution(image, e.saliency.resize);
    const double to_working = static_cast<double>(working.width()) / image.width();
    const FeatureMapStack features = load_features(a.features, a.spatial_scale * to_working);
    const TopDownModel model = read_model(a.model);
    std::optional<Box> target;
    if (!a.target.empty()) {
        const auto boxes = parse_boxes(a.target, "--target");
        if (boxes.size() != 1) throw ValidationError("--target takes exactly one box");
        const Box& b = boxes.front();
        target = Box{static_cast<int>(std::lround(b.x0 * to_working)), static_cast<int>(std::lround(b.y0 * to_working)),
                     static_cast<int>(std::lround(b.x1 * to_working)), static_cast<int>(std::lround(b.y1 * to_working))};
    }
    const SearchResult r = search(working, features, model, a.class_id, target.value_or(Box{}), e);
    write_trace(under(g, a.out_trace), r.cycle.trace);
    if (!a.annotated_png.empty()) save_image(under(g, a.annotated_png).string(), render_trace(working, r.cycle.trace));
    if (target)
        std::cout << "saccades to target: " << r.saccades << (r.found ? "" : " (not found)") << "\n";
    else
        std::cout << r.cycle.trace.fixations.size() << " fixations\n";
    return kOk;
}

// ---- eval ----

struct EvalArgs {
    std::string maps_dir, fixations, metrics = "judd,borji,sim,cc,nss", out_csv = "metrics.csv", out_roc, config;
};

int cmd_eval(const Global& g, const EvalArgs& a) {
    const RunConfig cfg = config_or_default(a.config);
    const DatasetManifest m = load_manifest(a.fixations);
    const auto wanted = detail::split(a.metrics, ',');
    for (const auto& w : wanted)
        if (w != "judd" && w != "borji" && w != "sim" && w != "cc" && w != "nss")
            throw ValidationError("unknown metric '" + w + "'");
    auto has = [&](const char* k) { return std::find(wanted.begin(), wanted.end(), k) != wanted.end(); };
    const bool need_density = has("sim") || has("cc");
    if (need_density && !(m.px_per_degree > 0))
        throw ValidationError("manifest needs '# px_per_degree=' for sim/cc");

    std::vector<std::vector<MetricRow>> per_entry(m.entries.size());
    parallel_for(m.entries.size(), resolve_jobs(g.jobs), [&](std::size_t i) {
        const auto& e = m.entries[i];
        if (!e.fixations) throw ValidationError("manifest entry '" + e.id + "' has no fixation file");
        const fs::path map_path = fs::path(a.maps_dir) / (e.id + ".gsal");
        if (!fs::exists(map_path)) throw IoError("saliency map not found: " + map_path.string(), map_path.string());
        const Tensor t = read_tensor(map_path.string());
        if (t.count != 1) throw FormatError(map_path.string() + ": expected a single map");
        const RgbImage image = load_image(e.image.string());
        const GridD map = resize_bilinear(grids_from_tensor(t).front(), image.width(), image.height());
        const FixationSet fix = load_fixations(*e.fixations, image.width(), image.height(), e.id);
        auto row = [&](const char* name, MetricValue v) {
            per_entry[i].push_back({e.id, name, v.value, v.degenerate ? "degenerate" : ""});
        };
        if (has("judd")) row("auc_judd", auc_judd(map, fix));
        if (has("borji")) row("auc_borji", auc_borji(map, fix, cfg.borji_splits, cfg.seed));
        if (need_density) {
            const GridD density = density_map(fix, m.px_per_degree);
            if (has("sim")) row("sim", sum(map) > 0 ? MetricValue{similarity(map, density), false} : MetricValue{0.0, true});
            if (has("cc")) row("cc", correlation(map, density));
        }
        if (has("nss")) row("nss", nss(map, fix));
        if (!a.out_roc.empty()) {
            const fs::path roc = under(g, (fs::path(a.out_roc) / (e.id + "_roc.csv")).string());
            detail::write_text(roc, format_roc(roc_curve(map, fix, RocMode::Judd)));
        }
    });

    MetricTable table;
    table.settings = {{"dataset", m.dataset},
                      {"px_per_degree", format_double(m.px_per_degree)},
                      {"density_sigma_px", format_double(m.px_per_degree)},
                      {"borji_splits", std::to_string(cfg.borji_splits)},
                      {"seed", std::to_string(cfg.seed)}};
    std::map<std::string, std::pair<double, int>> means;
    std::vector<std::string> order;
    for (const auto& rows : per_entry)
        for (const auto& r : rows) {
            table.rows.push_back(r);
            if (!means.count(r.metric)) order.push_back(r.metric);
            means[r.metric].first += r.value;
            means[r.metric].second += 1;
        }
    write_metrics_csv(under(g, a.out_csv), table);
    for (const auto& k : order) std::cout << k << " mean " << means[k].first / means[k].second << "\n";
    return kOk;
}

// ---- bench ----

struct BenchArgs {
    std::string manifest, input, config, out_csv = "bench.csv";
    int reps = 10;
};

int cmd_bench(const Global& g, const BenchArgs& a) {
    const RunConfig cfg = config_or_default(a.config);
    if (a.reps < 1) throw ValidationError("--reps must be >= 1");
    std::vector<RgbImage> images;
    if (!a.input.empty()) images.push_back(load_image(a.input));
    if (!a.manifest.empty())
        for (const auto& e : load_manifest(a.manifest).entries) images.push_back(load_image(e.image.string()));
    if (images.empty()) throw ValidationError("bench needs --input or --manifest with at least one image");
    const BenchReport r = bench_saliency(images, cfg.engine().saliency, a.reps);
    const std::string csv = format_bench_csv(r);
    detail::write_text(under(g, a.out_csv), csv);
    std::cout << csv;
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gamma-kernel saliency, foveation, scanpaths and evaluation"};
    app.fallthrough();
    app.require_subcommand(1);
    Global g;
    app.add_option("--out-dir", g.out_dir, "Root directory for relative output paths");
    app.add_option("--jobs", g.jobs, "Parallel workers for batch commands (default: $GSAL_JOBS or all cores)")
        ->check(CLI::NonNegativeNumber);

    SaliencyArgs sal;
    auto* s = app.add_subcommand("saliency", "Bottom-up saliency map of an image or a manifest");
    s->add_option("--input", sal.input, "Input image")->check(CLI::ExistingFile);
    s->add_option("--manifest", sal.manifest, "Manifest for batch mode");
    s->add_option("--params", sal.params, "key=value config file");
    s->add_option("--out-map", sal.out_map, "Output tensor (batch: output directory)");
    s->add_option("--out-png", sal.out_png, "Output heatmap PNG (batch: output directory)");
    s->add_option("--overlay", sal.overlay, "Blend the heatmap over the image with this weight")->check(CLI::Range(0.0, 1.0));

    FoveateArgs fov;
    auto* f = app.add_subcommand("foveate", "Foveate an image around a point");
    f->add_option("--input", fov.input, "Input image")->required()->check(CLI::ExistingFile);
    f->add_option("--x", fov.x, "Fixation column (default: center)");
    f->add_option("--y", fov.y, "Fixation row (default: center)");
    f->add_option("--resolution", fov.resolution, "Fovea radius / eccentricity step in px");
    f->add_option("--levels", fov.levels, "Pyramid depth");
    f->add_option("--out", fov.out, "Output image")->required();

    ScanpathArgs sp;
    auto* p = app.add_subcommand("scanpath", "Simulated fixation sequence with segmentation and scan frames");
    p->add_option("--input", sp.input, "Input image")->required()->check(CLI::ExistingFile);
    p->add_option("--config", sp.config, "key=value config file");
    p->add_option("--out-trace", sp.out_trace, "Trace TSV");
    p->add_option("--out-frames", sp.out_frames, "Directory for scan frames");
    p->add_option("--annotated-png", sp.annotated_png, "Image with the trace drawn on it");
    p->add_option("--out-map", sp.out_map, "Saliency map tensor");

    auto* td = app.add_subcommand("topdown", "Top-down weight training and guided search");
    td->require_subcommand(1);
    td->fallthrough();
    TrainArgs tr;
    auto* t = td->add_subcommand("train", "Learn per-class feature-map weights from boxes");
    t->add_option("--manifest", tr.manifest, "Manifest with boxes and class labels")->required();
    t->add_option("--features-dir", tr.features_dir, "Directory of <image id>.gsal feature tensors")->required();
    t->add_option("--out-model", tr.out_model, "Model file");
    t->add_option("--config", tr.config, "key=value config file (kernel, alpha)");
    SearchArgs se;
    auto* q = td->add_subcommand("search", "Fused bottom-up x top-down search");
    q->add_option("--image", se.image, "Input image")->required()->check(CLI::ExistingFile);
    q->add_option("--features", se.features, "Feature tensor for the image")->required();
    q->add_option("--spatial-scale", se.spatial_scale, "Image pixels per feature-grid pixel");
    q->add_option("--model", se.model, "Model file")->required();
    q->add_option("--class", se.class_id, "Target class")->required();
    q->add_option("--target", se.target, "Target box x0,y0,x1,y1 in image pixels, for saccade counting");
    q->add_option("--config", se.config, "key=value config file");
    q->add_option("--out-trace", se.out_trace, "Trace TSV");
    q->add_option("--annotated-png", se.annotated_png, "Image with the trace drawn on it");

    EvalArgs ev;
    auto* e = app.add_subcommand("eval", "Score saliency maps against fixations");
    e->add_option("--maps-dir", ev.maps_dir, "Directory of <image id>.gsal maps")->required();
    e->add_option("--fixations", ev.fixations, "Manifest with fixation files")->required();
    e->add_option("--metrics", ev.metrics, "Comma-separated subset of judd,borji,sim,cc,nss");
    e->add_option("--out-csv", ev.out_csv, "Per-image metric CSV");
    e->add_option("--out-roc", ev.out_roc, "Directory for per-image Judd ROC curves");
    e->add_option("--config", ev.config, "key=value config file (seed, borji_splits)");

    BenchArgs bn;
    auto* b = app.add_subcommand("bench", "Per-stage saliency timing");
    b->add_option("--manifest", bn.manifest, "Manifest of images");
    b->add_option("--input", bn.input, "Single image")->check(CLI::ExistingFile);
    b->add_option("--config", bn.config, "key=value config file");
    b->add_option("--reps", bn.reps, "Timed repetitions per image (after one warmup)");
    b->add_option("--out-csv", bn.out_csv, "Timing CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& ex) {
        return app.exit(ex);
    } catch (const CLI::CallForAllHelp& ex) {
        return app.exit(ex);
    } catch (const CLI::ParseError& ex) {
        const bool missing_file = ex.get_name() == "ValidationError" && std::string(ex.what()).find("File does not exist") != std::string::npos;
        app.exit(ex);
        return missing_file ? kMissingFile : kUsage;
    }

    try {
        if (*s) return cmd_saliency(g, sal);
        if (*f) return cmd_foveate(g, fov);
        if (*p) return cmd_scanpath(g, sp);
        if (*t) return cmd_train(g, tr);
        if (*q) return cmd_search(g, se);
        if (*e) return cmd_eval(g, ev);
        if (*b) return cmd_bench(g, bn);
    } catch (const IoError& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kMissingFile;
    } catch (const ValidationError& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kInvalid;
    } catch (const FormatError& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kFormat;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kOther;
    }
    return kUsage;
}
