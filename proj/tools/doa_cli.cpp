// Command-line driver: Zubov evaluation, datasets, surrogate training and
// level-curve extraction.

#include "doa/datagen.hpp"
#include "doa/levelset.hpp"
#include "doa/mlp.hpp"
#include "doa/parallel.hpp"
#include "doa/presets.hpp"
#include "doa/svg.hpp"
#include "doa/zubov.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#ifndef DOA_VERSION
#define DOA_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace doa;

namespace {

// Exit codes.
constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kInconclusive = 3;
constexpr int kNoConverged = 4;

struct GlobalFlags {
    std::string system = "vdp";
    std::string params;
    std::uint64_t seed = 1;
    std::size_t workers = default_workers();
    std::string out_dir = ".";
};

// Zubov and solver knobs; unset values fall back to per-system defaults.
struct ZubovFlags {
    std::optional<double> delta_I, M, alpha, dt_chunk, t_max, rtol, atol;
    std::string w;
    std::vector<double> lower, upper;
};

struct Context {
    SystemModel sys;
    WKind w;
    ZubovConfig cfg;
    Region region;
    std::string params_path;
};

std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

Vec to_vec(const std::vector<double>& v) { return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())); }

Context build_context(const GlobalFlags& g, const ZubovFlags& z) {
    if (!g.params.empty() && g.system != "swing") throw Error("--params only applies to --system swing");
    Preset pre = make_preset(g.system, g.params);
    Context ctx{std::move(pre.sys), pre.w, pre.cfg, pre.region, pre.params_path};

    if (!z.w.empty()) ctx.w = parse_w(z.w);
    if (z.M) {
        ctx.cfg.M = *z.M;
        ctx.cfg.alpha = 20.0 / *z.M;
    }
    if (z.alpha) ctx.cfg.alpha = *z.alpha;
    if (z.delta_I) ctx.cfg.delta_I = *z.delta_I;
    if (z.dt_chunk) ctx.cfg.dt_chunk = *z.dt_chunk;
    if (z.t_max) ctx.cfg.t_max = *z.t_max;
    if (z.rtol) ctx.cfg.solver.rel_tol = *z.rtol;
    if (z.atol) ctx.cfg.solver.abs_tol = *z.atol;
    ctx.cfg.validate();
    if (!z.lower.empty() || !z.upper.empty()) {
        if (z.lower.size() != z.upper.size()) throw Error("--lower and --upper must have the same length");
        ctx.region = Region(to_vec(z.lower), to_vec(z.upper));
    }
    require_dim("region", ctx.sys.dim(), ctx.region.dim());
    if (const auto* d = std::get_if<DistanceSquared>(&ctx.w)) require_dim("W center", ctx.sys.dim(), d->center.size());
    return ctx;
}

json context_json(const GlobalFlags& g, const Context& ctx) {
    json j;
    j["system"] = g.system;
    if (!ctx.params_path.empty()) j["params"] = fs::absolute(ctx.params_path).string();
    j["w"] = describe(ctx.w);
    j["M"] = ctx.cfg.M;
    j["alpha"] = ctx.cfg.alpha;
    j["delta_I"] = ctx.cfg.delta_I;
    j["dt_chunk"] = ctx.cfg.dt_chunk;
    j["t_max"] = ctx.cfg.t_max;
    j["rel_tol"] = ctx.cfg.solver.rel_tol;
    j["abs_tol"] = ctx.cfg.solver.abs_tol;
    j["region_lower"] = to_std(ctx.region.lower);
    j["region_upper"] = to_std(ctx.region.upper);
    return j;
}

class Manifest {
public:
    Manifest(std::string command, const GlobalFlags& g, int argc, char** argv)
        : command_(std::move(command)), out_dir_(g.out_dir), start_(std::chrono::steady_clock::now()) {
        doc_["command"] = command_;
        doc_["version"] = DOA_VERSION;
        doc_["argv"] = std::vector<std::string>(argv, argv + argc);
        doc_["seed"] = g.seed;
        doc_["workers"] = g.workers;
        doc_["out_dir"] = fs::absolute(g.out_dir).string();
        doc_["inputs"] = json::object();
        doc_["outputs"] = json::array();
    }

    json& config() { return doc_["config"]; }
    json& results() { return doc_["results"]; }
    void input(const std::string& role, const std::string& path) { doc_["inputs"][role] = fs::absolute(path).string(); }

    /// Registers an output file and returns its full path under the output directory.
    std::string output(const std::string& name) {
        const fs::path p = fs::path(out_dir_) / name;
        if (p.has_parent_path()) fs::create_directories(p.parent_path());
        doc_["outputs"].push_back(fs::absolute(p).string());
        return p.string();
    }

    void write() {
        doc_["timings"]["wall_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        const fs::path p = fs::path(out_dir_) / (command_ + "_manifest.json");
        std::ofstream os(p);
        if (!os) throw Error("cannot write manifest " + p.string());
        os << doc_.dump(2) << '\n';
    }

private:
    std::string command_;
    std::string out_dir_;
    std::chrono::steady_clock::time_point start_;
    json doc_;
};

std::ofstream open_output(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open '" + path + "' for writing");
    return os;
}

// Evaluates compute_I for many initial states; trajectories are dropped.
std::vector<IValueOutcome> batch_compute(const Context& ctx, const std::vector<Vec>& xs, std::size_t workers) {
    std::vector<IValueOutcome> out(xs.size());
    parallel_for(xs.size(), workers, [&](std::size_t i) {
        out[i] = compute_I(ctx.sys, ctx.w, xs[i], ctx.cfg);
        out[i].trajectory = {};
    });
    return out;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

// ---------------------------------------------------------------------------

int cmd_eval(const Context& ctx, const std::vector<double>& x0) {
    const Vec x = to_vec(x0);
    require_dim("--x0", ctx.sys.dim(), x.size());
    const IValueOutcome o = compute_I(ctx.sys, ctx.w, x, ctx.cfg);
    std::cout << "system: " << ctx.sys.name() << "\n";
    std::cout << "outcome: " << to_string(o.kind) << "\n";
    std::cout << "elapsed: " << fmt(o.elapsed) << "\n";
    if (o.kind == OutcomeKind::Inconclusive) {
        std::cerr << "error: cannot classify within t_max = " << ctx.cfg.t_max << " (z = " << fmt(o.z_final)
                  << "); raise --t-max or --delta-i\n";
        return kInconclusive;
    }
    if (o.converged()) std::cout << "I: " << fmt(o.I) << "\n";
    else std::cout << "I: >" << fmt(ctx.cfg.M) << (o.blew_up ? " (blow-up)" : "") << "\n";
    std::cout << "V: " << fmt(eval_V(o, ctx.cfg.alpha)) << "\n";
    std::cout << "verdict: " << (o.converged() ? "inside" : "outside/boundary-layer") << "\n";
    return kOk;
}

int cmd_ivalue(const Context& ctx, const GlobalFlags& g, Manifest& man, std::size_t n) {
    if (n < 1) throw Error("--samples must be at least 1");
    const auto xs = sample_uniform(ctx.region, n, g.seed);
    const auto outcomes = batch_compute(ctx, xs, g.workers);

    const std::string table = man.output("ivalue.csv");
    {
        auto os = open_output(table);
        write_ivalue_table(os, outcomes, ctx.cfg.M);
    }
    std::vector<ScatterPoint> pts;
    std::size_t converged = 0;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        const auto& o = outcomes[i];
        if (o.kind == OutcomeKind::Inconclusive) continue;
        converged += o.converged();
        const double I = o.converged() ? o.I : ctx.cfg.M;
        pts.push_back({static_cast<double>(i), I, I, !o.converged()});
    }
    {
        Vec lo(2), hi(2);
        lo << 0.0, 0.0;
        hi << static_cast<double>(std::max<std::size_t>(n, 2)), 1.05 * ctx.cfg.M;
        auto os = open_output(man.output("ivalue.svg"));
        write_scatter_svg(os, Region(lo, hi), pts, ctx.cfg.M, "I-value plot (" + ctx.sys.name() + ")");
    }
    man.config()["samples"] = n;
    if (converged == 0) {
        std::cerr << "error: no converged samples among " << n << "; calibration impossible\n";
        man.results()["converged"] = 0;
        man.write();
        return kNoConverged;
    }
    const Calibration c = calibrate(outcomes);
    std::cout << c << "\n";
    std::cout << "suggested M: " << fmt(c.M) << "\nsuggested alpha: " << fmt(c.alpha) << "\n";
    man.results() = {{"max_converged_I", c.max_converged_I}, {"suggested_M", c.M},   {"suggested_alpha", c.alpha},
                     {"gap", c.gap},                         {"converged", c.converged}, {"exceeded", c.exceeded},
                     {"inconclusive", c.inconclusive}};
    man.write();
    return kOk;
}

int cmd_dataset(const Context& ctx, const GlobalFlags& g, Manifest& man, std::size_t traj, std::size_t extra,
                const std::string& labels, const std::string& name) {
    GenerateOptions opt;
    opt.workers = g.workers;
    opt.labels = parse_label_space(labels);
    const std::string path = man.output(name);
    const Dataset d = generate_dataset(ctx.sys, ctx.w, ctx.cfg, ctx.region, traj, extra, g.seed, opt);
    write_dataset(d, path);
    std::cout << "points: " << d.size() << " (converged " << d.meta.converged << ", exceeded " << d.meta.exceeded
              << ", inconclusive " << d.meta.inconclusive << ")\n";
    std::cout << "wrote " << path << "\n";
    man.config()["trajectories"] = traj;
    man.config()["k_extra"] = extra;
    man.config()["labels"] = labels;
    man.results() = {{"points", d.size()},
                     {"converged", d.meta.converged},
                     {"exceeded", d.meta.exceeded},
                     {"inconclusive", d.meta.inconclusive}};
    man.write();
    return kOk;
}

struct TrainFlags {
    std::string train_path, val_path, model = "model.txt", history = "history.csv";
    std::vector<long> hidden{40, 40, 40};
    TrainConfig cfg;
};

int cmd_train(const GlobalFlags& g, Manifest& man, TrainFlags f) {
    const Dataset tr = read_dataset(f.train_path);
    const Dataset va = read_dataset(f.val_path);
    man.input("train", f.train_path);
    man.input("validation", f.val_path);
    if (tr.dim != va.dim) throw Error("training and validation datasets differ in dimension");
    MlpArchitecture arch;
    arch.input_dim = tr.dim;
    for (long h : f.hidden) arch.hidden.push_back(h);
    f.cfg.seed = g.seed;
    const TrainResult res = train(init_params(arch, g.seed), tr, va, f.cfg);
    save_model(res.params, man.output(f.model));
    {
        auto os = open_output(man.output(f.history));
        os << "epoch,train_loss,val_rmse\n";
        char buf[96];
        for (std::size_t e = 0; e < res.history.train_loss.size(); ++e) {
            std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", e, res.history.train_loss[e], res.history.val_rmse[e]);
            os << buf;
        }
    }
    const std::size_t best = res.history.best_epoch;
    std::cout << "final train loss: " << fmt(res.history.train_loss.back()) << "\n";
    std::cout << "best epoch: " << best << " (validation RMSE " << fmt(res.history.val_rmse[best]) << ")\n";
    man.config() = {{"hidden", f.hidden},
                    {"epochs", f.cfg.epochs},
                    {"batch_size", f.cfg.batch_size},
                    {"learning_rate", f.cfg.learning_rate},
                    {"final_learning_rate", f.cfg.final_learning_rate},
                    {"standardize", f.cfg.standardize}};
    man.results() = {{"final_train_loss", res.history.train_loss.back()},
                     {"best_epoch", best},
                     {"best_val_rmse", res.history.val_rmse[best]}};
    man.write();
    return kOk;
}

int cmd_validate(Manifest& man, const std::string& model_path, const std::string& data_path) {
    const auto p = load_model(model_path);
    const Dataset d = read_dataset(data_path);
    man.input("model", model_path);
    man.input("data", data_path);
    const ErrorStats s = validate(p, d);
    std::cout << "points: " << d.size() << "\n";
    std::cout << "rmse: " << fmt(s.rmse) << "\n";
    std::cout << "p25: " << fmt(s.p25) << "\np75: " << fmt(s.p75) << "\n";
    std::cout << "max_abs_error: " << fmt(s.max_abs_error) << "\n";
    {
        auto os = open_output(man.output("validation_histogram.csv"));
        os << "bin_low,bin_high,count\n";
        const double width = (s.hist_high - s.hist_low) / static_cast<double>(s.histogram.size());
        char buf[96];
        for (std::size_t b = 0; b < s.histogram.size(); ++b) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%zu\n", s.hist_low + width * static_cast<double>(b),
                          s.hist_low + width * static_cast<double>(b + 1), s.histogram[b]);
            os << buf;
        }
    }
    man.results() = {{"points", d.size()},
                     {"rmse", s.rmse},
                     {"p25", s.p25},
                     {"p75", s.p75},
                     {"max_abs_error", s.max_abs_error}};
    man.write();
    return kOk;
}

int cmd_levelcurves(const Context& ctx, const GlobalFlags& g, Manifest& man, const std::string& model_path,
                    const std::vector<double>& levels, long nx, long ny) {
    if (ctx.region.dim() != 2) throw Error("levelcurves needs a 2-dimensional system");
    Evaluator ev;
    std::optional<MlpParams<double>> model;
    if (!model_path.empty()) {
        model = load_model(model_path);
        man.input("model", model_path);
        require_dim("model input", 2, model->input_dim());
        ev = [&](const Vec& x) { return forward(*model, x); };
    } else {
        ev = [&](const Vec& x) { return eval_V(compute_I(ctx.sys, ctx.w, x, ctx.cfg), ctx.cfg.alpha); };
    }
    const GridField grid = evaluate_grid(ev, ctx.region, nx, ny, g.workers);
    std::vector<LevelCurve> curves;
    json per_level = json::array();
    for (double r : levels) {
        curves.push_back(extract_level(grid, r));
        std::size_t closed = 0;
        for (const auto& pl : curves.back().polylines) closed += is_closed(pl);
        const auto xs = positive_x1_crossings(curves.back());
        json entry = {{"level", r}, {"polylines", curves.back().polylines.size()}, {"closed", closed}};
        if (!xs.empty()) entry["max_positive_x1_crossing"] = xs.back();
        per_level.push_back(entry);
        std::cout << "level " << fmt(r) << ": " << curves.back().polylines.size() << " polylines (" << closed
                  << " closed)";
        if (!xs.empty()) std::cout << ", outer x1-axis crossing " << fmt(xs.back());
        std::cout << "\n";
    }
    if (grid.failures) std::cout << "evaluation failures (set to V=1): " << grid.failures << "\n";
    {
        auto os = open_output(man.output("levelcurves.csv"));
        write_level_curves_csv(os, curves);
    }
    {
        auto os = open_output(man.output("levelcurves.svg"));
        write_level_curves_svg(os, ctx.region, curves,
                               "Level curves of V (" + std::string(model ? "network" : "integral") + ")");
    }
    man.config()["evaluator"] = model ? "model" : "integral";
    man.config()["levels"] = levels;
    man.config()["nx"] = nx;
    man.config()["ny"] = ny;
    man.results() = {{"levels", per_level}, {"evaluation_failures", grid.failures}};
    man.write();
    return kOk;
}

int cmd_residual_check(const Context& ctx, const GlobalFlags& g, Manifest& man, std::size_t count,
                       const ResidualOptions& ropt) {
    // Draw candidates in blocks until enough converged, nontrivial trajectories are found.
    std::vector<Vec> picked;
    std::uint64_t next = 0;
    const std::uint64_t limit = 100 * static_cast<std::uint64_t>(count) + 100;
    while (picked.size() < count && next < limit) {
        std::vector<Vec> xs;
        for (std::size_t k = 0; k < count; ++k) xs.push_back(sample_uniform_at(ctx.region, g.seed, next++));
        const auto outs = batch_compute(ctx, xs, g.workers);
        for (std::size_t k = 0; k < xs.size() && picked.size() < count; ++k)
            if (outs[k].converged() && outs[k].I > 0.0) picked.push_back(xs[k]);
    }
    if (picked.empty()) {
        std::cerr << "error: no converged trajectories found in " << next << " samples\n";
        return kNoConverged;
    }
    std::vector<double> res(picked.size());
    parallel_for(picked.size(), g.workers,
                 [&](std::size_t i) { res[i] = zubov_residual(ctx.sys, ctx.w, picked[i], ctx.cfg, ropt); });
    double worst = 0.0;
    {
        auto os = open_output(man.output("residual.csv"));
        os << "trajectory";
        for (Eigen::Index k = 0; k < ctx.sys.dim(); ++k) os << ",x" << k + 1;
        os << ",max_relative_residual\n";
        char buf[48];
        for (std::size_t i = 0; i < picked.size(); ++i) {
            os << i;
            for (Eigen::Index k = 0; k < picked[i].size(); ++k) {
                std::snprintf(buf, sizeof buf, ",%.17g", picked[i](k));
                os << buf;
            }
            std::snprintf(buf, sizeof buf, ",%.17g\n", res[i]);
            os << buf;
            worst = std::max(worst, res[i]);
        }
    }
    std::cout << "trajectories: " << picked.size() << "\n";
    std::cout << "max relative residual: " << fmt(worst) << "\n";
    man.config()["trajectories"] = count;
    man.config()["sample_dt"] = ropt.sample_dt;
    man.config()["v_cap"] = ropt.v_cap;
    man.results() = {{"trajectories", picked.size()}, {"max_relative_residual", worst}};
    man.write();
    return kOk;
}

void add_zubov_flags(CLI::App* sub, ZubovFlags& z, bool with_region) {
    sub->add_option("--w", z.w, "W function, e.g. distance_squared:0,0 or field_norm_scaled:1000");
    sub->add_option("--M", z.M, "divergence threshold on z (sets alpha = 20/M unless --alpha is given)");
    sub->add_option("--alpha", z.alpha, "scale factor in V = tanh(alpha I)");
    sub->add_option("--delta-i", z.delta_I, "slope threshold for convergence");
    sub->add_option("--dt-chunk", z.dt_chunk, "integration chunk length");
    sub->add_option("--t-max", z.t_max, "give up after this much simulated time");
    sub->add_option("--rtol", z.rtol, "solver relative tolerance");
    sub->add_option("--atol", z.atol, "solver absolute tolerance");
    if (with_region) {
        sub->add_option("--lower", z.lower, "region lower corner (comma separated)")->delimiter(',');
        sub->add_option("--upper", z.upper, "region upper corner (comma separated)")->delimiter(',');
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Domain-of-attraction estimation through the integral solution of Zubov's equation"};
    app.set_version_flag("--version", DOA_VERSION);
    app.require_subcommand(1);
    app.fallthrough();

    GlobalFlags g;
    app.add_option("--system", g.system, "vdp, swing or linear")
        ->check(CLI::IsMember({"vdp", "swing", "linear"}))
        ->capture_default_str();
    app.add_option("--params", g.params, "swing parameter file (default: shipped 39-bus file)");
    app.add_option("--seed", g.seed, "random seed")->capture_default_str();
    app.add_option("--workers", g.workers, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--out-dir", g.out_dir, "directory for outputs and manifests")->capture_default_str();

    ZubovFlags z;

    auto* eval = app.add_subcommand("eval", "evaluate I(x) and V(x) at one state");
    std::vector<double> x0;
    eval->add_option("--x0", x0, "initial state (comma separated)")->required()->delimiter(',');
    add_zubov_flags(eval, z, false);

    auto* ivalue = app.add_subcommand("ivalue", "I-value table, plot and suggested M/alpha");
    std::size_t samples = 3000;
    ivalue->add_option("--samples,-n", samples, "number of uniform samples")->capture_default_str();
    add_zubov_flags(ivalue, z, true);

    auto* dataset = app.add_subcommand("dataset", "generate a labeled dataset");
    std::size_t traj = 1000, extra = 4;
    std::string labels = "V", dataset_name = "dataset.csv";
    dataset->add_option("--traj", traj, "number of trajectories")->capture_default_str();
    dataset->add_option("--extra", extra, "extra points per converged trajectory")->capture_default_str();
    dataset->add_option("--labels", labels, "label space V or I")->check(CLI::IsMember({"V", "I"}));
    dataset->add_option("--output,-o", dataset_name, "file name inside --out-dir")->capture_default_str();
    add_zubov_flags(dataset, z, true);

    auto* trainc = app.add_subcommand("train", "train the network surrogate");
    TrainFlags tf;
    trainc->add_option("--train", tf.train_path, "training dataset")->required()->check(CLI::ExistingFile);
    trainc->add_option("--val", tf.val_path, "validation dataset")->required()->check(CLI::ExistingFile);
    trainc->add_option("--hidden", tf.hidden, "hidden layer widths")->delimiter(',');
    trainc->add_option("--epochs", tf.cfg.epochs)->capture_default_str();
    trainc->add_option("--batch", tf.cfg.batch_size)->capture_default_str();
    trainc->add_option("--lr", tf.cfg.learning_rate)->capture_default_str();
    trainc->add_option("--final-lr", tf.cfg.final_learning_rate, "exponential decay target (off when negative)");
    trainc->add_flag("--verbose", tf.cfg.verbose);
    trainc->add_option("--model", tf.model, "model file name inside --out-dir")->capture_default_str();
    trainc->add_option("--history", tf.history, "history file name inside --out-dir")->capture_default_str();

    auto* validatec = app.add_subcommand("validate", "error statistics of a model on a dataset");
    std::string model_path, data_path;
    validatec->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
    validatec->add_option("--data", data_path)->required()->check(CLI::ExistingFile);

    auto* levels = app.add_subcommand("levelcurves", "level curves V = r on a 2-D grid");
    std::string lc_model;
    std::vector<double> lc_levels{0.7, 0.8, 0.99};
    long nx = 201, ny = 201;
    levels->add_option("model", lc_model, "saved model (default: integral evaluator)")->check(CLI::ExistingFile);
    levels->add_option("--levels", lc_levels)->delimiter(',');
    levels->add_option("--nx", nx)->capture_default_str();
    levels->add_option("--ny", ny)->capture_default_str();
    add_zubov_flags(levels, z, true);

    auto* residual = app.add_subcommand("residual-check", "Zubov PDE residual along converged trajectories");
    std::size_t res_count = 20;
    ResidualOptions ropt;
    ropt.v_cap = 0.999;
    residual->add_option("--trajectories", res_count)->capture_default_str();
    residual->add_option("--sample-dt", ropt.sample_dt)->capture_default_str();
    residual->add_option("--v-cap", ropt.v_cap, "score only samples with V below this")->capture_default_str();
    add_zubov_flags(residual, z, true);

    CLI11_PARSE(app, argc, argv);

    try {
        if (!eval->parsed()) fs::create_directories(g.out_dir);
        if (trainc->parsed()) {
            Manifest man("train", g, argc, argv);
            return cmd_train(g, man, tf);
        }
        if (validatec->parsed()) {
            Manifest man("validate", g, argc, argv);
            return cmd_validate(man, model_path, data_path);
        }
        const Context ctx = build_context(g, z);
        if (eval->parsed()) return cmd_eval(ctx, x0);

        const std::string name = app.get_subcommands().front()->get_name();
        Manifest man(name, g, argc, argv);
        man.config() = context_json(g, ctx);
        if (!ctx.params_path.empty()) man.input("params", ctx.params_path);
        if (ivalue->parsed()) return cmd_ivalue(ctx, g, man, samples);
        if (dataset->parsed()) return cmd_dataset(ctx, g, man, traj, extra, labels, dataset_name);
        if (levels->parsed()) return cmd_levelcurves(ctx, g, man, lc_model, lc_levels, nx, ny);
        if (residual->parsed()) return cmd_residual_check(ctx, g, man, res_count, ropt);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    }
    return kFailure;
}
