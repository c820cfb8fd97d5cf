// label-audit: file-based pipeline for detecting and rectifying label
// errors in classification datasets. Subcommands hand artifacts to each
// other through an output directory so each stage can also be run against
// externally produced feature dumps.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "labelaudit/confidence.hpp"
#include "labelaudit/dataset.hpp"
#include "labelaudit/detector.hpp"
#include "labelaudit/errors.hpp"
#include "labelaudit/evaluate.hpp"
#include "labelaudit/gradients.hpp"
#include "labelaudit/model.hpp"
#include "labelaudit/noise.hpp"
#include "labelaudit/score_table.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace labelaudit;

namespace {

struct Common {
    fs::path out;
    uint64_t seed = 16;
    int threads = 1;
    json config = json::object();
};

json load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw FormatError("cannot open config " + path);
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw FormatError(std::string("bad JSON config: ") + e.what());
    }
    return j;
}

// Dotted-path lookup into the config document.
const json* cfg_find(const json& cfg, const std::string& key) {
    const json* cur = &cfg;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot - start);
        if (!cur->is_object() || !cur->contains(part)) return nullptr;
        cur = &(*cur)[part];
        if (dot == std::string::npos) return cur;
        start = dot + 1;
    }
}

// Precedence: command-line flag > config key > built-in default.
template <typename T>
void cfg_override(const CLI::App& app, const std::string& flag,
                  const json& cfg, const std::string& key, T& var) {
    if (app.count(flag) > 0) return;
    if (const json* v = cfg_find(cfg, key)) var = v->get<T>();
}

Common parse_common(CLI::App& app, const std::string& config_path,
                    const std::string& out_flag, uint64_t seed, int threads) {
    Common c;
    c.config = config_path.empty() ? json::object() : load_config(config_path);
    std::string out = out_flag;
    if (out.empty()) {
        if (const json* v = cfg_find(c.config, "out")) out = v->get<std::string>();
    }
    if (out.empty()) {
        if (const char* env = std::getenv("LABEL_AUDIT_OUT")) out = env;
    }
    if (out.empty()) out = ".";
    c.out = out;
    c.seed = seed;
    c.threads = threads;
    cfg_override(app, "--seed", c.config, "seed", c.seed);
    cfg_override(app, "--threads", c.config, "threads", c.threads);
    fs::create_directories(c.out);
    return c;
}

// Feature files carry positional ids starting at 0, so an auxiliary set cut
// from another file would collide with the audited ids. Shift the aux ids
// into a range of their own; they only name neighbors, never outputs.
void offset_aux_ids(AuxiliarySet& aux) {
    for (auto& id : aux.data.ids) id += uint64_t{1} << 32;
}

FileFormat detect_format(const fs::path& p) {
    return p.extension() == ".csv" ? FileFormat::csv : FileFormat::binary;
}

Dataset load_any(const fs::path& p, uint32_t classes = 0) {
    return load_features(p, detect_format(p), classes);
}

SimilarityMeasure parse_measure(const std::string& s) {
    if (s == "cos") return SimilarityMeasure::cos;
    if (s == "dot") return SimilarityMeasure::dot;
    throw ArgumentError("unknown similarity measure " + s);
}

ModelConfig model_config_from(const CLI::App& sub, const json& cfg,
                              std::size_t hidden, std::string activation,
                              std::size_t epochs, std::size_t batch,
                              double lr, double weight_decay,
                              std::string optimizer, uint64_t seed) {
    ModelConfig mc;
    cfg_override(sub, "--hidden", cfg, "model.hidden", hidden);
    cfg_override(sub, "--activation", cfg, "model.activation", activation);
    cfg_override(sub, "--epochs", cfg, "model.epochs", epochs);
    cfg_override(sub, "--batch", cfg, "model.batch", batch);
    cfg_override(sub, "--lr", cfg, "model.lr", lr);
    cfg_override(sub, "--weight-decay", cfg, "model.weight_decay",
                 weight_decay);
    cfg_override(sub, "--optimizer", cfg, "model.optimizer", optimizer);
    mc.hidden = hidden;
    if (activation == "tanh") mc.activation = Activation::tanh;
    else if (activation == "relu") mc.activation = Activation::relu;
    else throw ArgumentError("unknown activation " + activation);
    mc.epochs = epochs;
    mc.batch_size = batch;
    mc.lr_schedule = {lr};
    mc.weight_decay = weight_decay;
    if (optimizer == "adam") mc.optimizer = Optimizer::adam;
    else if (optimizer == "sgd") mc.optimizer = Optimizer::sgd;
    else throw ArgumentError("unknown optimizer " + optimizer);
    mc.seed = seed;
    return mc;
}

TrainResult load_checkpoints(const fs::path& dir) {
    TrainResult r;
    for (uint32_t t = 1;; ++t) {
        char name[32];
        std::snprintf(name, sizeof(name), "epoch_%03u.ckpt", t);
        const fs::path p = dir / name;
        if (!fs::exists(p)) break;
        r.checkpoints.push_back(ModelCheckpoint::load(p));
    }
    if (r.checkpoints.empty())
        throw FormatError("no checkpoints found in " + dir.string());
    r.best_epoch = 0;
    for (std::size_t i = 1; i < r.checkpoints.size(); ++i)
        if (r.checkpoints[i].val_accuracy >
            r.checkpoints[r.best_epoch].val_accuracy)
            r.best_epoch = i;
    return r;
}

LissaConfig lissa_from_config(const json& cfg) {
    LissaConfig lc;
    if (const json* v = cfg_find(cfg, "lissa.damping")) lc.damping = v->get<double>();
    if (const json* v = cfg_find(cfg, "lissa.scale")) lc.scale = v->get<double>();
    if (const json* v = cfg_find(cfg, "lissa.depth")) lc.depth = v->get<std::size_t>();
    if (const json* v = cfg_find(cfg, "lissa.repeats")) lc.repeats = v->get<std::size_t>();
    if (const json* v = cfg_find(cfg, "lissa.seed")) lc.seed = v->get<uint64_t>();
    return lc;
}

int run(int argc, char** argv) {
    CLI::App app{"label-audit: dataset label error detection and rectification"};
    app.require_subcommand(1);

    std::string config_path, out_flag;
    uint64_t seed = 16;
    int threads = 1;
    app.add_option("--config", config_path, "JSON config file")
        ->expected(1);
    app.add_option("--out", out_flag, "output directory");
    app.add_option("--seed", seed, "RNG seed");
    app.add_option("--threads", threads, "worker threads (1 = serial)");

    // ---- synth ----
    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    uint32_t classes = 8;
    std::size_t dim = 32, per_class = 500, val_per_class = 0, test_per_class = 0;
    double separation = 5.0, stddev = 1.0;
    synth->add_option("--classes", classes);
    synth->add_option("--dim", dim);
    synth->add_option("--per-class", per_class);
    synth->add_option("--val-per-class", val_per_class,
                      "default per-class / 4");
    synth->add_option("--test-per-class", test_per_class,
                      "default per-class / 4");
    synth->add_option("--separation", separation);
    synth->add_option("--std", stddev);

    // ---- inject ----
    auto* inject = app.add_subcommand("inject", "corrupt labels");
    std::string in_file, kind = "uniform", mapping_s;
    double rate = 0.1;
    uint32_t source_class = 0, target_class = 1;
    inject->add_option("--in", in_file, "dataset file (default out/train.bin)");
    inject->add_option("--kind", kind)->check(
        CLI::IsMember({"uniform", "ambiguity", "concentrated"}));
    inject->add_option("--rate", rate);
    inject->add_option("--mapping", mapping_s,
                       "comma-separated derangement, default cyclic shift");
    inject->add_option("--source-class", source_class);
    inject->add_option("--target-class", target_class);

    // ---- train ----
    auto* train_cmd = app.add_subcommand("train", "train the classifier");
    std::string train_file, val_file, ckpt_dir_s;
    std::size_t hidden = 0, epochs = 15, batch = 32;
    double lr = 1e-3, weight_decay = 0.0;
    std::string activation = "tanh", optimizer = "adam";
    train_cmd->add_option("--in", train_file, "default out/noisy.bin");
    train_cmd->add_option("--val", val_file, "default out/val.bin");
    train_cmd->add_option("--checkpoint-dir", ckpt_dir_s,
                          "default out/checkpoints");
    train_cmd->add_option("--hidden", hidden);
    train_cmd->add_option("--activation", activation)
        ->check(CLI::IsMember({"tanh", "relu"}));
    train_cmd->add_option("--epochs", epochs);
    train_cmd->add_option("--batch", batch);
    train_cmd->add_option("--lr", lr);
    train_cmd->add_option("--weight-decay", weight_decay);
    train_cmd->add_option("--optimizer", optimizer)
        ->check(CLI::IsMember({"adam", "sgd"}));

    // ---- score ----
    auto* score = app.add_subcommand("score", "compute suspicion scores");
    std::string methods_s = "sim-cos";
    std::size_t m_aux = 1000, k_nn = 100;
    std::optional<uint32_t> use_epoch;
    uint32_t use_epoch_v = 0;
    score->add_option("--in", train_file, "default out/noisy.bin");
    score->add_option("--val", val_file, "default out/val.bin");
    score->add_option("--checkpoint-dir", ckpt_dir_s,
                      "default out/checkpoints");
    score->add_option("--methods", methods_s,
                      "comma list from sc,nm,ce,if,gd,gc,tracin,sim-cos,sim-dot");
    score->add_option("--m", m_aux, "auxiliary set size");
    score->add_option("--k", k_nn, "neighbor count");
    auto* epoch_opt =
        score->add_option("--use-epoch", use_epoch_v,
                          "score at this epoch instead of the best one");

    // ---- rank ----
    auto* rank_cmd = app.add_subcommand("rank", "export one method's ranking");
    std::string scores_file, rank_method = "sim-cos";
    rank_cmd->add_option("--scores", scores_file, "default out/scores.csv");
    rank_cmd->add_option("--method", rank_method);

    // ---- rectify ----
    auto* rectify = app.add_subcommand("rectify", "rectify or remove suspects");
    double tau = 0.8, p_frac = 0.1;
    std::string measure_s = "cos", action = "rectify";
    rectify->add_option("--in", train_file, "default out/noisy.bin");
    rectify->add_option("--val", val_file, "default out/val.bin");
    rectify->add_option("--checkpoint-dir", ckpt_dir_s,
                        "default out/checkpoints");
    rectify->add_option("--m", m_aux);
    rectify->add_option("--k", k_nn);
    rectify->add_option("--tau", tau);
    rectify->add_option("--p", p_frac);
    rectify->add_option("--measure", measure_s)
        ->check(CLI::IsMember({"cos", "dot"}));
    rectify->add_option("--action", action)
        ->check(CLI::IsMember({"rectify", "remove"}));

    // ---- evaluate ----
    auto* evaluate = app.add_subcommand("evaluate",
                                        "detection curves and rates");
    std::string noise_file, cleaned_file, test_file;
    evaluate->add_option("--in", train_file, "default out/noisy.bin");
    evaluate->add_option("--noise", noise_file,
                         "default out/noise_report.csv");
    evaluate->add_option("--scores", scores_file, "default out/scores.csv");
    evaluate->add_option("--cleaned", cleaned_file,
                         "optional cleaned dataset for the reduction rate");

    // ---- theory-check ----
    auto* theory = app.add_subcommand("theory-check",
                                      "kernel ratio: analytic and empirical");
    double alpha = 0.93;
    std::size_t pairs = 2000;
    theory->add_option("--alpha", alpha);
    theory->add_option("--classes", classes);
    theory->add_option("--in", train_file,
                       "dataset for the empirical ratio (optional)");
    theory->add_option("--checkpoint-dir", ckpt_dir_s,
                       "default out/checkpoints");
    theory->add_option("--pairs", pairs);

    // ---- report ----
    auto* report = app.add_subcommand("report", "bundle artifacts into "
                                                "report.json + figures");
    report->add_option("--in", train_file, "default out/noisy.bin");
    report->add_option("--noise", noise_file, "default out/noise_report.csv");
    report->add_option("--scores", scores_file, "default out/scores.csv");
    report->add_option("--cleaned", cleaned_file, "default out/cleaned.bin");
    report->add_option("--checkpoint-dir", ckpt_dir_s,
                       "default out/checkpoints");
    report->add_option("--measure", measure_s)
        ->check(CLI::IsMember({"cos", "dot"}));
    report->add_option("--pairs", pairs);

    // global flags remain usable after the subcommand name
    for (CLI::App* s : app.get_subcommands([](const CLI::App*) { return true; }))
        s->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: argument: " << e.what() << "\n";
        return ArgumentError::exit_code;
    }
    Common c = parse_common(app, config_path, out_flag, seed, threads);
    const json& cfg = c.config;

    auto default_path = [&](std::string& var, const char* name) {
        if (var.empty()) var = (c.out / name).string();
    };

    if (*synth) {
        cfg_override(*synth, "--classes", cfg, "synth.classes", classes);
        cfg_override(*synth, "--dim", cfg, "synth.dim", dim);
        cfg_override(*synth, "--per-class", cfg, "synth.per_class", per_class);
        cfg_override(*synth, "--separation", cfg, "synth.separation",
                     separation);
        cfg_override(*synth, "--std", cfg, "synth.std", stddev);
        if (val_per_class == 0) val_per_class = std::max<std::size_t>(1, per_class / 4);
        if (test_per_class == 0) test_per_class = std::max<std::size_t>(1, per_class / 4);

        SynthSpec spec{classes, dim, per_class + val_per_class + test_per_class,
                       separation, stddev, c.seed};
        Dataset all = generate_synthetic(spec);
        // Deterministic carve-out: validation and test are per-class suffixes.
        auto carve = [&](std::size_t lo, std::size_t hi) {
            Dataset s;
            s.dim = all.dim;
            s.num_classes = all.num_classes;
            s.true_labels = std::vector<uint32_t>{};
            for (uint32_t cl = 0; cl < classes; ++cl) {
                const std::size_t base = static_cast<std::size_t>(cl) *
                                         spec.per_class;
                for (std::size_t i = lo; i < hi; ++i) {
                    const std::size_t r = base + i;
                    auto row = all.row(r);
                    s.features.insert(s.features.end(), row.begin(), row.end());
                    s.labels.push_back(all.labels[r]);
                    s.true_labels->push_back((*all.true_labels)[r]);
                    s.ids.push_back(all.ids[r]);
                }
            }
            return s;
        };
        save_features(carve(0, per_class), c.out / "train.bin",
                      FileFormat::binary);
        save_features(carve(per_class, per_class + val_per_class),
                      c.out / "val.bin", FileFormat::binary);
        save_features(
            carve(per_class + val_per_class, spec.per_class),
            c.out / "test.bin", FileFormat::binary);
        std::cout << "wrote train/val/test to " << c.out << "\n";
        return 0;
    }

    if (*inject) {
        default_path(in_file, "train.bin");
        cfg_override(*inject, "--kind", cfg, "noise.kind", kind);
        cfg_override(*inject, "--rate", cfg, "noise.rate", rate);
        Dataset d = load_any(in_file);
        std::pair<Dataset, NoiseReport> r{Dataset{}, NoiseReport{}};
        if (kind == "uniform") {
            r = inject_uniform(d, rate, c.seed);
        } else if (kind == "ambiguity") {
            std::vector<uint32_t> mapping;
            if (mapping_s.empty()) {
                mapping = cyclic_shift_mapping(d.num_classes);
            } else {
                std::stringstream ss(mapping_s);
                std::string cell;
                while (std::getline(ss, cell, ','))
                    mapping.push_back(static_cast<uint32_t>(std::stoul(cell)));
            }
            r = inject_ambiguity(d, rate, mapping, c.seed);
        } else {
            r = inject_concentrated(d, rate, source_class, target_class,
                                    c.seed);
        }
        save_features(r.first, c.out / "noisy.bin", FileFormat::binary);
        r.second.save_csv(c.out / "noise_report.csv");
        std::cout << "corrupted " << r.second.count() << " labels\n";
        return 0;
    }

    if (*train_cmd) {
        default_path(train_file, "noisy.bin");
        default_path(val_file, "val.bin");
        default_path(ckpt_dir_s, "checkpoints");
        const ModelConfig mc = model_config_from(
            *train_cmd, cfg, hidden, activation, epochs, batch, lr,
            weight_decay, optimizer, c.seed);
        Dataset d = load_any(train_file);
        Dataset val = load_any(val_file);
        const TrainResult result = train(d, val, mc);
        fs::create_directories(ckpt_dir_s);
        for (const auto& ck : result.checkpoints) {
            char name[32];
            std::snprintf(name, sizeof(name), "epoch_%03u.ckpt", ck.epoch);
            ck.save(fs::path(ckpt_dir_s) / name);
        }
        std::cout << "best epoch " << result.best().epoch << " val accuracy "
                  << result.best().val_accuracy << "\n";
        return 0;
    }

    if (*score) {
        default_path(train_file, "noisy.bin");
        default_path(val_file, "val.bin");
        default_path(ckpt_dir_s, "checkpoints");
        cfg_override(*score, "--methods", cfg, "methods", methods_s);
        cfg_override(*score, "--m", cfg, "m", m_aux);
        cfg_override(*score, "--k", cfg, "k", k_nn);
        if (epoch_opt->count() > 0) use_epoch = use_epoch_v;

        Dataset d = load_any(train_file);
        Dataset val = load_any(val_file);
        const TrainResult ckpts = load_checkpoints(ckpt_dir_s);
        const ModelCheckpoint* best = &ckpts.best();
        if (use_epoch) {
            if (*use_epoch < 1 || *use_epoch > ckpts.checkpoints.size())
                throw ArgumentError("--use-epoch out of range");
            best = &ckpts.checkpoints[*use_epoch - 1];
        }
        auto [rest, aux] = split_aux(val, m_aux, c.seed);
        (void)rest;
        offset_aux_ids(aux);

        std::vector<std::string> methods;
        {
            std::stringstream ss(methods_s);
            std::string cell;
            while (std::getline(ss, cell, ',')) methods.push_back(cell);
        }

        std::vector<ScoreTable> tables;
        std::vector<ProbRecord> recs;
        std::vector<LastLayerGradient> train_grads, aux_grads;
        for (const auto& method : methods) {
            if (method == "sc" || method == "nm" || method == "ce") {
                if (recs.empty()) recs = prob_records(*best, d, c.threads);
                tables.push_back(confidence_scores(recs, method));
                continue;
            }
            if (method == "sim-cos" || method == "sim-dot") {
                RectifyConfig rc;
                rc.k = k_nn;
                const auto measure = method == "sim-cos"
                                         ? SimilarityMeasure::cos
                                         : SimilarityMeasure::dot;
                auto result = audit(d, aux, *best, rc, measure, c.threads);
                tables.push_back(std::move(result.scores));
                continue;
            }
            if (method == "gd" || method == "gc" || method == "if") {
                if (train_grads.empty()) {
                    train_grads = last_layer_gradients(*best, d, c.threads);
                    aux_grads =
                        last_layer_gradients(*best, aux.data, c.threads);
                }
                if (method == "gd") {
                    tables.push_back(aggregate_influence(
                        train_grads, aux_grads, InfluenceMethod::GD,
                        c.threads));
                } else if (method == "gc") {
                    tables.push_back(aggregate_influence(
                        train_grads, aux_grads, InfluenceMethod::GC,
                        c.threads));
                } else {
                    LissaConfig lc = lissa_from_config(cfg);
                    lc.seed = c.seed;
                    if (const json* v = cfg_find(cfg, "lissa.seed"))
                        lc.seed = v->get<uint64_t>();
                    const LastLayerHessian hess(*best, d, lc.damping,
                                                c.threads);
                    tables.push_back(aggregate_if(train_grads, aux_grads,
                                                  hess, lc, d.size(),
                                                  c.threads));
                }
                continue;
            }
            if (method == "tracin") {
                std::vector<std::vector<LastLayerGradient>> tg, ag;
                std::vector<double> etas;
                const std::size_t upto =
                    use_epoch ? *use_epoch : ckpts.best_epoch + 1;
                for (std::size_t t = 0; t < upto; ++t) {
                    const auto& ck = ckpts.checkpoints[t];
                    tg.push_back(last_layer_gradients(ck, d, c.threads));
                    ag.push_back(
                        last_layer_gradients(ck, aux.data, c.threads));
                    etas.push_back(ck.learning_rate);
                }
                tables.push_back(aggregate_tracin(tg, ag, etas, c.threads));
                continue;
            }
            throw ArgumentError("unknown scoring method " + method);
        }
        save_score_tables(tables, c.out / "scores.csv");
        std::cout << "wrote " << tables.size() << " score table(s)\n";
        return 0;
    }

    if (*rank_cmd) {
        default_path(scores_file, "scores.csv");
        const auto tables = load_score_tables(scores_file);
        const ScoreTable* chosen = nullptr;
        for (const auto& t : tables)
            if (t.method == rank_method) chosen = &t;
        if (!chosen)
            throw ArgumentError("method " + rank_method +
                                " not present in " + scores_file);
        std::ofstream os(c.out / "ranking.csv");
        os << "rank,id,score\n";
        for (const auto& e : chosen->entries)
            os << e.rank << ',' << e.id << ',' << e.score << "\n";
        std::cout << "wrote ranking for " << rank_method << "\n";
        return 0;
    }

    if (*rectify) {
        default_path(train_file, "noisy.bin");
        default_path(val_file, "val.bin");
        default_path(ckpt_dir_s, "checkpoints");
        cfg_override(*rectify, "--m", cfg, "m", m_aux);
        cfg_override(*rectify, "--k", cfg, "k", k_nn);
        cfg_override(*rectify, "--tau", cfg, "tau", tau);
        cfg_override(*rectify, "--p", cfg, "p", p_frac);
        Dataset d = load_any(train_file);
        Dataset val = load_any(val_file);
        const TrainResult ckpts = load_checkpoints(ckpt_dir_s);
        auto [rest, aux] = split_aux(val, m_aux, c.seed);
        (void)rest;
        offset_aux_ids(aux);
        RectifyConfig rc{k_nn, p_frac, tau, action == "remove"};
        auto result = audit(d, aux, ckpts.best(), rc,
                            parse_measure(measure_s), c.threads);
        save_features(result.cleaned, c.out / "cleaned.bin",
                      FileFormat::binary);
        save_rectify_log(result.log, c.out / "rectify_log.csv");
        std::size_t changed = 0;
        for (const auto& r : result.log)
            if (r.decision != RectifyRecord::Decision::kept) ++changed;
        std::cout << (action == "remove" ? "removed " : "rectified ")
                  << changed << " of " << result.log.size()
                  << " suspects\n";
        return 0;
    }

    if (*evaluate) {
        default_path(train_file, "noisy.bin");
        default_path(noise_file, "noise_report.csv");
        default_path(scores_file, "scores.csv");
        if (!fs::exists(noise_file))
            throw MetricError("no noise report at " + noise_file +
                              "; ground truth required for evaluation");
        const NoiseReport noise = NoiseReport::load_csv(noise_file);
        const auto tables = load_score_tables(scores_file);
        std::ofstream os(c.out / "detection_curves.csv");
        os << "method,t,accuracy\n";
        for (const auto& t : tables) {
            const auto curve = detection_curve(t.method, t.ranking(), noise);
            for (auto [tt, acc] : curve.points)
                os << t.method << ',' << tt << ',' << acc << "\n";
        }
        if (!cleaned_file.empty()) {
            Dataset before = load_any(train_file);
            Dataset after = load_any(cleaned_file);
            std::cout << "error reduction rate "
                      << error_reduction_rate(before, after) << "\n";
        }
        std::cout << "wrote detection_curves.csv for " << tables.size()
                  << " method(s)\n";
        return 0;
    }

    if (*theory) {
        cfg_override(*theory, "--classes", cfg, "synth.classes", classes);
        const TheoryKernel k = theory_kernel_values(alpha, classes);
        json j{{"alpha", alpha},
               {"classes", classes},
               {"g_same", k.g_same},
               {"g_diff", k.g_diff},
               {"ratio", k.ratio}};
        if (!train_file.empty()) {
            default_path(ckpt_dir_s, "checkpoints");
            Dataset d = load_any(train_file);
            const TrainResult ckpts = load_checkpoints(ckpt_dir_s);
            const TheoryRatio r =
                theory_ratio_check(d, ckpts.best(), pairs, c.seed);
            j["empirical_ratio"] = r.empirical;
            j["mean_confidence"] = r.mean_confidence;
        }
        std::ofstream os(c.out / "theory.json");
        os << j.dump(2) << "\n";
        std::cout << j.dump(2) << "\n";
        return 0;
    }

    if (*report) {
        default_path(train_file, "noisy.bin");
        default_path(noise_file, "noise_report.csv");
        default_path(scores_file, "scores.csv");
        default_path(ckpt_dir_s, "checkpoints");
        default_path(cleaned_file, "cleaned.bin");
        if (!fs::exists(noise_file))
            throw MetricError("no noise report at " + noise_file +
                              "; ground truth required for a report");
        Dataset d = load_any(train_file);
        const NoiseReport noise = NoiseReport::load_csv(noise_file);
        const auto tables = load_score_tables(scores_file);
        const TrainResult ckpts = load_checkpoints(ckpt_dir_s);
        const auto& best = ckpts.best();

        AuditReport rep;
        for (const auto& t : tables)
            rep.curves.push_back(detection_curve(t.method, t.ranking(), noise));
        for (const auto& t : tables) rep.methods.push_back(t.method);
        if (tables.size() >= 2) rep.spearman = spearman_matrix(tables);
        rep.similarity = similarity_histograms(d, noise, best,
                                               parse_measure(measure_s),
                                               c.threads);
        rep.norms = norm_histograms(d, noise, best, c.threads);
        rep.theory = theory_ratio_check(d, best, pairs, c.seed);
        rep.baseline_accuracy = best.val_accuracy;
        if (!cleaned_file.empty() && fs::exists(cleaned_file))
            rep.error_reduction =
                error_reduction_rate(d, load_any(cleaned_file));
        rep.write(c.out);
        std::cout << "wrote report.json and figures to " << c.out << "\n";
        return 0;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const ArgumentError& e) {
        std::cerr << "error: argument: " << e.what() << "\n";
        return ArgumentError::exit_code;
    } catch (const FormatError& e) {
        std::cerr << "error: format: " << e.what() << "\n";
        return FormatError::exit_code;
    } catch (const NumericError& e) {
        std::cerr << "error: numeric: " << e.what() << "\n";
        return NumericError::exit_code;
    } catch (const MetricError& e) {
        std::cerr << "error: metric: " << e.what() << "\n";
        return MetricError::exit_code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
