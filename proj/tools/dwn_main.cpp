// Command-line entry point: data preparation, training, evaluation, model
// export, RTL emission, benchmarking, energy estimation, and reporting.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dwn/config.hpp"
#include "dwn/energy.hpp"
#include "dwn/error.hpp"
#include "dwn/frozen_model.hpp"
#include "dwn/har_dataset.hpp"
#include "dwn/metrics.hpp"
#include "dwn/netlist.hpp"
#include "dwn/report.hpp"
#include "dwn/rng.hpp"
#include "dwn/trainer.hpp"

namespace {

using namespace dwn;

Split parse_split(const std::string& name) {
    if (name == "train") return Split::train;
    if (name == "test") return Split::test;
    throw config_error("unknown split '" + name + "' (use train or test)");
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw io_error("cannot open for writing: " + path);
    out << text;
    if (!out.flush()) throw io_error("write failed: " + path);
}

std::string metrics_record(const Metrics& m, const std::string& split) {
    char buf[160];
    snprintf(buf, sizeof(buf), "accuracy=%.9f\nmacro_f1=%.9f\nsplit=%s\nsamples=%llu\n",
             m.accuracy, m.macro_f1, split.c_str(), (unsigned long long)m.total());
    return buf;
}

int run_prepare(const std::string& root, bool use_cache) {
    for (Split split : {Split::train, Split::test}) {
        const SensorDataset ds = load_har_split(root, split, use_cache);
        std::cout << "split=" << ds.split_tag << " samples=" << ds.size()
                  << " channels=" << ds.channels << " steps=" << ds.steps << "\n";
        for (const auto& [label, count] : class_distribution(ds))
            std::cout << "  label=" << label << " (" << kHarClassNames[label - 1]
                      << ") count=" << count << "\n";
        const std::vector<int> subjects = distinct_subjects(ds);
        std::cout << "  subjects=" << subjects.size() << "\n";
    }
    const SensorDataset train = load_har_split(root, Split::train, use_cache);
    const SensorDataset test = load_har_split(root, Split::test, use_cache);
    size_t overlap = 0;
    for (int s : distinct_subjects(train))
        for (int t : distinct_subjects(test))
            if (s == t) ++overlap;
    std::cout << "subject_overlap=" << overlap << (overlap == 0 ? " (inter-patient split ok)" : "")
              << "\n";
    return overlap == 0 ? 0 : 1;
}

struct TrainCli {
    std::string data_root;
    std::string out = "model.dwn";
    std::string config_path;
    std::vector<std::string> overrides;
    std::string eval_split = "test";
    double val_fraction = 0.2;
};

int run_train(const TrainCli& cli) {
    KeyValueConfig kv = cli.config_path.empty() ? KeyValueConfig()
                                                : KeyValueConfig::parse_file(cli.config_path);
    for (const std::string& kvpair : cli.overrides) {
        const size_t eq = kvpair.find('=');
        if (eq == std::string::npos)
            throw config_error("--set expects key=value, got '" + kvpair + "'");
        kv.set(kvpair.substr(0, eq), kvpair.substr(eq + 1));
    }
    const TrainConfig cfg = train_config_from(kv);
    cfg.validate();

    SensorDataset train_set = load_har_split(cli.data_root, Split::train);
    SensorDataset eval_set;
    const SensorDataset* eval_ptr = nullptr;

    if (cli.eval_split == "test") {
        eval_set = load_har_split(cli.data_root, Split::test);
        eval_ptr = &eval_set;
    } else if (cli.eval_split == "train") {
        eval_ptr = &train_set;
    } else if (cli.eval_split == "val") {
        // Seeded sample-level holdout carved from the training set.
        std::vector<size_t> order(train_set.size());
        std::iota(order.begin(), order.end(), size_t(0));
        std::mt19937_64 rng = make_rng(mix_seed(cfg.seed, 3));
        std::shuffle(order.begin(), order.end(), rng);
        const size_t n_train = size_t(double(order.size()) * (1.0 - cli.val_fraction));
        if (n_train == 0 || n_train == order.size())
            throw config_error("val fraction leaves an empty subset");
        eval_set = train_set.subset({order.begin() + n_train, order.end()});
        train_set = train_set.subset({order.begin(), order.begin() + n_train});
        eval_ptr = &eval_set;
    } else if (cli.eval_split != "none") {
        throw config_error("unknown eval split '" + cli.eval_split + "'");
    }

    std::cout << "training on " << train_set.size() << " samples";
    if (eval_ptr) std::cout << ", evaluating on " << eval_ptr->size() << " (" << cli.eval_split << ")";
    std::cout << std::endl;

    const TrainResult result = train(train_set, cfg, eval_ptr, &std::cout);

    const FrozenModel frozen = freeze(result.model);
    save_model(frozen, cli.out);
    write_text(cli.out + ".config", dump_train_config(cfg));

    std::string log_text;
    for (const EpochRecord& r : result.log) {
        char buf[256];
        snprintf(buf, sizeof(buf), "epoch=%u lr=%.9g loss=%.9f", r.epoch, r.lr, r.mean_loss);
        log_text += buf;
        if (r.has_eval) {
            snprintf(buf, sizeof(buf), " acc=%.9f macro_f1=%.9f", r.eval.accuracy,
                     r.eval.macro_f1);
            log_text += buf;
        }
        snprintf(buf, sizeof(buf), " seconds=%.3f\n", r.seconds);
        log_text += buf;
    }
    write_text(cli.out + ".log", log_text);

    if (eval_ptr && !result.log.empty() && result.log.back().has_eval)
        write_text(cli.out + ".metrics",
                   metrics_record(result.log.back().eval, cli.eval_split));

    std::cout << "model=" << cli.out << " size_bytes=" << model_size_bytes(frozen) << std::endl;
    return 0;
}

int run_eval(const std::string& model_path, const std::string& root, const std::string& split,
             const std::string& confusion_out, bool write_metrics) {
    const FrozenModel model = load_model(model_path);
    const SensorDataset ds = load_har_split(root, parse_split(split));
    const Metrics m = evaluate_frozen(model, ds);

    std::cout << "split=" << split << " samples=" << m.total() << "\n";
    char buf[96];
    snprintf(buf, sizeof(buf), "accuracy=%.9f\nmacro_f1=%.9f\n", m.accuracy, m.macro_f1);
    std::cout << buf;
    const std::string grid = format_confusion(
        m, std::span<const char* const>(kHarClassNames, kHarClasses));
    std::cout << grid;
    if (!confusion_out.empty()) write_text(confusion_out, grid);
    if (write_metrics) write_text(model_path + ".metrics", metrics_record(m, split));
    return 0;
}

int run_export(const std::string& model_path, const std::string& copy_path) {
    const FrozenModel model = load_model(model_path);
    std::cout << render_model_summary({{model_path, &model}});
    std::cout << "lut_payload_bytes=" << model_size_bytes(model) << "\n";
    if (!copy_path.empty()) {
        save_model(model, copy_path);
        std::cout << "copied=" << copy_path << "\n";
    }
    return 0;
}

int run_emit_rtl(const std::string& model_path, const std::string& out_path,
                 const std::string& module_name, uint32_t stages, const std::string& report_path,
                 bool check, uint64_t seed) {
    const FrozenModel model = load_model(model_path);
    const Netlist net = lower(model, stages);
    write_text(out_path, emit_verilog(net, module_name));
    std::cout << netlist_report(net);
    if (!report_path.empty()) write_text(report_path, netlist_report(net));

    if (check) {
        std::mt19937_64 rng = make_rng(seed);
        std::bernoulli_distribution coin(0.5);
        std::vector<uint8_t> bits(model.input_width());
        PredictScratch scratch;
        for (int i = 0; i < 1000; ++i) {
            for (uint8_t& b : bits) b = coin(rng) ? 1 : 0;
            const uint32_t a = predict_bits(model, bits, &scratch).label;
            const uint32_t b = interpret(net, bits).label;
            if (a != b) {
                std::cerr << "error: internal: netlist/predict mismatch on sample " << i
                          << std::endl;
                return 1;
            }
        }
        std::cout << "interpret_check=pass samples=1000" << std::endl;
    }
    return 0;
}

int run_bench(const std::string& model_path, const std::string& root, const std::string& split,
              uint32_t repetitions) {
    const FrozenModel model = load_model(model_path);
    const SensorDataset ds = load_har_split(root, parse_split(split));
    const BenchReport r = bench(model, ds, repetitions);
    char buf[256];
    snprintf(buf, sizeof(buf),
             "bench repetitions=%u inferences=%llu samples_per_second=%.1f mean_us=%.3f "
             "min_us=%.3f max_us=%.3f\n",
             r.repetitions, (unsigned long long)r.total_inferences, r.samples_per_second,
             r.mean_us, r.min_us, r.max_us);
    std::cout << buf;
    return 0;
}

int run_energy(uint64_t flops) {
    char buf[96];
    snprintf(buf, sizeof(buf), "flops=%llu energy_mj=%.3f\n", (unsigned long long)flops,
             estimate_energy_mj(flops));
    std::cout << buf;
    return 0;
}

int run_report(const std::string& manifest_path, const std::vector<std::string>& model_paths) {
    std::vector<ComparisonRow> rows =
        manifest_path.empty() ? builtin_baselines() : parse_manifest(manifest_path);

    std::vector<FrozenModel> models;
    models.reserve(model_paths.size());
    std::vector<std::pair<std::string, const FrozenModel*>> summary;
    for (const std::string& path : model_paths) {
        models.push_back(load_model(path));
        double acc = -1.0, f1 = -1.0;
        std::ifstream metrics(path + ".metrics");
        if (metrics) {
            const KeyValueConfig kv = KeyValueConfig::parse_file(path + ".metrics");
            acc = kv.get_double("accuracy", -1.0);
            f1 = kv.get_double("macro_f1", -1.0);
        }
        rows.push_back(row_from_model(path, models.back(), acc, f1));
    }
    std::cout << render_comparison(rows) << "\n";
    for (size_t i = 0; i < model_paths.size(); ++i)
        summary.push_back({model_paths[i], &models[i]});
    if (!summary.empty()) std::cout << render_model_summary(summary);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Differentiable weightless (LUT) network toolkit for inertial HAR"};
    app.require_subcommand(1);

    // prepare-data
    auto* prep = app.add_subcommand("prepare-data", "Load and sanity-check the dataset");
    std::string prep_root;
    bool prep_no_cache = false;
    prep->add_option("--data-root", prep_root, "Extracted dataset directory")->required();
    prep->add_flag("--no-cache", prep_no_cache, "Skip the binary reload cache");

    // train
    auto* tr = app.add_subcommand("train", "Train a model and write the frozen model file");
    TrainCli tcli;
    tr->add_option("--data-root", tcli.data_root, "Extracted dataset directory")->required();
    tr->add_option("--out", tcli.out, "Output model file");
    tr->add_option("--config", tcli.config_path, "key=value config file");
    tr->add_option("--set", tcli.overrides, "Override any config key (key=value, repeatable)");
    tr->add_option("--eval-split", tcli.eval_split, "Per-epoch metrics: test, train, val, none");
    tr->add_option("--val-fraction", tcli.val_fraction, "Holdout fraction for --eval-split val");
    std::string t_seed, t_threads, t_epochs, t_luts, t_arity, t_pool, t_tau, t_batch, t_lr;
    tr->add_option("--seed", t_seed, "Config key seed");
    tr->add_option("--threads", t_threads, "Config key threads (0 = all cores)");
    tr->add_option("--epochs", t_epochs, "Config key epochs");
    tr->add_option("--luts", t_luts, "Config key luts (per layer, comma-separated)");
    tr->add_option("--arity", t_arity, "Config key arity");
    tr->add_option("--pool-size", t_pool, "Config key pool_size");
    tr->add_option("--tau", t_tau, "Config key tau");
    tr->add_option("--batch-size", t_batch, "Config key batch_size");
    tr->add_option("--lr", t_lr, "Config key lr");

    // eval
    auto* ev = app.add_subcommand("eval", "Evaluate a saved model");
    std::string ev_model, ev_root, ev_split = "test", ev_confusion;
    bool ev_write_metrics = false;
    ev->add_option("--model", ev_model)->required();
    ev->add_option("--data-root", ev_root)->required();
    ev->add_option("--split", ev_split, "train or test");
    ev->add_option("--confusion-out", ev_confusion, "Write the confusion grid to a file");
    ev->add_flag("--write-metrics", ev_write_metrics, "Write <model>.metrics sidecar");

    // export
    auto* ex = app.add_subcommand("export", "Summarize a model file; optionally re-serialize");
    std::string ex_model, ex_copy;
    ex->add_option("--model", ex_model)->required();
    ex->add_option("--copy", ex_copy, "Write a byte-equivalent copy");

    // emit-rtl
    auto* rtl = app.add_subcommand("emit-rtl", "Lower a model to SystemVerilog");
    std::string rtl_model, rtl_out, rtl_module = "dwn_infer", rtl_report;
    uint32_t rtl_stages = 2;
    bool rtl_check = false;
    uint64_t rtl_seed = 0;
    rtl->add_option("--model", rtl_model)->required();
    rtl->add_option("--out", rtl_out)->required();
    rtl->add_option("--module", rtl_module, "Module name");
    rtl->add_option("--pipeline-stages", rtl_stages, "Register stages (0 = combinational)");
    rtl->add_option("--report", rtl_report, "Write node-count report to a file");
    rtl->add_flag("--check", rtl_check, "Verify the netlist against predict on random inputs");
    rtl->add_option("--seed", rtl_seed, "Seed for --check inputs");

    // bench
    auto* be = app.add_subcommand("bench", "Measure inference throughput");
    std::string be_model, be_root, be_split = "test";
    uint32_t be_reps = 3;
    be->add_option("--model", be_model)->required();
    be->add_option("--data-root", be_root)->required();
    be->add_option("--split", be_split);
    be->add_option("--repetitions", be_reps, "Timed passes over the dataset");

    // estimate-energy
    auto* en = app.add_subcommand("estimate-energy", "FLOP-count energy estimate");
    uint64_t en_flops = 0;
    en->add_option("--flops", en_flops)->required();

    // report
    auto* rep = app.add_subcommand("report", "Comparison and model-summary tables");
    std::string rep_manifest;
    std::vector<std::string> rep_models;
    rep->add_option("--manifest", rep_manifest, "Baseline manifest (name acc f1 size_kib flops)");
    rep->add_option("--model", rep_models, "Local model file (repeatable)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (prep->parsed()) return run_prepare(prep_root, !prep_no_cache);
        if (tr->parsed()) {
            auto push = [&](const char* key, const std::string& v) {
                if (!v.empty()) tcli.overrides.push_back(std::string(key) + "=" + v);
            };
            push("seed", t_seed);
            push("threads", t_threads);
            push("epochs", t_epochs);
            push("luts", t_luts);
            push("arity", t_arity);
            push("pool_size", t_pool);
            push("tau", t_tau);
            push("batch_size", t_batch);
            push("lr", t_lr);
            return run_train(tcli);
        }
        if (ev->parsed())
            return run_eval(ev_model, ev_root, ev_split, ev_confusion, ev_write_metrics);
        if (ex->parsed()) return run_export(ex_model, ex_copy);
        if (rtl->parsed())
            return run_emit_rtl(rtl_model, rtl_out, rtl_module, rtl_stages, rtl_report, rtl_check,
                                rtl_seed);
        if (be->parsed()) return run_bench(be_model, be_root, be_split, be_reps);
        if (en->parsed()) return run_energy(en_flops);
        if (rep->parsed()) return run_report(rep_manifest, rep_models);
    } catch (const Error& e) {
        std::cerr << "error: " << e.category() << ": " << e.what() << std::endl;
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << std::endl;
        return 2;
    }
    return 0;
}
