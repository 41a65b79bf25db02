#pragma once

// Command-line front end. Exit codes: 0 success, 1 domain or validation
// error, 2 usage error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "sonosim/datagen.hpp"
#include "sonosim/fixtures.hpp"
#include "sonosim/imgops.hpp"
#include "sonosim/manifest.hpp"
#include "sonosim/png_io.hpp"
#include "sonosim/rf_io.hpp"

namespace sonosim::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_domain = 1;
inline constexpr int exit_usage = 2;

struct GlobalOptions {
    std::uint64_t seed = 0;
    unsigned threads = 0;  // 0: all hardware threads
    std::string out;
};

struct SimulateOptions {
    std::size_t count = 0;
    SimulationConfig sim;
    std::string lesion_classes = "mixed";
    std::optional<int> hyper_k;
    std::optional<double> hypo_l;
    bool dump_rf = false;
};

struct IngestOptions {
    std::string corpus;
    std::string kind = "invivo";
    std::optional<std::size_t> train;
    std::optional<std::size_t> val;
    std::optional<std::size_t> test;
    double train_fraction = 0.60;
    double val_fraction = 0.15;
    std::optional<std::size_t> subsample_train;
    std::optional<std::size_t> folds;
};

struct DiceOptions {
    std::string truth_dir;
    std::string pred_dir;
};

inline void apply_lesion_overrides(SimulateOptions& o) {
    auto& pol = o.sim.phantom.lesion_policy;
    static const std::map<std::string, std::array<double, 3>> mixes{
        {"mixed", {1, 1, 1}}, {"hyper", {1, 0, 0}}, {"hypo", {0, 1, 0}}, {"both", {0, 0, 1}}};
    pol.class_mix = mixes.at(o.lesion_classes);
    if (o.hyper_k) pol.hyper_k_min = pol.hyper_k_max = *o.hyper_k;
    if (o.hypo_l) pol.hypo_l_min = pol.hypo_l_max = *o.hypo_l;
}

inline int cmd_simulate(const GlobalOptions& g, SimulateOptions o, std::ostream& out) {
    if (o.count == 0) throw InvalidConfig("--count must be >= 1");
    if (g.out.empty()) throw InvalidConfig("--out is required");
    apply_lesion_overrides(o);
    o.sim.grid = ImageGrid::covering(o.sim.phantom.standoff, o.sim.phantom.axial_extent,
                                     -0.5 * o.sim.phantom.lateral_extent, o.sim.phantom.lateral_extent,
                                     o.sim.grid.height, o.sim.grid.width);
    o.sim.validate();

    const fs::path dir(g.out);
    const DatasetManifest m = generate_sim_dataset(o.sim, o.count, g.seed, dir, g.threads);
    if (o.dump_rf) {
        ensure_directory(dir / "rf");
        parallel_for(m.entries.size(), g.threads, [&](std::size_t i) {
            const auto& e = m.entries[i];
            const Phantom ph = generate_phantom(*e.seed, o.sim.phantom);
            write_rf_dump(dir / "rf" / (e.id + ".rf"), synthesize_rf(ph, o.sim.acoustic));
        });
    }
    const SplitCounts c = m.counts();
    out << "manifest: " << (dir / "manifest.json").string() << "\n";
    out << "train " << c.train << " val " << c.val << " test " << c.test << "\n";
    return exit_ok;
}

inline int cmd_ingest(const GlobalOptions& g, const IngestOptions& o, std::ostream& out, std::ostream& err) {
    if (g.out.empty()) throw InvalidConfig("--out is required");
    static const std::map<std::string, DatasetKind> kinds{{"invivo", DatasetKind::invivo},
                                                          {"natural", DatasetKind::natural},
                                                          {"simulated", DatasetKind::simulated}};
    SplitPolicy policy = (o.train || o.val) ? SplitPolicy::counts(o.train.value_or(0), o.val.value_or(0), o.test, g.seed)
                                            : SplitPolicy::fractions(o.train_fraction, o.val_fraction, g.seed);
    const fs::path dir(g.out);
    sonosim::IngestOptions io;
    io.threads = g.threads;
    DatasetManifest m;
    try {
        m = ingest_labeled_corpus(o.corpus, kinds.at(o.kind), policy, dir, io);
    } catch (const IngestError& e) {
        for (const auto& r : e.rejected()) err << "rejected " << r.id << ": " << to_string(r.reason) << " (" << r.detail << ")\n";
        err << e.rejected().size() << " pair(s) rejected; no manifest written\n";
        return exit_domain;
    }
    if (o.subsample_train) m = subsample(m, *o.subsample_train, g.seed);
    if (o.folds) m.folds = make_folds(m, *o.folds, g.seed);
    write_manifest(dir / "manifest.json", m);
    const SplitCounts c = m.counts();
    out << "manifest: " << (dir / "manifest.json").string() << "\n";
    out << "train " << c.train << " val " << c.val << " test " << c.test << "\n";
    return exit_ok;
}

inline std::set<std::string> png_names(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw IoError("directory " + dir.string() + " does not exist");
    std::set<std::string> names;
    for (const auto& de : fs::directory_iterator(dir))
        if (de.is_regular_file() && de.path().extension() == ".png") names.insert(de.path().filename().string());
    return names;
}

inline int cmd_dice(const DiceOptions& o, std::ostream& out, std::ostream& err) {
    const auto truth = png_names(o.truth_dir);
    const auto pred = png_names(o.pred_dir);
    bool unmatched = false;
    for (const auto& n : truth)
        if (!pred.contains(n)) err << "unmatched: " << n << " has no prediction\n", unmatched = true;
    for (const auto& n : pred)
        if (!truth.contains(n)) err << "unmatched: " << n << " has no ground truth\n", unmatched = true;
    if (unmatched) return exit_domain;
    if (truth.empty()) throw InvalidConfig("no masks found in " + o.truth_dir);

    std::vector<double> scores;
    for (const auto& n : truth) {
        const double d = dice(png::read_mask(fs::path(o.truth_dir) / n), png::read_mask(fs::path(o.pred_dir) / n));
        scores.push_back(d);
        char line[32];
        std::snprintf(line, sizeof line, "%.4f", d);
        out << n << " " << line << "\n";
    }
    out << "DSC " << format_mean_std(mean_std(scores)) << "\n";
    return exit_ok;
}

inline int cmd_fixtures(const GlobalOptions& g, std::ostream& out) {
    if (g.out.empty()) throw InvalidConfig("--out is required");
    write_fixtures(g.out, g.threads);
    out << "fixtures: " << (fs::path(g.out) / "fixtures.json").string() << "\n";
    return exit_ok;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Synthetic ultrasound dataset factory"};
    app.name("sonosim");
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "TOML-style config file; flags override its values");

    GlobalOptions g;
    app.add_option("--seed", g.seed, "Master seed");
    app.add_option("--threads", g.threads, "Worker threads (0 = all cores)");
    app.add_option("--out", g.out, "Output directory");

    SimulateOptions so;
    auto* sim = app.add_subcommand("simulate", "Simulate a B-mode dataset with lesion masks");
    sim->add_option("--count", so.count, "Number of images")->required();
    auto& pc = so.sim.phantom;
    auto& ac = so.sim.acoustic;
    sim->add_option("--density", pc.scatterer_density, "Scatterers per mm^3")->capture_default_str();
    sim->add_option("--axial-extent", pc.axial_extent, "mm")->capture_default_str();
    sim->add_option("--lateral-extent", pc.lateral_extent, "mm")->capture_default_str();
    sim->add_option("--elevational-extent", pc.elevational_extent, "mm")->capture_default_str();
    sim->add_option("--standoff", pc.standoff, "mm")->capture_default_str();
    sim->add_option("--radius-min", pc.lesion_policy.radius_min, "mm")->capture_default_str();
    sim->add_option("--radius-max", pc.lesion_policy.radius_max, "mm")->capture_default_str();
    sim->add_option("--margin", pc.lesion_policy.margin, "mm")->capture_default_str();
    sim->add_option("--lesion-classes", so.lesion_classes, "mixed | hyper | hypo | both")
        ->check(CLI::IsMember({"mixed", "hyper", "hypo", "both"}))
        ->capture_default_str();
    sim->add_option("--hyper-k", so.hyper_k, "Pin the hyperechoic factor k");
    sim->add_option("--hypo-l", so.hypo_l, "Pin the hypoechoic factor l");
    sim->add_option("--scaling", pc.lesion_policy.scaling, "amplitude | power")
        ->transform(CLI::CheckedTransformer(
            std::map<std::string, ScalingMode>{{"amplitude", ScalingMode::amplitude}, {"power", ScalingMode::power}}));
    sim->add_option("--lines", ac.n_lines, "RF lines")->capture_default_str();
    sim->add_option("--center-frequency", ac.center_frequency, "Hz")->capture_default_str();
    sim->add_option("--sampling-frequency", ac.sampling_frequency, "Hz")->capture_default_str();
    sim->add_option("--sound-speed", ac.sound_speed, "m/s")->capture_default_str();
    sim->add_option("--bandwidth", ac.fractional_bandwidth, "Fractional -6 dB bandwidth")->capture_default_str();
    sim->add_option("--f-number", ac.f_number, "Lateral f-number")->capture_default_str();
    sim->add_option("--elevation-f-number", ac.elevation_f_number)->capture_default_str();
    sim->add_option("--dynamic-range", ac.dynamic_range_db, "dB")->capture_default_str();
    sim->add_option("--grid-height", so.sim.grid.height, "Image rows")->capture_default_str();
    sim->add_option("--grid-width", so.sim.grid.width, "Image columns")->capture_default_str();
    sim->add_flag("--dump-rf", so.dump_rf, "Also write raw RF frames (RFv1) under <out>/rf");

    IngestOptions io;
    auto* ing = app.add_subcommand("ingest", "Validate and split an external labeled corpus");
    ing->add_option("--corpus", io.corpus, "Directory of <id>.png / <id>_mask.png pairs")->required();
    ing->add_option("--kind", io.kind, "invivo | natural")->check(CLI::IsMember({"invivo", "natural", "simulated"}));
    ing->add_option("--train", io.train, "Training count");
    ing->add_option("--val", io.val, "Validation count");
    ing->add_option("--test", io.test, "Test count (default: remainder)");
    ing->add_option("--train-fraction", io.train_fraction)->capture_default_str();
    ing->add_option("--val-fraction", io.val_fraction)->capture_default_str();
    ing->add_option("--subsample-train", io.subsample_train, "Keep this many training pairs");
    ing->add_option("--folds", io.folds, "Embed a k-fold plan over train+val");

    DiceOptions dopt;
    auto* dc = app.add_subcommand("dice", "Foreground Dice between matching mask files");
    dc->add_option("truth_dir", dopt.truth_dir)->required();
    dc->add_option("pred_dir", dopt.pred_dir)->required();

    auto* fx = app.add_subcommand("fixtures", "Write conformance fixtures");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        if (sim->parsed()) return cmd_simulate(g, so, out);
        if (ing->parsed()) return cmd_ingest(g, io, out, err);
        if (dc->parsed()) return cmd_dice(dopt, out, err);
        if (fx->parsed()) return cmd_fixtures(g, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_domain;
    }
    return exit_usage;
}

}  // namespace sonosim::cli
