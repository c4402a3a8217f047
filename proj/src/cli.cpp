#include "sfo/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "sfo/de.hpp"
#include "sfo/errors.hpp"
#include "sfo/evaluation.hpp"
#include "sfo/io.hpp"
#include "sfo/landmarks.hpp"
#include "sfo/synthcase.hpp"

namespace sfo {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitOptimization = 4;

// Invalid configuration discovered after argument parsing; maps to the same
// exit code as bad arguments.
struct UsageError : Error {
    using Error::Error;
};

struct OptimizationError : Error {
    using Error::Error;
};

NoiseProfile profile_from_string(const std::string& s) {
    if (s == "A" || s == "a") return NoiseProfile::A;
    if (s == "B" || s == "b") return NoiseProfile::B;
    if (s == "C" || s == "c") return NoiseProfile::C;
    throw UsageError("unknown noise profile: " + s + " (expected A, B, or C)");
}

std::string profile_to_string(NoiseProfile p) {
    switch (p) {
        case NoiseProfile::A: return "A";
        case NoiseProfile::B: return "B";
        default: return "C";
    }
}

std::vector<uint64_t> parse_seed_list(const std::string& text) {
    std::vector<uint64_t> seeds;
    std::istringstream in(text);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        if (tok.empty()) continue;
        try {
            seeds.push_back(std::stoull(tok));
        } catch (const std::exception&) {
            throw UsageError("bad seed value: " + tok);
        }
    }
    if (seeds.empty()) throw UsageError("empty seed list");
    return seeds;
}

std::string fmt_g(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

json solution_to_json(const ProjectionSolution& sol) {
    return {{"focal", sol.camera.focal},
            {"rotation",
             {{sol.camera.rotation(0, 0), sol.camera.rotation(0, 1), sol.camera.rotation(0, 2)},
              {sol.camera.rotation(1, 0), sol.camera.rotation(1, 1), sol.camera.rotation(1, 2)},
              {sol.camera.rotation(2, 0), sol.camera.rotation(2, 1), sol.camera.rotation(2, 2)}}},
            {"translation",
             {sol.camera.translation.x(), sol.camera.translation.y(),
              sol.camera.translation.z()}},
            {"scd_mm", sol.scd_mm},
            {"pose_angles",
             {{"yaw_deg", sol.pose_angles.yaw_deg},
              {"pitch_deg", sol.pose_angles.pitch_deg},
              {"roll_deg", sol.pose_angles.roll_deg},
              {"gimbal_lock", sol.pose_angles.gimbal_lock}}},
            {"reprojection_rms_px", sol.reprojection_rms_px},
            {"converged", sol.converged}};
}

// ---- gen --------------------------------------------------------------------

struct GenArgs {
    int subjects = 2;
    int views = 4;
    std::string profile = "A";
    int direction_sets = 1;
    double noise_px = 5.0;
    double noise_deg = 30.0;
    int width = 640;
    int height = 480;
    std::string depths_path;
    uint64_t seed = 1;
    std::string out;
};

int cmd_gen(const GenArgs& args) {
    SuiteConfig config;
    config.subjects = args.subjects;
    config.frontal_views = (args.views + 1) / 2;
    config.lateral_views = args.views / 2;
    config.profile = profile_from_string(args.profile);
    config.direction_sets = args.direction_sets;
    config.landmark_noise_px = args.noise_px;
    config.direction_noise_deg = args.noise_deg;
    config.camera.width = args.width;
    config.camera.height = args.height;
    config.master_seed = args.seed;
    config.morphology.depth_table = args.depths_path.empty()
                                        ? load_population_depths()
                                        : depth_table_from_json(read_text_file(args.depths_path));

    GeneratedExperiment exp = generate_experiment(config);

    fs::path base(args.out);
    json manifest;
    manifest["format_version"] = kFormatVersion;
    manifest["profile"] = profile_to_string(config.profile);
    manifest["seed"] = config.master_seed;
    manifest["subjects"] = config.subjects;
    manifest["views"] = args.views;
    manifest["direction_sets"] = static_cast<int>(exp.galleries.size());
    manifest["landmark_noise_px"] =
        config.profile == NoiseProfile::A ? 0.0 : config.landmark_noise_px;
    manifest["direction_noise_deg"] =
        config.profile == NoiseProfile::C ? config.direction_noise_deg : 0.0;

    json case_dirs = json::array();
    for (const CaseBundle& bundle : exp.cases) {
        std::string rel = "cases/" + bundle.case_id;
        save_bundle(bundle, (base / rel).string());
        case_dirs.push_back(rel);
    }
    manifest["cases"] = case_dirs;

    json gallery_dirs = json::array();
    for (std::size_t d = 0; d < exp.galleries.size(); ++d) {
        json one = json::array();
        for (const SkullInput& skull : exp.galleries[d]) {
            std::string rel = "gallery/d" + std::to_string(d) + "/" + skull.subject_id;
            save_skull(skull, (base / rel).string());
            one.push_back(rel);
        }
        gallery_dirs.push_back(one);
    }
    manifest["galleries"] = gallery_dirs;
    write_text_atomic((base / "exp.json").string(), manifest.dump(2) + "\n");

    std::cout << "generated " << config.subjects << " subjects, " << exp.cases.size()
              << " case bundles, " << exp.galleries.size() << " gallery set(s) under " << args.out
              << " (profile " << profile_to_string(config.profile) << ", seed "
              << config.master_seed << ")\n";
    return 0;
}

// ---- sfo --------------------------------------------------------------------

struct SfoArgs {
    std::string case_dir;
    std::string skull_dir;
    std::string config_path;
    uint64_t seed = 1;
    int threads = 1;
    double max_seconds = -1.0;  // <0 keeps the config's value
    int max_generations = 0;    // <=0 keeps the config's value
    std::string out;
};

int cmd_sfo(const SfoArgs& args) {
    CaseBundle photo = load_bundle(args.case_dir);
    MethodConfig method;
    if (!args.config_path.empty())
        method = method_config_from_json(read_text_file(args.config_path));
    method.threads = args.threads;
    if (args.max_seconds >= 0.0) method.de.max_seconds = args.max_seconds;
    if (args.max_generations > 0) method.de.max_generations = args.max_generations;

    SkullInput skull = args.skull_dir.empty() ? photo.skull : load_skull(args.skull_dir);
    ensure_regions(skull);

    if (method.fitness.use_skof && (photo.face_mask.width == 0 || photo.face_mask.height == 0))
        throw UsageError(
            "bundle has no face mask but the skull-outside-face penalty is enabled; "
            "disable use_skof or regenerate the bundle with a mask");
    if (method.fitness.use_pll && photo.facial_curve.empty())
        throw UsageError(
            "bundle has no facial curve but the contour-parallelism penalty is enabled; "
            "disable use_pll or regenerate the bundle with a curve");

    AlignmentOutcome outcome;
    RunTrace trace;
    if (method.mode == MethodMode::Evolve) {
        DEConfig de = method.de;
        de.seed = args.seed;
        RunResult run = run_case(photo, skull, method.fitness, de, method.threads);
        outcome.genotype = run.best;
        outcome.breakdown = run.best_breakdown;
        outcome.evaluations = run.trace.evaluations;
        outcome.failed = !(run.best_breakdown.solver_ok && run.best_breakdown.solution.converged);
        outcome.score = outcome.failed ? photo.intervals.c_infinity : run.best_breakdown.total;
        trace = run.trace;
    } else {
        outcome = align_case(photo, skull, method, args.seed);
        trace.best_fitness = {outcome.breakdown.total};
        trace.elapsed_s = {outcome.elapsed_s};
        trace.evaluations = 1;
        trace.elapsed_seconds = outcome.elapsed_s;
    }

    fs::path base(args.out);
    json result;
    result["format_version"] = kFormatVersion;
    result["case_id"] = photo.case_id;
    result["skull_id"] = skull.subject_id;
    result["seed"] = args.seed;
    result["score"] = outcome.score;
    result["failed"] = outcome.failed;
    result["breakdown"] = {{"mse_pix", outcome.breakdown.mse_pix},
                           {"p_cam", outcome.breakdown.p_cam},
                           {"p_skof", outcome.breakdown.p_skof},
                           {"p_pll", outcome.breakdown.p_pll},
                           {"total", outcome.breakdown.total}};
    result["solution"] = solution_to_json(outcome.breakdown.solution);
    result["genotype"] = {{"values", outcome.genotype.values},
                          {"landmark_order", outcome.genotype.landmark_order}};
    write_text_atomic((base / "result.json").string(), result.dump(2) + "\n");

    json jtrace;
    jtrace["best_fitness"] = trace.best_fitness;
    jtrace["elapsed_s"] = trace.elapsed_s;
    jtrace["evaluations"] = trace.evaluations;
    jtrace["elapsed_seconds"] = trace.elapsed_seconds;
    jtrace["stop"] = trace.stop == StopReason::Generations ? "generations" : "time_budget";
    write_text_atomic((base / "trace.json").string(), jtrace.dump(2) + "\n");

    if (photo.face_mask.width > 0 && outcome.breakdown.solver_ok) {
        std::vector<Vec2> observed;
        for (const auto& [name, p] : photo.facial_landmarks_2d) observed.push_back(p);
        std::vector<Vec2> projected;
        for (const auto& [name, f3] :
             genotype_to_facial_landmarks(outcome.genotype, skull.cone_specs)) {
            try {
                projected.push_back(project(outcome.breakdown.solution.camera, f3));
            } catch (const NonPositiveDepth&) {
                // behind the estimated camera; leave it out of the render
            }
        }
        write_text_atomic((base / "overlay.ppm").string(),
                          overlay_to_ppm(photo.face_mask, skull.mesh,
                                         outcome.breakdown.solution.camera, observed, projected));
    }

    std::cout << "case " << photo.case_id << " vs skull " << skull.subject_id << ": score "
              << fmt_g(outcome.score) << " (mse " << fmt_g(outcome.breakdown.mse_pix) << ", p_cam "
              << fmt_g(outcome.breakdown.p_cam) << ", p_skof " << fmt_g(outcome.breakdown.p_skof)
              << ", p_pll " << fmt_g(outcome.breakdown.p_pll) << "), outputs in " << args.out
              << "\n";

    if (outcome.failed || outcome.score >= photo.intervals.c_infinity)
        throw OptimizationError("optimization failed: no candidate reached a finite score");
    return 0;
}

// ---- rank / report ----------------------------------------------------------

struct RankArgs {
    std::string exp_dir;
    std::vector<std::string> config_paths;
    bool baseline = false;
    std::string seeds = "1";
    int threads = 1;
    std::string out;
};

json parse_exp_manifest(const std::string& text) {
    json manifest = json::parse(text, nullptr, false);
    if (manifest.is_discarded()) throw ManifestError("malformed exp.json");
    if (!manifest.contains("format_version") ||
        manifest["format_version"].get<int>() != kFormatVersion)
        throw ManifestError("unsupported experiment format version");
    return manifest;
}

int cmd_rank(const RankArgs& args) {
    fs::path base(args.exp_dir);
    json manifest = parse_exp_manifest(read_text_file((base / "exp.json").string()));

    std::vector<CaseBundle> cases;
    for (const auto& rel : manifest.at("cases"))
        cases.push_back(load_bundle((base / rel.get<std::string>()).string()));

    std::vector<std::vector<SkullInput>> galleries;
    for (const auto& gal : manifest.at("galleries")) {
        std::vector<SkullInput> gallery;
        for (const auto& rel : gal) {
            SkullInput skull = load_skull((base / rel.get<std::string>()).string());
            ensure_regions(skull);
            gallery.push_back(std::move(skull));
        }
        galleries.push_back(std::move(gallery));
    }

    std::vector<MethodConfig> methods;
    for (const std::string& path : args.config_paths)
        methods.push_back(method_config_from_json(read_text_file(path)));
    if (methods.empty()) methods.push_back(MethodConfig{});
    if (args.baseline) {
        MethodConfig ref;
        ref.name = "fixed_vectors";
        ref.mode = MethodMode::FixedVectors;
        methods.push_back(ref);
    }
    for (MethodConfig& m : methods) m.threads = args.threads;

    SuiteResult result = run_rank_stage(cases, galleries, methods, parse_seed_list(args.seeds),
                                        manifest.at("seed").get<uint64_t>());
    for (SuiteSummaryRow& row : result.summary)
        row.profile = manifest.at("profile").get<std::string>();

    fs::path out(args.out.empty() ? args.exp_dir : args.out);
    write_text_atomic((out / "alignments.tsv").string(), alignments_to_table(result.alignments));
    write_text_atomic((out / "case_records.tsv").string(), cases_to_table(result.cases));
    write_text_atomic((out / "summary.tsv").string(), summary_to_table(result.summary));
    std::cout << summary_to_table(result.summary);
    return 0;
}

struct ReportArgs {
    std::string exp_dir;
    std::string out;
};

int cmd_report(const ReportArgs& args) {
    fs::path base(args.exp_dir);
    std::vector<CaseRecord> records =
        cases_from_table(read_text_file((base / "case_records.tsv").string()));

    std::vector<std::string> method_order;
    for (const CaseRecord& r : records)
        if (std::find(method_order.begin(), method_order.end(), r.method) == method_order.end())
            method_order.push_back(r.method);

    // Long-format summary: one row per method and pose group.
    std::ostringstream long_table;
    long_table << "method\tpose\tmean_rank\tmean_bpe_mm\tmean_time_s\tworst_implausible_pct\n";
    for (const std::string& method : method_order) {
        for (const char* group : {"frontal", "lateral"}) {
            double rank_sum = 0.0, bpe_sum = 0.0, time_sum = 0.0, worst = 0.0;
            int n = 0, n_bpe = 0;
            for (const CaseRecord& r : records) {
                if (r.method != method) continue;
                if (is_lateral(r.pose) != (std::string(group) == "lateral")) continue;
                ++n;
                rank_sum += r.rank;
                time_sum += r.time_s;
                if (!std::isnan(r.bpe)) {
                    bpe_sum += r.bpe;
                    ++n_bpe;
                }
                worst = std::max(worst, r.implausible_pct);
            }
            if (n == 0) continue;
            double nan = std::numeric_limits<double>::quiet_NaN();
            long_table << method << '\t' << group << '\t' << fmt_g(rank_sum / n) << '\t'
                       << fmt_g(n_bpe ? bpe_sum / n_bpe : nan) << '\t' << fmt_g(time_sum / n)
                       << '\t' << fmt_g(worst) << '\n';
        }
    }
    std::string table = long_table.str();

    // Plausibility block: implausible-overlay counts and percentages per
    // method over the true-pair records.
    std::ostringstream plaus;
    plaus << "method\tcases\timplausible\tworst_pct\tmean_pct\n";
    for (const std::string& method : method_order) {
        int n = 0, bad = 0;
        double worst = 0.0, sum = 0.0;
        for (const CaseRecord& r : records) {
            if (r.method != method) continue;
            ++n;
            if (r.implausible) ++bad;
            worst = std::max(worst, r.implausible_pct);
            sum += r.implausible_pct;
        }
        if (n == 0) continue;
        plaus << method << '\t' << n << '\t' << bad << '\t' << fmt_g(worst) << '\t'
              << fmt_g(sum / n) << '\n';
    }

    std::cout << table << '\n' << plaus.str();
    if (!args.out.empty()) {
        write_text_atomic((fs::path(args.out) / "summary.tsv").string(), table);
        write_text_atomic((fs::path(args.out) / "plausibility.tsv").string(), plaus.str());
    }
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"skull-face overlay toolkit"};
    app.require_subcommand(1);

    GenArgs gen;
    CLI::App* gen_cmd = app.add_subcommand("gen", "generate a synthetic experiment directory");
    gen_cmd->add_option("--subjects", gen.subjects, "number of subjects")->check(CLI::Range(2, 64));
    gen_cmd->add_option("--views", gen.views, "photographs per subject (frontal/lateral split)")
        ->check(CLI::Range(1, 64));
    gen_cmd->add_option("--profile", gen.profile, "noise profile: A, B, or C");
    gen_cmd->add_option("--direction-sets", gen.direction_sets,
                        "cone-direction perturbation resamples (profile C)")
        ->check(CLI::Range(1, 32));
    gen_cmd->add_option("--noise-px", gen.noise_px, "landmark noise half-range in pixels");
    gen_cmd->add_option("--noise-deg", gen.noise_deg, "direction noise cap in degrees");
    gen_cmd->add_option("--width", gen.width, "image width")->check(CLI::Range(64, 4096));
    gen_cmd->add_option("--height", gen.height, "image height")->check(CLI::Range(64, 4096));
    gen_cmd->add_option("--depths", gen.depths_path, "population depth table JSON");
    gen_cmd->add_option("--seed", gen.seed, "master seed");
    gen_cmd->add_option("--out", gen.out, "output directory")->required();

    SfoArgs sfo;
    CLI::App* sfo_cmd = app.add_subcommand("sfo", "align one case bundle with a skull");
    sfo_cmd->add_option("--case", sfo.case_dir, "case bundle directory")->required();
    sfo_cmd->add_option("--skull", sfo.skull_dir, "skull directory (defaults to the bundle's own)");
    sfo_cmd->add_option("--config", sfo.config_path, "method configuration JSON");
    sfo_cmd->add_option("--seed", sfo.seed, "optimizer seed");
    sfo_cmd->add_option("--threads", sfo.threads, "evaluation threads")->check(CLI::Range(1, 256));
    sfo_cmd->add_option("--max-seconds", sfo.max_seconds,
                        "wall-clock budget; 0 disables the time stop");
    sfo_cmd->add_option("--max-generations", sfo.max_generations, "generation budget");
    sfo_cmd->add_option("--out", sfo.out, "output directory")->required();

    RankArgs rank;
    CLI::App* rank_cmd =
        app.add_subcommand("rank", "rank every photo against the gallery of an experiment");
    rank_cmd->add_option("--exp", rank.exp_dir, "experiment directory from gen")->required();
    rank_cmd->add_option("--config", rank.config_paths, "method configuration JSON (repeatable)");
    rank_cmd->add_flag("--baseline", rank.baseline, "also run the fixed-vector reference method");
    rank_cmd->add_option("--seeds", rank.seeds, "comma-separated optimizer seeds");
    rank_cmd->add_option("--threads", rank.threads, "evaluation threads")
        ->check(CLI::Range(1, 256));
    rank_cmd->add_option("--out", rank.out, "output directory (defaults to --exp)");

    ReportArgs report;
    CLI::App* report_cmd =
        app.add_subcommand("report", "summarize rank records of an experiment");
    report_cmd->add_option("--exp", report.exp_dir, "directory holding case_records.tsv")
        ->required();
    report_cmd->add_option("--out", report.out, "directory for summary tables");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (gen_cmd->parsed()) return cmd_gen(gen);
        if (sfo_cmd->parsed()) return cmd_sfo(sfo);
        if (rank_cmd->parsed()) return cmd_rank(rank);
        return cmd_report(report);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const OptimizationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitOptimization;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const ManifestError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int run_cli(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(args);
}

}  // namespace sfo
