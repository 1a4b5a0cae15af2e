#include "bcfg/scenario.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

struct GlobalFlags {
    std::string out_dir = ".";
    std::vector<std::string> overrides;
    long seed = -1;
};

void attach_globals(CLI::App* cmd, GlobalFlags& g) {
    cmd->add_option("--out-dir", g.out_dir, "directory for generated files")
        ->capture_default_str();
    cmd->add_option("--override", g.overrides,
                    "scenario key=value override (repeatable)");
    cmd->add_option("--seed", g.seed,
                    "seed for the optional turning-point probe");
}

bcfg::ScenarioSpec load_with_overrides(const std::string& path,
                                       const GlobalFlags& g) {
    bcfg::ScenarioSpec spec = bcfg::load_scenario_file(path);
    for (const std::string& ov : g.overrides) bcfg::apply_override(spec, ov);
    if (g.seed >= 0) spec.settings.seed = static_cast<unsigned>(g.seed);
    bcfg::validate_scenario(spec);
    return spec;
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& content) {
    std::ofstream out(path);
    if (!out)
        throw bcfg::ValidationError("cannot write '" + path.string() + "'");
    out << content;
}

int run(int argc, char** argv) {
    CLI::App app{
        "bcfg: central and balanced configurations of the n-body problem -- "
        "spectra, bifurcation instants, and branch continuation"};
    app.require_subcommand(1);

    GlobalFlags g;

    auto* analyze = app.add_subcommand(
        "analyze", "spectrum, bifurcation candidates, and spectral flow");
    std::string analyze_path;
    analyze->add_option("scenario", analyze_path, "scenario file")
        ->required();
    attach_globals(analyze, g);

    auto* trace = app.add_subcommand(
        "trace", "switch onto and trace the non-trivial branches");
    std::string trace_path;
    trace->add_option("scenario", trace_path, "scenario file")->required();
    attach_globals(trace, g);

    auto* plot =
        app.add_subcommand("plot", "render a traced branch CSV as SVG");
    std::string branch_path;
    std::string kind = "trajectories";
    plot->add_option("branch", branch_path, "branch CSV file")->required();
    plot->add_option("--kind", kind, "trajectories or s_profile")
        ->check(CLI::IsMember({"trajectories", "s_profile"}))
        ->capture_default_str();
    attach_globals(plot, g);

    auto* presets =
        app.add_subcommand("presets", "list the available initial presets");
    bool list_flag = false;
    presets->add_flag("--list", list_flag, "list preset tags");

    CLI11_PARSE(app, argc, argv);

    if (presets->parsed()) {
        for (const auto& [tag, desc] : bcfg::preset_catalog())
            std::cout << tag << ": " << desc << "\n";
        return 0;
    }

    std::filesystem::create_directories(g.out_dir);

    if (analyze->parsed()) {
        const bcfg::ScenarioSpec spec = load_with_overrides(analyze_path, g);
        const bcfg::AnalysisReport report = bcfg::run_analyze(spec);
        std::cout << bcfg::analysis_text(report);
        const std::filesystem::path json_path =
            std::filesystem::path(g.out_dir) / (spec.name + "_analysis.json");
        write_text_file(json_path, bcfg::analysis_json(report));
        std::cout << "wrote " << json_path.string() << "\n";
        return 0;
    }

    if (trace->parsed()) {
        const bcfg::ScenarioSpec spec = load_with_overrides(trace_path, g);
        const bcfg::TraceSummary summary =
            bcfg::run_trace(spec, g.out_dir);
        std::cout << bcfg::trace_text(summary);
        const bool had_candidates = !summary.outcomes.empty();
        if (had_candidates && summary.traced == 0) return 2;
        return 0;
    }

    // plot
    const bcfg::BranchRecord record = bcfg::read_branch_csv_file(branch_path);
    const bcfg::PlotKind pk = (kind == "trajectories")
                                  ? bcfg::PlotKind::trajectories
                                  : bcfg::PlotKind::s_profile;
    const std::string svg = bcfg::emit_plot(record, pk);
    const std::filesystem::path svg_path =
        std::filesystem::path(g.out_dir) /
        (std::filesystem::path(branch_path).stem().string() + "_" + kind +
         ".svg");
    write_text_file(svg_path, svg);
    std::cout << "wrote " << svg_path.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const bcfg::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const bcfg::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const bcfg::DimensionMismatch& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const bcfg::Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
