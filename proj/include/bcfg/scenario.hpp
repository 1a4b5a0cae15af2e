#pragma once

#include "bcfg/continuation.hpp"

#include <filesystem>
#include <iosfwd>

// Scenario definition and orchestration: the key-value scenario format,
// preset central configurations, the analyze/trace pipelines, branch
// persistence as CSV, and SVG plot emission.

namespace bcfg {

// A fully resolved experiment description.  `preset` selects the initial
// central configuration; `coords` holds the explicit coordinates when
// preset == "explicit" (raw, un-normalized; the preset builder polishes
// them onto the trivial branch).
struct ScenarioSpec {
    std::string name;
    std::vector<double> masses;
    int dimension = 3;
    std::string preset = "square";
    std::vector<double> coords;
    double s_lo = 1.0;
    double s_hi = 10.0;
    ContinuationSettings settings;

    bool operator==(const ScenarioSpec&) const = default;
};

// Parses the documented `bcfg-scenario v1` format.  Throws ParseError with
// a line number on malformed input and ValidationError on inconsistent
// content (bad masses, interval, preset/dimension mismatch).
ScenarioSpec load_scenario(std::istream& in);
ScenarioSpec load_scenario(const std::string& text);
ScenarioSpec load_scenario_file(const std::filesystem::path& path);

// Canonical text form; load_scenario(serialize_scenario(spec)) == spec.
std::string serialize_scenario(const ScenarioSpec& spec);

// Semantic checks shared by load_scenario and the pipelines; also syncs
// settings.s_min / settings.s_max with the declared interval.  Called
// explicitly after apply_override, which performs no validation itself.
void validate_scenario(ScenarioSpec& spec);

// Applies a `key=value` override using the same keys as the scenario
// format (settings keys included).  Throws ParseError on unknown keys.
void apply_override(ScenarioSpec& spec, const std::string& assignment);

// Tags accepted by preset_configuration, with one-line descriptions.
std::vector<std::pair<std::string, std::string>> preset_catalog();

// Builds the initial trivial-branch central configuration for a tag in
// {square, triangle_center, square_center, collinear, explicit}: symmetric
// presets in closed form, collinear ones by Newton from equal spacing,
// explicit coordinates polished by Newton.  The result is centered,
// normalized, and satisfies |balanced_residual(., m, 1)| < 1e-11.
PlanarConfiguration preset_configuration(const std::string& tag, const Masses& m,
                                         int dimension,
                                         const std::vector<double>& coords = {});

// Everything run_analyze derives from a scenario.
struct AnalysisReport {
    ScenarioSpec spec;
    Configuration configuration;
    SpectrumReport spectrum;
    std::vector<BifurcationCandidate> candidates;
    int lower_bound = 0;
    InertiaTriple planar;
    BifurcationCertificate certificate;
};

AnalysisReport run_analyze(const ScenarioSpec& spec);

// Console rendering (6 significant digits) and structured JSON rendering
// (full precision) of an analysis report.
std::string analysis_text(const AnalysisReport& report);
std::string analysis_json(const AnalysisReport& report);

// A persisted branch: metadata header plus the traced points and events.
struct BranchRecord {
    std::string scenario;
    double s_star = 0.0;
    std::string direction;  // "plus" or "minus"
    std::vector<double> masses;
    int dimension = 3;
    std::string settings_hash;
    std::vector<BranchPoint> points;
    std::vector<BranchEvent> events;
};

// One branch-switch attempt (candidate x kernel direction x sign) and what
// became of it.
struct TraceOutcome {
    double s_star = 0.0;
    int kernel_index = 0;
    std::string direction;
    std::string status;  // "traced", "duplicate" or "switch_failed"
    std::string detail;
    std::filesystem::path file;
    int point_count = 0;
};

struct TraceSummary {
    std::vector<TraceOutcome> outcomes;
    std::vector<BranchRecord> records;  // distinct branches, write order
    int traced = 0;
    int duplicates = 0;
    int failures = 0;
};

// Runs the full pipeline: candidates, branch switching in both directions
// of every kernel vector, tracing, de-duplication modulo symmetry and
// body permutation, and CSV emission into out_dir.  Per-candidate
// failures are recorded in the summary; only infrastructure errors throw.
TraceSummary run_trace(const ScenarioSpec& spec,
                       const std::filesystem::path& out_dir);

std::string trace_text(const TraceSummary& summary);

// Stable hash of the settings that shape a trace, recorded in CSV headers
// so mixed-provenance files are detectable.
std::string settings_hash(const ContinuationSettings& settings);

// CSV persistence.  Columns are exactly
// step,s,arclength,U,residual,iminus,izero,iplus,class,q0,...,q{nd-1}
// with 17-significant-digit floats and a '#'-prefixed metadata header.
void write_branch_csv(std::ostream& out, const BranchRecord& record);
BranchRecord read_branch_csv(std::istream& in);
BranchRecord read_branch_csv_file(const std::filesystem::path& path);

enum class PlotKind { trajectories, s_profile };

// Renders a self-contained SVG: body trajectories projected onto the
// plane transverse to the weighted axis (d = 3; the (x, y) plane itself
// for d = 2), or the s-against-arclength profile with turning points and
// classification bands.  Throws EmptyBranch on a record with no points.
std::string emit_plot(const BranchRecord& record, PlotKind kind);

}  // namespace bcfg
