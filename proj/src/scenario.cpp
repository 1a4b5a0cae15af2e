#include "bcfg/scenario.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

namespace bcfg {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double to_double(const std::string& token, int line_no, const std::string& key) {
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end == token.c_str() || *end != '\0')
        throw ParseError("line " + std::to_string(line_no) + ": key '" + key +
                         "': bad number '" + token + "'");
    return v;
}

long to_int(const std::string& token, int line_no, const std::string& key) {
    char* end = nullptr;
    const long v = std::strtol(token.c_str(), &end, 10);
    if (end == token.c_str() || *end != '\0')
        throw ParseError("line " + std::to_string(line_no) + ": key '" + key +
                         "': bad integer '" + token + "'");
    return v;
}

std::vector<double> to_doubles(const std::string& value, int line_no,
                               const std::string& key) {
    std::istringstream in(value);
    std::vector<double> out;
    std::string tok;
    while (in >> tok) out.push_back(to_double(tok, line_no, key));
    return out;
}

bool known_preset(const std::string& tag) {
    for (const auto& [name, desc] : preset_catalog())
        if (name == tag) return true;
    return false;
}

// Single flat key namespace shared by the scenario file and --override;
// the [settings] section in files is organizational only.
void apply_key(ScenarioSpec& spec, const std::string& key,
               const std::string& value, int line_no) {
    if (key == "name") {
        spec.name = value;
    } else if (key == "preset") {
        if (!known_preset(value))
            throw ParseError("line " + std::to_string(line_no) +
                             ": unknown preset '" + value + "'");
        spec.preset = value;
    } else if (key == "dimension") {
        spec.dimension = static_cast<int>(to_int(value, line_no, key));
    } else if (key == "masses") {
        spec.masses = to_doubles(value, line_no, key);
    } else if (key == "coords") {
        spec.coords = to_doubles(value, line_no, key);
    } else if (key == "s_interval") {
        const std::vector<double> iv = to_doubles(value, line_no, key);
        if (iv.size() != 2)
            throw ParseError("line " + std::to_string(line_no) +
                             ": s_interval needs two values");
        spec.s_lo = iv[0];
        spec.s_hi = iv[1];
    } else if (key == "delta") {
        spec.settings.delta = to_double(value, line_no, key);
    } else if (key == "newton_tol") {
        spec.settings.newton_tol = to_double(value, line_no, key);
    } else if (key == "max_newton_iters") {
        spec.settings.max_newton_iters =
            static_cast<int>(to_int(value, line_no, key));
    } else if (key == "max_steps") {
        spec.settings.max_steps = static_cast<int>(to_int(value, line_no, key));
    } else if (key == "collision_tol") {
        spec.settings.collision_tol = to_double(value, line_no, key);
    } else if (key == "epsilon_switch") {
        spec.settings.epsilon_switch = to_double(value, line_no, key);
    } else if (key == "delta_s_switch") {
        spec.settings.delta_s_switch = to_double(value, line_no, key);
    } else if (key == "probe_turning_points") {
        if (value == "true" || value == "1")
            spec.settings.probe_turning_points = true;
        else if (value == "false" || value == "0")
            spec.settings.probe_turning_points = false;
        else
            throw ParseError("line " + std::to_string(line_no) +
                             ": probe_turning_points: bad boolean '" + value +
                             "'");
    } else if (key == "seed") {
        spec.settings.seed =
            static_cast<unsigned>(to_int(value, line_no, key));
    } else {
        throw ParseError("line " + std::to_string(line_no) + ": unknown key '" +
                         key + "'");
    }
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

}  // namespace

ScenarioSpec load_scenario(std::istream& in) {
    std::string line;
    if (!std::getline(in, line))
        throw ParseError("line 1: empty input, expected 'bcfg-scenario v1'");
    if (trim(line) != "bcfg-scenario v1")
        throw ParseError("line 1: expected header 'bcfg-scenario v1', got '" +
                         trim(line) + "'");

    ScenarioSpec spec;
    spec.name.clear();
    spec.preset.clear();
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        if (t.front() == '[') {
            if (t != "[settings]")
                throw ParseError("line " + std::to_string(line_no) +
                                 ": unknown section '" + t + "'");
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ParseError("line " + std::to_string(line_no) +
                             ": expected 'key = value', got '" + t + "'");
        apply_key(spec, trim(t.substr(0, eq)), trim(t.substr(eq + 1)), line_no);
    }
    validate_scenario(spec);
    return spec;
}

ScenarioSpec load_scenario(const std::string& text) {
    std::istringstream in(text);
    return load_scenario(in);
}

ScenarioSpec load_scenario_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path.string() + "'");
    return load_scenario(in);
}

void validate_scenario(ScenarioSpec& spec) {
    if (spec.name.empty()) throw ValidationError("scenario has no name");
    if (spec.preset.empty()) throw ValidationError("scenario has no preset");
    if (spec.dimension != 2 && spec.dimension != 3)
        throw ValidationError("dimension must be 2 or 3, got " +
                              std::to_string(spec.dimension));
    Masses m(spec.masses);  // checks n >= 2 and positivity

    if ((spec.preset == "square" || spec.preset == "triangle_center" ||
         spec.preset == "square_center") &&
        spec.dimension != 3)
        throw ValidationError("preset '" + spec.preset + "' requires dimension 3");
    if (spec.preset == "collinear" && spec.dimension != 2)
        throw ValidationError("preset 'collinear' requires dimension 2");

    if (spec.preset == "explicit") {
        const int nd = m.n() * spec.dimension;
        if (static_cast<int>(spec.coords.size()) != nd)
            throw ValidationError("explicit preset needs " + std::to_string(nd) +
                                  " coordinates, got " +
                                  std::to_string(spec.coords.size()));
        const Eigen::Map<const Eigen::VectorXd> flat(spec.coords.data(),
                                                     spec.coords.size());
        try {
            require_collision_free(
                Configuration(m.n(), spec.dimension, flat));
        } catch (const CollisionError& e) {
            throw ValidationError(std::string("explicit coordinates collide: ") +
                                  e.what());
        }
    } else if (!spec.coords.empty()) {
        throw ValidationError("coords are only meaningful with preset explicit");
    }

    if (!(spec.s_lo >= 1.0))
        throw ValidationError("s_interval must start at >= 1");
    if (!(spec.s_hi > spec.s_lo))
        throw ValidationError("s_interval must be increasing");

    const ContinuationSettings& st = spec.settings;
    if (!(st.delta > 0.0) || !(st.newton_tol > 0.0) || !(st.collision_tol > 0.0))
        throw ValidationError("delta, newton_tol and collision_tol must be > 0");
    if (st.max_newton_iters < 1 || st.max_steps < 1)
        throw ValidationError("iteration limits must be >= 1");
    if (!(st.epsilon_switch > 0.0) || !(st.delta_s_switch > 0.0))
        throw ValidationError("switch offsets must be > 0");

    spec.settings.s_min = spec.s_lo;
    spec.settings.s_max = spec.s_hi;
}

std::string serialize_scenario(const ScenarioSpec& spec) {
    std::ostringstream out;
    out << "bcfg-scenario v1\n";
    out << "name = " << spec.name << "\n";
    out << "preset = " << spec.preset << "\n";
    out << "dimension = " << spec.dimension << "\n";
    out << "masses =";
    for (double v : spec.masses) out << " " << fmt17(v);
    out << "\n";
    if (!spec.coords.empty()) {
        out << "coords =";
        for (double v : spec.coords) out << " " << fmt17(v);
        out << "\n";
    }
    out << "s_interval = " << fmt17(spec.s_lo) << " " << fmt17(spec.s_hi)
        << "\n";
    out << "\n[settings]\n";
    const ContinuationSettings& st = spec.settings;
    out << "delta = " << fmt17(st.delta) << "\n";
    out << "newton_tol = " << fmt17(st.newton_tol) << "\n";
    out << "max_newton_iters = " << st.max_newton_iters << "\n";
    out << "max_steps = " << st.max_steps << "\n";
    out << "collision_tol = " << fmt17(st.collision_tol) << "\n";
    out << "epsilon_switch = " << fmt17(st.epsilon_switch) << "\n";
    out << "delta_s_switch = " << fmt17(st.delta_s_switch) << "\n";
    out << "probe_turning_points = " << (st.probe_turning_points ? "true" : "false")
        << "\n";
    out << "seed = " << st.seed << "\n";
    return out.str();
}

void apply_override(ScenarioSpec& spec, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ParseError("override '" + assignment + "': expected key=value");
    apply_key(spec, trim(assignment.substr(0, eq)),
              trim(assignment.substr(eq + 1)), 0);
}

AnalysisReport run_analyze(const ScenarioSpec& spec) {
    ScenarioSpec sp = spec;
    validate_scenario(sp);
    const Masses m(sp.masses);
    const PlanarConfiguration qh =
        preset_configuration(sp.preset, m, sp.dimension, sp.coords);

    AnalysisReport report{sp, qh.base(), cluster_spectrum(qh, m)};
    report.candidates = bifurcation_candidates(report.spectrum);
    report.lower_bound = bifurcation_lower_bound(report.spectrum);
    report.planar = planar_inertia(qh, m);
    report.certificate = certify_bifurcation(qh, m, sp.s_lo, sp.s_hi);
    return report;
}

std::string analysis_text(const AnalysisReport& r) {
    std::ostringstream out;
    out << "scenario '" << r.spec.name << "'  (preset " << r.spec.preset
        << ", n = " << r.spec.masses.size() << ", d = " << r.spec.dimension
        << ")\n";
    out << "trivial-branch potential U = " << fmt6(r.spectrum.potential) << "\n";
    out << "spectrum of M^-1 B (zero mode removed):\n";
    for (int j = 0; j < r.spectrum.k(); ++j) {
        out << "  mu[" << j << "] = " << fmt6(r.spectrum.mu[j])
            << "   multiplicity " << r.spectrum.alpha[j];
        if (j == r.spectrum.l) out << "   [= -U]";
        out << "\n";
    }
    out << "bifurcation candidates (s* = -mu/U):\n";
    if (r.candidates.empty()) out << "  none\n";
    for (const BifurcationCandidate& c : r.candidates)
        out << "  s* = " << fmt6(c.s_star) << "   multiplicity "
            << c.multiplicity << "   (mu = " << fmt6(c.eigenvalue) << ")\n";
    out << "lower bound on bifurcation instants: " << r.lower_bound << "\n";
    out << "planar inertia (minus, zero, plus) = (" << r.planar.minus << ", "
        << r.planar.zero << ", " << r.planar.plus << ")\n";
    out << "spectral flow over [" << fmt6(r.certificate.s_a) << ", "
        << fmt6(r.certificate.s_b) << "] = " << r.certificate.flow
        << "   (candidate multiplicity inside: "
        << r.certificate.candidates_in_interval << ")";
    if (r.certificate.nudged) out << "   [endpoints nudged]";
    out << "\n";
    return out.str();
}

std::string analysis_json(const AnalysisReport& r) {
    nlohmann::json j;
    j["name"] = r.spec.name;
    j["preset"] = r.spec.preset;
    j["dimension"] = r.spec.dimension;
    j["masses"] = r.spec.masses;
    j["potential"] = r.spectrum.potential;
    j["spectrum"] = {{"mu", r.spectrum.mu},
                     {"alpha", r.spectrum.alpha},
                     {"l", r.spectrum.l}};
    j["candidates"] = nlohmann::json::array();
    for (const BifurcationCandidate& c : r.candidates)
        j["candidates"].push_back({{"s_star", c.s_star},
                                   {"multiplicity", c.multiplicity},
                                   {"eigenvalue", c.eigenvalue}});
    j["lower_bound"] = r.lower_bound;
    j["planar_inertia"] = {{"minus", r.planar.minus},
                           {"zero", r.planar.zero},
                           {"plus", r.planar.plus}};
    j["spectral_flow"] = {{"value", r.certificate.flow},
                          {"s_a", r.certificate.s_a},
                          {"s_b", r.certificate.s_b},
                          {"nudged", r.certificate.nudged},
                          {"candidates_in_interval",
                           r.certificate.candidates_in_interval}};
    return j.dump(2) + "\n";
}

namespace {

// Seeded random probe around the turning points of a freshly traced
// branch: displace, re-solve at frozen s, and report solutions whose
// fingerprint matches neither the branch nor the trivial configuration.
std::string probe_extra_solutions(const Branch& branch,
                                  const ContinuationSettings& settings,
                                  const Masses& m) {
    std::mt19937 rng(settings.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    int found = 0, probes = 0;
    for (const BranchEvent& e : branch.events) {
        if (e.kind != EventKind::turning_point) continue;
        const BranchPoint& p = branch.points[e.index];
        const int nd = static_cast<int>(p.q.coords().size());
        for (int trial = 0; trial < 5; ++trial) {
            ++probes;
            Eigen::VectorXd u(nd);
            for (int i = 0; i < nd; ++i) u[i] = gauss(rng);
            u *= 0.02 / u.norm();
            try {
                const Configuration guess(p.q.n(), p.q.d(), p.q.coords() + u);
                const BranchPoint sol =
                    solve_at_fixed_s(guess, p.s, settings, m);
                const std::vector<double> fp = sol.q.distance_fingerprint();
                double best = 1e300;
                for (const BranchPoint& bp : branch.points) {
                    if (std::abs(bp.s - p.s) > 20.0 * settings.delta) continue;
                    const std::vector<double> bfp = bp.q.distance_fingerprint();
                    double diff = 0.0;
                    for (std::size_t k = 0; k < fp.size(); ++k)
                        diff = std::max(diff, std::abs(fp[k] - bfp[k]));
                    best = std::min(best, diff);
                }
                if (best > 1e-4) ++found;
            } catch (const Error&) {
                // probe did not converge; that is fine
            }
        }
    }
    if (probes == 0) return "";
    std::ostringstream out;
    out << "probe: " << found << "/" << probes
        << " displacements converged to off-branch solutions";
    return out.str();
}

}  // namespace

TraceSummary run_trace(const ScenarioSpec& spec,
                       const std::filesystem::path& out_dir) {
    ScenarioSpec sp = spec;
    validate_scenario(sp);
    const Masses m(sp.masses);
    const PlanarConfiguration qh =
        preset_configuration(sp.preset, m, sp.dimension, sp.coords);
    const SpectrumReport spectrum = cluster_spectrum(qh, m);
    const std::vector<BifurcationCandidate> cands =
        bifurcation_candidates(spectrum);
    const std::string hash = settings_hash(sp.settings);

    TraceSummary summary;
    std::filesystem::create_directories(out_dir);

    for (const BifurcationCandidate& cand : cands) {
        const std::vector<Eigen::VectorXd> kernel =
            candidate_kernel_directions(qh, m, cand);
        // Fingerprints of this candidate's already-traced first points,
        // for congruence de-duplication.
        std::vector<std::pair<std::vector<double>, std::string>> seen;

        for (std::size_t ki = 0; ki < kernel.size(); ++ki) {
            for (int sign : {+1, -1}) {
                TraceOutcome oc;
                oc.s_star = cand.s_star;
                oc.kernel_index = static_cast<int>(ki);
                oc.direction = (sign > 0) ? "plus" : "minus";
                if (kernel.size() > 1)
                    oc.direction += "_k" + std::to_string(ki);

                if (cand.s_star <= sp.s_lo || cand.s_star >= sp.s_hi) {
                    oc.status = "switch_failed";
                    oc.detail = "candidate lies outside the s interval";
                    summary.outcomes.push_back(oc);
                    ++summary.failures;
                    continue;
                }

                try {
                    const auto [anchor, first] = branch_switch(
                        qh, cand.s_star, sign * kernel[ki], sp.settings, m);

                    const std::vector<double> fp =
                        first.q.distance_fingerprint();
                    std::string congruent_to;
                    for (const auto& [sfp, sdir] : seen) {
                        double diff = 0.0;
                        for (std::size_t k = 0; k < fp.size(); ++k)
                            diff = std::max(diff, std::abs(fp[k] - sfp[k]));
                        if (diff < 1e-6) {
                            congruent_to = sdir;
                            break;
                        }
                    }
                    if (!congruent_to.empty()) {
                        oc.status = "duplicate";
                        oc.detail = "congruent to direction " + congruent_to;
                        summary.outcomes.push_back(oc);
                        ++summary.duplicates;
                        continue;
                    }

                    Branch branch = trace_branch(anchor, first, sp.settings, m);
                    branch.parent = {{sp.name, cand.s_star}};

                    BranchRecord rec;
                    rec.scenario = sp.name;
                    rec.s_star = cand.s_star;
                    rec.direction = oc.direction;
                    rec.masses = sp.masses;
                    rec.dimension = sp.dimension;
                    rec.settings_hash = hash;
                    rec.points = branch.points;
                    rec.events.push_back({0, EventKind::start_bifurcation});
                    rec.events.insert(rec.events.end(), branch.events.begin(),
                                      branch.events.end());

                    char fname[128];
                    std::snprintf(fname, sizeof(fname), "%s_s%.4f_%s.csv",
                                  sp.name.c_str(), cand.s_star,
                                  oc.direction.c_str());
                    oc.file = out_dir / fname;
                    std::ofstream out(oc.file);
                    if (!out)
                        throw ValidationError("cannot write '" +
                                              oc.file.string() + "'");
                    write_branch_csv(out, rec);

                    oc.status = "traced";
                    oc.point_count = static_cast<int>(rec.points.size());
                    if (sp.settings.probe_turning_points)
                        oc.detail = probe_extra_solutions(branch, sp.settings, m);
                    seen.emplace_back(fp, oc.direction);
                    summary.records.push_back(std::move(rec));
                    summary.outcomes.push_back(oc);
                    ++summary.traced;
                } catch (const Error& e) {
                    oc.status = "switch_failed";
                    oc.detail = e.what();
                    summary.outcomes.push_back(oc);
                    ++summary.failures;
                }
            }
        }
    }
    return summary;
}

std::string trace_text(const TraceSummary& summary) {
    std::ostringstream out;
    for (const TraceOutcome& oc : summary.outcomes) {
        out << "candidate s* = " << fmt6(oc.s_star) << "  direction "
            << oc.direction << ": ";
        if (oc.status == "traced") {
            out << "traced " << oc.point_count << " points -> "
                << oc.file.filename().string() << "\n";
            const BranchRecord* rec = nullptr;
            for (const BranchRecord& r : summary.records)
                if (r.s_star == oc.s_star && r.direction == oc.direction)
                    rec = &r;
            if (rec != nullptr && !rec->points.empty()) {
                out << "    events:";
                for (const BranchEvent& e : rec->events)
                    out << " " << to_string(e.kind) << "@" << e.index;
                out << "\n";
                const BranchPoint& last = rec->points.back();
                out << "    end: s = " << fmt6(last.s) << ", class "
                    << to_string(last.classification) << ", U = "
                    << fmt6(last.potential) << "\n";
            }
            if (!oc.detail.empty()) out << "    " << oc.detail << "\n";
        } else if (oc.status == "duplicate") {
            out << "skipped (" << oc.detail << ")\n";
        } else {
            out << "switch failed (" << oc.detail << ")\n";
        }
    }
    out << "traced " << summary.traced << " branch(es), " << summary.duplicates
        << " duplicate direction(s), " << summary.failures << " failure(s)\n";
    return out.str();
}

}  // namespace bcfg
