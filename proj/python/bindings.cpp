// Python bindings for the balanced-configuration toolkit: value types,
// potential derivatives, trivial-branch spectra, bifurcation certificates,
// continuation, and the scenario pipelines.

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "bcfg/scenario.hpp"

namespace py = pybind11;
using namespace bcfg;

PYBIND11_MODULE(_bcfg, mod) {
    mod.doc() = "Central and balanced configurations of the n-body problem: "
                "spectra, bifurcation instants, and branch continuation.";
    mod.attr("__version__") = "0.1.0";

    // ---- exceptions ----------------------------------------------------
    // Later registrations take precedence, so the subtypes must come after
    // the catch-all base.
    py::register_exception<Error>(mod, "Error", PyExc_RuntimeError);
    py::register_exception<ParseError>(mod, "ParseError", PyExc_ValueError);
    py::register_exception<ValidationError>(mod, "ValidationError",
                                            PyExc_ValueError);

    // ---- value types ---------------------------------------------------
    py::class_<Masses>(mod, "Masses")
        .def(py::init<std::vector<double>>(), py::arg("values"))
        .def_property_readonly("n", &Masses::n)
        .def_property_readonly("values", &Masses::values)
        .def("total", &Masses::total)
        .def("__len__", &Masses::n)
        .def("__getitem__",
             [](const Masses& m, int i) {
                 if (i < 0 || i >= m.n()) throw py::index_error();
                 return m[i];
             })
        .def("__repr__", [](const Masses& m) {
            std::string out = "Masses([";
            for (int i = 0; i < m.n(); ++i)
                out += (i ? ", " : "") + std::to_string(m[i]);
            return out + "])";
        });

    py::class_<Configuration>(mod, "Configuration")
        .def(py::init<int, int, Eigen::VectorXd>(), py::arg("n"), py::arg("d"),
             py::arg("coords"))
        .def_property_readonly("n", &Configuration::n)
        .def_property_readonly("d", &Configuration::d)
        .def_property_readonly(
            "coords", [](const Configuration& q) { return q.coords(); })
        .def("body", &Configuration::body, py::arg("i"))
        .def("distance", &Configuration::distance, py::arg("i"), py::arg("j"))
        .def("diameter", &Configuration::diameter)
        .def("min_separation", &Configuration::min_separation)
        .def("distance_fingerprint", &Configuration::distance_fingerprint)
        .def("__repr__", [](const Configuration& q) {
            return "Configuration(n=" + std::to_string(q.n()) +
                   ", d=" + std::to_string(q.d()) + ")";
        });

    py::class_<PlanarConfiguration>(mod, "PlanarConfiguration")
        .def(py::init<const Configuration&, const Masses&>(), py::arg("base"),
             py::arg("masses"))
        .def_property_readonly("base", &PlanarConfiguration::base)
        .def_property_readonly("n", &PlanarConfiguration::n)
        .def_property_readonly("d", &PlanarConfiguration::d);

    py::class_<InertiaTriple>(mod, "InertiaTriple")
        .def(py::init<>())
        .def_readwrite("minus", &InertiaTriple::minus)
        .def_readwrite("zero", &InertiaTriple::zero)
        .def_readwrite("plus", &InertiaTriple::plus)
        .def("total", &InertiaTriple::total)
        .def(py::self == py::self)
        .def("__repr__", [](const InertiaTriple& t) {
            return "InertiaTriple(minus=" + std::to_string(t.minus) +
                   ", zero=" + std::to_string(t.zero) +
                   ", plus=" + std::to_string(t.plus) + ")";
        });

    py::class_<SpectrumReport>(mod, "SpectrumReport")
        .def_readonly("mu", &SpectrumReport::mu)
        .def_readonly("alpha", &SpectrumReport::alpha)
        .def_readonly("l", &SpectrumReport::l)
        .def_readonly("potential", &SpectrumReport::potential)
        .def("k", &SpectrumReport::k);

    py::class_<BifurcationCandidate>(mod, "BifurcationCandidate")
        .def_readonly("s_star", &BifurcationCandidate::s_star)
        .def_readonly("multiplicity", &BifurcationCandidate::multiplicity)
        .def_readonly("eigenvalue", &BifurcationCandidate::eigenvalue)
        .def("__repr__", [](const BifurcationCandidate& c) {
            return "BifurcationCandidate(s_star=" + std::to_string(c.s_star) +
                   ", multiplicity=" + std::to_string(c.multiplicity) + ")";
        });

    py::class_<BifurcationCertificate>(mod, "BifurcationCertificate")
        .def_readonly("flow", &BifurcationCertificate::flow)
        .def_readonly("candidates", &BifurcationCertificate::candidates)
        .def_readonly("candidates_in_interval",
                      &BifurcationCertificate::candidates_in_interval)
        .def_readonly("lower_bound", &BifurcationCertificate::lower_bound)
        .def_readonly("s_a", &BifurcationCertificate::s_a)
        .def_readonly("s_b", &BifurcationCertificate::s_b)
        .def_readonly("nudged", &BifurcationCertificate::nudged);

    py::enum_<PointClass>(mod, "PointClass")
        .value("local_minimum", PointClass::local_minimum)
        .value("saddle", PointClass::saddle)
        .value("degenerate", PointClass::degenerate);

    py::enum_<EventKind>(mod, "EventKind")
        .value("turning_point", EventKind::turning_point)
        .value("start_bifurcation", EventKind::start_bifurcation)
        .value("collision_stop", EventKind::collision_stop)
        .value("s_bound", EventKind::s_bound)
        .value("max_steps", EventKind::max_steps)
        .value("loop_closed", EventKind::loop_closed)
        .value("newton_failure", EventKind::newton_failure);

    py::class_<ContinuationSettings>(mod, "ContinuationSettings")
        .def(py::init<>())
        .def_readwrite("delta", &ContinuationSettings::delta)
        .def_readwrite("newton_tol", &ContinuationSettings::newton_tol)
        .def_readwrite("max_newton_iters", &ContinuationSettings::max_newton_iters)
        .def_readwrite("max_steps", &ContinuationSettings::max_steps)
        .def_readwrite("s_min", &ContinuationSettings::s_min)
        .def_readwrite("s_max", &ContinuationSettings::s_max)
        .def_readwrite("collision_tol", &ContinuationSettings::collision_tol)
        .def_readwrite("epsilon_switch", &ContinuationSettings::epsilon_switch)
        .def_readwrite("delta_s_switch", &ContinuationSettings::delta_s_switch)
        .def_readwrite("probe_turning_points",
                       &ContinuationSettings::probe_turning_points)
        .def_readwrite("seed", &ContinuationSettings::seed)
        .def(py::self == py::self);

    py::class_<BranchPoint>(mod, "BranchPoint")
        .def_readonly("q", &BranchPoint::q)
        .def_readonly("s", &BranchPoint::s)
        .def_readonly("potential", &BranchPoint::potential)
        .def_readonly("residual_norm", &BranchPoint::residual_norm)
        .def_readonly("inertia", &BranchPoint::inertia)
        .def_readonly("arclength", &BranchPoint::arclength)
        .def_readonly("tangent_s", &BranchPoint::tangent_s)
        .def_readonly("classification", &BranchPoint::classification)
        .def("__repr__", [](const BranchPoint& p) {
            return "BranchPoint(s=" + std::to_string(p.s) +
                   ", class=" + to_string(p.classification) + ")";
        });

    py::class_<BranchEvent>(mod, "BranchEvent")
        .def_readonly("index", &BranchEvent::index)
        .def_readonly("kind", &BranchEvent::kind);

    py::class_<Branch>(mod, "Branch")
        .def_readonly("points", &Branch::points)
        .def_readonly("events", &Branch::events)
        .def_readonly("parent", &Branch::parent);

    // ---- scenario / pipeline types -------------------------------------
    py::class_<ScenarioSpec>(mod, "ScenarioSpec")
        .def(py::init<>())
        .def_readwrite("name", &ScenarioSpec::name)
        .def_readwrite("masses", &ScenarioSpec::masses)
        .def_readwrite("dimension", &ScenarioSpec::dimension)
        .def_readwrite("preset", &ScenarioSpec::preset)
        .def_readwrite("coords", &ScenarioSpec::coords)
        .def_readwrite("s_lo", &ScenarioSpec::s_lo)
        .def_readwrite("s_hi", &ScenarioSpec::s_hi)
        .def_readwrite("settings", &ScenarioSpec::settings)
        .def(py::self == py::self);

    py::class_<AnalysisReport>(mod, "AnalysisReport")
        .def_readonly("spec", &AnalysisReport::spec)
        .def_readonly("configuration", &AnalysisReport::configuration)
        .def_readonly("spectrum", &AnalysisReport::spectrum)
        .def_readonly("candidates", &AnalysisReport::candidates)
        .def_readonly("lower_bound", &AnalysisReport::lower_bound)
        .def_readonly("planar", &AnalysisReport::planar)
        .def_readonly("certificate", &AnalysisReport::certificate);

    py::class_<BranchRecord>(mod, "BranchRecord")
        .def_readonly("scenario", &BranchRecord::scenario)
        .def_readonly("s_star", &BranchRecord::s_star)
        .def_readonly("direction", &BranchRecord::direction)
        .def_readonly("masses", &BranchRecord::masses)
        .def_readonly("dimension", &BranchRecord::dimension)
        .def_readonly("settings_hash", &BranchRecord::settings_hash)
        .def_readonly("points", &BranchRecord::points)
        .def_readonly("events", &BranchRecord::events);

    py::class_<TraceOutcome>(mod, "TraceOutcome")
        .def_readonly("s_star", &TraceOutcome::s_star)
        .def_readonly("kernel_index", &TraceOutcome::kernel_index)
        .def_readonly("direction", &TraceOutcome::direction)
        .def_readonly("status", &TraceOutcome::status)
        .def_readonly("detail", &TraceOutcome::detail)
        .def_readonly("file", &TraceOutcome::file)
        .def_readonly("point_count", &TraceOutcome::point_count);

    py::class_<TraceSummary>(mod, "TraceSummary")
        .def_readonly("outcomes", &TraceSummary::outcomes)
        .def_readonly("records", &TraceSummary::records)
        .def_readonly("traced", &TraceSummary::traced)
        .def_readonly("duplicates", &TraceSummary::duplicates)
        .def_readonly("failures", &TraceSummary::failures);

    py::enum_<PlotKind>(mod, "PlotKind")
        .value("trajectories", PlotKind::trajectories)
        .value("s_profile", PlotKind::s_profile);

    // ---- potential laboratory ------------------------------------------
    mod.def("total_potential", &total_potential, py::arg("q"), py::arg("masses"));
    mod.def("potential_gradient", &potential_gradient, py::arg("q"),
            py::arg("masses"));
    mod.def("potential_hessian", &potential_hessian, py::arg("q"),
            py::arg("masses"));
    mod.def("center_of_mass", &center_of_mass, py::arg("q"), py::arg("masses"));
    mod.def(
        "normalize_to_sphere",
        [](const Configuration& q, const Masses& m, double s) {
            return normalize_to_sphere(q, m, SParameter(s));
        },
        py::arg("q"), py::arg("masses"), py::arg("s"));
    mod.def(
        "balanced_residual",
        [](const Configuration& q, const Masses& m, double s) {
            return balanced_residual(q, m, SParameter(s));
        },
        py::arg("q"), py::arg("masses"), py::arg("s"));
    mod.def("balanced_residual_raw", &balanced_residual_raw, py::arg("q"),
            py::arg("masses"), py::arg("s"));
    mod.def("balanced_residual_jacobian", &balanced_residual_jacobian,
            py::arg("q"), py::arg("masses"), py::arg("s"));
    mod.def(
        "s_inner",
        [](const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Masses& m,
           double s, int d) { return s_inner(a, b, m, SParameter(s), d); },
        py::arg("a"), py::arg("b"), py::arg("masses"), py::arg("s"),
        py::arg("d"));

    // ---- spectrum ------------------------------------------------------
    mod.def("b_matrix", &b_matrix, py::arg("qh"), py::arg("masses"));
    mod.def("d_matrix", &d_matrix, py::arg("qh"), py::arg("masses"));
    mod.def("axis_major_permutation", &axis_major_permutation, py::arg("n"),
            py::arg("d"));
    mod.def("cluster_spectrum", &cluster_spectrum, py::arg("qh"),
            py::arg("masses"));
    mod.def("normal_inertia_at", &normal_inertia_at, py::arg("report"),
            py::arg("s"));
    mod.def("planar_inertia", &planar_inertia, py::arg("qh"), py::arg("masses"));
    mod.def("bifurcation_candidates", &bifurcation_candidates,
            py::arg("report"));
    mod.def("bifurcation_lower_bound", &bifurcation_lower_bound,
            py::arg("report"));
    mod.def("candidate_kernel_directions", &candidate_kernel_directions,
            py::arg("qh"), py::arg("masses"), py::arg("candidate"));

    // ---- spectral flow -------------------------------------------------
    mod.def("certify_bifurcation", &certify_bifurcation, py::arg("qh"),
            py::arg("masses"), py::arg("s_a"), py::arg("s_b"));

    // ---- continuation --------------------------------------------------
    mod.def("branch_switch", &branch_switch, py::arg("qh"), py::arg("s_star"),
            py::arg("kernel_dir"), py::arg("settings"), py::arg("masses"));
    mod.def("trace_branch", &trace_branch, py::arg("anchor"), py::arg("first"),
            py::arg("settings"), py::arg("masses"));
    mod.def("solve_at_fixed_s", &solve_at_fixed_s, py::arg("guess"),
            py::arg("s"), py::arg("settings"), py::arg("masses"));
    mod.def("classify_point", &classify_point, py::arg("point"),
            py::arg("masses"));
    mod.def("branch_point_inertia", &branch_point_inertia, py::arg("point"),
            py::arg("masses"));
    mod.def("symmetry_distance", &symmetry_distance, py::arg("a"), py::arg("b"),
            py::arg("masses"));

    // ---- scenarios and pipelines ---------------------------------------
    mod.def("preset_catalog", &preset_catalog);
    mod.def("preset_configuration", &preset_configuration, py::arg("tag"),
            py::arg("masses"), py::arg("dimension"),
            py::arg("coords") = std::vector<double>{});
    mod.def(
        "load_scenario",
        [](const std::string& text) { return load_scenario(text); },
        py::arg("text"));
    mod.def("load_scenario_file", &load_scenario_file, py::arg("path"));
    mod.def("serialize_scenario", &serialize_scenario, py::arg("spec"));
    mod.def("validate_scenario", &validate_scenario, py::arg("spec"));
    mod.def("apply_override", &apply_override, py::arg("spec"),
            py::arg("assignment"));
    mod.def("run_analyze", &run_analyze, py::arg("spec"));
    mod.def("analysis_text", &analysis_text, py::arg("report"));
    mod.def("analysis_json", &analysis_json, py::arg("report"));
    mod.def("run_trace", &run_trace, py::arg("spec"), py::arg("out_dir"));
    mod.def("trace_text", &trace_text, py::arg("summary"));
    mod.def("settings_hash", &settings_hash, py::arg("settings"));
    mod.def("read_branch_csv_file", &read_branch_csv_file, py::arg("path"));
    mod.def("emit_plot", &emit_plot, py::arg("record"), py::arg("kind"));
}
