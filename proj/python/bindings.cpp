#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "coopnav/comm.hpp"
#include "coopnav/magmap.hpp"
#include "coopnav/magnetic_pf.hpp"
#include "coopnav/montecarlo.hpp"
#include "coopnav/ranging_ekf.hpp"
#include "coopnav/trial.hpp"
#include "coopnav/world.hpp"

namespace py = pybind11;
using namespace coopnav;

namespace {

py::dict trial_result_to_dict(const TrialResult& r, bool with_series) {
    py::dict d;
    d["seed"] = r.seed;
    d["avg_position_error_m"] = r.avg_position_error;
    d["avg_measured_pair_error_m"] = r.avg_measured_pair_error;
    d["avg_unmeasured_pair_error_m"] = r.avg_unmeasured_pair_error;
    d["dr_final_error_m"] = r.dr_final_error;
    d["final_gamma_estimate_rad"] = r.final_gamma_estimate;
    d["final_gamma_true_rad"] = r.final_gamma_true;
    d["weight_reset_events"] = r.weight_reset_events;
    d["left_map"] = r.left_map;
    d["aborted"] = r.aborted;
    if (with_series) {
        d["pf_error_series_m"] = r.pf_error_series;
        d["dr_error_series_m"] = r.dr_error_series;
        d["measured_error_series_m"] = r.measured_error_series;
        d["unmeasured_error_series_m"] = r.unmeasured_error_series;
    }
    return d;
}

py::dict summary_to_dict(const MonteCarloSummary& s) {
    py::dict d;
    d["case"] = s.case_name;
    d["n_trials"] = s.n_trials;
    d["mean_avg_position_error_m"] = s.mean_avg_position_error;
    d["std_avg_position_error_m"] = s.std_avg_position_error;
    d["mean_measured_pair_error_m"] = s.mean_measured_pair_error;
    d["std_measured_pair_error_m"] = s.std_measured_pair_error;
    d["mean_unmeasured_pair_error_m"] = s.mean_unmeasured_pair_error;
    d["std_unmeasured_pair_error_m"] = s.std_unmeasured_pair_error;
    d["mean_dr_final_error_m"] = s.mean_dr_final_error;
    d["std_dr_final_error_m"] = s.std_dr_final_error;
    d["weight_reset_trials"] = s.weight_reset_trials;
    d["left_map_trials"] = s.left_map_trials;
    d["aborted_trials"] = s.aborted_trials;
    py::list trials;
    for (const auto& t : s.trials) trials.append(trial_result_to_dict(t, false));
    d["trials"] = trials;
    return d;
}

} // namespace

PYBIND11_MODULE(_coopnav, m) {
    m.doc() = "Cooperative UAV localization: pairwise-ranging EKF + magnetic-anomaly "
              "map-matching particle filter, plus the Monte Carlo harness.";

    // ---- communication schedule
    m.def("edge_set", &edge_set, py::arg("n_uavs"), py::arg("k"),
          "Pairwise ranging/communication edges (0-based ids) used at step k.");
    m.def("vertices_reached", &vertices_reached, py::arg("k"));
    m.def("steps_lower_bound", &steps_lower_bound, py::arg("n_uavs"));
    m.def("propagation_steps", &propagation_steps, py::arg("n_uavs"));

    // ---- magnetic anomaly maps
    py::class_<MagneticMap>(m, "MagneticMap")
        .def_readonly("origin_east", &MagneticMap::origin_east)
        .def_readonly("origin_north", &MagneticMap::origin_north)
        .def_readonly("cell_size", &MagneticMap::cell_size)
        .def_readonly("n_cols", &MagneticMap::n_cols)
        .def_readonly("n_rows", &MagneticMap::n_rows)
        .def_readonly("values", &MagneticMap::values)
        .def("sample", &MagneticMap::sample, py::arg("east"), py::arg("north"))
        .def("try_sample", &MagneticMap::try_sample, py::arg("east"), py::arg("north"))
        .def("contains", &MagneticMap::contains, py::arg("east"), py::arg("north"))
        .def("__repr__", [](const MagneticMap& g) {
            return "<MagneticMap " + std::to_string(g.n_cols) + "x" + std::to_string(g.n_rows) +
                   " @" + std::to_string(g.cell_size) + " m>";
        });

    py::class_<SyntheticMapSpec>(m, "SyntheticMapSpec")
        .def(py::init<>())
        .def_readwrite("seed", &SyntheticMapSpec::seed)
        .def_readwrite("origin_east", &SyntheticMapSpec::origin_east)
        .def_readwrite("origin_north", &SyntheticMapSpec::origin_north)
        .def_readwrite("extent_east", &SyntheticMapSpec::extent_east)
        .def_readwrite("extent_north", &SyntheticMapSpec::extent_north)
        .def_readwrite("cell_size", &SyntheticMapSpec::cell_size)
        .def_readwrite("baseline", &SyntheticMapSpec::baseline)
        .def_readwrite("bump_count", &SyntheticMapSpec::bump_count)
        .def_readwrite("bump_amplitude_min", &SyntheticMapSpec::bump_amplitude_min)
        .def_readwrite("bump_amplitude_max", &SyntheticMapSpec::bump_amplitude_max)
        .def_readwrite("bump_sigma_min", &SyntheticMapSpec::bump_sigma_min)
        .def_readwrite("bump_sigma_max", &SyntheticMapSpec::bump_sigma_max);

    m.def("generate_synthetic", &generate_synthetic, py::arg("spec"));
    m.def("degrade_resolution", &degrade_resolution, py::arg("map"), py::arg("smoothing_sigma"));
    m.def("load_grid", &load_grid, py::arg("path"));
    m.def("save_grid", &save_grid, py::arg("map"), py::arg("path"));

    // ---- small building blocks handy from python
    m.def("reference_velocity",
          [](double amplitude, double baseline, double angular_frequency, double phase,
             double t) {
              return reference_velocity(
                  ReferenceProfile{0.0, amplitude, baseline, angular_frequency, phase}, t);
          },
          py::arg("amplitude"), py::arg("baseline"), py::arg("angular_frequency"),
          py::arg("phase"), py::arg("t"));
    m.def("rotate_relative",
          [](double x, double y, double gamma) { return rotate_relative({x, y}, gamma); },
          py::arg("x"), py::arg("y"), py::arg("gamma"));

    // ---- trials and Monte Carlo
    py::class_<TrialConfig>(m, "TrialConfig")
        .def_readwrite("group_size", &TrialConfig::group_size)
        .def_readwrite("duration", &TrialConfig::duration)
        .def_readwrite("master_seed", &TrialConfig::master_seed)
        .def_readwrite("default_trials", &TrialConfig::default_trials)
        .def_property(
            "particle_count", [](const TrialConfig& c) { return c.pf.particle_count; },
            [](TrialConfig& c, int m_) { c.pf.particle_count = m_; })
        .def_property(
            "low_resolution", [](const TrialConfig& c) { return c.low_resolution.enabled; },
            [](TrialConfig& c, bool on) { c.low_resolution.enabled = on; });

    m.def("load_trial_config", &load_trial_config, py::arg("path"));
    m.def("parse_trial_config", &parse_trial_config, py::arg("json_text"));
    m.def("build_map", &build_map, py::arg("config"));

    m.def(
        "run_trial",
        [](const TrialConfig& cfg, std::uint64_t seed, bool with_series) {
            TrialResult r;
            {
                py::gil_scoped_release release;
                r = run_trial(cfg, seed);
            }
            return trial_result_to_dict(r, with_series);
        },
        py::arg("config"), py::arg("seed"), py::arg("with_series") = false);
    m.def(
        "run_monte_carlo",
        [](const TrialConfig& cfg, int n_trials, std::uint64_t master_seed, int n_threads) {
            MonteCarloSummary s;
            {
                py::gil_scoped_release release;
                s = run_monte_carlo(cfg, n_trials, master_seed, n_threads);
            }
            return summary_to_dict(s);
        },
        py::arg("config"), py::arg("n_trials"), py::arg("master_seed"),
        py::arg("n_threads") = 0);
}
