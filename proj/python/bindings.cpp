#include <pybind11/pybind11.h>
#include <pybind11/operators.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include <nlohmann/json.hpp>

#include "highway_rl/errors.hpp"
#include "highway_rl/harness/commands.hpp"
#include "highway_rl/mdrnn/gmm.hpp"
#include "highway_rl/safety/safety.hpp"
#include "highway_rl/sim/highway.hpp"

namespace py = pybind11;
namespace sim = highway_rl::sim;
namespace safety = highway_rl::safety;
namespace md = highway_rl::mdrnn;
namespace hx = highway_rl::harness;

namespace {

using Values = std::vector<double>;

Values to_list(const sim::AffordanceVector& a) { return {a.values.begin(), a.values.end()}; }

sim::AffordanceVector from_list(const Values& v) {
  if (v.size() != sim::kAffordanceDim)
    throw highway_rl::ConfigError("expected " + std::to_string(sim::kAffordanceDim) + " affordance values");
  sim::AffordanceVector a;
  std::copy(v.begin(), v.end(), a.values.begin());
  return a;
}

sim::ScenarioConfig scenario_from_string(const std::string& text) {
  auto cfg = text.empty() ? sim::ScenarioConfig{} : sim::scenario_from_json(nlohmann::json::parse(text));
  cfg.validate();
  return cfg;
}

py::dict verdict_dict(const safety::SafetyVerdict& v) {
  py::dict d;
  d["safe"] = v.safe;
  d["slot"] = v.violating_slot ? py::cast(static_cast<int>(*v.violating_slot)) : py::none();
  d["step"] = v.violating_horizon_step ? py::cast(*v.violating_horizon_step) : py::none();
  d["mode"] = v.violating_mode ? py::cast(*v.violating_mode) : py::none();
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Highway driving simulator, gap-rule safety checks and the experiment harness";

  py::register_exception<highway_rl::ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<highway_rl::FormatError>(m, "FormatError", PyExc_IOError);
  py::register_exception<highway_rl::TrainingError>(m, "TrainingError", PyExc_RuntimeError);

  m.attr("AFFORDANCE_DIM") = sim::kAffordanceDim;
  m.attr("NUM_ACTIONS") = sim::kNumActions;

  py::class_<sim::EpisodeState>(m, "EpisodeState")
      .def_property_readonly("step", [](const sim::EpisodeState& e) { return e.step; })
      .def_property_readonly("n_vehicles", [](const sim::EpisodeState& e) { return e.traffic.size(); })
      .def_property_readonly("ego", [](const sim::EpisodeState& e) {
        const auto& s = e.ego.state;
        return py::dict(py::arg("x") = s.x, py::arg("y") = s.y, py::arg("v_x") = s.v_x, py::arg("v_y") = s.v_y);
      })
      .def("copy", [](const sim::EpisodeState& e) { return e; })
      .def(py::self == py::self);

  py::class_<sim::Highway>(m, "Highway")
      .def(py::init([](const std::string& scenario_json) { return sim::Highway(scenario_from_string(scenario_json)); }),
           py::arg("scenario_json") = "")
      .def("reset", &sim::Highway::reset, py::arg("n_vehicles"), py::arg("seed"))
      .def("step",
           [](const sim::Highway& h, sim::EpisodeState& ep, int action) {
             const auto out = h.step(ep, action);
             return py::make_tuple(out.reward, out.collided, out.done);
           },
           py::arg("episode"), py::arg("action"),
           "Advances the episode in place; returns (reward, collided, done).")
      .def("affordances", [](const sim::Highway& h, const sim::EpisodeState& ep) { return to_list(h.affordances(ep)); })
      .def("normalize", [](const sim::Highway& h, const Values& raw) { return to_list(h.normalizer().normalize(from_list(raw))); })
      .def("scenario_json", [](const sim::Highway& h) { return sim::to_json(h.config()).dump(); });

  m.def("heuristic_check",
        [](double d_tv, double v_tv, double t_min, double d_min) {
          safety::SafetyConfig cfg;
          cfg.t_min = t_min;
          cfg.d_min = d_min;
          cfg.validate();
          return safety::heuristic_check(d_tv, v_tv, cfg);
        },
        py::arg("d_tv"), py::arg("v_tv"), py::arg("t_min") = 2.0, py::arg("d_min") = 10.0);

  m.def("state_safety",
        [](const Values& raw, double t_min, double d_min) {
          safety::SafetyConfig cfg;
          cfg.t_min = t_min;
          cfg.d_min = d_min;
          cfg.validate();
          return verdict_dict(safety::state_safety(from_list(raw), cfg));
        },
        py::arg("raw"), py::arg("t_min") = 2.0, py::arg("d_min") = 10.0);

  m.def("gmm_nll",
        [](const Values& logits, const Values& means, const Values& raw_std, const Values& target, double floor) {
          if (logits.empty() || means.size() != logits.size() * target.size() || raw_std.size() != means.size())
            throw highway_rl::ConfigError("gmm_nll: means and raw_std need len(logits) * len(target) values");
          return md::gmm_nll(md::gmm_from_raw(logits, means, raw_std, floor), target);
        },
        py::arg("logits"), py::arg("means"), py::arg("raw_std"), py::arg("target"), py::arg("sigma_floor") = 1e-3);

  m.def("command_names", &hx::command_names);

  m.def("run_command",
        [](const std::string& command, std::optional<std::filesystem::path> config, std::vector<std::string> overrides,
           std::optional<std::uint64_t> seed, std::optional<std::filesystem::path> out,
           std::optional<std::filesystem::path> checkpoint, std::optional<std::filesystem::path> predictor,
           std::optional<std::filesystem::path> log, std::optional<int> episodes, std::optional<int> trials,
           std::optional<std::vector<int>> counts, std::vector<std::filesystem::path> runs) {
          hx::CommandOptions opts;
          opts.config = std::move(config);
          opts.overrides = std::move(overrides);
          opts.seed = seed;
          opts.out = std::move(out);
          opts.checkpoint = std::move(checkpoint);
          opts.predictor = std::move(predictor);
          opts.log = std::move(log);
          opts.episodes = episodes;
          opts.trials = trials;
          opts.counts = std::move(counts);
          opts.runs = std::move(runs);
          std::ostringstream so, se;
          int code = 0;
          {
            py::gil_scoped_release release;
            code = hx::run_command(command, opts, so, se);
          }
          return py::make_tuple(code, so.str(), se.str());
        },
        py::arg("command"), py::kw_only(), py::arg("config") = py::none(),
        py::arg("overrides") = std::vector<std::string>{}, py::arg("seed") = py::none(), py::arg("out") = py::none(),
        py::arg("checkpoint") = py::none(), py::arg("predictor") = py::none(), py::arg("log") = py::none(),
        py::arg("episodes") = py::none(), py::arg("trials") = py::none(), py::arg("counts") = py::none(),
        py::arg("runs") = std::vector<std::filesystem::path>{},
        "Runs one harness subcommand; returns (exit_code, stdout, stderr).");
}
