#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "daa/commands.hpp"
#include "daa/daa_independent.hpp"
#include "daa/daa_system.hpp"
#include "daa/daat_format.hpp"
#include "daa/errors.hpp"
#include "daa/manifest.hpp"
#include "daa/metrics.hpp"
#include "daa/rer_analysis.hpp"
#include "daa/synthetic.hpp"

namespace py = pybind11;
using namespace daa;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

Trajectory trajectory_from_array(const FloatArray& maps, const std::string& sample_id, const std::string& prompt,
                                 std::optional<std::vector<int>> roles) {
  if (maps.ndim() != 4 || maps.shape(2) != maps.shape(3)) {
    throw Error(ErrorCode::shape_mismatch, "expected an array of shape (frames, tokens, D, D)");
  }
  TrajectoryShape shape{static_cast<std::size_t>(maps.shape(0)), static_cast<std::size_t>(maps.shape(1)),
                        static_cast<std::size_t>(maps.shape(2))};
  std::vector<float> payload(maps.data(), maps.data() + maps.size());
  std::vector<TokenRole> r;
  if (roles) {
    for (int v : *roles) r.push_back(static_cast<TokenRole>(v));
  } else {
    r = default_roles(shape.tokens);
  }
  return Trajectory::from_payload(shape, std::move(r), std::move(payload), sample_id, prompt);
}

py::array_t<float> trajectory_to_array(const Trajectory& t) {
  const auto& s = t.shape();
  py::array_t<float> out({s.frames, s.tokens, s.dim, s.dim});
  std::copy(t.payload().begin(), t.payload().end(), out.mutable_data());
  return out;
}

std::vector<ScoredSample> scored(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) throw Error(ErrorCode::length_mismatch, "scores and labels differ in length");
  std::vector<ScoredSample> out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out[i].score = scores[i];
    out[i].label = labels[i] != 0 ? Label::backdoor : Label::benign;
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Dynamic attention analysis detectors (DAA-I, DAA-S) and their tooling";

  static py::exception<Error> daa_error(m, "DaaError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object err = daa_error;
      py::object instance = err(e.what());
      instance.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(daa_error.ptr(), instance.ptr());
    }
  });

  py::enum_<Metric>(m, "Metric").value("frobenius", Metric::frobenius).value("one_norm", Metric::one_norm);
  py::enum_<TokenChoice>(m, "TokenChoice")
      .value("eos", TokenChoice::eos)
      .value("bos", TokenChoice::bos)
      .value("all_tokens", TokenChoice::all_tokens);
  py::enum_<CouplingSchedule>(m, "CouplingSchedule")
      .value("piecewise_constant", CouplingSchedule::piecewise_constant)
      .value("linear_interpolation", CouplingSchedule::linear_interpolation);

  py::class_<Trajectory>(m, "Trajectory")
      .def(py::init(&trajectory_from_array), py::arg("maps"), py::arg("sample_id") = "", py::arg("prompt") = "",
           py::arg("roles") = py::none())
      .def_property_readonly("num_frames", &Trajectory::num_frames)
      .def_property_readonly("num_tokens", &Trajectory::num_tokens)
      .def_property_readonly("dim", &Trajectory::dim)
      .def_property_readonly("last_step", &Trajectory::last_step)
      .def_property_readonly("eos_index", &Trajectory::eos_index)
      .def_property_readonly("sample_id", &Trajectory::sample_id)
      .def_property_readonly("prompt", &Trajectory::prompt)
      .def_property_readonly("roles",
                             [](const Trajectory& t) {
                               std::vector<int> r;
                               for (auto v : t.roles()) r.push_back(static_cast<int>(v));
                               return r;
                             })
      .def("to_numpy", &trajectory_to_array)
      .def("__eq__", &Trajectory::operator==)
      .def("__repr__", [](const Trajectory& t) {
        std::ostringstream s;
        s << "<Trajectory '" << t.sample_id() << "' frames=" << t.num_frames() << " tokens=" << t.num_tokens()
          << " dim=" << t.dim() << ">";
        return s.str();
      });

  m.def("load_trajectory", &read_trajectory_file, py::arg("path"));
  m.def("save_trajectory", &write_trajectory_file, py::arg("path"), py::arg("trajectory"));
  m.def("loads", [](const py::bytes& b) {
    const std::string s = b;
    return load_trajectory({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
  });
  m.def("dumps", [](const Trajectory& t) {
    const auto bytes = save_trajectory(t);
    return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  });

  py::class_<DaaIConfig>(m, "DaaIConfig")
      .def(py::init<>())
      .def_readwrite("start_step", &DaaIConfig::start_step)
      .def_readwrite("span", &DaaIConfig::span)
      .def_readwrite("threshold", &DaaIConfig::threshold)
      .def_readwrite("token_choice", &DaaIConfig::token_choice);

  py::class_<DaaSConfig>(m, "DaaSConfig")
      .def(py::init<>())
      .def_readwrite("start_step", &DaaSConfig::start_step)
      .def_readwrite("span", &DaaSConfig::span)
      .def_readwrite("threshold", &DaaSConfig::threshold)
      .def_readwrite("coupling", &DaaSConfig::coupling)
      .def_readwrite("gamma_other", &DaaSConfig::gamma_other)
      .def_readwrite("gamma_eos", &DaaSConfig::gamma_eos)
      .def_readwrite("metric", &DaaSConfig::metric)
      .def_readwrite("schedule", &DaaSConfig::schedule)
      .def_readwrite("token_choice", &DaaSConfig::token_choice);

  m.def("daa_i_score", &daa_i_score, py::arg("trajectory"), py::arg("config") = DaaIConfig{});
  m.def("daa_s_score", py::overload_cast<const Trajectory&, const DaaSConfig&>(&daa_s_score), py::arg("trajectory"),
        py::arg("config") = DaaSConfig{});
  m.def("evolve_rates", &evolve_rates, py::arg("trajectory"), py::arg("step"));
  m.def("rer_eos", &rer_eos, py::arg("trajectory"), py::arg("step"));
  m.def(
      "integrate_states",
      [](const Trajectory& t, const DaaSConfig& cfg) { return integrate_states(t, cfg).states; },
      py::arg("trajectory"), py::arg("config") = DaaSConfig{});
  m.def("lyapunov_profile", &lyapunov_profile, py::arg("trajectory"), py::arg("config") = DaaSConfig{});
  m.def(
      "laplacian",
      [](const Trajectory& t, std::size_t step, Metric metric) {
        const auto maps = t.frame(step);
        return laplacian(edge_weights(maps, metric)).matrix;
      },
      py::arg("trajectory"), py::arg("step"), py::arg("metric") = Metric::frobenius);
  m.def(
      "classify", [](double score, double threshold) { return classify(score, threshold) == Label::backdoor; },
      py::arg("score"), py::arg("threshold"), "True when the score marks a backdoor sample.");

  m.def(
      "auc", [](const std::vector<double>& s, const std::vector<int>& l) { return auc(scored(s, l)); },
      py::arg("scores"), py::arg("labels"), "labels: 1 = backdoor, 0 = benign");
  m.def(
      "calibrate_threshold",
      [](const std::vector<double>& s, const std::vector<int>& l) {
        const auto c = calibrate_threshold(scored(s, l));
        return py::make_tuple(c.threshold, c.f1);
      },
      py::arg("scores"), py::arg("labels"));
  m.def(
      "f1_score",
      [](const std::vector<int>& pred, const std::vector<int>& labels) {
        std::vector<Label> p, l;
        for (int v : pred) p.push_back(v ? Label::backdoor : Label::benign);
        for (int v : labels) l.push_back(v ? Label::backdoor : Label::benign);
        return f1_score(p, l);
      },
      py::arg("predictions"), py::arg("labels"));

  py::class_<SynthParams>(m, "SynthParams")
      .def(py::init<>())
      .def_readwrite("tokens", &SynthParams::tokens)
      .def_readwrite("dim", &SynthParams::dim)
      .def_readwrite("steps", &SynthParams::steps)
      .def_readwrite("eos_rate_factor", &SynthParams::eos_rate_factor)
      .def_readwrite("base_rate", &SynthParams::base_rate)
      .def_readwrite("noise_sigma", &SynthParams::noise_sigma)
      .def_readwrite("amplitude", &SynthParams::amplitude)
      .def_readwrite("start_jitter", &SynthParams::start_jitter)
      .def_readwrite("warmup_steps", &SynthParams::warmup_steps)
      .def_readwrite("seed", &SynthParams::seed);
  m.def(
      "gen_trajectory",
      [](const SynthParams& p, bool backdoor, const std::string& id) {
        return gen_trajectory(p, backdoor ? Label::backdoor : Label::benign, id);
      },
      py::arg("params"), py::arg("backdoor"), py::arg("sample_id") = "");
  m.def(
      "gen_dataset",
      [](std::size_t n_benign, std::size_t n_backdoor, const std::filesystem::path& out, const SynthParams& base,
         double rho_backdoor, double rho_benign) {
        SynthDatasetParams p;
        p.base = base;
        p.rho_backdoor = rho_backdoor;
        p.rho_benign = rho_benign;
        gen_dataset(n_benign, n_backdoor, p, out);
        return out / "manifest.jsonl";
      },
      py::arg("n_benign"), py::arg("n_backdoor"), py::arg("out_dir"), py::arg("params") = SynthParams{},
      py::arg("rho_backdoor") = 0.6, py::arg("rho_benign") = 1.2);

  m.def(
      "read_manifest",
      [](const std::filesystem::path& path) {
        py::list out;
        for (const auto& e : read_manifest(path).entries) {
          py::dict d;
          d["path"] = e.path.string();
          d["label"] = std::string(to_string(e.label));
          d["scenario"] = e.scenario;
          d["split"] = std::string(to_string(e.split));
          out.append(d);
        }
        return out;
      },
      py::arg("path"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = run_cli(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the daa command line in-process; returns (exit_code, stdout, stderr).");
}
