#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "beamcodex/codebook.hpp"
#include "beamcodex/eval.hpp"
#include "beamcodex/features.hpp"
#include "beamcodex/gibbs.hpp"
#include "beamcodex/io.hpp"
#include "beamcodex/pipeline.hpp"
#include "beamcodex/prior.hpp"
#include "beamcodex/synth.hpp"

namespace py = pybind11;
using namespace beamcodex;

namespace {

// Structured results cross the boundary as JSON text; the Python side parses them.
std::string summary_json(const std::vector<AngularPowerScan>& scans, const std::string& codebook_json,
                         const std::string& strategy, int levels, const GainGapConfig& cfg, double dir_error,
                         double probe_noise, std::uint64_t seed, unsigned jobs) {
  EvalOptions opts{dir_error, probe_noise, seed, jobs};
  if (strategy == "exhaustive") return nlohmann::json(evaluate(scans, Strategy::exhaustive(), cfg, opts)).dump();
  if (strategy == "hierarchical")
    return nlohmann::json(evaluate(scans, Strategy::hierarchical(levels), cfg, opts)).dump();
  if (strategy != "codebook") throw InvalidInput("unknown strategy '" + strategy + "'");
  const auto cb = nlohmann::json::parse(codebook_json).get<Codebook>();
  return nlohmann::json(evaluate(scans, Strategy::with_codebook(cb), cfg, opts)).dump();
}

}  // namespace

PYBIND11_MODULE(_beamcodex, m) {
  py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
  py::register_exception<InfeasibleGainTarget>(m, "InfeasibleGainTarget", PyExc_RuntimeError);

  py::class_<Beam>(m, "Beam")
      .def(py::init<double, double>(), py::arg("direction_deg"), py::arg("width_deg"))
      .def_readwrite("direction_deg", &Beam::direction_deg)
      .def_readwrite("width_deg", &Beam::width_deg)
      .def("__eq__", [](const Beam& a, const Beam& b) { return a == b; })
      .def("__repr__", [](const Beam& b) {
        return "Beam(" + format_double(b.direction_deg) + ", " + format_double(b.width_deg) + ")";
      });

  py::class_<GainGapConfig>(m, "GainGapConfig")
      .def(py::init<>())
      .def_readwrite("gamma_db", &GainGapConfig::gamma_db)
      .def_readwrite("o_th", &GainGapConfig::o_th)
      .def_readwrite("o_th1", &GainGapConfig::o_th1)
      .def_readwrite("o_th2", &GainGapConfig::o_th2)
      .def_readwrite("w_min_deg", &GainGapConfig::w_min_deg)
      .def_readwrite("w_max_deg", &GainGapConfig::w_max_deg)
      .def_readwrite("ref_beamwidth_deg", &GainGapConfig::ref_beamwidth_deg)
      .def("validate", &GainGapConfig::validate);

  py::class_<AngularPowerScan>(m, "AngularPowerScan")
      .def(py::init([](std::string id, const std::vector<double>& power, std::optional<double> distance) {
             return AngularPowerScan(std::move(id), power, distance);
           }),
           py::arg("location_id"), py::arg("power_dbm"), py::arg("distance_m") = py::none())
      .def_property_readonly("location_id", &AngularPowerScan::location_id)
      .def_property_readonly("power_dbm",
                             [](const AngularPowerScan& s) {
                               const auto& b = s.power_dbm();
                               return std::vector<double>(b.begin(), b.end());
                             })
      .def_property_readonly("distance_m", &AngularPowerScan::distance_m)
      .def_property_readonly("tag", [](const AngularPowerScan& s) { return std::string(to_string(s.tag())); })
      .def("rotated", &AngularPowerScan::rotated)
      .def("mirrored", &AngularPowerScan::mirrored);

  py::class_<BeamCandidate>(m, "BeamCandidate")
      .def_readonly("x_deg", &BeamCandidate::x_deg)
      .def_readonly("y_deg", &BeamCandidate::y_deg)
      .def_readonly("source_location", &BeamCandidate::source_location)
      .def_readonly("source_index", &BeamCandidate::source_index);

  m.def("version", &version);
  m.def("beam_gain", &beam_gain, py::arg("scan"), py::arg("beam"));
  m.def("max_gain", &max_gain, py::arg("scan"), py::arg("cfg") = GainGapConfig{});
  m.def("isotropic_power", &isotropic_power);
  m.def("aperture_bins", &aperture_bins);
  m.def("extract_candidates", &extract_candidates, py::arg("scan"), py::arg("cfg") = GainGapConfig{},
        py::arg("source_index") = 0);
  m.def("init_alpha", &init_alpha, py::arg("k_guess"), py::arg("n"));
  m.def("remove_redundant", &remove_redundant);
  m.def("content_hash", &content_hash);
  m.def("preset_names", &preset_names);

  m.def(
      "generate",
      [](const std::string& env, std::size_t n, std::uint64_t seed, unsigned jobs) {
        auto data = generate(load_environment(env), n, seed, jobs);
        return py::make_tuple(data.scans, nlohmann::json(data.truth).dump());
      },
      py::arg("preset"), py::arg("n_locations"), py::arg("seed") = 0, py::arg("jobs") = 1);
  m.def("read_scans_csv", py::overload_cast<const std::filesystem::path&>(&read_scans_csv));
  m.def("write_scans_csv", [](const std::filesystem::path& path, const std::vector<AngularPowerScan>& scans) {
    OutputSet out;
    std::ostringstream ss;
    write_scans_csv(ss, scans);
    out.add(path, ss.str());
    out.commit();
  });
  m.def(
      "build_codebook_json",
      [](const std::vector<AngularPowerScan>& scans, const GainGapConfig& cfg, std::uint64_t seed, int n_iter,
         unsigned jobs) {
        py::gil_scoped_release release;
        return nlohmann::json(build_from_scans(scans, cfg, seed, n_iter, jobs).codebook).dump();
      },
      py::arg("scans"), py::arg("cfg") = GainGapConfig{}, py::arg("seed") = 0, py::arg("n_iter") = 50,
      py::arg("jobs") = 1);
  m.def("evaluate_json", &summary_json, py::arg("scans"), py::arg("codebook_json"), py::arg("strategy"),
        py::arg("levels"), py::arg("cfg"), py::arg("dir_error_deg"), py::arg("probe_noise_db"), py::arg("seed"),
        py::arg("jobs"));
}
