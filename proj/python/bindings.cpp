#include "dlab/cli.hpp"
#include "dlab/kk_engine.hpp"
#include "dlab/pulse_sim.hpp"

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>

namespace py = pybind11;
using namespace dlab;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_array(std::span<const double> v) {
  Array out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

Array to_array(const MaskedSeries& s) {
  Array out(static_cast<py::ssize_t>(s.values.size()));
  double* p = out.mutable_data();
  for (std::size_t k = 0; k < s.values.size(); ++k) p[k] = s.values[k].value_or(std::nan(""));
  return out;
}

py::dict zero_dict(const ComplexZero& z) {
  py::dict d;
  d["n"] = z.n;
  d["omega"] = std::complex<double>(static_cast<double>(z.omega.real()), static_cast<double>(z.omega.imag()));
  d["half_plane"] = z.half_plane == HalfPlane::Upper ? "Upper" : "Lower";
  d["residual"] = z.residual;
  return d;
}

py::dict search_dict(const ZeroSearch& s) {
  py::list zeros, rejected;
  for (const auto& z : s.zeros) zeros.append(zero_dict(z));
  for (const auto& r : s.rejected) rejected.append(py::make_tuple(r.n, r.reason));
  py::dict d;
  d["zeros"] = zeros;
  d["rejected"] = rejected;
  return d;
}

RealSeries series_from(const FrequencyGrid& g, const Array& values) {
  return RealSeries(g, std::vector<double>(values.data(), values.data() + values.size()));
}

} // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Birefringent slab transfer functions, Kramers-Kronig transforms and pulse propagation";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.attr("speed_of_light") = speed_of_light;

  py::class_<FrequencyGrid>(m, "FrequencyGrid")
      .def(py::init<double, double, std::size_t>(), py::arg("omega_min"), py::arg("omega_max"), py::arg("count"))
      .def_property_readonly("omega_min", &FrequencyGrid::omega_min)
      .def_property_readonly("omega_max", &FrequencyGrid::omega_max)
      .def_property_readonly("spacing", &FrequencyGrid::spacing)
      .def("__len__", &FrequencyGrid::size)
      .def("samples", [](const FrequencyGrid& g) { return to_array(g.samples()); });

  py::class_<IndexModel>(m, "IndexModel")
      .def(py::init(&cli::parse_index_model), py::arg("spec"))
      .def("__call__", [](const IndexModel& n, double w) { return n(w); })
      .def("derivative", [](const IndexModel& n, double w) { return n.derivative(w); })
      .def("__repr__", &IndexModel::describe);

  py::class_<SystemConfig>(m, "SystemConfig")
      .def(py::init([](double d, double air_path, double theta, double beta, IndexModel te, IndexModel tm) {
             SystemConfig c{d, air_path, theta, beta, std::move(te), std::move(tm)};
             c.validate();
             return c;
           }),
           py::arg("d"), py::arg("air_path"), py::arg("theta"), py::arg("beta"), py::arg("index_te"),
           py::arg("index_tm"))
      .def_readwrite("d", &SystemConfig::d)
      .def_readwrite("air_path", &SystemConfig::air_path)
      .def_readwrite("theta", &SystemConfig::theta)
      .def_readwrite("beta", &SystemConfig::beta)
      .def_readwrite("index_te", &SystemConfig::index_te)
      .def_readwrite("index_tm", &SystemConfig::index_tm)
      .def("with_beta", &SystemConfig::with_beta);

  m.def("paper_config", &paper_config, py::arg("beta"));
  m.def("calibrated_birefringence", &calibrated_birefringence, py::arg("half_waveplate_hz"), py::arg("d"));

  m.def("transfer_h", [](const SystemConfig& c, py::array_t<double> w) {
    return py::vectorize([&c](double x) { return transfer_h(c, x); })(w);
  });
  m.def("magnitude_h", [](const SystemConfig& c, py::array_t<double> w) {
    return py::vectorize([&c](double x) { return magnitude_h(c, x); })(w);
  });
  m.def("group_delay", [](const SystemConfig& c, py::array_t<double> w) {
    return py::vectorize([&c](double x) { return group_delay(c, x).seconds; })(w);
  });
  m.def("delta_phi", [](const SystemConfig& c, py::array_t<double> w) {
    return py::vectorize([&c](double x) { return delta_phi(c, x); })(w);
  });
  m.def("arg_h", [](const SystemConfig& c, const FrequencyGrid& g) { return to_array(arg_h(c, g).values()); });

  m.def(
      "half_waveplate_frequencies",
      [](const SystemConfig& c, const FrequencyGrid& g, int m_first, int m_last) {
        std::vector<std::pair<int, double>> out;
        for (const auto& r : half_waveplate_frequencies(c, g, m_first, m_last).roots) out.emplace_back(r.m, r.omega);
        return out;
      },
      py::arg("config"), py::arg("band"), py::arg("m_first") = 0, py::arg("m_last") = 0);

  m.def("transfer_zeros", [](const SystemConfig& c, const FrequencyGrid& g, int n_first, int n_last) {
    return search_dict(transfer_zeros(c, g, n_first, n_last));
  });
  m.def("zeros_in_band", [](const SystemConfig& c, const FrequencyGrid& g) {
    return search_dict(zeros_with_real_part_in(c, g, g.omega_min(), g.omega_max()));
  });
  m.def("classify_minimum_phase", [](const SystemConfig& c, const FrequencyGrid& g) {
    return to_string(classify_minimum_phase(c, KkBand(g)));
  });

  m.def("kk_re_from_im", [](const FrequencyGrid& g, const Array& im) { return to_array(kk_re_from_im(series_from(g, im))); });
  m.def("kk_im_from_re", [](const FrequencyGrid& g, const Array& re) { return to_array(kk_im_from_re(series_from(g, re))); });
  m.def(
      "phase_from_magnitude",
      [](const FrequencyGrid& g, const Array& mag, double d0, double offset) {
        return to_array(phase_from_magnitude(series_from(g, mag), d0, offset).phase);
      },
      py::arg("grid"), py::arg("magnitude"), py::arg("d0") = 0.0, py::arg("offset") = 0.0);

  m.def(
      "reconstruct_phase",
      [](const SystemConfig& c, const FrequencyGrid& g, bool correct) {
        ReconstructionOptions o;
        o.correct = correct;
        const ReconstructionReport r = reconstruct_phase(c, g, o);
        py::dict d;
        d["classification"] = to_string(r.classification);
        d["d0"] = r.reconstruction.d0;
        d["offset"] = r.reconstruction.offset;
        d["d0_source"] = r.d0_source;
        d["correction_applied"] = r.reconstruction.correction_applied;
        d["phase_kk"] = to_array(r.reconstruction.phase);
        d["phase_model"] = to_array(r.model_phase.values());
        d["residual"] = to_array(r.residual);
        d["max_interior_residual"] = r.max_interior_residual;
        return d;
      },
      py::arg("config"), py::arg("grid"), py::arg("correct") = false);

  m.def(
      "propagate_pulse",
      [](const SystemConfig& c, const FrequencyGrid& band, double carrier, double sigma, double window,
         std::size_t samples, std::optional<double> front_time) {
        PulseSpec spec{carrier, sigma, front_time, window, samples};
        const PropagationResult r = propagate(synth_pulse(spec), c, band);
        py::dict d;
        d["dt"] = r.dt;
        d["output"] = to_array(r.output);
        d["input_envelope"] = to_array(r.input_envelope);
        d["output_envelope"] = to_array(r.output_envelope);
        d["input_peak_time"] = r.input_peak_time;
        d["peak_time"] = r.peak_time;
        d["predicted_group_delay"] = r.predicted_group_delay;
        d["front_offset"] = r.front_offset;
        d["pre_front_energy_ratio"] = r.pre_front_energy_ratio;
        d["warnings"] = r.warnings;
        return d;
      },
      py::arg("config"), py::arg("band"), py::arg("carrier"), py::arg("sigma"), py::arg("window"),
      py::arg("samples"), py::arg("front_time") = py::none());

  m.def(
      "run_command",
      [](const std::string& command, const std::string& config_path, std::optional<double> beta_deg, bool correct) {
        const auto c = cli::parse_command(command);
        if (!c) throw ConfigError("unknown command '" + command + "'");
        cli::Overrides o;
        o.beta_deg = beta_deg;
        o.correct = correct;
        const cli::CommandOutput out = cli::run_command(*c, cli::load_run_config(config_path, o));
        return py::make_tuple(out.csv, out.report);
      },
      py::arg("command"), py::arg("config_path"), py::arg("beta_deg") = py::none(), py::arg("correct") = false);
}
