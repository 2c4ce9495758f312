// Python bindings for the core operations. Arrays cross the boundary as
// float64 numpy arrays; everything else is plain Python data.

#include <sstream>
#include <tuple>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "seizurenet/errors.hpp"
#include "seizurenet/ingest/summary.hpp"
#include "seizurenet/ingest/synthetic.hpp"
#include "seizurenet/net/gradcheck.hpp"
#include "seizurenet/net/layers.hpp"
#include "seizurenet/net/model.hpp"
#include "seizurenet/pipeline/commands.hpp"
#include "seizurenet/pipeline/config.hpp"
#include "seizurenet/segment/stft.hpp"
#include "seizurenet/segment/timing.hpp"
#include "seizurenet/train/metrics.hpp"

namespace py = pybind11;
using namespace seizurenet;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
using Triple = std::array<std::size_t, 3>;
using Shape3 = std::tuple<std::size_t, std::size_t, std::size_t>;  // returned as a Python tuple

net::Dim3 dim3(const Triple& t) { return {t[0], t[1], t[2]}; }
Shape3 shape3(const net::Dim3& d) { return {d.c, d.f, d.t}; }

std::vector<double> flat(const Array& a) { return {a.data(), a.data() + a.size()}; }

Array to_array(std::vector<std::size_t> shape, const std::vector<double>& values) {
  Array out(shape);
  std::copy(values.begin(), values.end(), out.mutable_data());
  return out;
}

std::vector<ingest::SeizureAnnotation> annotations(const std::vector<std::pair<double, double>>& spans) {
  std::vector<ingest::SeizureAnnotation> out;
  for (std::size_t i = 0; i < spans.size(); ++i) out.push_back({i, spans[i].first, spans[i].second});
  return out;
}

Array conv3d(const Array& x, const Array& weights, const Array& bias, const Triple& kernel, const Triple& dilation,
             const std::string& padding) {
  if (x.ndim() != 4) throw py::value_error("x must have shape (maps, C, F, T)");
  net::ConvSpec spec;
  spec.in_maps = static_cast<std::size_t>(x.shape(0));
  spec.n_filters = static_cast<std::size_t>(bias.size());
  spec.kernel = dim3(kernel);
  spec.dilation = dim3(dilation);
  if (padding == "same") spec.padding = net::Padding::Same;
  else if (padding == "valid") spec.padding = net::Padding::Valid;
  else throw py::value_error("padding must be 'same' or 'valid'");
  const net::Dim3 in{static_cast<std::size_t>(x.shape(1)), static_cast<std::size_t>(x.shape(2)),
                     static_cast<std::size_t>(x.shape(3))};
  const auto w = flat(weights);
  const auto b = flat(bias);
  const auto y = net::conv3d_forward(net::Tensor4(spec.in_maps, in, flat(x)), spec, w, b);
  const auto s = y.shape();
  return to_array({s[0], s[1], s[2], s[3]}, y.data());
}

Array stft(const Array& window, std::size_t n_fft, std::size_t hop, std::size_t bin_first, std::size_t bin_last,
           bool log1p) {
  if (window.ndim() != 2) throw py::value_error("window must have shape (channels, samples)");
  segment::StftConfig cfg{n_fft, hop, bin_first, bin_last,
                          log1p ? segment::MagnitudeTransform::Log1p : segment::MagnitudeTransform::Linear};
  segment::validate(cfg);
  const auto s = segment::stft_featurize(flat(window), static_cast<std::size_t>(window.shape(0)), cfg);
  return to_array({s.channels, s.bins, s.frames}, s.values);
}

py::dict metrics_dict(std::uint64_t tp, std::uint64_t fn, std::uint64_t tn, std::uint64_t fp) {
  const auto m = train::metrics({tp, fn, tn, fp});
  py::dict d;
  d["acc"] = m.acc;
  d["tpr"] = m.tpr;
  d["tnr"] = m.tnr;
  return d;
}

py::list summary(const std::string& text) {
  py::list out;
  for (const auto& e : ingest::parse_chbmit_summary(text)) {
    py::dict d;
    d["file_name"] = e.file_name;
    d["clock_start"] = e.clock_start;
    d["clock_end"] = e.clock_end;
    py::list seizures;
    for (const auto& s : e.seizures) seizures.append(py::make_tuple(s.onset, s.end));
    d["seizures"] = seizures;
    out.append(d);
  }
  return out;
}

py::tuple synthetic(std::size_t n_channels, double fs, std::size_t n_seizures, double inter_seizure_gap,
                    std::uint64_t seed) {
  ingest::SyntheticSpec spec;
  spec.n_channels = n_channels;
  spec.fs = fs;
  spec.n_seizures = n_seizures;
  spec.inter_seizure_gap = inter_seizure_gap;
  spec.seed = seed;
  ingest::validate(spec);
  auto [rec, seizures] = ingest::generate_synthetic_recording(spec, pipeline::default_montage());
  py::list spans;
  for (const auto& s : seizures) spans.append(py::make_tuple(s.onset, s.end));
  return py::make_tuple(to_array({rec.n_channels(), rec.n_samples()}, {rec.samples().begin(), rec.samples().end()}),
                        spans);
}

py::dict gradcheck(std::uint64_t seed) {
  net::GradcheckOptions options;
  options.seed = seed;
  const auto report = net::run_gradcheck(options);
  py::list rows;
  for (const auto& r : report.rows) {
    py::dict row;
    row["layer"] = r.layer;
    row["worst_error"] = r.worst_error;
    row["checked"] = r.checked;
    row["passed"] = r.passed;
    rows.append(row);
  }
  py::dict d;
  d["passed"] = report.passed;
  d["rows"] = rows;
  return d;
}

py::dict box(const train::BoxStats& b) {
  py::dict d;
  d["min"] = b.min;
  d["q1"] = b.q1;
  d["median"] = b.median;
  d["q3"] = b.q3;
  d["max"] = b.max;
  d["mean"] = b.mean;
  return d;
}

py::dict crossval(const std::optional<std::string>& config_path, const std::optional<std::string>& out_dir,
                  std::optional<std::uint64_t> seed) {
  auto config = config_path ? pipeline::load_config(*config_path) : pipeline::synthetic_default_config();
  pipeline::apply_overrides(config, {out_dir, seed});
  std::ostringstream log;
  train::CrossValidation cv;
  {
    py::gil_scoped_release release;
    cv = pipeline::cmd_crossval(config, log);
  }
  py::list folds;
  for (const auto& f : cv.folds) {
    py::dict d;
    d["fold_key"] = f.fold_key;
    d["acc"] = f.metrics.acc;
    d["tpr"] = f.metrics.tpr;
    d["tnr"] = f.metrics.tnr;
    d["epochs"] = f.epochs_run;
    folds.append(d);
  }
  py::dict d;
  d["folds"] = folds;
  d["acc"] = box(cv.summary.acc);
  d["tpr"] = box(cv.summary.tpr);
  d["tnr"] = box(cv.summary.tnr);
  d["output_dir"] = config.output_dir;
  return d;
}

class Model {
 public:
  Model(const Triple& input, std::size_t n_filters, std::uint64_t seed) {
    config_.input = dim3(input);
    config_.n_filters = n_filters;
    config_.seed = seed;
    net::validate(config_);
    params_ = net::init_params(config_);
  }

  std::size_t n_params() const { return params_.values.size(); }
  std::size_t n_features() const { return config_.feature_count(); }
  std::vector<Shape3> pooled_shapes(std::size_t branch) const {
    if (branch >= net::kBranches) throw py::index_error("branch out of range");
    std::vector<Shape3> out;
    for (const auto& d : config_.pooled_shapes(branch)) out.push_back(shape3(d));
    return out;
  }

  py::tuple forward(const Array& sample) const {
    if (static_cast<std::size_t>(sample.size()) != config_.input.volume())
      throw py::value_error("sample does not match the model input shape");
    const auto r = net::model_forward(params_, config_, flat(sample));
    return py::make_tuple(r.probs[0], r.probs[1]);
  }

  double loss(const Array& sample, std::size_t label) const {
    if (label > 1) throw py::value_error("label must be 0 or 1");
    return net::model_loss(params_, config_, flat(sample), label);
  }

 private:
  net::ModelConfig config_;
  net::ModelParams params_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Seizure prediction with a multi-scale dilated 3D CNN";

  auto error = py::register_exception<Error>(m, "SeizurenetError");
  py::register_exception<ConfigError>(m, "ConfigError", error);
  py::register_exception<DataError>(m, "DataError", error);
  py::register_exception<IoError>(m, "IoError", error);
  py::register_exception<InsufficientSeizures>(m, "InsufficientSeizures", error);
  py::register_exception<VerificationError>(m, "VerificationError", error);

  m.attr("__version__") = pipeline::tool_version();

  m.def("effective_extent",
        [](const Triple& k, const Triple& d) { return shape3(net::effective_extent(dim3(k), dim3(d))); },
        py::arg("kernel"), py::arg("dilation"));
  m.def("conv3d", &conv3d, py::arg("x"), py::arg("weights"), py::arg("bias"), py::arg("kernel"),
        py::arg("dilation") = Triple{1, 1, 1}, py::arg("padding") = "same");
  m.def("stft_featurize", &stft, py::arg("window"), py::arg("n_fft") = 256, py::arg("hop") = 128,
        py::arg("bin_first") = 1, py::arg("bin_last") = 128, py::arg("log1p") = true);
  m.def("select_leading_seizures",
        [](const std::vector<std::pair<double, double>>& spans, double seizure_free_T) {
          return segment::select_leading_seizures(annotations(spans), seizure_free_T);
        },
        py::arg("seizures"), py::arg("seizure_free_T") = 14400.0);
  m.def("slide_windows",
        [](double start, double end, double window_len, double overlap, double fs) {
          segment::TimingPolicy p;
          p.window_len = window_len;
          p.overlap = overlap;
          return segment::slide_windows({start, end, segment::Label::Interictal, std::nullopt}, p, fs);
        },
        py::arg("start"), py::arg("end"), py::arg("window_len") = 30.0, py::arg("overlap") = 8.0,
        py::arg("fs") = 256.0);
  m.def("metrics", &metrics_dict, py::arg("tp"), py::arg("fn"), py::arg("tn"), py::arg("fp"));
  m.def("parse_chbmit_summary", &summary, py::arg("text"));
  m.def("generate_synthetic", &synthetic, py::arg("n_channels") = 4, py::arg("fs") = 64.0,
        py::arg("n_seizures") = 3, py::arg("inter_seizure_gap") = 7200.0, py::arg("seed") = 7);
  m.def("run_gradcheck", &gradcheck, py::arg("seed") = net::GradcheckOptions{}.seed);
  m.def("crossval", &crossval, py::arg("config") = std::nullopt, py::arg("out_dir") = std::nullopt,
        py::arg("seed") = std::nullopt);

  py::class_<Model>(m, "Model")
      .def(py::init<const Triple&, std::size_t, std::uint64_t>(), py::arg("input") = Triple{18, 128, 59},
           py::arg("n_filters") = 16, py::arg("seed") = 1)
      .def_property_readonly("n_params", &Model::n_params)
      .def_property_readonly("n_features", &Model::n_features)
      .def("pooled_shapes", &Model::pooled_shapes, py::arg("branch"))
      .def("forward", &Model::forward, py::arg("sample"))
      .def("loss", &Model::loss, py::arg("sample"), py::arg("label"));
}
