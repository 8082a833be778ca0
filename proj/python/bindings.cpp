#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <utility>

#include "rrm/commands.hpp"
#include "rrm/engine.hpp"
#include "rrm/frame_source.hpp"
#include "rrm/model_io.hpp"
#include "rrm/model_zoo.hpp"
#include "rrm/report.hpp"

namespace py = pybind11;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

rrm::Tensor tensor_from_numpy(const FloatArray& array) {
  if (array.ndim() != 3) {
    throw rrm::InvalidArgument("expected a (channels, height, width) array");
  }
  const rrm::Shape shape{static_cast<std::size_t>(array.shape(0)),
                         static_cast<std::size_t>(array.shape(1)),
                         static_cast<std::size_t>(array.shape(2))};
  std::vector<float> data(shape.numel());
  std::memcpy(data.data(), array.data(), shape.numel() * sizeof(float));
  return rrm::Tensor(shape, std::move(data));
}

py::array_t<float> tensor_to_numpy(const rrm::Tensor& t) {
  py::array_t<float> array({t.shape.channels, t.shape.height, t.shape.width});
  std::memcpy(array.mutable_data(), t.data.data(),
              t.numel() * sizeof(float));
  return array;
}

std::vector<rrm::Tensor> frames_from_list(const std::vector<FloatArray>& arrays) {
  std::vector<rrm::Tensor> frames;
  frames.reserve(arrays.size());
  for (const auto& a : arrays) {
    frames.push_back(tensor_from_numpy(a));
  }
  return frames;
}

py::object json_to_py(const rrm::Json& j) {
  switch (j.type()) {
    case rrm::Json::value_t::null:
      return py::none();
    case rrm::Json::value_t::boolean:
      return py::bool_(j.get<bool>());
    case rrm::Json::value_t::number_integer:
      return py::int_(j.get<std::int64_t>());
    case rrm::Json::value_t::number_unsigned:
      return py::int_(j.get<std::uint64_t>());
    case rrm::Json::value_t::number_float:
      return py::float_(j.get<double>());
    case rrm::Json::value_t::string:
      return py::str(j.get<std::string>());
    case rrm::Json::value_t::array: {
      py::list list;
      for (const auto& item : j) {
        list.append(json_to_py(item));
      }
      return list;
    }
    case rrm::Json::value_t::object: {
      py::dict dict;
      for (const auto& [key, value] : j.items()) {
        dict[py::str(key)] = json_to_py(value);
      }
      return dict;
    }
    default:
      return py::none();
  }
}

rrm::SyntheticSpec spec_from_args(const std::string& kind, std::size_t channels,
                                  std::size_t height, std::size_t width,
                                  std::size_t frames, double motion,
                                  double noise, std::uint64_t seed) {
  rrm::SyntheticSpec spec;
  if (kind == "shifting-square") {
    spec.kind = rrm::SyntheticSpec::Kind::ShiftingSquare;
  } else if (kind == "random-walk") {
    spec.kind = rrm::SyntheticSpec::Kind::RandomWalk;
  } else if (kind == "static") {
    spec.kind = rrm::SyntheticSpec::Kind::Static;
  } else {
    throw rrm::InvalidArgument(
        "kind must be shifting-square, random-walk or static");
  }
  spec.shape = {channels, height, width};
  spec.frames = frames;
  spec.motion = motion;
  spec.noise = noise;
  spec.seed = seed;
  return spec;
}

}  // namespace

PYBIND11_MODULE(_rrm, m) {
  m.doc() =
      "CNN video inference that forwards sparse frame deltas through cached "
      "per-layer projections, with cost model and error control";

  py::register_exception<rrm::ShapeError>(m, "ShapeError", PyExc_ValueError);
  py::register_exception<rrm::FormatError>(m, "FormatError", PyExc_ValueError);
  py::register_exception<rrm::NumericError>(m, "NumericError",
                                            PyExc_ArithmeticError);
  py::register_exception<rrm::InvalidArgument>(m, "InvalidArgument",
                                               PyExc_ValueError);

  py::class_<rrm::SparseDelta>(m, "SparseDelta")
      .def_property_readonly("shape",
                             [](const rrm::SparseDelta& d) {
                               return py::make_tuple(d.shape.channels,
                                                     d.shape.height,
                                                     d.shape.width);
                             })
      .def("density", &rrm::SparseDelta::density)
      .def("indices",
           [](const rrm::SparseDelta& d) {
             py::array_t<std::uint64_t> out(d.entries.size());
             auto* ptr = out.mutable_data();
             for (std::size_t i = 0; i < d.entries.size(); ++i) {
               ptr[i] = d.entries[i].index;
             }
             return out;
           })
      .def("values",
           [](const rrm::SparseDelta& d) {
             py::array_t<float> out(d.entries.size());
             auto* ptr = out.mutable_data();
             for (std::size_t i = 0; i < d.entries.size(); ++i) {
               ptr[i] = d.entries[i].value;
             }
             return out;
           })
      .def("__len__",
           [](const rrm::SparseDelta& d) { return d.entries.size(); });

  py::class_<rrm::ErrorModel>(m, "ErrorModel")
      .def(py::init<>())
      .def_property(
          "mu",
          [](const rrm::ErrorModel& model) {
            return std::vector<double>(model.mu.begin(), model.mu.end());
          },
          [](rrm::ErrorModel& model, const std::vector<double>& mu) {
            if (mu.size() != model.mu.size()) {
              throw rrm::InvalidArgument("mu needs exactly 5 coefficients");
            }
            std::copy(mu.begin(), mu.end(), model.mu.begin());
          })
      .def_readwrite("threshold", &rrm::ErrorModel::threshold)
      .def_property_readonly("calibration_points",
                             [](const rrm::ErrorModel& model) {
                               py::list out;
                               for (const auto& p : model.calibration_points) {
                                 out.append(py::make_tuple(
                                     p.accumulated_truncation,
                                     p.measured_error));
                               }
                               return out;
                             })
      .def("predict", &rrm::ErrorModel::predict);

  py::class_<rrm::NetworkModel>(m, "NetworkModel")
      .def(py::init<>())
      .def(
          "add_conv",
          [](rrm::NetworkModel& model, const FloatArray& weights,
             const FloatArray& bias, std::size_t stride, std::size_t pad) {
            if (weights.ndim() != 4 || bias.ndim() != 1) {
              throw rrm::InvalidArgument(
                  "conv weights must be (out, in, kh, kw), bias (out,)");
            }
            rrm::ConvSpec spec;
            spec.out_channels = static_cast<std::size_t>(weights.shape(0));
            spec.in_channels = static_cast<std::size_t>(weights.shape(1));
            spec.kernel_h = static_cast<std::size_t>(weights.shape(2));
            spec.kernel_w = static_cast<std::size_t>(weights.shape(3));
            spec.stride = stride;
            spec.pad = pad;
            spec.weights.assign(weights.data(),
                                weights.data() + weights.size());
            spec.bias.assign(bias.data(), bias.data() + bias.size());
            if (spec.bias.size() != spec.out_channels) {
              throw rrm::InvalidArgument("bias length must equal out channels");
            }
            model.layers.emplace_back(std::move(spec));
          },
          py::arg("weights"), py::arg("bias"), py::arg("stride") = 1,
          py::arg("pad") = 0)
      .def("add_fc",
           [](rrm::NetworkModel& model, const FloatArray& weights,
              const FloatArray& bias) {
             if (weights.ndim() != 2 || bias.ndim() != 1) {
               throw rrm::InvalidArgument(
                   "fc weights must be (out, in), bias (out,)");
             }
             rrm::FcSpec spec;
             spec.out_features = static_cast<std::size_t>(weights.shape(0));
             spec.in_features = static_cast<std::size_t>(weights.shape(1));
             spec.weights.assign(weights.data(),
                                 weights.data() + weights.size());
             spec.bias.assign(bias.data(), bias.data() + bias.size());
             if (spec.bias.size() != spec.out_features) {
               throw rrm::InvalidArgument("bias length must equal out features");
             }
             model.layers.emplace_back(std::move(spec));
           })
      .def("add_relu",
           [](rrm::NetworkModel& model) {
             model.layers.emplace_back(rrm::ReluSpec{});
           })
      .def(
          "add_max_pool",
          [](rrm::NetworkModel& model, std::size_t kernel, std::size_t stride) {
            model.layers.emplace_back(rrm::MaxPoolSpec{kernel, stride});
          },
          py::arg("kernel") = 2, py::arg("stride") = 2)
      .def("layer_kinds",
           [](const rrm::NetworkModel& model) {
             std::vector<std::string> kinds;
             for (const auto& layer : model.layers) {
               kinds.emplace_back(rrm::layer_kind_name(layer));
             }
             return kinds;
           })
      .def("linear_layer_count", &rrm::NetworkModel::linear_layer_count)
      .def("validate",
           [](const rrm::NetworkModel& model, std::size_t channels,
              std::size_t height, std::size_t width) {
             const auto shapes =
                 model.validate(rrm::Shape{channels, height, width});
             py::list out;
             for (const auto& s : shapes) {
               out.append(py::make_tuple(s.channels, s.height, s.width));
             }
             return out;
           })
      .def("__len__",
           [](const rrm::NetworkModel& model) { return model.layers.size(); });

  m.def("subtract", [](const FloatArray& a, const FloatArray& b) {
    return tensor_to_numpy(
        rrm::subtract(tensor_from_numpy(a), tensor_from_numpy(b)));
  });

  m.def(
      "sparsify",
      [](const FloatArray& d, float epsilon) {
        auto result = rrm::sparsify(tensor_from_numpy(d), epsilon);
        return py::make_tuple(std::move(result.delta), result.truncated_l2);
      },
      py::arg("d"), py::arg("epsilon") = 0.0f);

  m.def("densify", [](const rrm::SparseDelta& s) {
    return tensor_to_numpy(rrm::densify(s));
  });

  m.def("dense_forward", [](const rrm::NetworkModel& model,
                            const FloatArray& frame) {
    return tensor_to_numpy(rrm::dense_forward(model, tensor_from_numpy(frame)));
  });

  m.def(
      "process_sequence",
      [](const rrm::NetworkModel& model, const std::vector<FloatArray>& frames,
         double epsilon, bool oracle, std::size_t chunks,
         const rrm::ErrorModel* controller) {
        rrm::RunConfig config;
        config.epsilon = static_cast<float>(epsilon);
        config.oracle = oracle;
        if (controller != nullptr) {
          config.controller = *controller;
        }
        const auto run = rrm::process_sequence_chunked(
            model, frames_from_list(frames), config, chunks);

        py::list features;
        for (const auto& fr : run.frames) {
          features.append(tensor_to_numpy(fr.features));
        }
        const rrm::Json config_echo{{"api", "python"},
                                    {"epsilon", epsilon},
                                    {"chunks", chunks},
                                    {"oracle", oracle},
                                    {"error_control",
                                     {{"enabled", controller != nullptr}}}};
        py::dict result;
        result["features"] = features;
        result["report"] =
            json_to_py(rrm::build_run_report(config_echo, model, run));
        return result;
      },
      py::arg("model"), py::arg("frames"), py::arg("epsilon") = 0.0,
      py::arg("oracle") = false, py::arg("chunks") = 1,
      py::arg("controller") = nullptr);

  m.def(
      "calibrate",
      [](const rrm::NetworkModel& model,
         const std::vector<std::vector<FloatArray>>& videos, double epsilon) {
        std::vector<std::vector<rrm::Tensor>> converted;
        converted.reserve(videos.size());
        for (const auto& video : videos) {
          converted.push_back(frames_from_list(video));
        }
        const auto points =
            rrm::calibrate(model, converted, static_cast<float>(epsilon));
        py::list out;
        for (const auto& p : points) {
          out.append(py::make_tuple(p.accumulated_truncation, p.measured_error));
        }
        return out;
      },
      py::arg("model"), py::arg("videos"), py::arg("epsilon"));

  m.def(
      "fit_error_model",
      [](const std::vector<std::pair<double, double>>& points,
         double threshold) {
        std::vector<rrm::CalibrationPoint> converted;
        converted.reserve(points.size());
        for (const auto& [e_t, err] : points) {
          converted.push_back({e_t, err});
        }
        return rrm::fit_error_model(converted, threshold);
      },
      py::arg("points"), py::arg("threshold"));

  m.def("save_model", [](const std::string& path,
                         const rrm::NetworkModel& model) {
    rrm::save_model(path, model);
  });
  m.def("load_model",
        [](const std::string& path) { return rrm::load_model(path); });

  m.def(
      "make_random_model",
      [](std::size_t channels, std::size_t height, std::size_t width,
         std::size_t layers, std::uint64_t seed) {
        return rrm::make_random_model(rrm::Shape{channels, height, width},
                                      layers, seed);
      },
      py::arg("channels"), py::arg("height"), py::arg("width"),
      py::arg("layers") = 5, py::arg("seed") = 0);

  m.def(
      "generate_video",
      [](const std::string& kind, std::size_t channels, std::size_t height,
         std::size_t width, std::size_t frames, double motion, double noise,
         std::uint64_t seed) {
        const auto video = rrm::generate_video(spec_from_args(
            kind, channels, height, width, frames, motion, noise, seed));
        py::list out;
        for (const auto& frame : video) {
          out.append(tensor_to_numpy(frame));
        }
        return out;
      },
      py::arg("kind"), py::arg("channels") = 3, py::arg("height") = 32,
      py::arg("width") = 32, py::arg("frames") = 50, py::arg("motion") = 1.0,
      py::arg("noise") = 0.0, py::arg("seed") = 0);
}
