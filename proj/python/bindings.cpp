#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "wysiwim/cache.hpp"
#include "wysiwim/cli.hpp"
#include "wysiwim/corpus.hpp"
#include "wysiwim/model.hpp"
#include "wysiwim/pipeline.hpp"
#include "wysiwim/png_io.hpp"
#include "wysiwim/preprocess.hpp"
#include "wysiwim/render.hpp"
#include "wysiwim/tasks.hpp"

namespace py = pybind11;
using namespace wysiwim;

namespace {

using ByteArray = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;
using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

ByteArray to_array(const RasterImage& img) {
  ByteArray out({img.height(), img.width(), 3});
  const auto bytes = img.to_bytes();
  std::copy(bytes.begin(), bytes.end(), out.mutable_data());
  return out;
}

RasterImage from_array(const ByteArray& a) {
  if (a.ndim() != 3 || a.shape(2) != 3) {
    throw ShapeMismatchError("expected an (H, W, 3) uint8 array");
  }
  const auto h = static_cast<int>(a.shape(0));
  const auto w = static_cast<int>(a.shape(1));
  RasterImage img(w, h);
  const auto* p = a.data();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x, p += 3) img.set_pixel(x, y, Rgb{p[0], p[1], p[2]});
  }
  return img;
}

DoubleArray tensor_to_array(const preprocess::InputTensor& t) {
  DoubleArray out({3, t.height, t.width});
  std::copy(t.values.begin(), t.values.end(), out.mutable_data());
  return out;
}

preprocess::InputTensor tensor_from_array(const DoubleArray& a) {
  if (a.ndim() != 3 || a.shape(0) != 3) {
    throw ShapeMismatchError("expected a (3, H, W) float array");
  }
  preprocess::InputTensor t(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(2)));
  std::copy(a.data(), a.data() + a.size(), t.values.begin());
  return t;
}

std::vector<double> to_vector(const DoubleArray& a) {
  if (a.ndim() != 1) throw ShapeMismatchError("expected a 1-d array");
  return {a.data(), a.data() + a.size()};
}

const render::ProfileRegistry& registry() {
  static const render::ProfileRegistry r;
  return r;
}

render::RenderConfig make_config(const std::string& variant, int width, int height, int cell_width,
                                 int cell_height, int tab_width) {
  render::RenderConfig cfg;
  const auto v = render::variant_from_string(variant);
  if (!v) throw ConfigError("unknown variant '" + variant + "'");
  cfg.variant = *v;
  cfg.canvas_width = width;
  cfg.canvas_height = height;
  cfg.cell_width = cell_width;
  cfg.cell_height = cell_height;
  cfg.tab_width = tab_width;
  return cfg;
}

py::dict metrics_dict(const tasks::Metrics& m) {
  py::dict d;
  d["true_positives"] = m.true_positives;
  d["false_positives"] = m.false_positives;
  d["true_negatives"] = m.true_negatives;
  d["false_negatives"] = m.false_negatives;
  d["precision"] = m.precision;
  d["recall"] = m.recall;
  d["f1"] = m.f1;
  d["accuracy"] = m.accuracy;
  return d;
}

tasks::DistanceMetric parse_metric(const std::string& name) {
  if (name == "cosine") return tasks::DistanceMetric::cosine;
  if (name == "euclidean") return tasks::DistanceMetric::euclidean;
  throw ConfigError("unknown metric '" + name + "'");
}

#define RENDER_ARGS                                                                            \
  py::arg("variant") = "syntax", py::arg("width") = 224, py::arg("height") = 224,              \
  py::arg("cell_width") = 8, py::arg("cell_height") = 16, py::arg("tab_width") = 4

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Source code rendered as images, embedded and compared.";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", error.ptr());
  py::register_exception<IoError>(m, "IoError", error.ptr());
  py::register_exception<IngestionError>(m, "IngestionError", error.ptr());
  auto format = py::register_exception<FormatError>(m, "FormatError", error.ptr());
  py::register_exception<ShapeMismatchError>(m, "ShapeMismatchError", error.ptr());
  py::register_exception<tasks::UndefinedSimilarityError>(m, "UndefinedSimilarityError", error.ptr());
  py::register_exception<embed::CacheMagicError>(m, "CacheMagicError", format.ptr());
  py::register_exception<embed::CacheTruncatedError>(m, "CacheTruncatedError", format.ptr());

  m.def("languages", [] { return registry().names(); });

  // Offsets are byte offsets into the UTF-8 encoding of the source.
  m.def(
      "lex",
      [](const std::string& source, const std::string& language) {
        std::vector<std::tuple<std::size_t, std::size_t, std::string>> out;
        for (const auto& s : render::lex(source, registry().get(language))) {
          out.emplace_back(s.start, s.end, std::string(render::to_string(s.token_class)));
        }
        return out;
      },
      py::arg("source"), py::arg("language") = "java");

  m.def(
      "render",
      [](const std::string& source, const std::string& language, const std::string& variant, int width,
         int height, int cell_width, int cell_height, int tab_width) {
        return to_array(render::render(source, registry().get(language),
                                       make_config(variant, width, height, cell_width, cell_height, tab_width)));
      },
      py::arg("source"), py::arg("language") = "java", RENDER_ARGS);

  m.def("encode_png", [](const ByteArray& a) {
    const auto bytes = render::encode_png(from_array(a));
    return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  });
  m.def("decode_png", [](const py::bytes& b) {
    const std::string s = b;
    return to_array(render::decode_png(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size())));
  });

  m.def(
      "resize",
      [](const ByteArray& a, int width, int height) {
        return to_array(preprocess::resize_bilinear(from_array(a), width, height));
      },
      py::arg("image"), py::arg("width"), py::arg("height"));
  m.def(
      "normalize",
      [](const ByteArray& a, const preprocess::ChannelTriple& mean, const preprocess::ChannelTriple& sd) {
        return tensor_to_array(preprocess::normalize(from_array(a), mean, sd));
      },
      py::arg("image"), py::arg("mean"), py::arg("std"));

  py::class_<embed::EmbeddingModel>(m, "Model")
      .def_property_readonly("backend",
                             [](const embed::EmbeddingModel& model) {
                               return std::string(embed::to_string(model.descriptor().backend));
                             })
      .def_property_readonly("embedding_dim",
                             [](const embed::EmbeddingModel& model) { return model.descriptor().embedding_dim; })
      .def_property_readonly("input_size",
                             [](const embed::EmbeddingModel& model) {
                               return std::pair(model.descriptor().input_width, model.descriptor().input_height);
                             })
      .def_property_readonly("batch_size", &embed::EmbeddingModel::batch_size)
      .def("prepare", [](const embed::EmbeddingModel& model,
                         const ByteArray& a) { return tensor_to_array(embed::prepare_input(from_array(a), model.descriptor())); })
      .def("embed",
           [](const embed::EmbeddingModel& model, const DoubleArray& a) {
             return model.embed(tensor_from_array(a));
           })
      .def("embed_batch",
           [](const embed::EmbeddingModel& model, const std::vector<DoubleArray>& arrays) {
             std::vector<preprocess::InputTensor> tensors;
             for (const auto& a : arrays) tensors.push_back(tensor_from_array(a));
             py::gil_scoped_release release;
             return model.embed_batch(tensors);
           })
      .def(
          "embed_source",
          [](const embed::EmbeddingModel& model, const std::string& source, const std::string& language,
             const std::string& variant, int width, int height, int cell_width, int cell_height,
             int tab_width) {
            return embed::embed_source(model, source, registry().get(language),
                                       make_config(variant, width, height, cell_width, cell_height, tab_width));
          },
          py::arg("source"), py::arg("language") = "java", RENDER_ARGS);

  m.def(
      "builtin_model", [](int batch_size) { return embed::make_model(embed::ModelDescriptor{}, batch_size); },
      py::arg("batch_size") = embed::kDefaultBatchSize);
  m.def(
      "load_model",
      [](const std::filesystem::path& descriptor, int batch_size) {
        return embed::load_model(descriptor, batch_size);
      },
      py::arg("descriptor"), py::arg("batch_size") = embed::kDefaultBatchSize);

  m.def("encode_cache", [](const std::map<std::string, std::vector<float>>& vectors) {
    std::vector<embed::EmbeddingVector> list;
    for (const auto& [id, v] : vectors) list.push_back({id, v});
    const auto bytes = embed::encode_cache(list);
    return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  });
  m.def("decode_cache", [](const py::bytes& b) {
    const std::string s = b;
    std::map<std::string, std::vector<float>> out;
    for (auto& v : embed::decode_cache(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()))) {
      out[v.id] = std::move(v.values);
    }
    return out;
  });
  m.def("read_cache", [](const std::filesystem::path& path) {
    std::map<std::string, std::vector<float>> out;
    for (auto& v : embed::read_cache(path)) out[v.id] = std::move(v.values);
    return out;
  });

  m.def("cosine_similarity", [](const DoubleArray& a, const DoubleArray& b) {
    return tasks::cosine_similarity(to_vector(a), to_vector(b));
  });
  m.def(
      "detect_clone",
      [](const DoubleArray& a, const DoubleArray& b, double threshold) {
        const auto d = tasks::detect_clone(to_vector(a), to_vector(b), threshold);
        return std::pair(d.score, d.is_clone);
      },
      py::arg("a"), py::arg("b"), py::arg("threshold"));
  m.def(
      "calibrate_threshold",
      [](const std::vector<double>& scores, const std::vector<bool>& labels) {
        if (scores.size() != labels.size()) throw ShapeMismatchError("scores and labels differ in length");
        std::vector<tasks::ScoredLabel> scored;
        for (std::size_t i = 0; i < scores.size(); ++i) scored.push_back({scores[i], labels[i]});
        const auto c = tasks::calibrate_threshold(scored);
        return std::pair(c.threshold, c.f1);
      },
      py::arg("scores"), py::arg("labels"));
  m.def(
      "metrics_from_counts",
      [](std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn) {
        return metrics_dict(tasks::Metrics::from_counts(tp, fp, tn, fn));
      },
      py::arg("tp"), py::arg("fp"), py::arg("tn"), py::arg("fn"));
  m.def(
      "knn_classify",
      [](const std::vector<std::string>& ids, const std::vector<std::string>& labels,
         const std::vector<std::vector<double>>& vectors, const std::vector<double>& query, std::size_t k,
         const std::string& metric) {
        if (ids.size() != labels.size() || ids.size() != vectors.size()) {
          throw ShapeMismatchError("ids, labels and vectors differ in length");
        }
        std::vector<tasks::IndexEntry> entries;
        for (std::size_t i = 0; i < ids.size(); ++i) entries.push_back({ids[i], labels[i], vectors[i]});
        const tasks::NeighborIndex index(std::move(entries), parse_metric(metric));
        return tasks::knn_classify(index, query, k);
      },
      py::arg("ids"), py::arg("labels"), py::arg("vectors"), py::arg("query"), py::arg("k"),
      py::arg("metric") = "cosine");

  m.def("load_manifest", [](const std::filesystem::path& path) {
    py::list out;
    for (const auto& e : data::load_manifest(path, registry()).entries) {
      py::dict d;
      d["id"] = e.id;
      d["path"] = e.path;
      d["language"] = e.language;
      d["label"] = e.label ? py::cast(*e.label) : py::none();
      out.append(d);
    }
    return out;
  });
  m.def("load_pairs", [](const std::filesystem::path& path, const std::filesystem::path& manifest) {
    std::vector<std::tuple<std::string, std::string, bool>> out;
    for (const auto& p : data::load_pairs(path, data::load_manifest(manifest, registry()))) {
      out.emplace_back(p.id_a, p.id_b, p.label);
    }
    return out;
  });

  // Runs the command-line tool in-process; returns (exit code, stdout, stderr).
  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::ostringstream out;
    std::ostringstream err;
    int code = 0;
    {
      py::gil_scoped_release release;
      code = cli::run(args, out, err);
    }
    return std::tuple(code, out.str(), err.str());
  });
}
