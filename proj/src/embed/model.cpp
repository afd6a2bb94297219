#include "wysiwim/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "onnx_graph.hpp"
#include "wysiwim/error.hpp"

namespace wysiwim::embed {
namespace {

std::string dims_text(int w, int h) { return std::to_string(w) + "x" + std::to_string(h); }

void check_graph_shapes(const onnx::Graph& graph, const ModelDescriptor& d) {
  const auto& in = graph.input();
  const std::vector<std::optional<std::int64_t>> expected_in{
      std::nullopt, 3, d.input_height, d.input_width};
  bool in_ok = in.dims.size() == 4;
  for (std::size_t i = 1; in_ok && i < 4; ++i) {
    in_ok = !in.dims[i] || in.dims[i] == expected_in[i];
  }
  if (!in_ok) {
    throw ShapeMismatchError("graph input '" + in.name + "' has shape " + onnx::describe(in) +
                             ", descriptor expects (batch, 3, " + std::to_string(d.input_height) +
                             ", " + std::to_string(d.input_width) + ")");
  }
  const auto& out = graph.output();
  if (out.dims.size() != 2 && !out.dims.empty()) {
    throw ShapeMismatchError("graph output '" + out.name + "' has shape " + onnx::describe(out) +
                             ", expected (batch, " + std::to_string(d.embedding_dim) + ")");
  }
  if (out.dims.size() == 2 && out.dims[1] && *out.dims[1] != d.embedding_dim) {
    throw ShapeMismatchError("graph output '" + out.name + "' has shape " + onnx::describe(out) +
                             " but descriptor declares embedding_dim " +
                             std::to_string(d.embedding_dim));
  }
}

}  // namespace

std::string_view to_string(Backend backend) noexcept {
  return backend == Backend::graph_file ? "graph-file" : "builtin-patch-mean";
}

void ModelDescriptor::validate() const {
  if (input_width <= 0 || input_height <= 0) {
    throw ConfigError("descriptor input size must be positive, got " +
                      dims_text(input_width, input_height));
  }
  if (embedding_dim <= 0) {
    throw ConfigError("descriptor embedding_dim must be positive");
  }
  for (std::size_t c = 0; c < 3; ++c) {
    if (!std::isfinite(mean[c]) || !std::isfinite(std[c]) || std[c] == 0.0) {
      throw ConfigError("descriptor mean/std must be finite with nonzero std");
    }
  }
  if ((backend == Backend::graph_file) != graph_path.has_value()) {
    throw ConfigError("graph_path must be given exactly when backend is graph-file");
  }
  if (backend == Backend::builtin_patch_mean) {
    if (input_width % kPatchGrid != 0 || input_height % kPatchGrid != 0) {
      throw ConfigError("builtin-patch-mean needs input sides divisible by 8, got " +
                        dims_text(input_width, input_height));
    }
    if (embedding_dim != kPatchMeanDim) {
      throw ShapeMismatchError("builtin-patch-mean produces " + std::to_string(kPatchMeanDim) +
                               " dimensions, descriptor declares " + std::to_string(embedding_dim));
    }
  }
}

ModelDescriptor parse_descriptor(std::string_view json_text, const std::filesystem::path& base_dir) {
  ModelDescriptor d;
  try {
    const auto doc = nlohmann::json::parse(json_text);
    const auto backend = doc.at("backend").get<std::string>();
    if (backend == "graph-file") {
      d.backend = Backend::graph_file;
    } else if (backend == "builtin-patch-mean") {
      d.backend = Backend::builtin_patch_mean;
    } else {
      throw FormatError("unknown backend '" + backend + "'");
    }
    if (auto it = doc.find("graph_path"); it != doc.end() && !it->is_null()) {
      std::filesystem::path p = it->get<std::string>();
      d.graph_path = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    }
    d.input_width = doc.at("input_width").get<int>();
    d.input_height = doc.at("input_height").get<int>();
    d.mean = doc.at("mean").get<preprocess::ChannelTriple>();
    d.std = doc.at("std").get<preprocess::ChannelTriple>();
    d.embedding_dim = doc.at("embedding_dim").get<int>();
    if (auto it = doc.find("layout"); it != doc.end()) {
      const auto layout = it->get<std::string>();
      if (layout != "channel-major" && layout != "NCHW") {
        throw FormatError("unsupported layout '" + layout + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("invalid model descriptor: ") + e.what());
  }
  d.validate();
  return d;
}

ModelDescriptor load_descriptor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open model descriptor " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_descriptor(buf.str(), path.parent_path());
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::vector<double> PatchMeanExtractor::embed_one(const preprocess::InputTensor& tensor) {
  std::vector<double> out(kPatchMeanDim, 0.0);
  const int ph = tensor.height / kPatchGrid;
  const int pw = tensor.width / kPatchGrid;
  const double count = static_cast<double>(ph) * pw;
  for (int c = 0; c < 3; ++c) {
    for (int gy = 0; gy < kPatchGrid; ++gy) {
      for (int gx = 0; gx < kPatchGrid; ++gx) {
        double sum = 0.0;
        for (int y = gy * ph; y < (gy + 1) * ph; ++y) {
          for (int x = gx * pw; x < (gx + 1) * pw; ++x) {
            sum += tensor.at(c, y, x);
          }
        }
        out[static_cast<std::size_t>((c * kPatchGrid + gy) * kPatchGrid + gx)] = sum / count;
      }
    }
  }
  return out;
}

std::vector<std::vector<double>> PatchMeanExtractor::run(
    std::span<const preprocess::InputTensor> batch) const {
  std::vector<std::vector<double>> rows;
  rows.reserve(batch.size());
  for (const auto& t : batch) rows.push_back(embed_one(t));
  return rows;
}

EmbeddingModel::EmbeddingModel(ModelDescriptor descriptor,
                               std::unique_ptr<const FeatureExtractor> extractor, int batch_size)
    : descriptor_(std::move(descriptor)), extractor_(std::move(extractor)), batch_size_(batch_size) {
  descriptor_.validate();
  if (!extractor_) {
    throw ConfigError("embedding model needs a feature extractor");
  }
  if (auto fixed = extractor_->fixed_batch()) {
    batch_size_ = *fixed;
  }
  if (batch_size_ <= 0) {
    throw ConfigError("batch size must be positive");
  }
}

void EmbeddingModel::check_tensor(const preprocess::InputTensor& tensor) const {
  const auto expected = static_cast<std::size_t>(3) * descriptor_.input_height * descriptor_.input_width;
  if (tensor.height != descriptor_.input_height || tensor.width != descriptor_.input_width ||
      tensor.values.size() != expected) {
    throw ShapeMismatchError("input tensor is 3x" + std::to_string(tensor.height) + "x" +
                             std::to_string(tensor.width) + " (" +
                             std::to_string(tensor.values.size()) + " values), model expects 3x" +
                             std::to_string(descriptor_.input_height) + "x" +
                             std::to_string(descriptor_.input_width));
  }
}

std::vector<double> EmbeddingModel::embed(const preprocess::InputTensor& tensor) const {
  return embed_batch(std::span(&tensor, 1)).front();
}

std::vector<std::vector<double>> EmbeddingModel::embed_batch(
    std::span<const preprocess::InputTensor> tensors) const {
  for (const auto& t : tensors) check_tensor(t);

  std::vector<std::vector<double>> out;
  out.reserve(tensors.size());
  const auto batch = static_cast<std::size_t>(batch_size_);
  const preprocess::InputTensor padding(descriptor_.input_height, descriptor_.input_width);
  std::vector<preprocess::InputTensor> padded;
  for (std::size_t start = 0; start < tensors.size(); start += batch) {
    const std::size_t n = std::min(batch, tensors.size() - start);
    std::vector<std::vector<double>> rows;
    if (n == batch) {
      rows = extractor_->run(tensors.subspan(start, n));
    } else {
      padded.assign(tensors.begin() + static_cast<std::ptrdiff_t>(start), tensors.end());
      padded.resize(batch, padding);
      rows = extractor_->run(padded);
      rows.resize(n);
    }
    for (auto& row : rows) {
      if (row.size() != static_cast<std::size_t>(descriptor_.embedding_dim)) {
        throw ShapeMismatchError("extractor produced " + std::to_string(row.size()) +
                                 " values, descriptor declares " +
                                 std::to_string(descriptor_.embedding_dim));
      }
      for (double v : row) {
        if (!std::isfinite(v)) throw Error("feature extractor produced a non-finite value");
      }
      out.push_back(std::move(row));
    }
  }
  return out;
}

EmbeddingModel make_model(ModelDescriptor descriptor, int batch_size) {
  descriptor.validate();
  if (descriptor.backend == Backend::builtin_patch_mean) {
    return EmbeddingModel(std::move(descriptor), std::make_unique<PatchMeanExtractor>(), batch_size);
  }
  auto graph = onnx::Graph::load(*descriptor.graph_path);
  check_graph_shapes(graph, descriptor);
  auto extractor = std::make_unique<onnx::GraphExtractor>(std::move(graph), descriptor.embedding_dim);

  // Symbolic output shapes are settled with one zero-input dry run.
  const auto& out_dims = extractor->graph().output().dims;
  if (out_dims.size() != 2 || !out_dims[1]) {
    const int n = extractor->fixed_batch().value_or(1);
    const std::vector<preprocess::InputTensor> probe(
        static_cast<std::size_t>(n),
        preprocess::InputTensor(descriptor.input_height, descriptor.input_width));
    extractor->run(probe);
  }
  return EmbeddingModel(std::move(descriptor), std::move(extractor), batch_size);
}

EmbeddingModel load_model(const std::filesystem::path& descriptor_path, int batch_size) {
  return make_model(load_descriptor(descriptor_path), batch_size);
}

}  // namespace wysiwim::embed
