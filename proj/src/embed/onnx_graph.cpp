#include "onnx_graph.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>
#include <unordered_map>

#include "wysiwim/error.hpp"

namespace wysiwim::embed::onnx {
namespace {

using wysiwim_onnx::TensorProto;

std::size_t product(std::span<const std::int64_t> dims) {
  std::size_t n = 1;
  for (auto d : dims) {
    if (d < 0) throw FormatError("negative tensor dimension");
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

template <typename T>
T read_le(const std::string& raw, std::size_t index) {
  std::array<unsigned char, sizeof(T)> b{};
  std::memcpy(b.data(), raw.data() + index * sizeof(T), sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(b.begin(), b.end());
  }
  T v;
  std::memcpy(&v, b.data(), sizeof(T));
  return v;
}

ValueShape shape_of(const wysiwim_onnx::ValueInfoProto& info) {
  ValueShape shape{info.name(), {}};
  if (!info.type().has_tensor_type() || !info.type().tensor_type().has_shape()) {
    return shape;
  }
  for (const auto& dim : info.type().tensor_type().shape().dim()) {
    if (dim.has_dim_value()) {
      shape.dims.emplace_back(dim.dim_value());
    } else {
      shape.dims.emplace_back(std::nullopt);
    }
  }
  return shape;
}

}  // namespace

std::size_t Tensor::numel() const { return product(shape); }

Tensor Tensor::floats(std::vector<std::int64_t> shape, std::vector<float> data) {
  Tensor t;
  t.shape = std::move(shape);
  if (data.empty()) {
    data.assign(product(t.shape), 0.0F);
  }
  t.data = std::move(data);
  return t;
}

Tensor Tensor::int64s(std::vector<std::int64_t> shape, std::vector<std::int64_t> ints) {
  Tensor t;
  t.shape = std::move(shape);
  t.ints = std::move(ints);
  t.is_int = true;
  return t;
}

Tensor from_proto(const TensorProto& proto) {
  if (proto.data_location() == TensorProto::EXTERNAL || proto.external_data_size() > 0) {
    throw FormatError("tensor '" + proto.name() + "' uses external data, which is not supported");
  }
  std::vector<std::int64_t> shape(proto.dims().begin(), proto.dims().end());
  const std::size_t n = product(shape);
  const std::string& raw = proto.raw_data();

  auto check_count = [&](std::size_t got) {
    if (got != n) {
      throw FormatError("tensor '" + proto.name() + "' holds " + std::to_string(got) +
                        " values, shape needs " + std::to_string(n));
    }
  };

  switch (proto.data_type()) {
    case TensorProto::FLOAT: {
      std::vector<float> v;
      if (!raw.empty()) {
        check_count(raw.size() / sizeof(float));
        v.resize(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = read_le<float>(raw, i);
      } else {
        v.assign(proto.float_data().begin(), proto.float_data().end());
        check_count(v.size());
      }
      return Tensor::floats(std::move(shape), std::move(v));
    }
    case TensorProto::DOUBLE: {
      std::vector<float> v(n);
      if (!raw.empty()) {
        check_count(raw.size() / sizeof(double));
        for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<float>(read_le<double>(raw, i));
      } else {
        check_count(static_cast<std::size_t>(proto.double_data_size()));
        for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<float>(proto.double_data(static_cast<int>(i)));
      }
      return Tensor::floats(std::move(shape), std::move(v));
    }
    case TensorProto::INT64: {
      std::vector<std::int64_t> v;
      if (!raw.empty()) {
        check_count(raw.size() / sizeof(std::int64_t));
        v.resize(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = read_le<std::int64_t>(raw, i);
      } else {
        v.assign(proto.int64_data().begin(), proto.int64_data().end());
        check_count(v.size());
      }
      return Tensor::int64s(std::move(shape), std::move(v));
    }
    case TensorProto::INT32: {
      std::vector<std::int64_t> v(n);
      if (!raw.empty()) {
        check_count(raw.size() / sizeof(std::int32_t));
        for (std::size_t i = 0; i < n; ++i) v[i] = read_le<std::int32_t>(raw, i);
      } else {
        check_count(static_cast<std::size_t>(proto.int32_data_size()));
        for (std::size_t i = 0; i < n; ++i) v[i] = proto.int32_data(static_cast<int>(i));
      }
      return Tensor::int64s(std::move(shape), std::move(v));
    }
    default:
      throw FormatError("tensor '" + proto.name() + "' has unsupported data type " +
                        std::to_string(proto.data_type()));
  }
}

std::string describe(const ValueShape& shape) {
  std::string out = "(";
  for (std::size_t i = 0; i < shape.dims.size(); ++i) {
    if (i) out += ", ";
    out += shape.dims[i] ? std::to_string(*shape.dims[i]) : std::string("?");
  }
  return out + ")";
}

Graph Graph::parse(std::span<const std::uint8_t> bytes) {
  wysiwim_onnx::ModelProto model;
  if (!model.ParseFromArray(bytes.data(), static_cast<int>(bytes.size()))) {
    throw FormatError("not a valid ONNX model");
  }
  if (!model.has_graph()) {
    throw FormatError("ONNX model has no graph");
  }

  Graph g;
  g.graph_ = model.graph();
  for (const auto& init : g.graph_.initializer()) {
    g.initializers_.insert_or_assign(init.name(), from_proto(init));
  }

  std::vector<ValueShape> inputs;
  for (const auto& in : g.graph_.input()) {
    if (!g.initializers_.contains(in.name())) {
      inputs.push_back(shape_of(in));
    }
  }
  if (inputs.size() != 1) {
    throw FormatError("ONNX graph must have exactly one data input, found " +
                      std::to_string(inputs.size()));
  }
  if (g.graph_.output_size() != 1) {
    throw FormatError("ONNX graph must have exactly one output, found " +
                      std::to_string(g.graph_.output_size()));
  }
  g.input_ = inputs.front();
  g.output_ = shape_of(g.graph_.output(0));

  std::set<std::string> available{g.input_.name};
  for (const auto& [name, _] : g.initializers_) available.insert(name);
  for (const auto& node : g.graph_.node()) {
    if (!node.domain().empty() && node.domain() != "ai.onnx") {
      throw FormatError("operator domain '" + node.domain() + "' is not supported");
    }
    if (!is_supported_op(node.op_type())) {
      throw FormatError("unsupported ONNX operator '" + node.op_type() + "'");
    }
    for (const auto& name : node.input()) {
      if (!name.empty() && !available.contains(name)) {
        throw FormatError("node '" + node.name() + "' consumes '" + name +
                          "' before it is produced");
      }
    }
    for (const auto& name : node.output()) available.insert(name);
  }
  if (!available.contains(g.output_.name)) {
    throw FormatError("graph output '" + g.output_.name + "' is never produced");
  }
  return g;
}

Graph Graph::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open graph file " + path.string());
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return parse(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

Tensor Graph::run(const Tensor& input) const {
  std::unordered_map<std::string, Tensor> values;
  auto lookup = [&](const std::string& name) -> const Tensor* {
    if (name == input_.name) return &input;
    if (auto it = values.find(name); it != values.end()) return &it->second;
    if (auto it = initializers_.find(name); it != initializers_.end()) return &it->second;
    throw FormatError("value '" + name + "' is not available");
  };

  for (const auto& node : graph_.node()) {
    std::vector<const Tensor*> args;
    args.reserve(static_cast<std::size_t>(node.input_size()));
    for (const auto& name : node.input()) {
      args.push_back(name.empty() ? nullptr : lookup(name));
    }
    auto results = run_node(node, args);
    for (int i = 0; i < node.output_size() && i < static_cast<int>(results.size()); ++i) {
      if (!node.output(i).empty()) {
        values.insert_or_assign(node.output(i), std::move(results[static_cast<std::size_t>(i)]));
      }
    }
  }
  return *lookup(output_.name);
}

GraphExtractor::GraphExtractor(Graph graph, int embedding_dim)
    : graph_(std::move(graph)), embedding_dim_(embedding_dim) {}

std::optional<int> GraphExtractor::fixed_batch() const {
  const auto& dims = graph_.input().dims;
  if (!dims.empty() && dims.front()) {
    return static_cast<int>(*dims.front());
  }
  return std::nullopt;
}

std::vector<std::vector<double>> GraphExtractor::run(
    std::span<const preprocess::InputTensor> batch) const {
  if (batch.empty()) return {};
  const auto& first = batch.front();
  const std::size_t per_item = first.values.size();

  Tensor input = Tensor::floats({static_cast<std::int64_t>(batch.size()), 3, first.height, first.width},
                                std::vector<float>(per_item * batch.size()));
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto& values = batch[b].values;
    for (std::size_t i = 0; i < per_item; ++i) {
      input.data[b * per_item + i] = static_cast<float>(values[i]);
    }
  }

  const Tensor out = graph_.run(input);
  if (out.is_int || out.shape.size() != 2 ||
      out.shape[0] != static_cast<std::int64_t>(batch.size()) || out.shape[1] != embedding_dim_) {
    std::string got = "(";
    for (std::size_t i = 0; i < out.shape.size(); ++i) {
      got += (i ? ", " : "") + std::to_string(out.shape[i]);
    }
    throw ShapeMismatchError("graph produced shape " + got + "), expected (" +
                             std::to_string(batch.size()) + ", " + std::to_string(embedding_dim_) +
                             ")");
  }
  std::vector<std::vector<double>> rows(batch.size());
  const auto dim = static_cast<std::size_t>(embedding_dim_);
  for (std::size_t b = 0; b < batch.size(); ++b) {
    rows[b].assign(out.data.begin() + static_cast<std::ptrdiff_t>(b * dim),
                   out.data.begin() + static_cast<std::ptrdiff_t>((b + 1) * dim));
  }
  return rows;
}

}  // namespace wysiwim::embed::onnx
