#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "onnx.pb.h"
#include "wysiwim/model.hpp"

namespace wysiwim::embed::onnx {

// Dense row-major tensor. Float tensors carry activations; int64 tensors
// only appear as shape/index operands.
struct Tensor {
  std::vector<std::int64_t> shape;
  std::vector<float> data;
  std::vector<std::int64_t> ints;
  bool is_int = false;

  std::size_t numel() const;
  std::size_t size() const { return is_int ? ints.size() : data.size(); }

  static Tensor floats(std::vector<std::int64_t> shape, std::vector<float> data = {});
  static Tensor int64s(std::vector<std::int64_t> shape, std::vector<std::int64_t> ints);
};

Tensor from_proto(const wysiwim_onnx::TensorProto& proto);

// A dimension is either a concrete extent or symbolic (nullopt).
struct ValueShape {
  std::string name;
  std::vector<std::optional<std::int64_t>> dims;
};

std::string describe(const ValueShape& shape);

// Parsed ONNX graph with one data input and one output, evaluated by a
// small reference interpreter covering common CNN backbone operators.
class Graph {
 public:
  // Throws FormatError for unparsable graphs, unsupported operators or more
  // than one data input or output.
  static Graph parse(std::span<const std::uint8_t> bytes);
  static Graph load(const std::filesystem::path& path);

  const ValueShape& input() const noexcept { return input_; }
  const ValueShape& output() const noexcept { return output_; }

  Tensor run(const Tensor& input) const;

 private:
  wysiwim_onnx::GraphProto graph_;
  std::map<std::string, Tensor, std::less<>> initializers_;
  ValueShape input_;
  ValueShape output_;
};

// Evaluates a single node; exposed for operator-level tests.
std::vector<Tensor> run_node(const wysiwim_onnx::NodeProto& node,
                             const std::vector<const Tensor*>& inputs);

bool is_supported_op(const std::string& op_type);

class GraphExtractor final : public FeatureExtractor {
 public:
  GraphExtractor(Graph graph, int embedding_dim);

  std::vector<std::vector<double>> run(std::span<const preprocess::InputTensor> batch) const override;
  std::optional<int> fixed_batch() const override;

  const Graph& graph() const noexcept { return graph_; }

 private:
  Graph graph_;
  int embedding_dim_;
};

}  // namespace wysiwim::embed::onnx
