#include <doctest.h>

#include <cmath>
#include <random>

#include "embed/onnx_graph.hpp"
#include "fixtures.hpp"
#include "onnx_builder.hpp"
#include "wysiwim/error.hpp"
#include "wysiwim/model.hpp"

using namespace wysiwim;
using namespace wysiwim::embed;
using onnx::Tensor;
using namespace onnx_builder;

namespace {

std::vector<float> random_floats(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<float> u(-1.0F, 1.0F);
  std::vector<float> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

Tensor run1(const NodeProto& n, const std::vector<const Tensor*>& inputs) {
  auto out = onnx::run_node(n, inputs);
  REQUIRE(out.size() >= 1);
  return out.front();
}

void check_close(const std::vector<float>& got, const std::vector<double>& want, double tol = 1e-5) {
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    CHECK(std::abs(got[i] - want[i]) <= tol * (1.0 + std::abs(want[i])));
  }
}

struct ConvCase {
  int n, c, h, w, m, k, stride, pad, dilation, group;
};

std::vector<double> naive_conv(const ConvCase& p, const std::vector<float>& x,
                               const std::vector<float>& wt, const std::vector<float>& b, int oh, int ow) {
  std::vector<double> out;
  const int cg = p.c / p.group;
  const int mg = p.m / p.group;
  for (int n = 0; n < p.n; ++n) {
    for (int m = 0; m < p.m; ++m) {
      const int g = m / mg;
      for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
          double acc = b.empty() ? 0.0 : b[static_cast<std::size_t>(m)];
          for (int ci = 0; ci < cg; ++ci) {
            for (int ky = 0; ky < p.k; ++ky) {
              for (int kx = 0; kx < p.k; ++kx) {
                const int iy = oy * p.stride - p.pad + ky * p.dilation;
                const int ix = ox * p.stride - p.pad + kx * p.dilation;
                if (iy < 0 || ix < 0 || iy >= p.h || ix >= p.w) continue;
                const int c = g * cg + ci;
                acc += static_cast<double>(x[static_cast<std::size_t>(((n * p.c + c) * p.h + iy) * p.w + ix)]) *
                       wt[static_cast<std::size_t>(((m * cg + ci) * p.k + ky) * p.k + kx)];
              }
            }
          }
          out.push_back(acc);
        }
      }
    }
  }
  return out;
}

std::string write_descriptor(const fixtures::TempDir& dir, const std::string& graph, int w, int h,
                             int dim) {
  const auto path = dir / ("d_" + std::to_string(dim) + "_" + std::to_string(w) + ".json");
  fixtures::write_text(path, R"({"backend": "graph-file", "graph_path": ")" + graph +
                                 R"(", "input_width": )" + std::to_string(w) +
                                 R"(, "input_height": )" + std::to_string(h) +
                                 R"(, "mean": [0.5, 0.5, 0.5], "std": [0.5, 0.5, 0.5], "embedding_dim": )" +
                                 std::to_string(dim) + "}");
  return path.string();
}

}  // namespace

TEST_SUITE("onnx") {

TEST_CASE("Conv matches a naive convolution") {
  std::mt19937_64 rng(21);
  const std::vector<ConvCase> cases = {
      {1, 3, 7, 6, 4, 3, 1, 1, 1, 1},
      {2, 3, 9, 9, 2, 3, 2, 0, 1, 1},
      {1, 4, 8, 7, 4, 3, 1, 2, 2, 4},
      {1, 4, 5, 5, 6, 1, 1, 0, 1, 2},
  };
  for (const auto& p : cases) {
    const int oh = (p.h + 2 * p.pad - p.dilation * (p.k - 1) - 1) / p.stride + 1;
    const int ow = (p.w + 2 * p.pad - p.dilation * (p.k - 1) - 1) / p.stride + 1;
    const auto x = random_floats(rng, static_cast<std::size_t>(p.n * p.c * p.h * p.w));
    const auto wt = random_floats(rng, static_cast<std::size_t>(p.m * (p.c / p.group) * p.k * p.k));
    const auto b = random_floats(rng, static_cast<std::size_t>(p.m));
    const Tensor tx = Tensor::floats({p.n, p.c, p.h, p.w}, x);
    const Tensor tw = Tensor::floats({p.m, p.c / p.group, p.k, p.k}, wt);
    const Tensor tb = Tensor::floats({p.m}, b);
    const auto n = node("Conv", {"x", "w", "b"}, {"y"},
                        {ints_attr("strides", {p.stride, p.stride}),
                         ints_attr("pads", {p.pad, p.pad, p.pad, p.pad}),
                         ints_attr("dilations", {p.dilation, p.dilation}), int_attr("group", p.group)});
    const auto y = run1(n, {&tx, &tw, &tb});
    CHECK(y.shape == std::vector<std::int64_t>{p.n, p.m, oh, ow});
    check_close(y.data, naive_conv(p, x, wt, b, oh, ow));
  }
}

TEST_CASE("pooling") {
  const Tensor x = Tensor::floats({1, 1, 4, 4}, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16});
  const auto mx = run1(node("MaxPool", {"x"}, {"y"},
                            {ints_attr("kernel_shape", {2, 2}), ints_attr("strides", {2, 2})}),
                       {&x});
  CHECK(mx.shape == std::vector<std::int64_t>{1, 1, 2, 2});
  CHECK(mx.data == std::vector<float>{6, 8, 14, 16});

  const auto avg = run1(node("AveragePool", {"x"}, {"y"},
                             {ints_attr("kernel_shape", {3, 3}), ints_attr("pads", {1, 1, 1, 1}),
                              ints_attr("strides", {2, 2})}),
                        {&x});
  CHECK(avg.shape == std::vector<std::int64_t>{1, 1, 2, 2});
  // Corner window covers 1, 2, 5, 6 only when padding is excluded.
  CHECK(avg.data[0] == doctest::Approx(3.5));
  CHECK(avg.data[3] == doctest::Approx((6 + 7 + 8 + 10 + 11 + 12 + 14 + 15 + 16) / 9.0));

  const auto gap = run1(node("GlobalAveragePool", {"x"}, {"y"}), {&x});
  CHECK(gap.shape == std::vector<std::int64_t>{1, 1, 1, 1});
  CHECK(gap.data[0] == doctest::Approx(8.5));
  const auto gmp = run1(node("GlobalMaxPool", {"x"}, {"y"}), {&x});
  CHECK(gmp.data[0] == 16.0F);
}

TEST_CASE("BatchNormalization, Gemm and MatMul") {
  const Tensor x = Tensor::floats({1, 2, 1, 2}, {1, 2, 3, 4});
  const Tensor scale = Tensor::floats({2}, {2, 0.5});
  const Tensor bias = Tensor::floats({2}, {1, -1});
  const Tensor mean = Tensor::floats({2}, {1, 3});
  const Tensor var = Tensor::floats({2}, {4, 1});
  const auto bn = run1(node("BatchNormalization", {"x", "s", "b", "m", "v"}, {"y"},
                            {float_attr("epsilon", 0.0F)}),
                       {&x, &scale, &bias, &mean, &var});
  check_close(bn.data, {1.0, 2.0, -1.0, -0.5});

  const Tensor a = Tensor::floats({2, 3}, {1, 2, 3, 4, 5, 6});
  const Tensor w = Tensor::floats({2, 3}, {1, 0, -1, 0.5, 0.5, 0.5});
  const Tensor c = Tensor::floats({2}, {10, 20});
  const auto gemm = run1(node("Gemm", {"a", "w", "c"}, {"y"}, {int_attr("transB", 1), float_attr("alpha", 2.0F)}),
                         {&a, &w, &c});
  CHECK(gemm.shape == std::vector<std::int64_t>{2, 2});
  check_close(gemm.data, {10 - 4, 20 + 6, 10 - 4, 20 + 15});

  const Tensor bt = Tensor::floats({3, 2}, {1, 2, 3, 4, 5, 6});
  const auto mm = run1(node("MatMul", {"a", "b"}, {"y"}), {&a, &bt});
  check_close(mm.data, {22, 28, 49, 64});
}

TEST_CASE("broadcasting arithmetic and activations") {
  const Tensor a = Tensor::floats({2, 3}, {1, 2, 3, 4, 5, 6});
  const Tensor b = Tensor::floats({3}, {10, 20, 30});
  CHECK(run1(node("Add", {"a", "b"}, {"y"}), {&a, &b}).data == std::vector<float>{11, 22, 33, 14, 25, 36});
  const Tensor col = Tensor::floats({2, 1}, {2, 4});
  CHECK(run1(node("Div", {"a", "c"}, {"y"}), {&a, &col}).data ==
        std::vector<float>{0.5, 1, 1.5, 1, 1.25, 1.5});
  const Tensor i1 = Tensor::int64s({2}, {6, 8});
  const Tensor i2 = Tensor::int64s({}, {2});
  const auto idiv = run1(node("Div", {"a", "b"}, {"y"}), {&i1, &i2});
  CHECK(idiv.is_int);
  CHECK(idiv.ints == std::vector<std::int64_t>{3, 4});
  CHECK_THROWS_AS(run1(node("Add", {"a", "b"}, {"y"}), {&a, &i1}), FormatError);
  const Tensor bad = Tensor::floats({4}, {1, 2, 3, 4});
  CHECK_THROWS_AS(run1(node("Mul", {"a", "b"}, {"y"}), {&a, &bad}), FormatError);

  const Tensor v = Tensor::floats({4}, {-2, -0.5, 0.5, 4});
  CHECK(run1(node("Relu", {"x"}, {"y"}), {&v}).data == std::vector<float>{0, 0, 0.5, 4});
  CHECK(run1(node("LeakyRelu", {"x"}, {"y"}, {float_attr("alpha", 0.5F)}), {&v}).data ==
        std::vector<float>{-1, -0.25, 0.5, 4});
  const Tensor lo = Tensor::floats({}, {-1});
  const Tensor hi = Tensor::floats({}, {1});
  CHECK(run1(node("Clip", {"x", "lo", "hi"}, {"y"}), {&v, &lo, &hi}).data ==
        std::vector<float>{-1, -0.5, 0.5, 1});
  check_close(run1(node("Sigmoid", {"x"}, {"y"}), {&v}).data,
              {1 / (1 + std::exp(2.0)), 1 / (1 + std::exp(0.5)), 1 / (1 + std::exp(-0.5)),
               1 / (1 + std::exp(-4.0))});
  check_close(run1(node("HardSwish", {"x"}, {"y"}), {&v}).data,
              {-2 * (1.0 / 6), -0.5 * (2.5 / 6), 0.5 * (3.5 / 6), 4.0});
  check_close(run1(node("Tanh", {"x"}, {"y"}), {&v}).data,
              {std::tanh(-2.0), std::tanh(-0.5), std::tanh(0.5), std::tanh(4.0)});
}

TEST_CASE("shape manipulation") {
  const Tensor x = Tensor::floats({2, 3, 1, 1}, {1, 2, 3, 4, 5, 6});
  const auto shape = run1(node("Shape", {"x"}, {"s"}), {&x});
  CHECK(shape.ints == std::vector<std::int64_t>{2, 3, 1, 1});
  const Tensor zero = Tensor::int64s({}, {0});
  const auto batch = run1(node("Gather", {"s", "i"}, {"b"}, {int_attr("axis", 0)}), {&shape, &zero});
  CHECK(batch.ints == std::vector<std::int64_t>{2});
  const Tensor axes = Tensor::int64s({1}, {0});
  const auto batch1 = run1(node("Unsqueeze", {"b", "a"}, {"u"}), {&batch, &axes});
  CHECK(batch1.shape == std::vector<std::int64_t>{1});
  const Tensor minus1 = Tensor::int64s({1}, {-1});
  const auto target = run1(node("Concat", {"u", "m"}, {"t"}, {int_attr("axis", 0)}), {&batch1, &minus1});
  CHECK(target.ints == std::vector<std::int64_t>{2, -1});
  const auto flat = run1(node("Reshape", {"x", "t"}, {"y"}), {&x, &target});
  CHECK(flat.shape == std::vector<std::int64_t>{2, 3});
  CHECK(flat.data == x.data);

  const Tensor keep = Tensor::int64s({2}, {0, -1});
  CHECK(run1(node("Reshape", {"x", "t"}, {"y"}), {&x, &keep}).shape == std::vector<std::int64_t>{2, 3});
  const Tensor two_infer = Tensor::int64s({2}, {-1, -1});
  CHECK_THROWS_AS(run1(node("Reshape", {"x", "t"}, {"y"}), {&x, &two_infer}), FormatError);

  const Tensor sq_axes = Tensor::int64s({2}, {2, 3});
  CHECK(run1(node("Squeeze", {"x", "a"}, {"y"}), {&x, &sq_axes}).shape == std::vector<std::int64_t>{2, 3});
  CHECK(run1(node("Squeeze", {"x"}, {"y"}), {&x}).shape == std::vector<std::int64_t>{2, 3});
  const Tensor bad_axes = Tensor::int64s({1}, {1});
  CHECK_THROWS_AS(run1(node("Squeeze", {"x", "a"}, {"y"}), {&x, &bad_axes}), FormatError);

  CHECK(run1(node("Flatten", {"x"}, {"y"}, {int_attr("axis", 1)}), {&x}).shape ==
        std::vector<std::int64_t>{2, 3});

  const Tensor img = Tensor::floats({1, 2, 2, 2}, {1, 2, 3, 4, 10, 20, 30, 40});
  const auto rm = run1(node("ReduceMean", {"x"}, {"y"}, {ints_attr("axes", {2, 3}), int_attr("keepdims", 0)}),
                       {&img});
  CHECK(rm.shape == std::vector<std::int64_t>{1, 2});
  check_close(rm.data, {2.5, 25});

  AttributeProto value;
  value.set_name("value");
  value.set_type(AttributeProto::TENSOR);
  *value.mutable_t() = int64_tensor("v", {3}, {4, 5, 6});
  const auto c = run1(node("Constant", {}, {"k"}, {value}), {});
  CHECK(c.is_int);
  CHECK(c.ints == std::vector<std::int64_t>{4, 5, 6});
}

TEST_CASE("graph parsing rejects malformed graphs") {
  const std::string junk = "definitely not protobuf";
  CHECK_THROWS_AS(onnx::Graph::parse(std::span(reinterpret_cast<const std::uint8_t*>(junk.data()), junk.size())),
                  FormatError);

  auto two_inputs = small_cnn({});
  two_inputs.input("extra", {1});
  auto bytes = two_inputs.bytes();
  CHECK_THROWS_AS(onnx::Graph::parse(std::span(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size())),
                  FormatError);

  GraphBuilder unsupported;
  unsupported.input("x", {1, 3, 8, 8}).output("y", {1, 3}).add(node("Einsum", {"x"}, {"y"}));
  bytes = unsupported.bytes();
  try {
    onnx::Graph::parse(std::span(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("Einsum") != std::string::npos);
  }

  GraphBuilder dangling;
  dangling.input("x", {1, 3, 8, 8}).output("y", {1, 3}).add(node("Relu", {"missing"}, {"y"}));
  bytes = dangling.bytes();
  CHECK_THROWS_AS(onnx::Graph::parse(std::span(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size())),
                  FormatError);
}

TEST_CASE("graph-file models load and validate shapes") {
  fixtures::TempDir dir;
  small_cnn({.height = 16, .width = 16, .hidden = 4, .out_dim = 8}).save(dir / "cnn.onnx");
  small_cnn({.height = 16, .width = 16, .hidden = 4, .out_dim = 128}).save(dir / "cnn128.onnx");
  small_cnn({.height = 16, .width = 16, .hidden = 4, .out_dim = 8, .declared_out_dim = std::nullopt})
      .save(dir / "symbolic.onnx");
  small_cnn({.height = 16, .width = 16, .hidden = 4, .out_dim = 8, .batch = 2}).save(dir / "fixed.onnx");

  const auto model = load_model(write_descriptor(dir, "cnn.onnx", 16, 16, 8), 3);
  CHECK(model.descriptor().backend == Backend::graph_file);
  std::mt19937_64 rng(5);
  std::vector<preprocess::InputTensor> tensors;
  for (int i = 0; i < 5; ++i) {
    preprocess::InputTensor t(16, 16);
    for (auto& v : t.values) v = std::uniform_real_distribution<double>(-1, 1)(rng);
    tensors.push_back(t);
  }
  const auto rows = model.embed_batch(tensors);
  REQUIRE(rows.size() == 5);
  for (const auto& r : rows) {
    CHECK(r.size() == 8);
    for (double v : r) CHECK(std::isfinite(v));
  }
  CHECK(model.embed_batch(tensors) == rows);
  const auto single = load_model(write_descriptor(dir, "cnn.onnx", 16, 16, 8), 1).embed_batch(tensors);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t k = 0; k < 8; ++k) CHECK(single[i][k] == doctest::Approx(rows[i][k]).epsilon(1e-6));
  }

  // Declared dimension disagrees with the graph output.
  CHECK_THROWS_AS(load_model(write_descriptor(dir, "cnn128.onnx", 16, 16, 512)), ShapeMismatchError);
  CHECK_NOTHROW(load_model(write_descriptor(dir, "cnn128.onnx", 16, 16, 128)));
  // Input geometry disagrees.
  CHECK_THROWS_AS(load_model(write_descriptor(dir, "cnn.onnx", 32, 32, 8)), ShapeMismatchError);
  // Symbolic output dimension is resolved by running the graph.
  CHECK_NOTHROW(load_model(write_descriptor(dir, "symbolic.onnx", 16, 16, 8)));
  CHECK_THROWS_AS(load_model(write_descriptor(dir, "symbolic.onnx", 16, 16, 9)), ShapeMismatchError);
  // A fixed batch dimension overrides the requested batch size.
  const auto fixed = load_model(write_descriptor(dir, "fixed.onnx", 16, 16, 8), 16);
  CHECK(fixed.batch_size() == 2);
  const auto fixed_rows = fixed.embed_batch(tensors);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t k = 0; k < 8; ++k) CHECK(fixed_rows[i][k] == doctest::Approx(rows[i][k]).epsilon(1e-6));
  }
  CHECK_THROWS_AS(load_model(write_descriptor(dir, "nowhere.onnx", 16, 16, 8)), IoError);
  fixtures::write_text(dir / "junk.onnx", "junk");
  CHECK_THROWS_AS(load_model(write_descriptor(dir, "junk.onnx", 16, 16, 8)), FormatError);
}

}  // TEST_SUITE
