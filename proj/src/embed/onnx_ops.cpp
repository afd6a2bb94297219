#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <set>
#include <string>
#include <unordered_map>

#include "onnx_graph.hpp"
#include "wysiwim/error.hpp"

namespace wysiwim::embed::onnx {
namespace {

using wysiwim_onnx::AttributeProto;
using wysiwim_onnx::NodeProto;
using Shape = std::vector<std::int64_t>;

[[noreturn]] void bad_node(const NodeProto& node, const std::string& what) {
  throw FormatError(node.op_type() + " node '" + node.name() + "': " + what);
}

const AttributeProto* find_attr(const NodeProto& node, std::string_view name) {
  for (const auto& a : node.attribute()) {
    if (a.name() == name) return &a;
  }
  return nullptr;
}

std::int64_t attr_int(const NodeProto& node, std::string_view name, std::int64_t fallback) {
  const auto* a = find_attr(node, name);
  return a ? a->i() : fallback;
}

float attr_float(const NodeProto& node, std::string_view name, float fallback) {
  const auto* a = find_attr(node, name);
  return a ? a->f() : fallback;
}

std::string attr_string(const NodeProto& node, std::string_view name, std::string fallback) {
  const auto* a = find_attr(node, name);
  return a ? a->s() : fallback;
}

std::optional<Shape> attr_ints(const NodeProto& node, std::string_view name) {
  const auto* a = find_attr(node, name);
  if (!a) return std::nullopt;
  return Shape(a->ints().begin(), a->ints().end());
}

const Tensor& arg(const NodeProto& node, const std::vector<const Tensor*>& inputs, std::size_t i) {
  if (i >= inputs.size() || inputs[i] == nullptr) {
    bad_node(node, "missing input " + std::to_string(i));
  }
  return *inputs[i];
}

const Tensor* optional_arg(const std::vector<const Tensor*>& inputs, std::size_t i) {
  return i < inputs.size() ? inputs[i] : nullptr;
}

const Tensor& float_arg(const NodeProto& node, const std::vector<const Tensor*>& inputs,
                        std::size_t i) {
  const Tensor& t = arg(node, inputs, i);
  if (t.is_int) bad_node(node, "input " + std::to_string(i) + " must be a float tensor");
  return t;
}

std::size_t numel(const Shape& s) {
  return std::accumulate(s.begin(), s.end(), std::size_t{1},
                         [](std::size_t acc, std::int64_t d) { return acc * static_cast<std::size_t>(d); });
}

std::int64_t normalize_axis(const NodeProto& node, std::int64_t axis, std::size_t rank) {
  const auto r = static_cast<std::int64_t>(rank);
  if (axis < -r || axis >= r) bad_node(node, "axis " + std::to_string(axis) + " out of range");
  return axis < 0 ? axis + r : axis;
}

// Shape-only ops move values regardless of element type.
Tensor with_shape(const Tensor& src, Shape shape) {
  Tensor t = src;
  t.shape = std::move(shape);
  return t;
}

// ---- elementwise -------------------------------------------------------

Tensor unary(const Tensor& x, const std::function<float(float)>& f) {
  Tensor out = Tensor::floats(x.shape, std::vector<float>(x.data.size()));
  std::transform(x.data.begin(), x.data.end(), out.data.begin(), f);
  return out;
}

Shape broadcast_shape(const NodeProto& node, const Shape& a, const Shape& b) {
  const std::size_t rank = std::max(a.size(), b.size());
  Shape out(rank);
  for (std::size_t i = 0; i < rank; ++i) {
    const std::int64_t da = i < rank - a.size() ? 1 : a[i - (rank - a.size())];
    const std::int64_t db = i < rank - b.size() ? 1 : b[i - (rank - b.size())];
    if (da != db && da != 1 && db != 1) bad_node(node, "shapes do not broadcast");
    out[i] = std::max(da, db);
  }
  return out;
}

// Strides of `s` viewed in an output of rank `rank`, zero on broadcast axes.
std::vector<std::size_t> broadcast_strides(const Shape& s, const Shape& out) {
  std::vector<std::size_t> strides(out.size(), 0);
  std::size_t stride = 1;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const std::size_t i = s.size() - 1 - k;
    const std::size_t o = out.size() - 1 - k;
    strides[o] = s[i] == 1 ? 0 : stride;
    stride *= static_cast<std::size_t>(s[i]);
  }
  return strides;
}

template <typename T, typename Op>
std::vector<T> broadcast_apply(const Shape& out_shape, const Shape& sa, const std::vector<T>& a,
                               const Shape& sb, const std::vector<T>& b, Op op) {
  const auto stride_a = broadcast_strides(sa, out_shape);
  const auto stride_b = broadcast_strides(sb, out_shape);
  const std::size_t n = numel(out_shape);
  std::vector<T> out(n);
  std::vector<std::int64_t> idx(out_shape.size(), 0);
  std::size_t ia = 0;
  std::size_t ib = 0;
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = op(a[ia], b[ib]);
    for (std::size_t d = out_shape.size(); d-- > 0;) {
      ++idx[d];
      ia += stride_a[d];
      ib += stride_b[d];
      if (idx[d] < out_shape[d]) break;
      ia -= stride_a[d] * static_cast<std::size_t>(idx[d]);
      ib -= stride_b[d] * static_cast<std::size_t>(idx[d]);
      idx[d] = 0;
    }
  }
  return out;
}

Tensor binary(const NodeProto& node, const Tensor& a, const Tensor& b, char op) {
  if (a.is_int != b.is_int) bad_node(node, "mixed integer and float operands");
  const Shape shape = broadcast_shape(node, a.shape, b.shape);
  auto apply = [op](auto x, auto y) {
    switch (op) {
      case '+': return x + y;
      case '-': return x - y;
      case '*': return x * y;
      default: return x / y;
    }
  };
  if (a.is_int) {
    if (op == '/' && std::find(b.ints.begin(), b.ints.end(), 0) != b.ints.end()) {
      bad_node(node, "integer division by zero");
    }
    return Tensor::int64s(shape, broadcast_apply(shape, a.shape, a.ints, b.shape, b.ints, apply));
  }
  return Tensor::floats(shape, broadcast_apply(shape, a.shape, a.data, b.shape, b.data, apply));
}

// ---- convolution and pooling ------------------------------------------

struct Window {
  std::int64_t kernel, stride, dilation, pad_begin, pad_end;
};

std::vector<Window> spatial_windows(const NodeProto& node, const Shape& input,
                                    const Shape& kernel) {
  const std::size_t dims = kernel.size();
  if (input.size() != dims + 2) bad_node(node, "input rank does not match kernel rank");
  const Shape strides = attr_ints(node, "strides").value_or(Shape(dims, 1));
  const Shape dilations = attr_ints(node, "dilations").value_or(Shape(dims, 1));
  const Shape pads = attr_ints(node, "pads").value_or(Shape(2 * dims, 0));
  if (strides.size() != dims || dilations.size() != dims || pads.size() != 2 * dims) {
    bad_node(node, "strides/dilations/pads rank mismatch");
  }
  const std::string auto_pad = attr_string(node, "auto_pad", "NOTSET");

  std::vector<Window> w(dims);
  for (std::size_t i = 0; i < dims; ++i) {
    w[i] = {kernel[i], strides[i], dilations[i], pads[i], pads[i + dims]};
    if (w[i].kernel <= 0 || w[i].stride <= 0 || w[i].dilation <= 0) {
      bad_node(node, "kernel, stride and dilation must be positive");
    }
    const std::int64_t in = input[i + 2];
    const std::int64_t extent = w[i].dilation * (w[i].kernel - 1) + 1;
    if (auto_pad == "VALID") {
      w[i].pad_begin = w[i].pad_end = 0;
    } else if (auto_pad == "SAME_UPPER" || auto_pad == "SAME_LOWER") {
      const std::int64_t out = (in + w[i].stride - 1) / w[i].stride;
      const std::int64_t total = std::max<std::int64_t>(0, (out - 1) * w[i].stride + extent - in);
      const std::int64_t small = total / 2;
      w[i].pad_begin = auto_pad == "SAME_UPPER" ? small : total - small;
      w[i].pad_end = total - w[i].pad_begin;
    } else if (auto_pad != "NOTSET") {
      bad_node(node, "unknown auto_pad '" + auto_pad + "'");
    }
  }
  return w;
}

std::int64_t output_extent(const NodeProto& node, std::int64_t in, const Window& w, bool ceil_mode) {
  const std::int64_t extent = w.dilation * (w.kernel - 1) + 1;
  const std::int64_t span = in + w.pad_begin + w.pad_end - extent;
  if (span < 0) bad_node(node, "kernel larger than padded input");
  std::int64_t out = ceil_mode ? (span + w.stride - 1) / w.stride + 1 : span / w.stride + 1;
  // The last window has to start inside the input or the leading padding.
  if (ceil_mode && (out - 1) * w.stride >= in + w.pad_begin) --out;
  return out;
}

Tensor conv(const NodeProto& node, const std::vector<const Tensor*>& inputs) {
  const Tensor& x = float_arg(node, inputs, 0);
  const Tensor& weight = float_arg(node, inputs, 1);
  const Tensor* bias = optional_arg(inputs, 2);
  if (x.shape.size() != 4 || weight.shape.size() != 4) {
    bad_node(node, "only 2-D convolution over NCHW input is supported");
  }
  const std::int64_t group = attr_int(node, "group", 1);
  const std::int64_t n_batch = x.shape[0], channels = x.shape[1], h = x.shape[2], wd = x.shape[3];
  const std::int64_t filters = weight.shape[0], group_channels = weight.shape[1];
  if (group <= 0 || channels != group_channels * group || filters % group != 0) {
    bad_node(node, "channel/group mismatch");
  }
  if (bias && (bias->is_int || bias->data.size() != static_cast<std::size_t>(filters))) {
    bad_node(node, "bias must have one value per filter");
  }
  const Shape kernel = attr_ints(node, "kernel_shape").value_or(Shape{weight.shape[2], weight.shape[3]});
  if (kernel != Shape{weight.shape[2], weight.shape[3]}) bad_node(node, "kernel_shape disagrees with weights");
  const auto win = spatial_windows(node, x.shape, kernel);
  const std::int64_t oh = output_extent(node, h, win[0], false);
  const std::int64_t ow = output_extent(node, wd, win[1], false);

  Tensor out = Tensor::floats({n_batch, filters, oh, ow});
  const std::int64_t filters_per_group = filters / group;
  const std::int64_t kh = kernel[0], kw = kernel[1];
  for (std::int64_t n = 0; n < n_batch; ++n) {
    for (std::int64_t m = 0; m < filters; ++m) {
      const std::int64_t g = m / filters_per_group;
      const float b = bias ? bias->data[static_cast<std::size_t>(m)] : 0.0F;
      for (std::int64_t oy = 0; oy < oh; ++oy) {
        for (std::int64_t ox = 0; ox < ow; ++ox) {
          double acc = b;
          for (std::int64_t c = 0; c < group_channels; ++c) {
            const std::int64_t ic = g * group_channels + c;
            const float* xplane = &x.data[static_cast<std::size_t>(((n * channels + ic) * h) * wd)];
            const float* wk = &weight.data[static_cast<std::size_t>(((m * group_channels + c) * kh) * kw)];
            for (std::int64_t ky = 0; ky < kh; ++ky) {
              const std::int64_t iy = oy * win[0].stride - win[0].pad_begin + ky * win[0].dilation;
              if (iy < 0 || iy >= h) continue;
              for (std::int64_t kx = 0; kx < kw; ++kx) {
                const std::int64_t ix = ox * win[1].stride - win[1].pad_begin + kx * win[1].dilation;
                if (ix < 0 || ix >= wd) continue;
                acc += static_cast<double>(xplane[iy * wd + ix]) * wk[ky * kw + kx];
              }
            }
          }
          out.data[static_cast<std::size_t>(((n * filters + m) * oh + oy) * ow + ox)] =
              static_cast<float>(acc);
        }
      }
    }
  }
  return out;
}

Tensor pool(const NodeProto& node, const std::vector<const Tensor*>& inputs, bool is_max) {
  const Tensor& x = float_arg(node, inputs, 0);
  if (x.shape.size() != 4) bad_node(node, "only 2-D pooling over NCHW input is supported");
  const auto kernel = attr_ints(node, "kernel_shape");
  if (!kernel || kernel->size() != 2) bad_node(node, "kernel_shape must list 2 extents");
  const auto win = spatial_windows(node, x.shape, *kernel);
  const bool ceil_mode = attr_int(node, "ceil_mode", 0) != 0;
  const bool include_pad = attr_int(node, "count_include_pad", 0) != 0;
  const std::int64_t n_batch = x.shape[0], channels = x.shape[1], h = x.shape[2], wd = x.shape[3];
  const std::int64_t oh = output_extent(node, h, win[0], ceil_mode);
  const std::int64_t ow = output_extent(node, wd, win[1], ceil_mode);

  Tensor out = Tensor::floats({n_batch, channels, oh, ow});
  for (std::int64_t plane = 0; plane < n_batch * channels; ++plane) {
    const float* xp = &x.data[static_cast<std::size_t>(plane * h * wd)];
    for (std::int64_t oy = 0; oy < oh; ++oy) {
      for (std::int64_t ox = 0; ox < ow; ++ox) {
        double acc = is_max ? -std::numeric_limits<double>::infinity() : 0.0;
        std::int64_t valid = 0;
        std::int64_t padded = 0;
        for (std::int64_t ky = 0; ky < win[0].kernel; ++ky) {
          const std::int64_t iy = oy * win[0].stride - win[0].pad_begin + ky * win[0].dilation;
          const bool y_in_pad = iy >= -win[0].pad_begin && iy < h + win[0].pad_end;
          for (std::int64_t kx = 0; kx < win[1].kernel; ++kx) {
            const std::int64_t ix = ox * win[1].stride - win[1].pad_begin + kx * win[1].dilation;
            if (y_in_pad && ix >= -win[1].pad_begin && ix < wd + win[1].pad_end) ++padded;
            if (iy < 0 || iy >= h || ix < 0 || ix >= wd) continue;
            const double v = xp[iy * wd + ix];
            acc = is_max ? std::max(acc, v) : acc + v;
            ++valid;
          }
        }
        if (!is_max) {
          const std::int64_t divisor = include_pad ? padded : valid;
          acc = divisor > 0 ? acc / static_cast<double>(divisor) : 0.0;
        }
        out.data[static_cast<std::size_t>((plane * oh + oy) * ow + ox)] = static_cast<float>(acc);
      }
    }
  }
  return out;
}

Tensor global_pool(const NodeProto& node, const Tensor& x, bool is_max) {
  if (x.is_int || x.shape.size() < 3) bad_node(node, "expected a float tensor of rank >= 3");
  const auto outer = static_cast<std::size_t>(x.shape[0] * x.shape[1]);
  const std::size_t inner = x.data.size() / std::max<std::size_t>(outer, 1);
  Shape shape = x.shape;
  std::fill(shape.begin() + 2, shape.end(), 1);
  Tensor out = Tensor::floats(shape);
  for (std::size_t p = 0; p < outer; ++p) {
    const float* first = x.data.data() + p * inner;
    if (is_max) {
      out.data[p] = *std::max_element(first, first + inner);
    } else {
      double sum = 0.0;
      for (std::size_t i = 0; i < inner; ++i) sum += first[i];
      out.data[p] = static_cast<float>(sum / static_cast<double>(inner));
    }
  }
  return out;
}

Tensor batch_norm(const NodeProto& node, const std::vector<const Tensor*>& inputs) {
  const Tensor& x = float_arg(node, inputs, 0);
  const Tensor& scale = float_arg(node, inputs, 1);
  const Tensor& shift = float_arg(node, inputs, 2);
  const Tensor& mean = float_arg(node, inputs, 3);
  const Tensor& var = float_arg(node, inputs, 4);
  if (x.shape.size() < 2) bad_node(node, "input rank must be >= 2");
  const auto channels = static_cast<std::size_t>(x.shape[1]);
  for (const Tensor* p : {&scale, &shift, &mean, &var}) {
    if (p->data.size() != channels) bad_node(node, "parameter length differs from channel count");
  }
  const double eps = attr_float(node, "epsilon", 1e-5F);
  const std::size_t inner = numel(Shape(x.shape.begin() + 2, x.shape.end()));
  Tensor out = Tensor::floats(x.shape, std::vector<float>(x.data.size()));
  for (std::size_t i = 0; i < x.data.size(); ++i) {
    const std::size_t c = (i / inner) % channels;
    const double inv = 1.0 / std::sqrt(static_cast<double>(var.data[c]) + eps);
    out.data[i] = static_cast<float>((x.data[i] - mean.data[c]) * inv * scale.data[c] + shift.data[c]);
  }
  return out;
}

// ---- linear algebra ----------------------------------------------------

Tensor gemm(const NodeProto& node, const std::vector<const Tensor*>& inputs) {
  const Tensor& a = float_arg(node, inputs, 0);
  const Tensor& b = float_arg(node, inputs, 1);
  const Tensor* c = optional_arg(inputs, 2);
  if (a.shape.size() != 2 || b.shape.size() != 2) bad_node(node, "operands must be 2-D");
  const bool ta = attr_int(node, "transA", 0) != 0;
  const bool tb = attr_int(node, "transB", 0) != 0;
  const double alpha = attr_float(node, "alpha", 1.0F);
  const double beta = attr_float(node, "beta", 1.0F);
  const std::int64_t m = ta ? a.shape[1] : a.shape[0];
  const std::int64_t k = ta ? a.shape[0] : a.shape[1];
  const std::int64_t kb = tb ? b.shape[1] : b.shape[0];
  const std::int64_t n = tb ? b.shape[0] : b.shape[1];
  if (k != kb) bad_node(node, "inner dimensions differ");

  std::optional<std::vector<float>> bias;
  if (c) {
    if (c->is_int) bad_node(node, "C must be float");
    const Shape target{m, n};
    broadcast_shape(node, c->shape, target);
    bias = broadcast_apply(target, c->shape, c->data, target, std::vector<float>(numel(target)),
                           [](float x, float) { return x; });
  }
  Tensor out = Tensor::floats({m, n});
  for (std::int64_t i = 0; i < m; ++i) {
    for (std::int64_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::int64_t p = 0; p < k; ++p) {
        const float av = ta ? a.data[static_cast<std::size_t>(p * m + i)] : a.data[static_cast<std::size_t>(i * k + p)];
        const float bv = tb ? b.data[static_cast<std::size_t>(j * k + p)] : b.data[static_cast<std::size_t>(p * n + j)];
        acc += static_cast<double>(av) * bv;
      }
      acc *= alpha;
      if (bias) acc += beta * (*bias)[static_cast<std::size_t>(i * n + j)];
      out.data[static_cast<std::size_t>(i * n + j)] = static_cast<float>(acc);
    }
  }
  return out;
}

Tensor matmul(const NodeProto& node, const Tensor& a, const Tensor& b) {
  if (a.is_int || b.is_int) bad_node(node, "operands must be float");
  if (a.shape.size() < 2 || b.shape.size() < 2) bad_node(node, "operands must be at least 2-D");
  const std::int64_t m = a.shape[a.shape.size() - 2];
  const std::int64_t k = a.shape.back();
  const std::int64_t n = b.shape.back();
  if (b.shape[b.shape.size() - 2] != k) bad_node(node, "inner dimensions differ");
  const std::size_t batches = a.data.size() / static_cast<std::size_t>(m * k);
  const bool shared_b = b.shape.size() == 2;
  if (!shared_b && (b.shape.size() != a.shape.size() ||
                    !std::equal(a.shape.begin(), a.shape.end() - 2, b.shape.begin()))) {
    bad_node(node, "batched operands must share leading dimensions");
  }
  Shape shape(a.shape.begin(), a.shape.end() - 1);
  shape.push_back(n);
  Tensor out = Tensor::floats(shape);
  for (std::size_t bt = 0; bt < batches; ++bt) {
    const float* ap = a.data.data() + bt * static_cast<std::size_t>(m * k);
    const float* bp = b.data.data() + (shared_b ? 0 : bt * static_cast<std::size_t>(k * n));
    float* op = out.data.data() + bt * static_cast<std::size_t>(m * n);
    for (std::int64_t i = 0; i < m; ++i) {
      for (std::int64_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::int64_t p = 0; p < k; ++p) acc += static_cast<double>(ap[i * k + p]) * bp[p * n + j];
        op[i * n + j] = static_cast<float>(acc);
      }
    }
  }
  return out;
}

// ---- shape manipulation --------------------------------------------------

Shape int_operand(const NodeProto& node, const Tensor& t) {
  if (!t.is_int) bad_node(node, "expected an integer tensor");
  return t.ints;
}

Tensor reshape(const NodeProto& node, const Tensor& x, const Tensor& target) {
  Shape shape = int_operand(node, target);
  const bool allow_zero = attr_int(node, "allowzero", 0) != 0;
  std::optional<std::size_t> infer;
  std::size_t known = 1;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (shape[i] == 0 && !allow_zero) {
      if (i >= x.shape.size()) bad_node(node, "0 refers past the input rank");
      shape[i] = x.shape[i];
    }
    if (shape[i] == -1) {
      if (infer) bad_node(node, "more than one -1 in target shape");
      infer = i;
    } else if (shape[i] < 0) {
      bad_node(node, "negative extent in target shape");
    } else {
      known *= static_cast<std::size_t>(shape[i]);
    }
  }
  const std::size_t total = x.numel();
  if (infer) {
    if (known == 0 || total % known != 0) bad_node(node, "cannot infer -1 extent");
    shape[*infer] = static_cast<std::int64_t>(total / known);
  }
  if (numel(shape) != total) bad_node(node, "target shape changes the element count");
  return with_shape(x, shape);
}

Tensor flatten(const NodeProto& node, const Tensor& x) {
  std::int64_t axis = attr_int(node, "axis", 1);
  const auto rank = static_cast<std::int64_t>(x.shape.size());
  if (axis < 0) axis += rank;
  if (axis < 0 || axis > rank) bad_node(node, "axis out of range");
  const auto split = x.shape.begin() + axis;
  const auto outer = static_cast<std::int64_t>(numel(Shape(x.shape.begin(), split)));
  const auto inner = static_cast<std::int64_t>(numel(Shape(split, x.shape.end())));
  return with_shape(x, {outer, inner});
}

Shape axes_operand(const NodeProto& node, const std::vector<const Tensor*>& inputs) {
  if (const Tensor* t = optional_arg(inputs, 1)) return int_operand(node, *t);
  return attr_ints(node, "axes").value_or(Shape{});
}

Tensor squeeze(const NodeProto& node, const std::vector<const Tensor*>& inputs) {
  const Tensor& x = arg(node, inputs, 0);
  std::set<std::int64_t> axes;
  for (auto a : axes_operand(node, inputs)) axes.insert(normalize_axis(node, a, x.shape.size()));
  Shape shape;
  for (std::size_t i = 0; i < x.shape.size(); ++i) {
    const bool drop = axes.empty() ? x.shape[i] == 1 : axes.contains(static_cast<std::int64_t>(i));
    if (drop && x.shape[i] != 1) bad_node(node, "cannot squeeze a non-unit axis");
    if (!drop) shape.push_back(x.shape[i]);
  }
  return with_shape(x, shape);
}

Tensor unsqueeze(const NodeProto& node, const std::vector<const Tensor*>& inputs) {
  const Tensor& x = arg(node, inputs, 0);
  const Shape raw = axes_operand(node, inputs);
  const std::size_t rank = x.shape.size() + raw.size();
  std::set<std::int64_t> axes;
  for (auto a : raw) axes.insert(normalize_axis(node, a, rank));
  Shape shape;
  std::size_t src = 0;
  for (std::size_t i = 0; i < rank; ++i) {
    shape.push_back(axes.contains(static_cast<std::int64_t>(i)) ? 1 : x.shape[src++]);
  }
  return with_shape(x, shape);
}

Tensor concat(const NodeProto& node, const std::vector<const Tensor*>& inputs) {
  const Tensor& first = arg(node, inputs, 0);
  const std::int64_t axis = normalize_axis(node, attr_int(node, "axis", 0), first.shape.size());
  Shape shape = first.shape;
  shape[static_cast<std::size_t>(axis)] = 0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const Tensor& t = arg(node, inputs, i);
    if (t.is_int != first.is_int || t.shape.size() != first.shape.size()) {
      bad_node(node, "inputs disagree in type or rank");
    }
    for (std::size_t d = 0; d < t.shape.size(); ++d) {
      if (d != static_cast<std::size_t>(axis) && t.shape[d] != first.shape[d]) {
        bad_node(node, "inputs disagree outside the concat axis");
      }
    }
    shape[static_cast<std::size_t>(axis)] += t.shape[static_cast<std::size_t>(axis)];
  }
  const std::size_t outer = numel(Shape(first.shape.begin(), first.shape.begin() + axis));
  Tensor out;
  out.shape = shape;
  out.is_int = first.is_int;
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      const Tensor& t = *inputs[i];
      const std::size_t chunk = t.size() / std::max<std::size_t>(outer, 1);
      if (t.is_int) {
        out.ints.insert(out.ints.end(), t.ints.begin() + static_cast<std::ptrdiff_t>(o * chunk),
                        t.ints.begin() + static_cast<std::ptrdiff_t>((o + 1) * chunk));
      } else {
        out.data.insert(out.data.end(), t.data.begin() + static_cast<std::ptrdiff_t>(o * chunk),
                        t.data.begin() + static_cast<std::ptrdiff_t>((o + 1) * chunk));
      }
    }
  }
  return out;
}

Tensor gather(const NodeProto& node, const Tensor& x, const Tensor& indices) {
  const Shape idx = int_operand(node, indices);
  const std::int64_t axis = normalize_axis(node, attr_int(node, "axis", 0), x.shape.size());
  const std::int64_t extent = x.shape[static_cast<std::size_t>(axis)];
  const std::size_t outer = numel(Shape(x.shape.begin(), x.shape.begin() + axis));
  const std::size_t inner = numel(Shape(x.shape.begin() + axis + 1, x.shape.end()));
  Shape shape(x.shape.begin(), x.shape.begin() + axis);
  shape.insert(shape.end(), indices.shape.begin(), indices.shape.end());
  shape.insert(shape.end(), x.shape.begin() + axis + 1, x.shape.end());
  Tensor out;
  out.shape = shape;
  out.is_int = x.is_int;
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::int64_t raw : idx) {
      const std::int64_t i = raw < 0 ? raw + extent : raw;
      if (i < 0 || i >= extent) bad_node(node, "index out of range");
      const std::size_t start = (o * static_cast<std::size_t>(extent) + static_cast<std::size_t>(i)) * inner;
      if (x.is_int) {
        out.ints.insert(out.ints.end(), x.ints.begin() + static_cast<std::ptrdiff_t>(start),
                        x.ints.begin() + static_cast<std::ptrdiff_t>(start + inner));
      } else {
        out.data.insert(out.data.end(), x.data.begin() + static_cast<std::ptrdiff_t>(start),
                        x.data.begin() + static_cast<std::ptrdiff_t>(start + inner));
      }
    }
  }
  return out;
}

Tensor shape_op(const NodeProto& node, const Tensor& x) {
  const auto rank = static_cast<std::int64_t>(x.shape.size());
  std::int64_t start = attr_int(node, "start", 0);
  std::int64_t end = attr_int(node, "end", rank);
  if (start < 0) start += rank;
  if (end < 0) end += rank;
  start = std::clamp<std::int64_t>(start, 0, rank);
  end = std::clamp<std::int64_t>(end, start, rank);
  Shape dims(x.shape.begin() + start, x.shape.begin() + end);
  return Tensor::int64s({static_cast<std::int64_t>(dims.size())}, dims);
}

Tensor reduce_mean(const NodeProto& node, const std::vector<const Tensor*>& inputs) {
  const Tensor& x = float_arg(node, inputs, 0);
  const bool keep = attr_int(node, "keepdims", 1) != 0;
  std::set<std::int64_t> axes;
  for (auto a : axes_operand(node, inputs)) axes.insert(normalize_axis(node, a, x.shape.size()));
  if (axes.empty()) {
    if (attr_int(node, "noop_with_empty_axes", 0) != 0) return x;
    for (std::size_t i = 0; i < x.shape.size(); ++i) axes.insert(static_cast<std::int64_t>(i));
  }
  Shape kept_shape = x.shape;
  for (auto a : axes) kept_shape[static_cast<std::size_t>(a)] = 1;
  std::vector<double> sums(numel(kept_shape), 0.0);
  const auto strides = broadcast_strides(kept_shape, x.shape);
  std::vector<std::int64_t> idx(x.shape.size(), 0);
  for (std::size_t k = 0; k < x.data.size(); ++k) {
    std::size_t o = 0;
    for (std::size_t d = 0; d < idx.size(); ++d) o += static_cast<std::size_t>(idx[d]) * strides[d];
    sums[o] += x.data[k];
    for (std::size_t d = idx.size(); d-- > 0;) {
      if (++idx[d] < x.shape[d]) break;
      idx[d] = 0;
    }
  }
  const double count = static_cast<double>(x.data.size()) / static_cast<double>(sums.size());
  Shape shape;
  for (std::size_t i = 0; i < x.shape.size(); ++i) {
    if (!axes.contains(static_cast<std::int64_t>(i))) {
      shape.push_back(x.shape[i]);
    } else if (keep) {
      shape.push_back(1);
    }
  }
  std::vector<float> data(sums.size());
  for (std::size_t i = 0; i < sums.size(); ++i) data[i] = static_cast<float>(sums[i] / count);
  return Tensor::floats(shape, std::move(data));
}

Tensor constant(const NodeProto& node) {
  if (const auto* a = find_attr(node, "value")) return from_proto(a->t());
  if (const auto* a = find_attr(node, "value_float")) return Tensor::floats({}, {a->f()});
  if (const auto* a = find_attr(node, "value_floats")) {
    return Tensor::floats({a->floats_size()}, std::vector<float>(a->floats().begin(), a->floats().end()));
  }
  if (const auto* a = find_attr(node, "value_int")) return Tensor::int64s({}, {a->i()});
  if (const auto* a = find_attr(node, "value_ints")) {
    return Tensor::int64s({a->ints_size()}, Shape(a->ints().begin(), a->ints().end()));
  }
  bad_node(node, "no supported value attribute");
}

float scalar_or(const Tensor* t, float fallback) {
  if (!t || t->data.empty()) return fallback;
  return t->data.front();
}

using Kernel = std::function<std::vector<Tensor>(const NodeProto&, const std::vector<const Tensor*>&)>;

const std::unordered_map<std::string, Kernel>& kernels() {
  static const std::unordered_map<std::string, Kernel> table = [] {
    std::unordered_map<std::string, Kernel> k;
    auto single = [](auto fn) -> Kernel {
      return [fn](const NodeProto& n, const std::vector<const Tensor*>& in) {
        return std::vector<Tensor>{fn(n, in)};
      };
    };
    k["Conv"] = single(conv);
    k["MaxPool"] = single([](const NodeProto& n, const auto& in) { return pool(n, in, true); });
    k["AveragePool"] = single([](const NodeProto& n, const auto& in) { return pool(n, in, false); });
    k["GlobalAveragePool"] = single([](const NodeProto& n, const auto& in) {
      return global_pool(n, arg(n, in, 0), false);
    });
    k["GlobalMaxPool"] = single([](const NodeProto& n, const auto& in) {
      return global_pool(n, arg(n, in, 0), true);
    });
    k["BatchNormalization"] = single(batch_norm);
    k["Gemm"] = single(gemm);
    k["MatMul"] = single([](const NodeProto& n, const auto& in) {
      return matmul(n, arg(n, in, 0), arg(n, in, 1));
    });
    for (const auto& [name, op] : {std::pair{"Add", '+'}, std::pair{"Sub", '-'},
                                   std::pair{"Mul", '*'}, std::pair{"Div", '/'}}) {
      k[name] = single([op = op](const NodeProto& n, const auto& in) {
        return binary(n, arg(n, in, 0), arg(n, in, 1), op);
      });
    }
    k["Relu"] = single([](const NodeProto& n, const auto& in) {
      return unary(float_arg(n, in, 0), [](float v) { return v > 0.0F ? v : 0.0F; });
    });
    k["LeakyRelu"] = single([](const NodeProto& n, const auto& in) {
      const float alpha = attr_float(n, "alpha", 0.01F);
      return unary(float_arg(n, in, 0), [alpha](float v) { return v >= 0.0F ? v : alpha * v; });
    });
    k["Sigmoid"] = single([](const NodeProto& n, const auto& in) {
      return unary(float_arg(n, in, 0), [](float v) {
        return static_cast<float>(1.0 / (1.0 + std::exp(-static_cast<double>(v))));
      });
    });
    k["Tanh"] = single([](const NodeProto& n, const auto& in) {
      return unary(float_arg(n, in, 0), [](float v) { return std::tanh(v); });
    });
    k["HardSigmoid"] = single([](const NodeProto& n, const auto& in) {
      const float alpha = attr_float(n, "alpha", 0.2F);
      const float beta = attr_float(n, "beta", 0.5F);
      return unary(float_arg(n, in, 0),
                   [=](float v) { return std::clamp(alpha * v + beta, 0.0F, 1.0F); });
    });
    k["HardSwish"] = single([](const NodeProto& n, const auto& in) {
      return unary(float_arg(n, in, 0), [](float v) {
        return v * std::clamp(v / 6.0F + 0.5F, 0.0F, 1.0F);
      });
    });
    k["Clip"] = single([](const NodeProto& n, const auto& in) {
      const float lo = find_attr(n, "min") ? attr_float(n, "min", 0.0F)
                                           : scalar_or(optional_arg(in, 1), -std::numeric_limits<float>::max());
      const float hi = find_attr(n, "max") ? attr_float(n, "max", 0.0F)
                                           : scalar_or(optional_arg(in, 2), std::numeric_limits<float>::max());
      return unary(float_arg(n, in, 0), [=](float v) { return std::clamp(v, lo, hi); });
    });
    k["Identity"] = single([](const NodeProto& n, const auto& in) { return arg(n, in, 0); });
    k["Dropout"] = single([](const NodeProto& n, const auto& in) { return arg(n, in, 0); });
    k["Flatten"] = single([](const NodeProto& n, const auto& in) { return flatten(n, arg(n, in, 0)); });
    k["Reshape"] = single([](const NodeProto& n, const auto& in) {
      return reshape(n, arg(n, in, 0), arg(n, in, 1));
    });
    k["Squeeze"] = single(squeeze);
    k["Unsqueeze"] = single(unsqueeze);
    k["Concat"] = single(concat);
    k["Gather"] = single([](const NodeProto& n, const auto& in) {
      return gather(n, arg(n, in, 0), arg(n, in, 1));
    });
    k["Shape"] = single([](const NodeProto& n, const auto& in) { return shape_op(n, arg(n, in, 0)); });
    k["ReduceMean"] = single(reduce_mean);
    k["Constant"] = single([](const NodeProto& n, const auto&) { return constant(n); });
    return k;
  }();
  return table;
}

}  // namespace

bool is_supported_op(const std::string& op_type) { return kernels().contains(op_type); }

std::vector<Tensor> run_node(const NodeProto& node, const std::vector<const Tensor*>& inputs) {
  auto it = kernels().find(node.op_type());
  if (it == kernels().end()) {
    throw FormatError("unsupported ONNX operator '" + node.op_type() + "'");
  }
  return it->second(node, inputs);
}

}  // namespace wysiwim::embed::onnx
