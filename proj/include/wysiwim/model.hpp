#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "wysiwim/preprocess.hpp"

namespace wysiwim::embed {

enum class Backend {
  graph_file,          // ONNX graph evaluated by the bundled interpreter
  builtin_patch_mean,  // 8x8 patch means per channel, 192 dims
};

std::string_view to_string(Backend backend) noexcept;

inline constexpr int kPatchGrid = 8;
inline constexpr int kPatchMeanDim = 3 * kPatchGrid * kPatchGrid;

// Binds a feature extractor to its input geometry and normalization. The
// layout is always channel-major.
struct ModelDescriptor {
  Backend backend = Backend::builtin_patch_mean;
  std::optional<std::filesystem::path> graph_path;
  int input_width = 224;
  int input_height = 224;
  preprocess::ChannelTriple mean{0.5, 0.5, 0.5};
  preprocess::ChannelTriple std{0.5, 0.5, 0.5};
  int embedding_dim = kPatchMeanDim;

  // Throws ConfigError / ShapeMismatchError on a violated invariant.
  void validate() const;
};

// Parses the descriptor JSON; a relative graph_path is resolved against
// base_dir. Throws FormatError for malformed JSON or fields.
ModelDescriptor parse_descriptor(std::string_view json_text,
                                 const std::filesystem::path& base_dir = {});
// Throws IoError when the file is missing.
ModelDescriptor load_descriptor(const std::filesystem::path& path);

// Maps a batch of validated tensors to one embedding per tensor.
class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;
  virtual std::vector<std::vector<double>> run(std::span<const preprocess::InputTensor> batch) const = 0;
  // Batch size the backend insists on, if any.
  virtual std::optional<int> fixed_batch() const { return std::nullopt; }
};

// Brute per-patch averaging; input sides must be divisible by 8.
class PatchMeanExtractor final : public FeatureExtractor {
 public:
  std::vector<std::vector<double>> run(std::span<const preprocess::InputTensor> batch) const override;
  static std::vector<double> embed_one(const preprocess::InputTensor& tensor);
};

inline constexpr int kDefaultBatchSize = 16;

// Read-only after construction and shareable between threads.
class EmbeddingModel {
 public:
  EmbeddingModel(ModelDescriptor descriptor, std::unique_ptr<const FeatureExtractor> extractor,
                 int batch_size = kDefaultBatchSize);

  const ModelDescriptor& descriptor() const noexcept { return descriptor_; }
  int batch_size() const noexcept { return batch_size_; }

  // Throws ShapeMismatchError naming expected and actual dimensions.
  std::vector<double> embed(const preprocess::InputTensor& tensor) const;

  // Runs in fixed-size batches; the last batch is zero-padded and the
  // padding rows dropped, so results do not depend on batch size.
  std::vector<std::vector<double>> embed_batch(std::span<const preprocess::InputTensor> tensors) const;

 private:
  void check_tensor(const preprocess::InputTensor& tensor) const;

  ModelDescriptor descriptor_;
  std::unique_ptr<const FeatureExtractor> extractor_;
  int batch_size_;
};

EmbeddingModel make_model(ModelDescriptor descriptor, int batch_size = kDefaultBatchSize);

// Reads the descriptor and, for graph-file, the ONNX graph, checking that
// the graph has one (N, 3, H, W) input and one (N, D) output matching the
// descriptor. Missing files raise IoError, parse failures FormatError and
// disagreeing shapes ShapeMismatchError.
EmbeddingModel load_model(const std::filesystem::path& descriptor_path,
                          int batch_size = kDefaultBatchSize);

}  // namespace wysiwim::embed
