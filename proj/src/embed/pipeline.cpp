#include "wysiwim/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iterator>
#include <optional>
#include <thread>

#include "wysiwim/error.hpp"

namespace wysiwim::embed {

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot read " + path.string());
  }
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) {
    throw IoError("failed reading " + path.string());
  }
  return text;
}

preprocess::InputTensor prepare_input(const RasterImage& image, const ModelDescriptor& descriptor) {
  if (image.width() == descriptor.input_width && image.height() == descriptor.input_height) {
    return preprocess::normalize(image, descriptor.mean, descriptor.std);
  }
  return preprocess::normalize(
      preprocess::resize_bilinear(image, descriptor.input_width, descriptor.input_height),
      descriptor.mean, descriptor.std);
}

std::vector<double> embed_source(const EmbeddingModel& model, std::string_view source,
                                 const render::LanguageProfile& profile,
                                 const render::RenderConfig& config) {
  const auto image = render::render(source, profile, config);
  return model.embed(prepare_input(image, model.descriptor()));
}

CorpusEmbedding embed_corpus(const EmbeddingModel& model, const data::CorpusManifest& manifest,
                             const render::ProfileRegistry& profiles,
                             const render::RenderConfig& config, int workers) {
  config.validate();
  const std::size_t n = manifest.size();
  std::vector<std::optional<std::vector<float>>> results(n);
  std::vector<std::optional<std::string>> errors(n);

  const auto chunk = static_cast<std::size_t>(model.batch_size());
  const std::size_t chunks = (n + chunk - 1) / chunk;
  std::atomic<std::size_t> next{0};

  auto process_chunk = [&](std::size_t c) {
    const std::size_t begin = c * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    std::vector<preprocess::InputTensor> tensors;
    std::vector<std::size_t> slots;
    for (std::size_t i = begin; i < end; ++i) {
      const auto& entry = manifest.entries[i];
      try {
        const auto source = read_text_file(entry.path);
        const auto image = render::render(source, profiles.get(entry.language), config);
        tensors.push_back(prepare_input(image, model.descriptor()));
        slots.push_back(i);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
    auto store = [&](std::size_t slot, const std::vector<double>& row) {
      results[slot] = std::vector<float>(row.begin(), row.end());
    };
    try {
      const auto rows = model.embed_batch(tensors);
      for (std::size_t k = 0; k < slots.size(); ++k) store(slots[k], rows[k]);
    } catch (const std::exception&) {
      // Retry one by one so a bad item does not sink its batch-mates.
      for (std::size_t k = 0; k < slots.size(); ++k) {
        try {
          store(slots[k], model.embed(tensors[k]));
        } catch (const std::exception& e) {
          errors[slots[k]] = e.what();
        }
      }
    }
  };

  auto worker = [&] {
    for (std::size_t c = next.fetch_add(1); c < chunks; c = next.fetch_add(1)) {
      process_chunk(c);
    }
  };

  const auto threads = static_cast<std::size_t>(std::max(1, workers));
  if (threads == 1 || chunks <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < std::min(threads, chunks); ++t) pool.emplace_back(worker);
  }

  CorpusEmbedding out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& id = manifest.entries[i].id;
    if (results[i]) {
      out.vectors.push_back({id, std::move(*results[i])});
    } else {
      out.failures.push_back({id, errors[i].value_or("unknown failure")});
    }
  }
  auto by_id = [](const auto& a, const auto& b) { return a.id < b.id; };
  std::sort(out.vectors.begin(), out.vectors.end(), by_id);
  std::sort(out.failures.begin(), out.failures.end(), by_id);
  return out;
}

}  // namespace wysiwim::embed
