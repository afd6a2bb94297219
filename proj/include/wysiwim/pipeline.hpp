#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "wysiwim/cache.hpp"
#include "wysiwim/corpus.hpp"
#include "wysiwim/model.hpp"
#include "wysiwim/render.hpp"

namespace wysiwim::embed {

struct ItemFailure {
  std::string id;
  std::string message;
};

struct CorpusEmbedding {
  std::vector<EmbeddingVector> vectors;  // sorted by id
  std::vector<ItemFailure> failures;     // sorted by id
};

// Resizes to the descriptor's input size when needed, then normalizes.
preprocess::InputTensor prepare_input(const RasterImage& image, const ModelDescriptor& descriptor);

// render -> prepare_input -> embed for one source text.
std::vector<double> embed_source(const EmbeddingModel& model, std::string_view source,
                                 const render::LanguageProfile& profile,
                                 const render::RenderConfig& config);

std::string read_text_file(const std::filesystem::path& path);

// Embeds every manifest entry. Unreadable or undecodable snippets become
// failures and the rest of the batch continues. Output is identical for any
// worker count.
CorpusEmbedding embed_corpus(const EmbeddingModel& model, const data::CorpusManifest& manifest,
                             const render::ProfileRegistry& profiles,
                             const render::RenderConfig& config, int workers = 1);

}  // namespace wysiwim::embed
