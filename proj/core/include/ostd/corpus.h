#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace ostd {

using TokenId = std::uint32_t;

// One subset's flattened token stream: doc_1 EOS doc_2 EOS ... doc_k EOS.
// Immutable after construction.
class TokenCorpus {
 public:
  TokenCorpus() = default;

  // Validates every invariant (offsets, EOS placement, id range) and throws
  // DataError on violation.
  TokenCorpus(std::vector<TokenId> tokens, std::vector<std::uint64_t> doc_offsets,
              std::string subset_name, std::uint32_t vocab_size, TokenId eos_id);

  // Rebuilds doc_offsets from EOS positions. The stream must end in EOS.
  static TokenCorpus from_stream(std::vector<TokenId> tokens, std::string subset_name,
                                 std::uint32_t vocab_size, TokenId eos_id);

  std::span<const TokenId> tokens() const { return tokens_; }
  std::span<const std::uint64_t> doc_offsets() const { return doc_offsets_; }
  const std::string& subset_name() const { return subset_name_; }
  std::uint32_t vocab_size() const { return vocab_size_; }
  TokenId eos_id() const { return eos_id_; }
  std::uint64_t size() const { return tokens_.size(); }
  std::size_t num_documents() const { return doc_offsets_.size(); }

  // Body of document i, without its trailing EOS.
  std::span<const TokenId> document(std::size_t i) const;

 private:
  std::vector<TokenId> tokens_;
  std::vector<std::uint64_t> doc_offsets_;
  std::string subset_name_;
  std::uint32_t vocab_size_ = 1;
  TokenId eos_id_ = 0;
};

// Concatenates documents with an EOS after every document, the last included.
// A document containing eos_id, or any id >= vocab_size, is rejected.
TokenCorpus flatten_corpus(std::span<const std::vector<TokenId>> documents, TokenId eos_id,
                           std::string subset_name, std::uint32_t vocab_size);

// Inverse of flatten_corpus.
std::vector<std::vector<TokenId>> split_documents(const TokenCorpus& corpus);

// Pre-tokenized token file: "OSTDTOK1", u32 version, u32 token_width, u64
// count, count x u32, all little-endian.
inline constexpr char kTokenFileMagic[8] = {'O', 'S', 'T', 'D', 'T', 'O', 'K', '1'};
inline constexpr std::uint32_t kTokenFileVersion = 1;

void write_token_file(const std::filesystem::path& path, std::span<const TokenId> tokens);
std::vector<TokenId> read_token_file(const std::filesystem::path& path);

// One line of the JSON-lines document manifest that accompanies a token
// file: {"length": L, "subset": "name"}. Documents are contiguous in file
// order; "subset" is optional.
struct DocumentSpan {
  std::uint64_t length = 0;
  std::string subset;
};

std::vector<DocumentSpan> read_document_manifest(const std::filesystem::path& path);
void write_document_manifest(const std::filesystem::path& path,
                             std::span<const DocumentSpan> spans);

// One line of text ingestion input: {"text": ..., "subset": ...}.
struct TextDocument {
  std::string text;
  std::string subset;
};

std::vector<TextDocument> read_text_documents(const std::filesystem::path& path);

}  // namespace ostd
