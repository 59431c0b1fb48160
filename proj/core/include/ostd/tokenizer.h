#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ostd/corpus.h"

namespace ostd {

class Tokenizer {
 public:
  virtual ~Tokenizer() = default;

  virtual std::vector<TokenId> encode(std::string_view text) = 0;
  // Lookup-only encoding; nullopt when any piece is outside the vocabulary.
  virtual std::optional<std::vector<TokenId>> try_encode(std::string_view text) const = 0;
  // Lookup-only encoding that maps unknown pieces to a placeholder id which
  // never occurs in an indexed corpus. Throws UnknownTokenError when the
  // tokenizer has no placeholder.
  virtual std::vector<TokenId> encode_known(std::string_view text) const = 0;
  // Throws InvalidArgument for ids outside the vocabulary.
  virtual std::string decode_token(TokenId id) const = 0;
  virtual std::uint32_t vocab_size() const = 0;
  virtual TokenId eos_id() const = 0;

  std::string decode(std::span<const TokenId> ids) const;
};

// Splits text into surface pieces: runs of word characters (ASCII
// alphanumerics and any byte >= 0x80) and single punctuation characters.
// Whitespace separates pieces and is dropped. Case is preserved.
std::vector<std::string_view> split_surface(std::string_view text);

// Joins pieces with single spaces, omitting the space before punctuation and
// after an opening bracket, quote, apostrophe, hyphen or slash. Inverts
// split_surface for conventionally spaced text.
std::string join_surface(std::span<const std::string> pieces);

// Built-in deterministic tokenizer: every distinct surface piece gets a
// stable id from a vocabulary table persisted as a JSON sidecar. Entry 0 is
// the EOS separator. A default-constructed tokenizer also reserves entry 1
// for "<unk>", which unknown pieces map to under Unknown::kMapToUnk.
class WordTokenizer final : public Tokenizer {
 public:
  static constexpr TokenId kEosId = 0;
  static constexpr std::string_view kEosText = "<|endoftext|>";
  static constexpr std::string_view kUnkText = "<unk>";

  enum class Unknown { kThrow, kMapToUnk };

  WordTokenizer();

  // surfaces[0] must be the EOS text; ids are positions in the table.
  static WordTokenizer from_vocabulary(std::vector<std::string> surfaces);
  static WordTokenizer load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  // A frozen tokenizer never adds entries.
  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }
  void set_unknown_policy(Unknown policy) { unknown_ = policy; }

  std::vector<TokenId> encode(std::string_view text) override;
  std::optional<std::vector<TokenId>> try_encode(std::string_view text) const override;
  std::vector<TokenId> encode_known(std::string_view text) const override;

  std::string decode_token(TokenId id) const override;
  std::uint32_t vocab_size() const override {
    return static_cast<std::uint32_t>(surfaces_.size());
  }
  TokenId eos_id() const override { return kEosId; }

  std::optional<TokenId> lookup(std::string_view surface) const;
  std::optional<TokenId> unk_id() const { return lookup(kUnkText); }

 private:
  TokenId intern(std::string_view surface);

  std::vector<std::string> surfaces_;
  std::unordered_map<std::string, TokenId> ids_;
  bool frozen_ = false;
  Unknown unknown_ = Unknown::kThrow;
};

}  // namespace ostd
