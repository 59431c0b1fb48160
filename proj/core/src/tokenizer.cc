#include "ostd/tokenizer.h"

#include <fstream>
#include <nlohmann/json.hpp>

#include "ostd/error.h"

namespace ostd {
namespace {

bool is_word_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_punct_piece(std::string_view piece) {
  return piece.size() == 1 && !is_word_byte(static_cast<unsigned char>(piece[0]));
}

bool glues_right(std::string_view piece) {
  return piece.size() == 1 && std::string_view("([{'-/$#").find(piece[0]) != std::string_view::npos;
}

// Opening brackets and currency signs keep the space in front of them.
bool opens(std::string_view piece) {
  return piece.size() == 1 && std::string_view("([{$#").find(piece[0]) != std::string_view::npos;
}

bool valid_utf8(std::string_view text) {
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    std::size_t extra = 0;
    if (c < 0x80) {
      extra = 0;
    } else if ((c & 0xe0) == 0xc0 && c >= 0xc2) {
      extra = 1;
    } else if ((c & 0xf0) == 0xe0) {
      extra = 2;
    } else if ((c & 0xf8) == 0xf0 && c <= 0xf4) {
      extra = 3;
    } else {
      return false;
    }
    if (extra > 0 && i + extra >= text.size()) return false;
    for (std::size_t k = 1; k <= extra; ++k) {
      if ((static_cast<unsigned char>(text[i + k]) & 0xc0) != 0x80) return false;
    }
    i += extra + 1;
  }
  return true;
}

}  // namespace

std::string Tokenizer::decode(std::span<const TokenId> ids) const {
  std::vector<std::string> pieces;
  pieces.reserve(ids.size());
  for (TokenId id : ids) pieces.push_back(decode_token(id));
  return join_surface(pieces);
}

std::vector<std::string_view> split_surface(std::string_view text) {
  std::vector<std::string_view> pieces;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (is_space(c)) {
      ++i;
    } else if (is_word_byte(c)) {
      std::size_t j = i + 1;
      while (j < text.size() && is_word_byte(static_cast<unsigned char>(text[j]))) ++j;
      pieces.push_back(text.substr(i, j - i));
      i = j;
    } else {
      pieces.push_back(text.substr(i, 1));
      ++i;
    }
  }
  return pieces;
}

std::string join_surface(std::span<const std::string> pieces) {
  std::string out;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    if (i > 0 && (!is_punct_piece(pieces[i]) || opens(pieces[i])) && !glues_right(pieces[i - 1])) out += ' ';
    out += pieces[i];
  }
  return out;
}

WordTokenizer::WordTokenizer() {
  intern(kEosText);
  intern(kUnkText);
}

WordTokenizer WordTokenizer::from_vocabulary(std::vector<std::string> surfaces) {
  if (surfaces.empty()) throw DataError("vocabulary must contain the EOS entry");
  WordTokenizer tok;
  tok.surfaces_.clear();
  tok.ids_.clear();
  for (const auto& s : surfaces) {
    if (tok.ids_.count(s)) throw DataError("duplicate vocabulary entry: '" + s + "'");
    tok.intern(s);
  }
  return tok;
}

WordTokenizer WordTokenizer::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open vocabulary: " + path.string());
  try {
    const auto j = nlohmann::json::parse(in);
    if (j.at("format").get<std::string>() != "ostd-vocab-v1") {
      throw DataError("unsupported vocabulary format in " + path.string());
    }
    auto tok = from_vocabulary(j.at("tokens").get<std::vector<std::string>>());
    if (j.at("eos_id").get<TokenId>() != kEosId) {
      throw DataError("vocabulary eos_id must be 0: " + path.string());
    }
    return tok;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed vocabulary " + path.string() + ": " + e.what());
  }
}

void WordTokenizer::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  nlohmann::json j{{"format", "ostd-vocab-v1"}, {"eos_id", kEosId}, {"tokens", surfaces_}};
  out << j.dump(1) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

TokenId WordTokenizer::intern(std::string_view surface) {
  auto [it, inserted] = ids_.try_emplace(std::string(surface), static_cast<TokenId>(surfaces_.size()));
  if (inserted) surfaces_.emplace_back(surface);
  return it->second;
}

std::optional<TokenId> WordTokenizer::lookup(std::string_view surface) const {
  auto it = ids_.find(std::string(surface));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

std::vector<TokenId> WordTokenizer::encode(std::string_view text) {
  if (!valid_utf8(text)) throw InvalidArgument("text is not valid UTF-8");
  std::vector<TokenId> ids;
  for (auto piece : split_surface(text)) {
    if (auto id = lookup(piece)) {
      ids.push_back(*id);
    } else if (!frozen_) {
      ids.push_back(intern(piece));
    } else if (unknown_ == Unknown::kMapToUnk && unk_id()) {
      ids.push_back(*unk_id());
    } else {
      throw UnknownTokenError(std::string(piece));
    }
  }
  return ids;
}

std::optional<std::vector<TokenId>> WordTokenizer::try_encode(std::string_view text) const {
  if (!valid_utf8(text)) return std::nullopt;
  std::vector<TokenId> ids;
  for (auto piece : split_surface(text)) {
    auto id = lookup(piece);
    if (!id) return std::nullopt;
    ids.push_back(*id);
  }
  return ids;
}

std::vector<TokenId> WordTokenizer::encode_known(std::string_view text) const {
  if (!valid_utf8(text)) throw InvalidArgument("text is not valid UTF-8");
  const auto unk = unk_id();
  std::vector<TokenId> ids;
  for (auto piece : split_surface(text)) {
    if (auto id = lookup(piece)) {
      ids.push_back(*id);
    } else if (unk) {
      ids.push_back(*unk);
    } else {
      throw UnknownTokenError(std::string(piece));
    }
  }
  return ids;
}

std::string WordTokenizer::decode_token(TokenId id) const {
  if (id >= surfaces_.size()) {
    throw InvalidArgument("token id " + std::to_string(id) + " outside vocabulary");
  }
  return surfaces_[id];
}

}  // namespace ostd
