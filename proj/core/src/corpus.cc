#include "ostd/corpus.h"

#include <fstream>
#include <nlohmann/json.hpp>

#include "binary_io.h"
#include "ostd/error.h"

namespace ostd {

const char* to_string(CorruptKind kind) {
  switch (kind) {
    case CorruptKind::kBadMagic: return "bad magic";
    case CorruptKind::kVersionMismatch: return "version mismatch";
    case CorruptKind::kTruncated: return "truncated";
    case CorruptKind::kChecksumMismatch: return "checksum mismatch";
    case CorruptKind::kMalformed: return "malformed";
  }
  return "unknown";
}

namespace internal {

std::vector<unsigned char> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);
  in.seekg(0, std::ios::end);
  const auto size = in.tellg();
  in.seekg(0, std::ios::beg);
  std::vector<unsigned char> buf(static_cast<std::size_t>(size));
  if (size > 0 && !in.read(reinterpret_cast<char*>(buf.data()), size)) {
    throw IoError("read failed: " + path);
  }
  return buf;
}

std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);
  return out;
}

}  // namespace internal

TokenCorpus::TokenCorpus(std::vector<TokenId> tokens, std::vector<std::uint64_t> doc_offsets,
                         std::string subset_name, std::uint32_t vocab_size, TokenId eos_id)
    : tokens_(std::move(tokens)),
      doc_offsets_(std::move(doc_offsets)),
      subset_name_(std::move(subset_name)),
      vocab_size_(vocab_size),
      eos_id_(eos_id) {
  if (vocab_size_ == 0) throw DataError("vocab_size must be positive");
  if (eos_id_ >= vocab_size_) throw DataError("eos_id outside vocabulary");
  if (!tokens_.empty() && tokens_.back() != eos_id_) {
    throw DataError("token stream must end with EOS");
  }
  if (tokens_.empty() != doc_offsets_.empty()) {
    throw DataError("document offsets do not match token stream");
  }
  for (std::size_t d = 0; d < doc_offsets_.size(); ++d) {
    const std::uint64_t begin = doc_offsets_[d];
    const std::uint64_t end = d + 1 < doc_offsets_.size() ? doc_offsets_[d + 1] : tokens_.size();
    if (begin >= end || (d == 0 && begin != 0)) {
      throw DataError("document offsets must start at 0 and strictly increase");
    }
    for (std::uint64_t i = begin; i + 1 < end; ++i) {
      if (tokens_[i] == eos_id_) {
        throw DataError("EOS inside document " + std::to_string(d));
      }
    }
    if (tokens_[end - 1] != eos_id_) {
      throw DataError("document " + std::to_string(d) + " is not terminated by EOS");
    }
  }
  for (TokenId t : tokens_) {
    if (t >= vocab_size_) {
      throw DataError("token id " + std::to_string(t) + " >= vocab_size " +
                      std::to_string(vocab_size_));
    }
  }
}

TokenCorpus TokenCorpus::from_stream(std::vector<TokenId> tokens, std::string subset_name,
                                     std::uint32_t vocab_size, TokenId eos_id) {
  std::vector<std::uint64_t> offsets;
  std::uint64_t start = 0;
  for (std::uint64_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] == eos_id) {
      offsets.push_back(start);
      start = i + 1;
    }
  }
  if (start != tokens.size()) throw DataError("token stream must end with EOS");
  return TokenCorpus(std::move(tokens), std::move(offsets), std::move(subset_name), vocab_size,
                     eos_id);
}

std::span<const TokenId> TokenCorpus::document(std::size_t i) const {
  const std::uint64_t begin = doc_offsets_.at(i);
  const std::uint64_t end = i + 1 < doc_offsets_.size() ? doc_offsets_[i + 1] : tokens_.size();
  return std::span<const TokenId>(tokens_).subspan(begin, end - begin - 1);
}

TokenCorpus flatten_corpus(std::span<const std::vector<TokenId>> documents, TokenId eos_id,
                           std::string subset_name, std::uint32_t vocab_size) {
  std::vector<TokenId> tokens;
  std::vector<std::uint64_t> offsets;
  std::size_t total = documents.size();
  for (const auto& doc : documents) total += doc.size();
  tokens.reserve(total);
  offsets.reserve(documents.size());
  for (std::size_t d = 0; d < documents.size(); ++d) {
    offsets.push_back(tokens.size());
    for (TokenId t : documents[d]) {
      if (t == eos_id) throw DataError("document " + std::to_string(d) + " contains EOS");
      tokens.push_back(t);
    }
    tokens.push_back(eos_id);
  }
  return TokenCorpus(std::move(tokens), std::move(offsets), std::move(subset_name), vocab_size,
                     eos_id);
}

std::vector<std::vector<TokenId>> split_documents(const TokenCorpus& corpus) {
  std::vector<std::vector<TokenId>> docs;
  docs.reserve(corpus.num_documents());
  for (std::size_t i = 0; i < corpus.num_documents(); ++i) {
    auto body = corpus.document(i);
    docs.emplace_back(body.begin(), body.end());
  }
  return docs;
}

void write_token_file(const std::filesystem::path& path, std::span<const TokenId> tokens) {
  auto out = internal::open_for_write(path.string());
  internal::LittleEndianWriter w(out);
  w.bytes(kTokenFileMagic, sizeof(kTokenFileMagic));
  w.scalar<std::uint32_t>(kTokenFileVersion);
  w.scalar<std::uint32_t>(sizeof(TokenId));
  w.scalar<std::uint64_t>(tokens.size());
  w.array(tokens);
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<TokenId> read_token_file(const std::filesystem::path& path) {
  const auto bytes = internal::read_file_bytes(path.string());
  internal::LittleEndianReader r(bytes, "token file");
  auto magic = r.take(sizeof(kTokenFileMagic));
  if (!std::equal(magic.begin(), magic.end(), kTokenFileMagic)) {
    throw CorruptFileError(CorruptKind::kBadMagic, "token file", path.string());
  }
  const auto version = r.scalar<std::uint32_t>();
  if (version != kTokenFileVersion) {
    throw CorruptFileError(CorruptKind::kVersionMismatch, "token file",
                           "version " + std::to_string(version));
  }
  const auto width = r.scalar<std::uint32_t>();
  if (width != sizeof(TokenId)) {
    throw CorruptFileError(CorruptKind::kMalformed, "token file",
                           "token width " + std::to_string(width));
  }
  const auto count = r.scalar<std::uint64_t>();
  auto tokens = r.array<TokenId>(count);
  if (r.remaining() != 0) {
    throw CorruptFileError(CorruptKind::kMalformed, "token file", "trailing bytes");
  }
  return tokens;
}

std::vector<DocumentSpan> read_document_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open document manifest: " + path.string());
  std::vector<DocumentSpan> spans;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      DocumentSpan span;
      span.length = j.at("length").get<std::uint64_t>();
      if (j.contains("subset") && !j["subset"].is_null()) span.subset = j["subset"].get<std::string>();
      spans.push_back(std::move(span));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return spans;
}

void write_document_manifest(const std::filesystem::path& path,
                             std::span<const DocumentSpan> spans) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  for (const auto& s : spans) {
    nlohmann::json j{{"length", s.length}};
    if (!s.subset.empty()) j["subset"] = s.subset;
    out << j.dump() << '\n';
  }
}

std::vector<TextDocument> read_text_documents(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open document file: " + path.string());
  std::vector<TextDocument> docs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      TextDocument doc;
      doc.text = j.at("text").get<std::string>();
      if (j.contains("subset") && !j["subset"].is_null()) doc.subset = j["subset"].get<std::string>();
      docs.push_back(std::move(doc));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return docs;
}

}  // namespace ostd
