#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "ostd/error.h"

namespace ostd::internal {

template <class T>
T byteswap_if_big(T v) {
  static_assert(std::is_unsigned_v<T>);
  if constexpr (std::endian::native == std::endian::big) {
    T out = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      out = static_cast<T>((out << 8) | ((v >> (8 * i)) & 0xff));
    }
    return out;
  } else {
    return v;
  }
}

class LittleEndianWriter {
 public:
  explicit LittleEndianWriter(std::ofstream& out) : out_(out) {}

  void bytes(const void* data, std::size_t n) {
    out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  }

  template <class T>
  void scalar(T v) {
    v = byteswap_if_big(v);
    bytes(&v, sizeof(T));
  }

  template <class T>
  void array(std::span<const T> values) {
    if constexpr (std::endian::native == std::endian::little) {
      bytes(values.data(), values.size_bytes());
    } else {
      for (T v : values) scalar(v);
    }
  }

 private:
  std::ofstream& out_;
};

// Reads from an in-memory byte buffer; running past the end raises
// CorruptFileError(kTruncated).
class LittleEndianReader {
 public:
  LittleEndianReader(std::span<const unsigned char> data, std::string subject)
      : data_(data), subject_(std::move(subject)) {}

  std::span<const unsigned char> take(std::size_t n) {
    if (n > data_.size() - pos_) {
      throw CorruptFileError(CorruptKind::kTruncated, subject_,
                             "needed " + std::to_string(n) + " bytes at offset " +
                                 std::to_string(pos_) + ", file has " +
                                 std::to_string(data_.size()));
    }
    auto out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

  template <class T>
  T scalar() {
    T v;
    std::memcpy(&v, take(sizeof(T)).data(), sizeof(T));
    return byteswap_if_big(v);
  }

  template <class T>
  std::vector<T> array(std::uint64_t count) {
    if (count > (data_.size() - pos_) / sizeof(T)) {
      throw CorruptFileError(CorruptKind::kTruncated, subject_,
                             "array of " + std::to_string(count) +
                                 " elements exceeds remaining bytes");
    }
    auto raw = take(count * sizeof(T));
    std::vector<T> out(count);
    std::memcpy(out.data(), raw.data(), raw.size());
    if constexpr (std::endian::native == std::endian::big) {
      for (auto& v : out) v = byteswap_if_big(v);
    }
    return out;
  }

  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  std::span<const unsigned char> data_;
  std::string subject_;
  std::size_t pos_ = 0;
};

std::vector<unsigned char> read_file_bytes(const std::string& path);
std::ofstream open_for_write(const std::string& path);

}  // namespace ostd::internal
