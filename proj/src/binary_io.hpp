#pragma once

// Little-endian primitives shared by the ADAF, ADAD and ADAB codecs.

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>

#include "ada/error.hpp"

namespace ada::detail {

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(std::is_integral_v<T>);
  unsigned char bytes[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bytes[i] = static_cast<unsigned char>(static_cast<std::uint64_t>(value) >> (8 * i));
  }
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

inline void put_f32_block(std::ostream& out, std::span<const float> values) {
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size_bytes()));
  } else {
    for (float v : values) put_le(out, std::bit_cast<std::uint32_t>(v));
  }
}

template <typename LenT>
void put_string(std::ostream& out, std::string_view s) {
  if (s.size() > static_cast<std::size_t>(static_cast<LenT>(~LenT{0}))) {
    throw Error(Errc::InvalidArgument, "string too long for length prefix: " + std::string(s.substr(0, 32)));
  }
  put_le<LenT>(out, static_cast<LenT>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

/// Reader that turns short reads into TruncatedFile.
class Reader {
 public:
  Reader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  void bytes(void* dst, std::size_t n) {
    in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
      throw Error(Errc::TruncatedFile, source_);
    }
  }

  template <typename T>
  T le() {
    unsigned char b[sizeof(T)];
    bytes(b, sizeof(T));
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return static_cast<T>(v);
  }

  template <typename LenT>
  std::string string() {
    const auto n = le<LenT>();
    std::string s(n, '\0');
    if (n > 0) bytes(s.data(), n);
    return s;
  }

  void f32_block(std::span<float> dst) {
    bytes(dst.data(), dst.size_bytes());
    if constexpr (std::endian::native != std::endian::little) {
      for (float& v : dst) {
        std::uint32_t u;
        std::memcpy(&u, &v, 4);
        u = (u >> 24) | ((u >> 8) & 0xff00u) | ((u << 8) & 0xff0000u) | (u << 24);
        std::memcpy(&v, &u, 4);
      }
    }
  }

  /// True when the stream is positioned at EOF.
  bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }

  const std::string& source() const { return source_; }

 private:
  std::istream& in_;
  std::string source_;
};

}  // namespace ada::detail
