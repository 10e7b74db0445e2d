#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace ssorl::io {

// Little-endian primitive encoding shared by the checkpoint and trajectory
// formats.

template <typename T>
void write_le(std::ostream& out, T value) {
  static_assert(std::is_arithmetic_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
  }
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T read_le(std::istream& in, const char* what) {
  static_assert(std::is_arithmetic_v<T>);
  unsigned char bytes[sizeof(T)];
  in.read(reinterpret_cast<char*>(bytes), sizeof(T));
  if (!in) throw std::runtime_error(std::string("truncated input while reading ") + what);
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
  }
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

inline void write_string(std::ostream& out, const std::string& s) {
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string read_string(std::istream& in, const char* what, std::uint32_t max_len = 1u << 26) {
  const auto n = read_le<std::uint32_t>(in, what);
  if (n > max_len) throw std::runtime_error(std::string("implausible string length while reading ") + what);
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (!in) throw std::runtime_error(std::string("truncated input while reading ") + what);
  return s;
}

inline void write_magic(std::ostream& out, const char* magic) { out.write(magic, static_cast<std::streamsize>(std::strlen(magic))); }

inline void expect_magic(std::istream& in, const char* magic) {
  const std::size_t n = std::strlen(magic);
  std::string got(n, '\0');
  in.read(got.data(), static_cast<std::streamsize>(n));
  if (!in || got != magic) throw std::runtime_error(std::string("bad magic: expected ") + magic);
}

}  // namespace ssorl::io
