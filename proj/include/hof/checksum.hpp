#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include <boost/crc.hpp>

namespace hof {

inline uint32_t crc32(std::span<const std::byte> bytes) {
  boost::crc_32_type crc;
  crc.process_bytes(bytes.data(), bytes.size());
  return crc.checksum();
}

inline uint32_t crc32(std::string_view text) {
  return crc32(std::as_bytes(std::span<const char>(text.data(), text.size())));
}

std::string hex32(uint32_t value);

}  // namespace hof
