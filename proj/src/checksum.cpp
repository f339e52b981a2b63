#include "hof/checksum.hpp"

#include <cstdio>

namespace hof {

std::string hex32(uint32_t value) {
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08x", value);
  return buf;
}

}  // namespace hof
