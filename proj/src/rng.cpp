#include "ppls/rng.hpp"

#include "ppls/sha256.hpp"

namespace ppls {

std::array<std::uint8_t, 32> Rng::derive_seed(std::uint64_t master, std::string_view label) {
  Sha256 h;
  std::uint8_t be[8];
  for (int i = 0; i < 8; ++i) be[i] = std::uint8_t(master >> (56 - 8 * i));
  h.update({be, 8});
  h.update({reinterpret_cast<const std::uint8_t*>(label.data()), label.size()});
  return h.finish();
}

}  // namespace ppls
