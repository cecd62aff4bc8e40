#include "rotorlyap/format.hpp"

#include <array>
#include <charconv>

namespace rotorlyap {

std::string format_number(double value) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

}  // namespace rotorlyap
