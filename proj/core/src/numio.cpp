#include "fringe/numio.hpp"

#include <charconv>
#include <system_error>

namespace fringe {

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::string format_double(double value, int significant_digits) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value,
                                 std::chars_format::general, significant_digits);
  return std::string(buf, ptr);
}

std::optional<double> try_parse_double(std::string_view token) {
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || token.empty()) return std::nullopt;
  return value;
}

std::optional<long long> try_parse_int(std::string_view token) {
  long long value = 0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || token.empty()) return std::nullopt;
  return value;
}

std::optional<unsigned long long> try_parse_uint(std::string_view token) {
  unsigned long long value = 0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || token.empty()) return std::nullopt;
  return value;
}

}  // namespace fringe
