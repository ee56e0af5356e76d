#pragma once

#include <charconv>
#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace mlenkbf {

// Minimal CSV row writer. Doubles use the shortest round-trip representation,
// so identical values always produce identical bytes.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& os) : os_(os) {}

  void header(const std::vector<std::string>& names) {
    for (const auto& n : names) field(std::string_view(n));
    end_row();
  }

  CsvWriter& field(std::string_view s) {
    sep();
    os_ << s;
    return *this;
  }
  CsvWriter& field(const std::string& s) { return field(std::string_view(s)); }
  CsvWriter& field(const char* s) { return field(std::string_view(s)); }

  CsvWriter& field(double v) {
    sep();
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    os_.write(buf, res.ptr - buf);
    return *this;
  }

  template <typename Int>
    requires std::is_integral_v<Int>
  CsvWriter& field(Int v) {
    sep();
    os_ << v;
    return *this;
  }

  CsvWriter& empty() {
    sep();
    return *this;
  }

  void end_row() {
    os_ << '\n';
    first_ = true;
  }

  void flush() { os_.flush(); }

 private:
  void sep() {
    if (!first_) os_ << ',';
    first_ = false;
  }

  std::ostream& os_;
  bool first_ = true;
};

}  // namespace mlenkbf
