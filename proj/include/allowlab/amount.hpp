#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace allowlab {

/// Token amount in base units. Unbounded precision, never negative.
///
/// Subtraction is only available through `checked_sub` (which reports
/// underflow) and `saturating_sub` (which floors at zero), so a negative
/// value can never be constructed.
class Amount {
 public:
  Amount() = default;
  Amount(std::uint64_t v) : value_(v) {}  // NOLINT(google-explicit-constructor)

  /// Parses a decimal integer without sign, whitespace or leading '+'.
  static std::optional<Amount> parse(std::string_view text);

  [[nodiscard]] bool is_zero() const { return value_.is_zero(); }
  [[nodiscard]] std::string str() const { return value_.str(); }

  [[nodiscard]] std::optional<Amount> checked_sub(Amount const& rhs) const;
  [[nodiscard]] Amount saturating_sub(Amount const& rhs) const;

  Amount& operator+=(Amount const& rhs) {
    value_ += rhs.value_;
    return *this;
  }
  friend Amount operator+(Amount lhs, Amount const& rhs) { return lhs += rhs; }

  friend bool operator==(Amount const& a, Amount const& b) {
    return a.value_ == b.value_;
  }
  friend std::strong_ordering operator<=>(Amount const& a, Amount const& b) {
    int const c = a.value_.compare(b.value_);
    if (c < 0) return std::strong_ordering::less;
    if (c > 0) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }

  friend std::ostream& operator<<(std::ostream& os, Amount const& a) {
    return os << a.str();
  }

 private:
  using Rep = boost::multiprecision::cpp_int;
  explicit Amount(Rep v) : value_(std::move(v)) {}

  Rep value_{0};
};

inline Amount min(Amount const& a, Amount const& b) { return a < b ? a : b; }
inline Amount max(Amount const& a, Amount const& b) { return a < b ? b : a; }

}  // namespace allowlab
