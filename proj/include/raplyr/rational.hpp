#pragma once

#include <cstdint>
#include <numeric>
#include <ostream>
#include <string>
#include <string_view>

#include "raplyr/error.hpp"

namespace raplyr {

/// Exact fraction over 64-bit integers, always stored in lowest terms with a
/// positive denominator.
class Rational {
 public:
  constexpr Rational() = default;
  constexpr Rational(std::int64_t n) : num_(n), den_(1) {}  // NOLINT
  Rational(std::int64_t n, std::int64_t d) : num_(n), den_(d) {
    if (d == 0) throw InvalidArgument("rational with zero denominator");
    normalize();
  }

  /// Parses "3", "-1.75", "250.0" or "7/4".
  static Rational parse(std::string_view text) {
    if (text.empty()) throw InvalidArgument("empty number");
    if (auto slash = text.find('/'); slash != std::string_view::npos) {
      return Rational(parse_int(text.substr(0, slash)),
                      parse_int(text.substr(slash + 1)));
    }
    bool negative = text.front() == '-';
    if (negative || text.front() == '+') text.remove_prefix(1);
    auto dot = text.find('.');
    std::string digits(text.substr(0, dot));
    std::int64_t den = 1;
    if (dot != std::string_view::npos) {
      auto frac = text.substr(dot + 1);
      if (frac.size() > 15) frac = frac.substr(0, 15);
      digits += frac;
      for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
    }
    if (digits.empty()) throw InvalidArgument("not a number: " + std::string(text));
    std::int64_t num = parse_int(digits);
    return Rational(negative ? -num : num, den);
  }

  constexpr std::int64_t num() const { return num_; }
  constexpr std::int64_t den() const { return den_; }
  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  friend Rational operator+(const Rational& a, const Rational& b) {
    std::int64_t g = std::gcd(a.den_, b.den_);
    return Rational(a.num_ * (b.den_ / g) + b.num_ * (a.den_ / g), a.den_ / g * b.den_);
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    return a + Rational(-b.num_, b.den_);
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    std::int64_t g1 = std::gcd(a.num_, b.den_);
    std::int64_t g2 = std::gcd(b.num_, a.den_);
    if (g1 == 0) g1 = 1;
    if (g2 == 0) g2 = 1;
    return Rational((a.num_ / g1) * (b.num_ / g2), (a.den_ / g2) * (b.den_ / g1));
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.num_ == 0) throw InvalidArgument("division by zero");
    return a * Rational(b.den_, b.num_);
  }
  friend bool operator==(const Rational&, const Rational&) = default;
  friend bool operator<(const Rational& a, const Rational& b) {
    return static_cast<__int128>(a.num_) * b.den_ < static_cast<__int128>(b.num_) * a.den_;
  }
  friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
  friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
  friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }

  std::string str() const {
    return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_);
  }
  friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

 private:
  static std::int64_t parse_int(std::string_view s) {
    if (s.empty()) throw InvalidArgument("empty integer");
    std::size_t pos = 0;
    std::int64_t v = std::stoll(std::string(s), &pos);
    if (pos != s.size()) throw InvalidArgument("not a number: " + std::string(s));
    return v;
  }

  void normalize() {
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    std::int64_t g = std::gcd(num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
  }

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

}  // namespace raplyr
