// Copyright 2026 The mcal-audit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <gmpxx.h>
#include <mpfr.h>

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <string>
#include <string_view>

#include "mcal/errors.hpp"

namespace mcal {

// Exact arbitrary-precision fraction. gmp keeps mpq_class canonical as long
// as values are built through arithmetic or the helpers below.
using Rational = mpq_class;

inline Rational make_rational(long num, long den = 1) {
  if (den == 0) throw InvalidArgument("zero denominator");
  Rational r(num, den);
  r.canonicalize();
  return r;
}

inline Rational abs(const Rational& r) { return Rational(::abs(r)); }

inline int sign(const Rational& r) { return sgn(r); }

// Accepts "p/q", integers and decimals ("0.8", ".25", "-1.5e-3"); decimals are
// converted exactly.
inline Rational parse_rational(std::string_view text) {
  auto fail = [&]() -> Rational {
    throw InvalidArgument("cannot parse rational: '" + std::string(text) + "'");
  };
  std::string s(text);
  s.erase(std::remove_if(s.begin(), s.end(),
                         [](unsigned char c) { return std::isspace(c); }),
          s.end());
  if (s.empty()) return fail();

  if (auto slash = s.find('/'); slash != std::string::npos) {
    std::string num = s.substr(0, slash);
    std::string den = s.substr(slash + 1);
    mpz_class n, d;
    if (num.empty() || den.empty() || n.set_str(num, 10) != 0 ||
        d.set_str(den, 10) != 0 || d == 0) {
      return fail();
    }
    Rational r(n, d);
    r.canonicalize();
    return r;
  }

  std::size_t pos = 0;
  bool negative = false;
  if (s[pos] == '+' || s[pos] == '-') negative = s[pos++] == '-';
  std::string digits;
  long scale = 0;
  bool seen_point = false;
  bool seen_digit = false;
  for (; pos < s.size(); ++pos) {
    char c = s[pos];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits.push_back(c);
      seen_digit = true;
      if (seen_point) ++scale;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  if (!seen_digit) return fail();
  long exponent = 0;
  if (pos < s.size()) {
    if (s[pos] != 'e' && s[pos] != 'E') return fail();
    std::string exp_text = s.substr(pos + 1);
    if (exp_text.empty()) return fail();
    char* end = nullptr;
    exponent = std::strtol(exp_text.c_str(), &end, 10);
    if (*end != '\0' || exponent > 10000 || exponent < -10000) return fail();
  }
  mpz_class mantissa(digits, 10);
  long power = exponent - scale;
  mpz_class ten_pow;
  mpz_ui_pow_ui(ten_pow.get_mpz_t(), 10, static_cast<unsigned long>(power < 0 ? -power : power));
  Rational r = power >= 0 ? Rational(mantissa * ten_pow) : Rational(mantissa, ten_pow);
  r.canonicalize();
  if (negative) r = -r;
  return r;
}

// "num/den", always with an explicit denominator.
inline std::string to_string(const Rational& r) {
  return r.get_num().get_str() + "/" + r.get_den().get_str();
}

namespace detail {

// Rounds a non-negative rational to the nearest integer, ties to even.
inline mpz_class round_half_even(const Rational& x) {
  mpz_class q, rem;
  mpz_fdiv_qr(q.get_mpz_t(), rem.get_mpz_t(), x.get_num_mpz_t(),
              x.get_den_mpz_t());
  mpz_class twice = 2 * rem;
  int c = cmp(twice, x.get_den());
  if (c > 0 || (c == 0 && mpz_odd_p(q.get_mpz_t()))) q += 1;
  return q;
}

inline mpz_class pow10(long e) {
  mpz_class p;
  mpz_ui_pow_ui(p.get_mpz_t(), 10, static_cast<unsigned long>(e));
  return p;
}

// Formats an integer holding `digits` significant digits of a value whose
// leading digit sits at decimal exponent `exp10`.
inline std::string place_point(const mpz_class& n, long exp10, int digits,
                               bool negative) {
  std::string body = n.get_str();
  std::string out;
  if (exp10 >= 0) {
    if (static_cast<long>(body.size()) <= exp10 + 1) {
      out = body + std::string(static_cast<std::size_t>(exp10 + 1 - static_cast<long>(body.size())), '0');
    } else {
      out = body.substr(0, static_cast<std::size_t>(exp10 + 1)) + "." +
            body.substr(static_cast<std::size_t>(exp10 + 1));
    }
  } else {
    out = "0." + std::string(static_cast<std::size_t>(-exp10 - 1), '0') + body;
  }
  (void)digits;
  return negative ? "-" + out : out;
}

}  // namespace detail

// Fixed-notation rendering with `digits` significant digits, round-half-even.
// Rendering only; never parse these back.
inline std::string to_decimal(const Rational& value, int digits = 30) {
  if (value == 0) return "0";
  bool negative = value < 0;
  Rational x = abs(value);
  // exp10 = floor(log10 x), found by exact comparison.
  long exp10 = static_cast<long>(mpz_sizeinbase(x.get_num_mpz_t(), 10)) -
               static_cast<long>(mpz_sizeinbase(x.get_den_mpz_t(), 10));
  auto pow10r = [](long e) {
    return e >= 0 ? Rational(detail::pow10(e)) : Rational(mpz_class(1), detail::pow10(-e));
  };
  while (pow10r(exp10) > x) --exp10;
  while (pow10r(exp10 + 1) <= x) ++exp10;
  Rational scaled = x * pow10r(digits - 1 - exp10);
  mpz_class n = detail::round_half_even(scaled);
  if (n == detail::pow10(digits)) {
    ++exp10;
    n = detail::pow10(digits - 1);
  }
  return detail::place_point(n, exp10, digits, negative);
}

inline double to_double(const Rational& r) { return r.get_d(); }

// 4*sqrt(a) + sqrt(b) style expressions: `weight_a * sqrt(a) + sqrt(b)` for
// non-negative rationals, rendered to `digits` significant digits. Exact when
// both radicands are perfect squares; otherwise evaluated with 512-bit MPFR,
// where ties cannot occur because the value is irrational.
inline std::string sqrt_sum_decimal(const Rational& weight_a, const Rational& a,
                                    const Rational& b, int digits = 30) {
  auto exact_sqrt = [](const Rational& q, Rational& out) {
    if (q < 0) return false;
    mpz_class n = q.get_num(), d = q.get_den();
    if (!mpz_perfect_square_p(n.get_mpz_t()) ||
        !mpz_perfect_square_p(d.get_mpz_t())) {
      return false;
    }
    mpz_class rn, rd;
    mpz_sqrt(rn.get_mpz_t(), n.get_mpz_t());
    mpz_sqrt(rd.get_mpz_t(), d.get_mpz_t());
    out = Rational(rn, rd);
    out.canonicalize();
    return true;
  };
  if (a < 0 || b < 0) throw InvalidArgument("negative radicand");
  Rational ra, rb;
  if (exact_sqrt(a, ra) && exact_sqrt(b, rb)) {
    return to_decimal(weight_a * ra + rb, digits);
  }
  mpfr_t fa, fb, fw;
  mpfr_inits2(512, fa, fb, fw, static_cast<mpfr_ptr>(nullptr));
  mpfr_set_q(fa, a.get_mpq_t(), MPFR_RNDN);
  mpfr_set_q(fb, b.get_mpq_t(), MPFR_RNDN);
  mpfr_set_q(fw, weight_a.get_mpq_t(), MPFR_RNDN);
  mpfr_sqrt(fa, fa, MPFR_RNDN);
  mpfr_sqrt(fb, fb, MPFR_RNDN);
  mpfr_mul(fa, fa, fw, MPFR_RNDN);
  mpfr_add(fa, fa, fb, MPFR_RNDN);
  mpfr_exp_t exp = 0;
  char* str = mpfr_get_str(nullptr, &exp, 10, static_cast<std::size_t>(digits), fa, MPFR_RNDN);
  std::string mantissa(str);
  mpfr_free_str(str);
  mpfr_clears(fa, fb, fw, static_cast<mpfr_ptr>(nullptr));
  bool negative = !mantissa.empty() && mantissa[0] == '-';
  if (negative) mantissa.erase(0, 1);
  return detail::place_point(mpz_class(mantissa), static_cast<long>(exp) - 1,
                             digits, negative);
}

// High-precision double view of weight*sqrt(a) + sqrt(b); used for ordering
// checks only.
inline double sqrt_sum_value(const Rational& weight_a, const Rational& a,
                             const Rational& b) {
  return std::stod(sqrt_sum_decimal(weight_a, a, b, 30));
}

}  // namespace mcal
