#pragma once

#include <gmpxx.h>

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace homonet {

using Rational = mpq_class;

// Accepts "p/q", integers and plain decimals such as "0.25" or "-1.5".
inline Rational parse_rational(std::string_view text) {
    std::string s(text);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    size_t b = 0;
    while (b < s.size() && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    s = s.substr(b);
    if (s.empty()) throw std::invalid_argument("empty rational");
    auto dot = s.find('.');
    if (dot == std::string::npos) {
        Rational q;
        if (q.set_str(s, 10) != 0) throw std::invalid_argument("bad rational: " + s);
        if (q.get_den() == 0) throw std::invalid_argument("zero denominator: " + s);
        q.canonicalize();
        return q;
    }
    if (s.find('/') != std::string::npos) throw std::invalid_argument("bad rational: " + s);
    bool neg = false;
    std::string body = s;
    if (body[0] == '-' || body[0] == '+') {
        neg = body[0] == '-';
        body = body.substr(1);
        dot -= 1;
    }
    std::string digits = body.substr(0, dot) + body.substr(dot + 1);
    if (digits.empty()) throw std::invalid_argument("bad rational: " + s);
    for (char c : digits)
        if (!std::isdigit(static_cast<unsigned char>(c))) throw std::invalid_argument("bad rational: " + s);
    mpz_class num(digits, 10);
    mpz_class den;
    mpz_ui_pow_ui(den.get_mpz_t(), 10, body.size() - dot - 1);
    Rational q(num, den);
    q.canonicalize();
    return neg ? Rational(-q) : q;
}

// Canonical p/q; mpq_class(p, q) alone does not reduce.
inline Rational frac(long p, long q) {
    if (q == 0) throw std::invalid_argument("zero denominator");
    Rational r(p, 1);
    r /= q;
    return r;
}

// "p/q" for non-integers, "p" for integers.
inline std::string to_string(const Rational& q) { return q.get_str(); }

// Shortest decimal that round-trips through double.
inline std::string to_string(double v) {
    char buf[64];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

inline Rational rpow(const Rational& base, long e) {
    if (e < 0) throw std::invalid_argument("negative exponent");
    Rational r = 1;
    mpz_pow_ui(r.get_num_mpz_t(), base.get_num_mpz_t(), static_cast<unsigned long>(e));
    mpz_pow_ui(r.get_den_mpz_t(), base.get_den_mpz_t(), static_cast<unsigned long>(e));
    r.canonicalize();
    return r;
}

// Arithmetic traits so evaluators run in exact or floating mode.
template <class S>
struct Num;

template <>
struct Num<Rational> {
    static constexpr bool exact = true;
    static Rational from(const Rational& q) { return q; }
    static double to_double(const Rational& q) { return q.get_d(); }
    static int sign(const Rational& q) { return sgn(q); }
    static Rational pow(const Rational& b, long e) { return rpow(b, e); }
    static std::string str(const Rational& q) { return to_string(q); }
};

template <>
struct Num<double> {
    static constexpr bool exact = false;
    static constexpr double tol = 1e-9;
    static double from(const Rational& q) { return q.get_d(); }
    static double to_double(double v) { return v; }
    static int sign(double v) { return v > tol ? 1 : (v < -tol ? -1 : 0); }
    static double pow(double b, long e) { return std::pow(b, static_cast<double>(e)); }
    static std::string str(double v) { return to_string(v); }
};

template <class S>
int sign(const S& v) {
    return Num<S>::sign(v);
}

}  // namespace homonet
