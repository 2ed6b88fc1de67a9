#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace flatcheck {

using BigInt = boost::multiprecision::cpp_int;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised for malformed formula, guard or DOT text.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line, std::size_t column)
        : Error(what + " at " + std::to_string(line) + ":" + std::to_string(column)),
          line_(line),
          column_(column) {}

    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

inline std::string to_string(const BigInt& v) { return v.str(); }

// Floor/ceil division for arbitrary-precision integers (denominator non-zero).
inline BigInt floor_div(const BigInt& a, const BigInt& b) {
    BigInt q = a / b;
    BigInt r = a % b;
    if (r != 0 && ((r < 0) != (b < 0))) --q;
    return q;
}

inline BigInt ceil_div(const BigInt& a, const BigInt& b) {
    BigInt q = a / b;
    BigInt r = a % b;
    if (r != 0 && ((r < 0) == (b < 0))) ++q;
    return q;
}

}  // namespace flatcheck
