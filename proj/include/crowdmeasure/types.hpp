#pragma once

#include <array>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace crowdmeasure {

/// Largest supported spatial dimension. Points and indices are stored in
/// fixed-size arrays; coordinates beyond the active dimension stay zero so
/// that norms and dot products need no dimension argument.
inline constexpr int kMaxDim = 3;

// Error hierarchy. The CLI maps ValidationError to exit code 2 and
// InvariantViolation to exit code 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class InvariantViolation : public Error {
 public:
  using Error::Error;
};

class SizeLimitError : public Error {
 public:
  using Error::Error;
};

struct Point {
  std::array<double, kMaxDim> c{};

  constexpr double& operator[](std::size_t i) { return c[i]; }
  constexpr double operator[](std::size_t i) const { return c[i]; }

  friend constexpr Point operator+(Point a, const Point& b) {
    for (std::size_t i = 0; i < kMaxDim; ++i) a.c[i] += b.c[i];
    return a;
  }
  friend constexpr Point operator-(Point a, const Point& b) {
    for (std::size_t i = 0; i < kMaxDim; ++i) a.c[i] -= b.c[i];
    return a;
  }
  friend constexpr Point operator*(double s, Point a) {
    for (auto& v : a.c) v *= s;
    return a;
  }
  friend constexpr Point operator*(Point a, double s) { return s * a; }
  Point& operator+=(const Point& b) {
    for (std::size_t i = 0; i < kMaxDim; ++i) c[i] += b.c[i];
    return *this;
  }
  friend bool operator==(const Point&, const Point&) = default;
  friend auto operator<=>(const Point&, const Point&) = default;
};

inline double dot(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < kMaxDim; ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const Point& a) { return dot(a, a); }
inline double norm(const Point& a) { return std::sqrt(norm2(a)); }

inline Point make_point(double x, double y = 0.0, double z = 0.0) {
  return Point{{x, y, z}};
}

/// Lattice index i in Z^d, zero-padded beyond the active dimension.
struct CellIndex {
  std::array<std::int64_t, kMaxDim> i{};

  constexpr std::int64_t& operator[](std::size_t k) { return i[k]; }
  constexpr std::int64_t operator[](std::size_t k) const { return i[k]; }

  friend bool operator==(const CellIndex&, const CellIndex&) = default;
  friend auto operator<=>(const CellIndex&, const CellIndex&) = default;
};

inline CellIndex make_index(std::int64_t a, std::int64_t b = 0, std::int64_t c = 0) {
  return CellIndex{{a, b, c}};
}

inline void check_dim(int dim) {
  if (dim < 1 || dim > kMaxDim) {
    throw ValidationError("dimension must be in [1, " + std::to_string(kMaxDim) +
                          "], got " + std::to_string(dim));
  }
}

}  // namespace crowdmeasure
