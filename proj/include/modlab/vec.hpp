#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace modlab {

// Chart point/vector in R^n, n in {2,3}. The third component is zero for n=2.
struct Vec {
  std::array<double, 3> c{0.0, 0.0, 0.0};
  int n{2};

  Vec() = default;
  Vec(double x, double y) : c{x, y, 0.0}, n(2) {}
  Vec(double x, double y, double z) : c{x, y, z}, n(3) {}

  double& operator[](int i) { return c[static_cast<std::size_t>(i)]; }
  double operator[](int i) const { return c[static_cast<std::size_t>(i)]; }

  Vec operator+(const Vec& o) const {
    Vec r = *this;
    for (int i = 0; i < 3; ++i) r.c[i] += o.c[i];
    return r;
  }
  Vec operator-(const Vec& o) const {
    Vec r = *this;
    for (int i = 0; i < 3; ++i) r.c[i] -= o.c[i];
    return r;
  }
  Vec operator*(double s) const {
    Vec r = *this;
    for (auto& x : r.c) x *= s;
    return r;
  }

  double dot(const Vec& o) const {
    return c[0] * o.c[0] + c[1] * o.c[1] + c[2] * o.c[2];
  }
  double norm() const { return std::sqrt(dot(*this)); }

  Vec normalized() const {
    double m = norm();
    Vec r = *this;
    if (m > 0.0) for (auto& x : r.c) x /= m;
    return r;
  }

  bool operator==(const Vec& o) const { return c == o.c && n == o.n; }
};

inline Vec operator*(double s, const Vec& v) { return v * s; }

inline double dist(const Vec& a, const Vec& b) { return (a - b).norm(); }

inline Vec zero_vec(int n) {
  Vec v;
  v.n = n;
  return v;
}

}  // namespace modlab
