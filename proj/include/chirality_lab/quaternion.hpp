#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

namespace chirality_lab {

using cplx = std::complex<double>;

struct Quaternion {
    double re = 0.0;
    double i_part = 0.0;
    double j_part = 0.0;
    double k_part = 0.0;

    constexpr Quaternion() = default;
    constexpr Quaternion(double a, double b = 0.0, double c = 0.0, double d = 0.0)
        : re(a), i_part(b), j_part(c), k_part(d) {}

    static constexpr Quaternion unit_i() { return {0, 1, 0, 0}; }
    static constexpr Quaternion unit_j() { return {0, 0, 1, 0}; }
    static constexpr Quaternion unit_k() { return {0, 0, 0, 1}; }

    // a + b j with a, b complex (i-plane), i.e. Re a + Im a i + Re b j + Im b k.
    static Quaternion from_pair(cplx a, cplx b) { return {a.real(), a.imag(), b.real(), b.imag()}; }
    cplx first() const { return {re, i_part}; }
    cplx second() const { return {j_part, k_part}; }

    constexpr Quaternion conj() const { return {re, -i_part, -j_part, -k_part}; }
    constexpr double norm_sq() const { return re * re + i_part * i_part + j_part * j_part + k_part * k_part; }
    double norm() const { return std::sqrt(norm_sq()); }
    bool is_pure(double tol = 0.0) const { return std::abs(re) <= tol; }

    Quaternion inverse() const {
        const double n2 = norm_sq();
        if (n2 == 0.0) throw std::domain_error("quaternion inverse of zero");
        const Quaternion c = conj();
        return {c.re / n2, c.i_part / n2, c.j_part / n2, c.k_part / n2};
    }

    constexpr Quaternion& operator+=(const Quaternion& o) {
        re += o.re; i_part += o.i_part; j_part += o.j_part; k_part += o.k_part;
        return *this;
    }
    constexpr Quaternion& operator-=(const Quaternion& o) {
        re -= o.re; i_part -= o.i_part; j_part -= o.j_part; k_part -= o.k_part;
        return *this;
    }
};

constexpr Quaternion operator+(Quaternion a, const Quaternion& b) { return a += b; }
constexpr Quaternion operator-(Quaternion a, const Quaternion& b) { return a -= b; }
constexpr Quaternion operator-(const Quaternion& a) { return {-a.re, -a.i_part, -a.j_part, -a.k_part}; }
constexpr Quaternion operator*(double s, const Quaternion& a) { return {s * a.re, s * a.i_part, s * a.j_part, s * a.k_part}; }
constexpr Quaternion operator*(const Quaternion& a, double s) { return s * a; }

// Hamilton product: i^2 = j^2 = k^2 = -1, ij = k, jk = i, ki = j.
constexpr Quaternion quat_mul(const Quaternion& a, const Quaternion& b) {
    return {a.re * b.re - a.i_part * b.i_part - a.j_part * b.j_part - a.k_part * b.k_part,
            a.re * b.i_part + a.i_part * b.re + a.j_part * b.k_part - a.k_part * b.j_part,
            a.re * b.j_part - a.i_part * b.k_part + a.j_part * b.re + a.k_part * b.i_part,
            a.re * b.k_part + a.i_part * b.j_part - a.j_part * b.i_part + a.k_part * b.re};
}
constexpr Quaternion operator*(const Quaternion& a, const Quaternion& b) { return quat_mul(a, b); }

constexpr bool operator==(const Quaternion& a, const Quaternion& b) {
    return a.re == b.re && a.i_part == b.i_part && a.j_part == b.j_part && a.k_part == b.k_part;
}

struct QuatProjection {
    Quaternion pi_i;
    Quaternion pi_jk;
};

constexpr QuatProjection quat_proj(const Quaternion& q) {
    return {Quaternion{0, q.i_part, 0, 0}, Quaternion{0, 0, q.j_part, q.k_part}};
}

// Exponential of a pure quaternion; result is a unit quaternion.
inline Quaternion quat_exp(const Quaternion& u) {
    if (u.re != 0.0) throw std::invalid_argument("quat_exp expects a pure quaternion (re == 0)");
    const double th = u.norm();
    if (th == 0.0) return {1.0, 0.0, 0.0, 0.0};
    const double s = std::sin(th) / th;
    return {std::cos(th), s * u.i_part, s * u.j_part, s * u.k_part};
}

inline double quat_distance(const Quaternion& a, const Quaternion& b) { return (a - b).norm(); }

}  // namespace chirality_lab
