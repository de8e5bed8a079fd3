#pragma once

// Small dense linear algebra for phase-space dimensions <= 8.
// Fixed-size Vec3/Mat3/Vec4/Mat4 carry the field geometry; VecX/MatX hold
// anything of run-time dimension (symplectic setups, eigenproblems).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <vector>

#include "slowlab/errors.hpp"

namespace slowlab {

// ---------------------------------------------------------------- Vec3

struct Vec3 {
    double x = 0, y = 0, z = 0;

    double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
    double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }
};

inline Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
inline Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
inline Vec3 operator*(Vec3 a, double s) { return a *= s; }
inline Vec3 operator*(double s, Vec3 a) { return a *= s; }
inline Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline double norm_inf(const Vec3& a) {
    return std::max({std::abs(a.x), std::abs(a.y), std::abs(a.z)});
}
inline Vec3 normalized(const Vec3& a) {
    double n = norm(a);
    if (n == 0.0) throw InvalidArgument("normalized: zero vector");
    return a * (1.0 / n);
}

// ---------------------------------------------------------------- Mat3

struct Mat3 {
    // m[i][j], row i, column j
    double m[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};

    static Mat3 identity() {
        Mat3 r;
        for (int i = 0; i < 3; ++i) r.m[i][i] = 1.0;
        return r;
    }
    double& operator()(int i, int j) { return m[i][j]; }
    double operator()(int i, int j) const { return m[i][j]; }
};

inline Vec3 operator*(const Mat3& A, const Vec3& v) {
    Vec3 r;
    for (int i = 0; i < 3; ++i)
        r[i] = A.m[i][0] * v.x + A.m[i][1] * v.y + A.m[i][2] * v.z;
    return r;
}
inline Mat3 operator*(const Mat3& A, const Mat3& B) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double s = 0;
            for (int k = 0; k < 3; ++k) s += A.m[i][k] * B.m[k][j];
            r.m[i][j] = s;
        }
    return r;
}
inline Mat3 operator+(const Mat3& A, const Mat3& B) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r.m[i][j] = A.m[i][j] + B.m[i][j];
    return r;
}
inline Mat3 operator-(const Mat3& A, const Mat3& B) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r.m[i][j] = A.m[i][j] - B.m[i][j];
    return r;
}
inline Mat3 operator*(const Mat3& A, double s) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r.m[i][j] = A.m[i][j] * s;
    return r;
}
inline Mat3 transpose(const Mat3& A) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r.m[i][j] = A.m[j][i];
    return r;
}
inline double frobenius(const Mat3& A) {
    double s = 0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) s += A.m[i][j] * A.m[i][j];
    return std::sqrt(s);
}

// ---------------------------------------------------------------- Vec4

// Index 0 is the time component; metric signature (-,+,+,+).
struct Vec4 {
    double c[4] = {0, 0, 0, 0};

    Vec4() = default;
    Vec4(double t, double x, double y, double z) : c{t, x, y, z} {}

    double& operator[](int i) { return c[i]; }
    double operator[](int i) const { return c[i]; }

    Vec4& operator+=(const Vec4& o) {
        for (int i = 0; i < 4; ++i) c[i] += o.c[i];
        return *this;
    }
    Vec4& operator-=(const Vec4& o) {
        for (int i = 0; i < 4; ++i) c[i] -= o.c[i];
        return *this;
    }
    Vec4& operator*=(double s) {
        for (int i = 0; i < 4; ++i) c[i] *= s;
        return *this;
    }
};

inline Vec4 operator+(Vec4 a, const Vec4& b) { return a += b; }
inline Vec4 operator-(Vec4 a, const Vec4& b) { return a -= b; }
inline Vec4 operator*(Vec4 a, double s) { return a *= s; }
inline Vec4 operator*(double s, Vec4 a) { return a *= s; }
inline Vec4 operator-(const Vec4& a) { return {-a.c[0], -a.c[1], -a.c[2], -a.c[3]}; }

/// Minkowski inner product, mostly-positive signature.
inline double mdot(const Vec4& a, const Vec4& b) {
    return -a.c[0] * b.c[0] + a.c[1] * b.c[1] + a.c[2] * b.c[2] + a.c[3] * b.c[3];
}
inline double edot(const Vec4& a, const Vec4& b) {
    return a.c[0] * b.c[0] + a.c[1] * b.c[1] + a.c[2] * b.c[2] + a.c[3] * b.c[3];
}
inline double enorm(const Vec4& a) { return std::sqrt(edot(a, a)); }

// ---------------------------------------------------------------- Mat4

struct Mat4 {
    double m[4][4] = {{0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}};

    static Mat4 identity() {
        Mat4 r;
        for (int i = 0; i < 4; ++i) r.m[i][i] = 1.0;
        return r;
    }
    double& operator()(int i, int j) { return m[i][j]; }
    double operator()(int i, int j) const { return m[i][j]; }
};

inline Vec4 operator*(const Mat4& A, const Vec4& v) {
    Vec4 r;
    for (int i = 0; i < 4; ++i) {
        double s = 0;
        for (int j = 0; j < 4; ++j) s += A.m[i][j] * v.c[j];
        r.c[i] = s;
    }
    return r;
}
inline Mat4 operator*(const Mat4& A, const Mat4& B) {
    Mat4 r;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            double s = 0;
            for (int k = 0; k < 4; ++k) s += A.m[i][k] * B.m[k][j];
            r.m[i][j] = s;
        }
    return r;
}
inline Mat4 operator+(const Mat4& A, const Mat4& B) {
    Mat4 r;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) r.m[i][j] = A.m[i][j] + B.m[i][j];
    return r;
}
inline Mat4 operator-(const Mat4& A, const Mat4& B) {
    Mat4 r;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) r.m[i][j] = A.m[i][j] - B.m[i][j];
    return r;
}
inline Mat4 operator*(const Mat4& A, double s) {
    Mat4 r;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) r.m[i][j] = A.m[i][j] * s;
    return r;
}
inline Mat4 transpose(const Mat4& A) {
    Mat4 r;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) r.m[i][j] = A.m[j][i];
    return r;
}
inline double trace(const Mat4& A) {
    return A.m[0][0] + A.m[1][1] + A.m[2][2] + A.m[3][3];
}
inline double frobenius(const Mat4& A) {
    double s = 0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) s += A.m[i][j] * A.m[i][j];
    return std::sqrt(s);
}

/// eta = diag(-1,1,1,1) applied on the left: flips row 0.
inline Mat4 eta_times(const Mat4& A) {
    Mat4 r = A;
    for (int j = 0; j < 4; ++j) r.m[0][j] = -r.m[0][j];
    return r;
}

// ---------------------------------------------------------------- VecX

class VecX {
public:
    VecX() = default;
    explicit VecX(std::size_t n, double fill = 0.0) : d_(n, fill) {}
    VecX(std::initializer_list<double> v) : d_(v) {}

    std::size_t size() const { return d_.size(); }
    double& operator[](std::size_t i) { return d_[i]; }
    double operator[](std::size_t i) const { return d_[i]; }
    double* data() { return d_.data(); }
    const double* data() const { return d_.data(); }

    VecX& operator+=(const VecX& o) {
        for (std::size_t i = 0; i < d_.size(); ++i) d_[i] += o.d_[i];
        return *this;
    }
    VecX& operator-=(const VecX& o) {
        for (std::size_t i = 0; i < d_.size(); ++i) d_[i] -= o.d_[i];
        return *this;
    }
    VecX& operator*=(double s) {
        for (double& v : d_) v *= s;
        return *this;
    }

private:
    std::vector<double> d_;
};

inline VecX operator+(VecX a, const VecX& b) { return a += b; }
inline VecX operator-(VecX a, const VecX& b) { return a -= b; }
inline VecX operator*(VecX a, double s) { return a *= s; }
inline VecX operator*(double s, VecX a) { return a *= s; }

inline double dot(const VecX& a, const VecX& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}
inline double norm(const VecX& a) { return std::sqrt(dot(a, a)); }
inline double norm_inf(const VecX& a) {
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i]));
    return m;
}
inline bool all_finite(const VecX& a) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!std::isfinite(a[i])) return false;
    return true;
}

// ---------------------------------------------------------------- MatX

class MatX {
public:
    MatX() = default;
    MatX(std::size_t rows, std::size_t cols, double fill = 0.0)
        : r_(rows), c_(cols), d_(rows * cols, fill) {}

    static MatX identity(std::size_t n) {
        MatX I(n, n);
        for (std::size_t i = 0; i < n; ++i) I(i, i) = 1.0;
        return I;
    }

    std::size_t rows() const { return r_; }
    std::size_t cols() const { return c_; }
    double& operator()(std::size_t i, std::size_t j) { return d_[i * c_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return d_[i * c_ + j]; }

    MatX& operator+=(const MatX& o) {
        for (std::size_t i = 0; i < d_.size(); ++i) d_[i] += o.d_[i];
        return *this;
    }
    MatX& operator-=(const MatX& o) {
        for (std::size_t i = 0; i < d_.size(); ++i) d_[i] -= o.d_[i];
        return *this;
    }
    MatX& operator*=(double s) {
        for (double& v : d_) v *= s;
        return *this;
    }

private:
    std::size_t r_ = 0, c_ = 0;
    std::vector<double> d_;
};

inline MatX operator+(MatX a, const MatX& b) { return a += b; }
inline MatX operator-(MatX a, const MatX& b) { return a -= b; }
inline MatX operator*(MatX a, double s) { return a *= s; }
inline MatX operator*(double s, MatX a) { return a *= s; }

inline VecX operator*(const MatX& A, const VecX& v) {
    VecX r(A.rows());
    for (std::size_t i = 0; i < A.rows(); ++i) {
        double s = 0;
        for (std::size_t j = 0; j < A.cols(); ++j) s += A(i, j) * v[j];
        r[i] = s;
    }
    return r;
}
inline MatX operator*(const MatX& A, const MatX& B) {
    MatX r(A.rows(), B.cols());
    for (std::size_t i = 0; i < A.rows(); ++i)
        for (std::size_t j = 0; j < B.cols(); ++j) {
            double s = 0;
            for (std::size_t k = 0; k < A.cols(); ++k) s += A(i, k) * B(k, j);
            r(i, j) = s;
        }
    return r;
}
inline MatX transpose(const MatX& A) {
    MatX r(A.cols(), A.rows());
    for (std::size_t i = 0; i < A.rows(); ++i)
        for (std::size_t j = 0; j < A.cols(); ++j) r(j, i) = A(i, j);
    return r;
}
inline double frobenius(const MatX& A) {
    double s = 0;
    for (std::size_t i = 0; i < A.rows(); ++i)
        for (std::size_t j = 0; j < A.cols(); ++j) s += A(i, j) * A(i, j);
    return std::sqrt(s);
}
inline double asymmetry(const MatX& A) {
    double s = 0;
    for (std::size_t i = 0; i < A.rows(); ++i)
        for (std::size_t j = 0; j < A.cols(); ++j) {
            double d = A(i, j) - A(j, i);
            s += d * d;
        }
    return std::sqrt(s);
}

inline MatX matx_from(const Mat3& A) {
    MatX r(3, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r(i, j) = A.m[i][j];
    return r;
}
inline MatX matx_from(const Mat4& A) {
    MatX r(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) r(i, j) = A.m[i][j];
    return r;
}
inline VecX vecx_from(const Vec3& v) { return {v.x, v.y, v.z}; }
inline VecX vecx_from(const Vec4& v) { return {v.c[0], v.c[1], v.c[2], v.c[3]}; }
inline Vec4 vec4_from(const VecX& v) { return {v[0], v[1], v[2], v[3]}; }
inline Vec3 vec3_from(const VecX& v) { return {v[0], v[1], v[2]}; }

// ---------------------------------------------------------------- LU

struct LuDecomposition {
    MatX lu;
    std::vector<std::size_t> perm;
    int sign = 1;
};

inline LuDecomposition lu_factor(MatX A) {
    const std::size_t n = A.rows();
    if (A.cols() != n) throw InvalidArgument("lu_factor: matrix not square");
    LuDecomposition f;
    f.perm.resize(n);
    for (std::size_t i = 0; i < n; ++i) f.perm[i] = i;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        double best = std::abs(A(k, k));
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(A(i, k)) > best) { best = std::abs(A(i, k)); p = i; }
        if (best == 0.0) throw SingularMatrix("lu_factor: singular matrix");
        if (p != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(A(k, j), A(p, j));
            std::swap(f.perm[k], f.perm[p]);
            f.sign = -f.sign;
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            A(i, k) /= A(k, k);
            for (std::size_t j = k + 1; j < n; ++j) A(i, j) -= A(i, k) * A(k, j);
        }
    }
    f.lu = std::move(A);
    return f;
}

inline VecX lu_solve(const LuDecomposition& f, const VecX& b) {
    const std::size_t n = f.lu.rows();
    VecX y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[f.perm[i]];
        for (std::size_t j = 0; j < i; ++j) s -= f.lu(i, j) * y[j];
        y[i] = s;
    }
    for (std::size_t i = n; i-- > 0;) {
        double s = y[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= f.lu(i, j) * y[j];
        y[i] = s / f.lu(i, i);
    }
    return y;
}

inline VecX solve(const MatX& A, const VecX& b) { return lu_solve(lu_factor(A), b); }

inline MatX inverse(const MatX& A) {
    const std::size_t n = A.rows();
    LuDecomposition f = lu_factor(A);
    MatX inv(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        VecX e(n);
        e[j] = 1.0;
        VecX col = lu_solve(f, e);
        for (std::size_t i = 0; i < n; ++i) inv(i, j) = col[i];
    }
    return inv;
}

inline double determinant(const MatX& A) {
    LuDecomposition f;
    try {
        f = lu_factor(A);
    } catch (const SingularMatrix&) {
        return 0.0;
    }
    double d = f.sign;
    for (std::size_t i = 0; i < A.rows(); ++i) d *= f.lu(i, i);
    return d;
}
inline double determinant(const Mat4& A) { return determinant(matx_from(A)); }

// ------------------------------------------------------- symmetric eigen

struct SymEig {
    VecX eigenvalues;  // ascending
    MatX eigenvectors; // columns, orthonormal
};

/// Cyclic Jacobi rotations; intended for the small symmetric matrices
/// (n <= 8) that appear throughout.
inline SymEig jacobi_eigensym(MatX S) {
    const std::size_t n = S.rows();
    if (S.cols() != n) throw InvalidArgument("jacobi_eigensym: matrix not square");
    const double scale = frobenius(S);
    if (asymmetry(S) > 1e-12 * std::max(scale, 1.0))
        throw InvalidArgument("jacobi_eigensym: matrix not symmetric");

    MatX Q = MatX::identity(n);
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += S(i, j) * S(i, j);
        if (std::sqrt(2.0 * off) <= 1e-15 * std::max(scale, 1e-300)) break;

        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(S(p, q)) <= 1e-18 * std::max(scale, 1e-300)) continue;
                const double theta = (S(q, q) - S(p, p)) / (2.0 * S(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double skp = S(k, p), skq = S(k, q);
                    S(k, p) = c * skp - s * skq;
                    S(k, q) = s * skp + c * skq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double spk = S(p, k), sqk = S(q, k);
                    S(p, k) = c * spk - s * sqk;
                    S(q, k) = s * spk + c * sqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double qkp = Q(k, p), qkq = Q(k, q);
                    Q(k, p) = c * qkp - s * qkq;
                    Q(k, q) = s * qkp + c * qkq;
                }
            }
    }

    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return S(a, a) < S(b, b); });

    SymEig out;
    out.eigenvalues = VecX(n);
    out.eigenvectors = MatX(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        out.eigenvalues[j] = S(idx[j], idx[j]);
        for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, j) = Q(i, idx[j]);
    }
    return out;
}

/// Symmetric positive-definite square root, P*P = S.
inline MatX spd_sqrt(const MatX& S) {
    const double scale = std::max(frobenius(S), 1e-300);
    if (asymmetry(S) > 1e-12 * scale)
        throw InvalidArgument("spd_sqrt: matrix not symmetric");
    SymEig e = jacobi_eigensym(S);
    const std::size_t n = S.rows();
    for (std::size_t i = 0; i < n; ++i)
        if (e.eigenvalues[i] <= 0.0)
            throw NotPositiveDefinite("spd_sqrt: eigenvalue <= 0");
    MatX P(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0;
            for (std::size_t k = 0; k < n; ++k)
                s += e.eigenvectors(i, k) * std::sqrt(e.eigenvalues[k]) * e.eigenvectors(j, k);
            P(i, j) = s;
        }
    return P;
}

inline bool is_spd(const MatX& S, double tol = 0.0) {
    if (asymmetry(S) > 1e-10 * std::max(frobenius(S), 1.0)) return false;
    SymEig e = jacobi_eigensym(S);
    return e.eigenvalues[0] > tol;
}

} // namespace slowlab
