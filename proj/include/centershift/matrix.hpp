#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace centershift {

/// Dense row-major matrix of doubles; the numeric carrier for features,
/// parameters and batches. All arithmetic in this project is 64-bit.
struct Matrix2D {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;  // length rows * cols

    Matrix2D() = default;
    Matrix2D(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
    std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

    std::size_t size() const { return data.size(); }
    bool empty() const { return data.empty(); }
};

bool same_shape(const Matrix2D& a, const Matrix2D& b);

/// a [n x k] times b [k x m].
Matrix2D matmul(const Matrix2D& a, const Matrix2D& b);

/// a [n x k] times b transposed, where b is [m x k].
Matrix2D matmul_nt(const Matrix2D& a, const Matrix2D& b);

Matrix2D transpose(const Matrix2D& m);

/// Sum of squared component differences; vectors must have equal length.
double squared_euclidean(std::span<const double> a, std::span<const double> b);

/// max(0, x).
double rectifier(double x);

/// Sigmoid outputs are clamped into [kProbClamp, 1 - kProbClamp] so that
/// downstream logarithms stay finite.
inline constexpr double kProbClamp = 1e-7;

/// Logistic function, numerically stable and clamped (see kProbClamp).
double sigmoid(double x);

Matrix2D relu(const Matrix2D& m);
Matrix2D sigmoid(const Matrix2D& m);
Matrix2D add(const Matrix2D& a, const Matrix2D& b);
Matrix2D sub(const Matrix2D& a, const Matrix2D& b);
Matrix2D scale(const Matrix2D& m, double factor);

/// acc += factor * g. An empty acc is first initialized to g's shape.
void add_scaled(Matrix2D& acc, const Matrix2D& g, double factor = 1.0);

bool all_finite(const Matrix2D& m);

/// Central-difference gradient of f at params, one entry at a time:
/// (f(p + eps e_i) - f(p - eps e_i)) / (2 eps). This is the oracle the test
/// suites compare every hand-derived gradient against; it only ever calls f.
Matrix2D finite_diff_grad(const std::function<double(const Matrix2D&)>& f,
                          const Matrix2D& params, double eps);

}  // namespace centershift
