#include "centershift/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "centershift/errors.hpp"

namespace centershift {

namespace {

std::string shape_string(const Matrix2D& m) {
    return std::to_string(m.rows) + "x" + std::to_string(m.cols);
}

void require_same_shape(const Matrix2D& a, const Matrix2D& b, const char* op) {
    if (!same_shape(a, b)) {
        throw config_error(std::string(op) + ": shape mismatch " + shape_string(a) +
                           " vs " + shape_string(b));
    }
}

}  // namespace

bool same_shape(const Matrix2D& a, const Matrix2D& b) {
    return a.rows == b.rows && a.cols == b.cols;
}

Matrix2D matmul(const Matrix2D& a, const Matrix2D& b) {
    if (a.cols != b.rows) {
        throw config_error("matmul: dimension mismatch " + shape_string(a) + " vs " +
                           shape_string(b));
    }
    Matrix2D out(a.rows, b.cols, 0.0);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* arow = a.data.data() + i * a.cols;
        double* orow = out.data.data() + i * out.cols;
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = arow[k];
            if (aik == 0.0) continue;
            const double* brow = b.data.data() + k * b.cols;
            for (std::size_t j = 0; j < b.cols; ++j) {
                orow[j] += aik * brow[j];
            }
        }
    }
    return out;
}

Matrix2D matmul_nt(const Matrix2D& a, const Matrix2D& b) {
    if (a.cols != b.cols) {
        throw config_error("matmul_nt: dimension mismatch " + shape_string(a) + " vs " +
                           shape_string(b) + " transposed");
    }
    Matrix2D out(a.rows, b.rows, 0.0);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* arow = a.data.data() + i * a.cols;
        double* orow = out.data.data() + i * out.cols;
        for (std::size_t j = 0; j < b.rows; ++j) {
            const double* brow = b.data.data() + j * b.cols;
            double acc = 0.0;
            for (std::size_t k = 0; k < a.cols; ++k) acc += arow[k] * brow[k];
            orow[j] = acc;
        }
    }
    return out;
}

Matrix2D transpose(const Matrix2D& m) {
    Matrix2D out(m.cols, m.rows);
    for (std::size_t i = 0; i < m.rows; ++i) {
        for (std::size_t j = 0; j < m.cols; ++j) out(j, i) = m(i, j);
    }
    return out;
}

double squared_euclidean(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw config_error("squared_euclidean: length mismatch " + std::to_string(a.size()) +
                           " vs " + std::to_string(b.size()));
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

double rectifier(double x) { return x > 0.0 ? x : 0.0; }

double sigmoid(double x) {
    double s;
    if (x >= 0.0) {
        s = 1.0 / (1.0 + std::exp(-x));
    } else {
        const double e = std::exp(x);
        s = e / (1.0 + e);
    }
    return std::clamp(s, kProbClamp, 1.0 - kProbClamp);
}

Matrix2D relu(const Matrix2D& m) {
    Matrix2D out = m;
    for (double& v : out.data) v = rectifier(v);
    return out;
}

Matrix2D sigmoid(const Matrix2D& m) {
    Matrix2D out = m;
    for (double& v : out.data) v = sigmoid(v);
    return out;
}

Matrix2D add(const Matrix2D& a, const Matrix2D& b) {
    require_same_shape(a, b, "add");
    Matrix2D out = a;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += b.data[i];
    return out;
}

Matrix2D sub(const Matrix2D& a, const Matrix2D& b) {
    require_same_shape(a, b, "sub");
    Matrix2D out = a;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] -= b.data[i];
    return out;
}

Matrix2D scale(const Matrix2D& m, double factor) {
    Matrix2D out = m;
    for (double& v : out.data) v *= factor;
    return out;
}

void add_scaled(Matrix2D& acc, const Matrix2D& g, double factor) {
    if (acc.empty()) acc = Matrix2D(g.rows, g.cols, 0.0);
    require_same_shape(acc, g, "add_scaled");
    for (std::size_t i = 0; i < acc.data.size(); ++i) acc.data[i] += factor * g.data[i];
}

bool all_finite(const Matrix2D& m) {
    return std::all_of(m.data.begin(), m.data.end(), [](double v) { return std::isfinite(v); });
}

Matrix2D finite_diff_grad(const std::function<double(const Matrix2D&)>& f,
                          const Matrix2D& params, double eps) {
    if (!(eps > 0.0)) throw config_error("finite_diff_grad: eps must be positive");
    Matrix2D grad(params.rows, params.cols, 0.0);
    Matrix2D probe = params;
    for (std::size_t i = 0; i < probe.data.size(); ++i) {
        const double saved = probe.data[i];
        probe.data[i] = saved + eps;
        const double up = f(probe);
        probe.data[i] = saved - eps;
        const double down = f(probe);
        probe.data[i] = saved;
        if (!std::isfinite(up) || !std::isfinite(down)) {
            throw numeric_error("finite_diff_grad: non-finite evaluation at entry " +
                                std::to_string(i));
        }
        grad.data[i] = (up - down) / (2.0 * eps);
    }
    return grad;
}

}  // namespace centershift
