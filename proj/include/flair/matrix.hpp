#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace flair {

// Dense row-major matrix of f64. Doubles as a 2D image-plane buffer
// (rows = height, cols = width) for the wavelet/filter code.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {}
    Matrix(int r, int c, double fill)
        : rows(r), cols(c), data(static_cast<size_t>(r) * c, fill) {}

    static Matrix zeros(int r, int c) { return Matrix(r, c); }
    static Matrix scalar(double v) {
        Matrix m(1, 1);
        m.data[0] = v;
        return m;
    }

    double& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }

    size_t size() const { return data.size(); }
    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
    std::string shape_str() const {
        return std::to_string(rows) + "x" + std::to_string(cols);
    }
};

// C = A * B (BLAS-backed). Throws dimension_error on inner mismatch.
Matrix matmul(const Matrix& a, const Matrix& b);
// Same, writing into a caller-owned buffer (resized if needed).
void matmul_into(const Matrix& a, const Matrix& b, Matrix& out);

// Reallocates only on shape change; contents are unspecified afterwards.
inline void ensure_shape(Matrix& m, int r, int c) {
    if (m.rows != r || m.cols != c) m = Matrix(r, c);
}
// C = A^T * B and C = A * B^T, used by the backward pass.
Matrix matmul_tn(const Matrix& a, const Matrix& b);
Matrix matmul_nt(const Matrix& a, const Matrix& b);

// Naive triple loop, kept as an independent cross-check for the BLAS path.
Matrix matmul_reference(const Matrix& a, const Matrix& b);

// out[r,:] += row for every r; row must be 1 x cols.
void add_row_inplace(Matrix& out, const Matrix& row);

bool all_finite(const Matrix& m);

}  // namespace flair
