#include "flair/matrix.hpp"

#include <cblas.h>
#include <cmath>

#include "flair/errors.hpp"

namespace flair {

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows)
        throw dimension_error("matmul: " + a.shape_str() + " * " + b.shape_str());
    Matrix c(a.rows, b.cols);
    cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasNoTrans, a.rows, b.cols, a.cols, 1.0,
                a.data.data(), a.cols, b.data.data(), b.cols, 0.0, c.data.data(), c.cols);
    return c;
}

void matmul_into(const Matrix& a, const Matrix& b, Matrix& out) {
    if (a.cols != b.rows)
        throw dimension_error("matmul: " + a.shape_str() + " * " + b.shape_str());
    ensure_shape(out, a.rows, b.cols);
    cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasNoTrans, a.rows, b.cols, a.cols, 1.0,
                a.data.data(), a.cols, b.data.data(), b.cols, 0.0, out.data.data(), out.cols);
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    if (a.rows != b.rows)
        throw dimension_error("matmul_tn: " + a.shape_str() + "^T * " + b.shape_str());
    Matrix c(a.cols, b.cols);
    cblas_dgemm(CblasRowMajor, CblasTrans, CblasNoTrans, a.cols, b.cols, a.rows, 1.0,
                a.data.data(), a.cols, b.data.data(), b.cols, 0.0, c.data.data(), c.cols);
    return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    if (a.cols != b.cols)
        throw dimension_error("matmul_nt: " + a.shape_str() + " * " + b.shape_str() + "^T");
    Matrix c(a.rows, b.rows);
    cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasTrans, a.rows, b.rows, a.cols, 1.0,
                a.data.data(), a.cols, b.data.data(), b.cols, 0.0, c.data.data(), c.cols);
    return c;
}

Matrix matmul_reference(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows)
        throw dimension_error("matmul_reference: " + a.shape_str() + " * " + b.shape_str());
    Matrix c(a.rows, b.cols);
    for (int i = 0; i < a.rows; ++i)
        for (int k = 0; k < a.cols; ++k) {
            const double aik = a.at(i, k);
            for (int j = 0; j < b.cols; ++j) c.at(i, j) += aik * b.at(k, j);
        }
    return c;
}

void add_row_inplace(Matrix& out, const Matrix& row) {
    if (row.rows != 1 || row.cols != out.cols)
        throw dimension_error("add_row_inplace: " + out.shape_str() + " += " + row.shape_str());
    for (int r = 0; r < out.rows; ++r)
        for (int c = 0; c < out.cols; ++c) out.at(r, c) += row.data[c];
}

bool all_finite(const Matrix& m) {
    for (double v : m.data)
        if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace flair
