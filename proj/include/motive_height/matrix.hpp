#ifndef MOTIVE_HEIGHT_MATRIX_HPP
#define MOTIVE_HEIGHT_MATRIX_HPP

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace motive_height
{

/// Dense row-major matrix over an arbitrary scalar type.
///
/// The scalar only needs value semantics plus whatever arithmetic the caller
/// uses; the container itself performs no arithmetic except in the free
/// helpers below.
template <typename T>
class Matrix
{
public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols, const T &fill = T{})
        : m_rows(rows), m_cols(cols), m_data(rows * cols, fill)
    {
    }

    Matrix(std::initializer_list<std::initializer_list<T>> rows)
    {
        m_rows = rows.size();
        m_cols = m_rows ? rows.begin()->size() : 0;
        m_data.reserve(m_rows * m_cols);
        for (const auto &row : rows) {
            if (row.size() != m_cols) {
                throw std::invalid_argument("ragged matrix initializer");
            }
            for (const auto &x : row) {
                m_data.push_back(x);
            }
        }
    }

    static Matrix identity(std::size_t n, const T &one = T{1}, const T &zero = T{0})
    {
        Matrix m(n, n, zero);
        for (std::size_t i = 0; i < n; ++i) {
            m(i, i) = one;
        }
        return m;
    }

    std::size_t rows() const noexcept { return m_rows; }
    std::size_t cols() const noexcept { return m_cols; }
    bool empty() const noexcept { return m_data.empty(); }
    bool is_square() const noexcept { return m_rows == m_cols; }

    T &operator()(std::size_t i, std::size_t j) { return m_data[i * m_cols + j]; }
    const T &operator()(std::size_t i, std::size_t j) const { return m_data[i * m_cols + j]; }

    std::span<T> row(std::size_t i) { return {m_data.data() + i * m_cols, m_cols}; }
    std::span<const T> row(std::size_t i) const { return {m_data.data() + i * m_cols, m_cols}; }

    std::vector<T> column(std::size_t j) const
    {
        std::vector<T> out;
        out.reserve(m_rows);
        for (std::size_t i = 0; i < m_rows; ++i) {
            out.push_back((*this)(i, j));
        }
        return out;
    }

    Matrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const
    {
        if (r0 + nr > m_rows || c0 + nc > m_cols) {
            throw std::out_of_range("matrix block out of range");
        }
        Matrix out(nr, nc);
        for (std::size_t i = 0; i < nr; ++i) {
            for (std::size_t j = 0; j < nc; ++j) {
                out(i, j) = (*this)(r0 + i, c0 + j);
            }
        }
        return out;
    }

    Matrix columns(std::size_t c0, std::size_t nc) const { return block(0, c0, m_rows, nc); }

    Matrix transposed() const
    {
        Matrix out(m_cols, m_rows);
        for (std::size_t i = 0; i < m_rows; ++i) {
            for (std::size_t j = 0; j < m_cols; ++j) {
                out(j, i) = (*this)(i, j);
            }
        }
        return out;
    }

    void swap_rows(std::size_t a, std::size_t b)
    {
        if (a == b) {
            return;
        }
        for (std::size_t j = 0; j < m_cols; ++j) {
            std::swap((*this)(a, j), (*this)(b, j));
        }
    }

    void swap_cols(std::size_t a, std::size_t b)
    {
        if (a == b) {
            return;
        }
        for (std::size_t i = 0; i < m_rows; ++i) {
            std::swap((*this)(i, a), (*this)(i, b));
        }
    }

    template <typename F>
    auto map(F &&f) const -> Matrix<decltype(f(std::declval<const T &>()))>
    {
        Matrix<decltype(f(std::declval<const T &>()))> out(m_rows, m_cols);
        for (std::size_t i = 0; i < m_rows; ++i) {
            for (std::size_t j = 0; j < m_cols; ++j) {
                out(i, j) = f((*this)(i, j));
            }
        }
        return out;
    }

    friend bool operator==(const Matrix &a, const Matrix &b)
    {
        return a.m_rows == b.m_rows && a.m_cols == b.m_cols && a.m_data == b.m_data;
    }

private:
    std::size_t m_rows = 0;
    std::size_t m_cols = 0;
    std::vector<T> m_data;
};

template <typename T>
Matrix<T> operator*(const Matrix<T> &a, const Matrix<T> &b)
{
    if (a.cols() != b.rows()) {
        throw std::invalid_argument("matrix product dimension mismatch");
    }
    Matrix<T> out(a.rows(), b.cols(), T{0});
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const T &aik = a(i, k);
            for (std::size_t j = 0; j < b.cols(); ++j) {
                out(i, j) += aik * b(k, j);
            }
        }
    }
    return out;
}

template <typename T>
Matrix<T> operator+(const Matrix<T> &a, const Matrix<T> &b)
{
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw std::invalid_argument("matrix sum dimension mismatch");
    }
    Matrix<T> out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            out(i, j) = a(i, j) + b(i, j);
        }
    }
    return out;
}

template <typename T>
Matrix<T> operator-(const Matrix<T> &a, const Matrix<T> &b)
{
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw std::invalid_argument("matrix difference dimension mismatch");
    }
    Matrix<T> out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            out(i, j) = a(i, j) - b(i, j);
        }
    }
    return out;
}

template <typename T>
Matrix<T> scaled(const Matrix<T> &a, const T &c)
{
    return a.map([&](const T &x) { return T(x * c); });
}

/// Horizontal concatenation [a | b]; either side may have zero columns.
template <typename T>
Matrix<T> hconcat(const Matrix<T> &a, const Matrix<T> &b)
{
    if (a.cols() == 0) {
        return b;
    }
    if (b.cols() == 0) {
        return a;
    }
    if (a.rows() != b.rows()) {
        throw std::invalid_argument("hconcat row mismatch");
    }
    Matrix<T> out(a.rows(), a.cols() + b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            out(i, j) = a(i, j);
        }
        for (std::size_t j = 0; j < b.cols(); ++j) {
            out(i, a.cols() + j) = b(i, j);
        }
    }
    return out;
}

/// Block-diagonal assembly diag(a, b).
template <typename T>
Matrix<T> block_diagonal(const Matrix<T> &a, const Matrix<T> &b, const T &zero = T{0})
{
    Matrix<T> out(a.rows() + b.rows(), a.cols() + b.cols(), zero);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            out(i, j) = a(i, j);
        }
    }
    for (std::size_t i = 0; i < b.rows(); ++i) {
        for (std::size_t j = 0; j < b.cols(); ++j) {
            out(a.rows() + i, a.cols() + j) = b(i, j);
        }
    }
    return out;
}

/// Returns the matrix whose row i is row perm[i] of m.
template <typename T>
Matrix<T> permute_rows(const Matrix<T> &m, std::span<const std::size_t> perm)
{
    Matrix<T> out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            out(i, j) = m(perm[i], j);
        }
    }
    return out;
}

/// Returns the matrix whose column j is column perm[j] of m.
template <typename T>
Matrix<T> permute_cols(const Matrix<T> &m, std::span<const std::size_t> perm)
{
    Matrix<T> out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            out(i, j) = m(i, perm[j]);
        }
    }
    return out;
}

} // namespace motive_height

#endif
