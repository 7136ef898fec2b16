#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace ebnc {

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;

using IntMatrix = std::vector<std::vector<BigInt>>;

// Row-space presentation of an integer matrix: the nonzero rows of the
// reduced row echelon form, rescaled to primitive integer vectors.
//
// Row k is pivot_value[k] times the unit-pivot RREF row, so for any vector v
// in the row space, v = sum_k (v[pivot_col[k]] / pivot_value[k]) * row[k].
struct RowBasis {
    std::size_t rank = 0;
    std::vector<std::vector<BigInt>> rows;
    std::vector<std::size_t> pivot_cols;
    std::vector<BigInt> pivot_values;  // entry of rows[k] at pivot_cols[k]; > 0
};

namespace detail {

inline BigInt exact_div(const BigInt& numerator, const BigInt& divisor) {
    BigInt quotient, remainder;
    boost::multiprecision::divide_qr(numerator, divisor, quotient, remainder);
    if (remainder != 0) throw std::logic_error("exact_div: inexact division in elimination");
    return quotient;
}

}  // namespace detail

// Fraction-free (Bareiss) forward elimination. Transforms `a` in place to row
// echelon form with integer entries and returns the pivot columns in order.
// Pivot selection is the first nonzero entry scanning rows top-down, so the
// result is deterministic.
inline std::vector<std::size_t> bareiss_echelon(IntMatrix& a) {
    std::vector<std::size_t> pivot_cols;
    if (a.empty()) return pivot_cols;
    const std::size_t rows = a.size();
    const std::size_t cols = a[0].size();
    BigInt previous_pivot = 1;
    std::size_t pivot_row = 0;
    for (std::size_t col = 0; col < cols && pivot_row < rows; ++col) {
        std::size_t found = rows;
        for (std::size_t r = pivot_row; r < rows; ++r) {
            if (a[r][col] != 0) {
                found = r;
                break;
            }
        }
        if (found == rows) continue;
        if (found != pivot_row) std::swap(a[found], a[pivot_row]);
        const BigInt pivot = a[pivot_row][col];
        for (std::size_t r = pivot_row + 1; r < rows; ++r) {
            const BigInt factor = a[r][col];
            for (std::size_t c = col + 1; c < cols; ++c) {
                a[r][c] = detail::exact_div(pivot * a[r][c] - factor * a[pivot_row][c],
                                            previous_pivot);
            }
            a[r][col] = 0;
        }
        previous_pivot = pivot;
        pivot_cols.push_back(col);
        ++pivot_row;
    }
    return pivot_cols;
}

inline std::size_t integer_rank(IntMatrix a) { return bareiss_echelon(a).size(); }

// Reduced row basis: Bareiss forward elimination, then exact back-elimination
// over rationals, then rescaling of each row to a primitive integer vector
// with positive pivot.
inline RowBasis reduced_row_basis(IntMatrix a) {
    RowBasis basis;
    basis.pivot_cols = bareiss_echelon(a);
    basis.rank = basis.pivot_cols.size();
    if (basis.rank == 0) return basis;
    const std::size_t cols = a[0].size();

    std::vector<std::vector<BigRational>> reduced(basis.rank,
                                                  std::vector<BigRational>(cols));
    for (std::size_t r = 0; r < basis.rank; ++r)
        for (std::size_t c = 0; c < cols; ++c) reduced[r][c] = BigRational(a[r][c]);

    for (std::size_t k = basis.rank; k-- > 0;) {
        const std::size_t p = basis.pivot_cols[k];
        const BigRational pivot = reduced[k][p];
        for (std::size_t c = 0; c < cols; ++c) reduced[k][c] /= pivot;
        for (std::size_t r = 0; r < k; ++r) {
            const BigRational factor = reduced[r][p];
            if (factor == 0) continue;
            for (std::size_t c = 0; c < cols; ++c)
                reduced[r][c] -= factor * reduced[k][c];
        }
    }

    basis.rows.assign(basis.rank, std::vector<BigInt>(cols));
    basis.pivot_values.resize(basis.rank);
    for (std::size_t r = 0; r < basis.rank; ++r) {
        BigInt scale = 1;
        for (std::size_t c = 0; c < cols; ++c)
            scale = boost::multiprecision::lcm(scale,
                                               boost::multiprecision::denominator(reduced[r][c]));
        BigInt common = 0;
        std::vector<BigInt> row(cols);
        for (std::size_t c = 0; c < cols; ++c) {
            row[c] = boost::multiprecision::numerator(reduced[r][c] * BigRational(scale));
            common = boost::multiprecision::gcd(common, row[c]);
        }
        if (common > 1)
            for (auto& entry : row) entry = detail::exact_div(entry, common);
        basis.rows[r] = std::move(row);
        basis.pivot_values[r] = basis.rows[r][basis.pivot_cols[r]];
        // Unit pivot in the RREF was +1, so the primitive pivot stays positive.
        if (basis.pivot_values[r] <= 0)
            throw std::logic_error("reduced_row_basis: nonpositive pivot");
    }
    return basis;
}

// Coordinates of `v` (a member of the row space) with respect to the basis:
// v = sum_k coord[k] * rows[k]. Exact when v really lies in the row space.
inline std::vector<BigRational> row_space_coordinates(const RowBasis& basis,
                                                      const std::vector<BigInt>& v) {
    std::vector<BigRational> coords(basis.rank);
    for (std::size_t k = 0; k < basis.rank; ++k)
        coords[k] = BigRational(v[basis.pivot_cols[k]], basis.pivot_values[k]);
    return coords;
}

}  // namespace ebnc
