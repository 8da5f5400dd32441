#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "diracq/expr.hpp"

namespace diracq {

class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    Expr& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const Expr& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Expr> data_;
};

// Order in which columns are tried as pivots. Free variables of a
// particular solution are the columns never chosen.
enum class PivotOrder { LowestIndexFirst, HighestIndexFirst };

struct Echelon {
    Matrix reduced;                       // fraction-free row echelon form
    std::vector<std::size_t> pivot_cols;  // one per pivot row, in row order
    std::vector<std::size_t> row_origin;  // original index of each reduced row
    std::vector<Expr> pivots;
    std::size_t rank() const { return pivot_cols.size(); }
};

// Fraction-free (Bareiss) elimination over the expression field. Only the
// first `search_cols` columns are eligible as pivots (defaults to all).
Echelon row_echelon(const Matrix& a, PivotOrder order, std::optional<std::size_t> search_cols = std::nullopt);

struct SolveResult {
    bool consistent = false;
    std::vector<Expr> x;                     // free variables set to zero
    std::optional<std::size_t> witness_row;  // original row of an inconsistent equation
    Expr witness_residual;
    std::vector<Expr> pivots;
};

SolveResult solve(const Matrix& a, const std::vector<Expr>& b, PivotOrder order);
std::vector<std::vector<Expr>> null_space(const Matrix& a, PivotOrder order);
std::size_t rank(const Matrix& a);

// Non-constant numerators of the pivots: the generic rank drops on their zero set.
std::vector<std::string> degeneracy_locus(const std::vector<Expr>& pivots);

}  // namespace diracq
