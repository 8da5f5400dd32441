#include "diracq/linalg.hpp"

#include <algorithm>
#include <numeric>

namespace diracq {

namespace {

std::vector<std::size_t> column_sequence(std::size_t n, PivotOrder order) {
    std::vector<std::size_t> seq(n);
    std::iota(seq.begin(), seq.end(), 0);
    if (order == PivotOrder::HighestIndexFirst) std::reverse(seq.begin(), seq.end());
    return seq;
}

// Index of the pivot row for column c among rows [from, R); constants preferred.
std::optional<std::size_t> find_pivot(Matrix& m, std::size_t from, std::size_t c) {
    std::optional<std::size_t> first;
    for (std::size_t i = from; i < m.rows(); ++i) {
        Expr& e = m(i, c);
        if (e.is_canonical_zero()) continue;
        if (e.as_rational()) return i;
        if (is_zero(e)) {
            e = Expr();
            continue;
        }
        if (!first) first = i;
    }
    return first;
}

void back_substitute(const Echelon& ech, std::vector<Expr>& x, const std::vector<Expr>* rhs) {
    const Matrix& m = ech.reduced;
    for (std::size_t k = ech.rank(); k-- > 0;) {
        const std::size_t pc = ech.pivot_cols[k];
        Expr s = rhs ? (*rhs)[k] : Expr();
        for (std::size_t j = 0; j < x.size(); ++j) {
            if (j == pc || x[j].is_canonical_zero() || m(k, j).is_canonical_zero()) continue;
            s -= m(k, j) * x[j];
        }
        x[pc] = s / m(k, pc);
    }
}

}  // namespace

Echelon row_echelon(const Matrix& a, PivotOrder order, std::optional<std::size_t> search_cols) {
    Echelon out;
    out.reduced = a;
    Matrix& m = out.reduced;
    const std::size_t R = m.rows();
    const std::size_t C = m.cols();
    out.row_origin.resize(R);
    std::iota(out.row_origin.begin(), out.row_origin.end(), 0);
    Expr prev(1);
    std::size_t r = 0;
    for (std::size_t c : column_sequence(search_cols.value_or(C), order)) {
        if (r == R) break;
        auto p = find_pivot(m, r, c);
        if (!p) continue;
        if (*p != r) {
            for (std::size_t j = 0; j < C; ++j) std::swap(m(r, j), m(*p, j));
            std::swap(out.row_origin[r], out.row_origin[*p]);
        }
        const Expr piv = m(r, c);
        for (std::size_t i = r + 1; i < R; ++i) {
            const Expr f = m(i, c);
            for (std::size_t j = 0; j < C; ++j) {
                if (j == c) continue;
                Expr v = piv * m(i, j);
                if (!f.is_canonical_zero() && !m(r, j).is_canonical_zero()) v -= f * m(r, j);
                m(i, j) = v.is_canonical_zero() ? v : v / prev;
            }
            m(i, c) = Expr();
        }
        out.pivots.push_back(piv);
        out.pivot_cols.push_back(c);
        prev = piv;
        ++r;
    }
    return out;
}

SolveResult solve(const Matrix& a, const std::vector<Expr>& b, PivotOrder order) {
    const std::size_t R = a.rows();
    const std::size_t C = a.cols();
    Matrix aug(R, C + 1);
    for (std::size_t i = 0; i < R; ++i) {
        for (std::size_t j = 0; j < C; ++j) aug(i, j) = a(i, j);
        aug(i, C) = b[i];
    }
    Echelon ech = row_echelon(aug, order, C);
    SolveResult res;
    res.pivots = ech.pivots;
    for (std::size_t k = ech.rank(); k < R; ++k) {
        const Expr& v = ech.reduced(k, C);
        if (!is_zero(v)) {
            res.consistent = false;
            res.witness_row = ech.row_origin[k];
            res.witness_residual = v;
            return res;
        }
    }
    std::vector<Expr> rhs(ech.rank());
    for (std::size_t k = 0; k < ech.rank(); ++k) rhs[k] = ech.reduced(k, C);
    res.x.assign(C, Expr());
    back_substitute(ech, res.x, &rhs);
    res.consistent = true;
    return res;
}

std::vector<std::vector<Expr>> null_space(const Matrix& a, PivotOrder order) {
    Echelon ech = row_echelon(a, order);
    std::vector<bool> is_pivot(a.cols(), false);
    for (std::size_t c : ech.pivot_cols) is_pivot[c] = true;
    std::vector<std::vector<Expr>> basis;
    for (std::size_t f = 0; f < a.cols(); ++f) {
        if (is_pivot[f]) continue;
        std::vector<Expr> x(a.cols());
        x[f] = Expr(1);
        back_substitute(ech, x, nullptr);
        basis.push_back(std::move(x));
    }
    return basis;
}

std::size_t rank(const Matrix& a) { return row_echelon(a, PivotOrder::LowestIndexFirst).rank(); }

std::vector<std::string> degeneracy_locus(const std::vector<Expr>& pivots) {
    std::vector<std::string> out;
    Expr prev(1);
    for (const Expr& p : pivots) {
        // successive Bareiss pivots are leading minors; their ratio is the step pivot
        Expr n = (p / prev).monic_numerator();
        prev = p;
        if (n.as_rational()) continue;
        std::string s = n.str();
        if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
    }
    return out;
}

}  // namespace diracq
