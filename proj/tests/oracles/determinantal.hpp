#ifndef ORACLES_DETERMINANTAL_HPP
#define ORACLES_DETERMINANTAL_HPP

// Elementary divisors from determinantal divisors: d_1···d_k = gcd of all
// k x k minors. Plain 64-bit arithmetic, exponential in the size; only for
// small matrices with small entries.

#include <cstdint>
#include <numeric>
#include <vector>

namespace oracle
{

using Mat = std::vector<std::vector<long long>>;

inline long long det_small(const Mat &m)
{
    const std::size_t n = m.size();
    if (n == 0) {
        return 1;
    }
    if (n == 1) {
        return m[0][0];
    }
    long long out = 0;
    for (std::size_t j = 0; j < n; ++j) {
        Mat minor;
        for (std::size_t i = 1; i < n; ++i) {
            std::vector<long long> row;
            for (std::size_t c = 0; c < n; ++c) {
                if (c != j) {
                    row.push_back(m[i][c]);
                }
            }
            minor.push_back(row);
        }
        long long term = m[0][j] * det_small(minor);
        out += (j % 2 == 0) ? term : -term;
    }
    return out;
}

inline void subsets(std::size_t n, std::size_t k, std::size_t start, std::vector<std::size_t> &cur,
                    std::vector<std::vector<std::size_t>> &out)
{
    if (cur.size() == k) {
        out.push_back(cur);
        return;
    }
    for (std::size_t i = start; i < n; ++i) {
        cur.push_back(i);
        subsets(n, k, i + 1, cur, out);
        cur.pop_back();
    }
}

/// Elementary divisors d_1 | d_2 | ... (nonzero ones only, then zeros up to
/// min(rows, cols)).
inline std::vector<long long> elementary_divisors(const Mat &m)
{
    const std::size_t rows = m.size();
    const std::size_t cols = rows ? m[0].size() : 0;
    const std::size_t kmax = std::min(rows, cols);
    std::vector<long long> det_div{1};
    for (std::size_t k = 1; k <= kmax; ++k) {
        std::vector<std::vector<std::size_t>> rs, cs;
        std::vector<std::size_t> cur;
        subsets(rows, k, 0, cur, rs);
        subsets(cols, k, 0, cur, cs);
        long long g = 0;
        for (const auto &r : rs) {
            for (const auto &c : cs) {
                Mat sub;
                for (auto i : r) {
                    std::vector<long long> row;
                    for (auto j : c) {
                        row.push_back(m[i][j]);
                    }
                    sub.push_back(row);
                }
                g = std::gcd(g, det_small(sub));
            }
        }
        det_div.push_back(g);
    }
    std::vector<long long> out;
    for (std::size_t k = 1; k <= kmax; ++k) {
        out.push_back(det_div[k] == 0 ? 0 : det_div[k] / det_div[k - 1]);
    }
    return out;
}

} // namespace oracle

#endif
