// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the hdrsel Project.

#include "hdrsel/interval_cover.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

#include <json.hpp>

namespace hdrsel {

void WeightedInstance::validate() const {
    if (n < 0)
        throw DomainError("instance: negative column count");
    if (weights.size() != static_cast<std::size_t>(n))
        throw DomainError("instance: expected one weight per column");
    for (double w : weights)
        if (!(w > 0.0) || !std::isfinite(w))
            throw DomainError("instance: weights must be positive and finite");
    for (const auto& r : rows)
        if (r.lo < 1 || r.lo > r.hi || r.hi > n)
            throw DomainError("instance: row interval outside [1, n]");
}

WeightedInstance WeightedInstance::from_coverage(const CoverageInstance& cov, std::span<const double> weights) {
    WeightedInstance inst;
    inst.n = cov.n;
    inst.weights.assign(weights.begin(), weights.end());
    inst.rows.reserve(cov.rows.size());
    for (const auto& r : cov.rows)
        inst.rows.push_back({r.lo, r.hi, r.multiplicity});
    inst.validate();
    return inst;
}

WeightedInstance WeightedInstance::unit(int n, std::vector<Interval> rows) {
    WeightedInstance inst{n, std::move(rows), std::vector<double>(static_cast<std::size_t>(n), 1.0)};
    inst.validate();
    return inst;
}

double selection_cost(const WeightedInstance& inst, std::span<const int> columns) {
    double sum = 0.0;
    for (int c : columns)
        sum += inst.weight(c);
    return sum;
}

Reduction reduce(const WeightedInstance& inst) {
    inst.validate();
    const int n = inst.n;
    const std::size_t m = inst.rows.size();

    std::vector<char> col_alive(static_cast<std::size_t>(n) + 1, 1);
    col_alive[0] = 0;
    std::vector<char> row_alive(m, 1);
    ReductionTrace trace;

    struct Compact {
        int a, b; // 0-based positions among surviving columns
        std::size_t row;
    };

    bool changed = true;
    while (changed) {
        changed = false;

        // Position of each surviving column and, per original column, the
        // nearest surviving position at or after / at or before it.
        std::vector<int> alive;
        for (int j = 1; j <= n; ++j)
            if (col_alive[static_cast<std::size_t>(j)])
                alive.push_back(j);
        std::vector<int> next_pos(static_cast<std::size_t>(n) + 2, static_cast<int>(alive.size()));
        std::vector<int> prev_pos(static_cast<std::size_t>(n) + 2, -1);
        for (int j = n, q = static_cast<int>(alive.size()) - 1; j >= 1; --j) {
            if (q >= 0 && alive[static_cast<std::size_t>(q)] == j) {
                next_pos[static_cast<std::size_t>(j)] = q;
                --q;
            } else {
                next_pos[static_cast<std::size_t>(j)] = next_pos[static_cast<std::size_t>(j) + 1];
            }
        }
        for (int j = 1, q = 0; j <= n; ++j) {
            if (q < static_cast<int>(alive.size()) && alive[static_cast<std::size_t>(q)] == j) {
                prev_pos[static_cast<std::size_t>(j)] = q;
                ++q;
            } else {
                prev_pos[static_cast<std::size_t>(j)] = prev_pos[static_cast<std::size_t>(j) - 1];
            }
        }

        std::vector<Compact> rows;
        for (std::size_t i = 0; i < m; ++i) {
            if (!row_alive[i])
                continue;
            const auto& r = inst.rows[i];
            rows.push_back({next_pos[static_cast<std::size_t>(r.lo)], prev_pos[static_cast<std::size_t>(r.hi)], i});
        }

        // Row dominance. Sweep rows by decreasing start; every row already
        // seen starts no earlier, so the one with the smallest end is a
        // subset candidate for the current row.
        std::sort(rows.begin(), rows.end(), [](const Compact& x, const Compact& y) {
            if (x.a != y.a)
                return x.a > y.a;
            if (x.b != y.b)
                return x.b < y.b;
            return x.row < y.row;
        });
        const Compact* min_end = nullptr;
        std::vector<Compact> kept;
        for (const auto& r : rows) {
            if (min_end && min_end->b <= r.b) {
                row_alive[r.row] = 0;
                trace.removed_rows.push_back({r.row, min_end->row});
                changed = true;
                continue;
            }
            kept.push_back(r);
            min_end = &r;
        }

        // Column dominance. Surviving rows are pairwise non-nested, so sorted
        // by start they are sorted by end as well and each column's row set
        // is a contiguous range [s, e] of that order.
        std::sort(kept.begin(), kept.end(), [](const Compact& x, const Compact& y) { return x.a < y.a; });
        const auto k = alive.size();
        std::vector<int> s(k), e(k);
        for (std::size_t q = 0; q < k; ++q) {
            const int pos = static_cast<int>(q);
            s[q] = static_cast<int>(std::partition_point(kept.begin(), kept.end(),
                                                         [&](const Compact& r) { return r.b < pos; }) -
                                    kept.begin());
            e[q] = static_cast<int>(std::partition_point(kept.begin(), kept.end(),
                                                         [&](const Compact& r) { return r.a <= pos; }) -
                                    kept.begin()) -
                   1;
        }
        auto subset = [&](std::size_t x, std::size_t y) {
            return s[x] > e[x] || (s[y] <= s[x] && e[x] <= e[y]);
        };
        std::vector<char> gone(k, 0);
        for (std::size_t x = 0; x < k; ++x) {
            const double wx = inst.weight(alive[x]);
            for (std::size_t y = 0; y < k; ++y) {
                if (y == x || gone[y])
                    continue;
                const double wy = inst.weight(alive[y]);
                if (!subset(x, y) || wx < wy)
                    continue;
                const bool mutual = subset(y, x) && wy >= wx;
                if (mutual && y > x)
                    continue;
                gone[x] = 1;
                col_alive[static_cast<std::size_t>(alive[x])] = 0;
                trace.removed_columns.push_back({alive[x], alive[y]});
                changed = true;
                break;
            }
        }
    }

    Reduction out;
    std::vector<int> position(static_cast<std::size_t>(n) + 1, 0);
    for (int j = 1; j <= n; ++j) {
        if (!col_alive[static_cast<std::size_t>(j)])
            continue;
        out.column_map.push_back(j);
        position[static_cast<std::size_t>(j)] = static_cast<int>(out.column_map.size());
        out.instance.weights.push_back(inst.weight(j));
    }
    out.instance.n = static_cast<int>(out.column_map.size());
    for (std::size_t i = 0; i < m; ++i) {
        if (!row_alive[i])
            continue;
        const auto& r = inst.rows[i];
        int lo = 0, hi = 0;
        for (int j = r.lo; j <= r.hi; ++j) {
            if (position[static_cast<std::size_t>(j)] == 0)
                continue;
            if (lo == 0)
                lo = position[static_cast<std::size_t>(j)];
            hi = position[static_cast<std::size_t>(j)];
        }
        out.instance.rows.push_back({lo, hi, r.multiplicity});
        out.row_map.push_back(i);
    }
    out.trace = std::move(trace);
    out.instance.validate();
    return out;
}

Selection solve_weighted(const WeightedInstance& inst) {
    inst.validate();
    const int n = inst.n;
    constexpr int kNone = std::numeric_limits<int>::max();

    // min_hi[i]: smallest right end among rows starting after column i.
    std::vector<int> min_hi(static_cast<std::size_t>(n) + 2, kNone);
    for (const auto& r : inst.rows) {
        auto& slot = min_hi[static_cast<std::size_t>(r.lo) - 1];
        slot = std::min(slot, r.hi);
    }
    for (int i = n - 1; i >= 0; --i)
        min_hi[static_cast<std::size_t>(i)] =
            std::min(min_hi[static_cast<std::size_t>(i)], min_hi[static_cast<std::size_t>(i) + 1]);

    // Best path from node i to node n+1, with the first pick after i.
    struct Best {
        double cost;
        int count;
        int next;
    };
    std::vector<Best> best(static_cast<std::size_t>(n) + 2, {0.0, 0, -1});
    for (int i = n; i >= 0; --i) {
        const int reach = min_hi[static_cast<std::size_t>(i)];
        Best b{std::numeric_limits<double>::infinity(), 0, -1};
        const int last = reach == kNone ? n : std::min(reach, n);
        for (int j = i + 1; j <= last; ++j) {
            const auto& tail = best[static_cast<std::size_t>(j)];
            const double cost = inst.weight(j) + tail.cost;
            const int count = tail.count + 1;
            if (cost < b.cost || (cost == b.cost && count < b.count))
                b = {cost, count, j};
        }
        if (reach == kNone && (0.0 < b.cost || (0.0 == b.cost && 0 < b.count)))
            b = {0.0, 0, n + 1};
        best[static_cast<std::size_t>(i)] = b;
    }

    Selection sel;
    for (int at = best[0].next; at >= 1 && at <= n; at = best[static_cast<std::size_t>(at)].next)
        sel.columns.push_back(at);
    sel.total_cost = selection_cost(inst, sel.columns);
    return sel;
}

Selection brute_force(const WeightedInstance& inst) {
    inst.validate();
    const int n = inst.n;
    if (n > kBruteForceMaxColumns)
        throw DomainError("brute_force: refusing n > " + std::to_string(kBruteForceMaxColumns));

    std::vector<std::uint32_t> masks;
    for (const auto& r : inst.rows)
        masks.push_back(((1u << (r.hi - r.lo + 1)) - 1u) << (r.lo - 1));
    std::sort(masks.begin(), masks.end());
    masks.erase(std::unique(masks.begin(), masks.end()), masks.end());

    bool found = false;
    std::uint32_t best_mask = 0;
    double best_cost = 0.0;
    const std::uint32_t limit = n == 0 ? 1u : (1u << n);
    for (std::uint32_t mask = 0; mask < limit; ++mask) {
        bool feasible = true;
        for (auto rm : masks)
            if ((rm & mask) == 0) {
                feasible = false;
                break;
            }
        if (!feasible)
            continue;
        double cost = 0.0;
        for (int j = 0; j < n; ++j)
            if (mask & (1u << j))
                cost += inst.weights[static_cast<std::size_t>(j)];
        bool better = !found || cost < best_cost;
        if (found && cost == best_cost) {
            const int pc = std::popcount(mask), pb = std::popcount(best_mask);
            if (pc != pb) {
                better = pc < pb;
            } else {
                // Equal size: the set holding the lowest differing column is
                // lexicographically smaller.
                const std::uint32_t diff = mask ^ best_mask;
                better = diff != 0 && (mask & (diff & (~diff + 1u))) != 0;
            }
        }
        if (better) {
            found = true;
            best_mask = mask;
            best_cost = cost;
        }
    }

    Selection sel;
    for (int j = 0; j < n; ++j)
        if (best_mask & (1u << j))
            sel.columns.push_back(j + 1);
    sel.total_cost = selection_cost(inst, sel.columns);
    return sel;
}

bool verify_cover(const WeightedInstance& inst, const Selection& sel) {
    const auto& cols = sel.columns;
    for (std::size_t i = 0; i < cols.size(); ++i) {
        if (cols[i] < 1 || cols[i] > inst.n)
            return false;
        if (i > 0 && cols[i] <= cols[i - 1])
            return false;
    }
    for (const auto& r : inst.rows) {
        const auto it = std::lower_bound(cols.begin(), cols.end(), r.lo);
        if (it == cols.end() || *it > r.hi)
            return false;
    }
    const double expected = selection_cost(inst, cols);
    return std::abs(expected - sel.total_cost) <= 1e-12 * std::max(1.0, std::abs(expected));
}

UnitSolveResult solve_unit_detailed(const WeightedInstance& inst) {
    inst.validate();
    for (double w : inst.weights)
        if (w != 1.0)
            throw DomainError("solve_unit: all weights must be 1");

    const Reduction red = reduce(inst);
    UnitSolveResult result;
    for (int c = 1; c <= red.instance.n; ++c) {
        const bool covers = std::any_of(red.instance.rows.begin(), red.instance.rows.end(),
                                        [c](const Interval& r) { return r.contains(c); });
        if (covers)
            result.selection.columns.push_back(red.column_map[static_cast<std::size_t>(c) - 1]);
    }
    result.selection.total_cost = selection_cost(inst, result.selection.columns);

    const Selection reference = solve_weighted(inst);
    if (!verify_cover(inst, result.selection) || result.selection.total_cost != reference.total_cost) {
        result.selection = reference;
        result.reduction_sufficient = false;
    }
    return result;
}

Selection solve_unit(const WeightedInstance& inst) { return solve_unit_detailed(inst).selection; }

std::string selection_to_json(const Selection& sel) {
    nlohmann::json j;
    j["columns"] = sel.columns;
    j["total_cost"] = sel.total_cost;
    return j.dump();
}

Selection selection_from_json(const std::string& text) {
    try {
        const auto j = nlohmann::json::parse(text);
        Selection sel;
        sel.columns = j.at("columns").get<std::vector<int>>();
        sel.total_cost = j.at("total_cost").get<double>();
        return sel;
    } catch (const nlohmann::json::exception& ex) {
        throw ConfigError(std::string("selection JSON: ") + ex.what());
    }
}

} // namespace hdrsel
