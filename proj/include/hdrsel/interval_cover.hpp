// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the hdrsel Project.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hdrsel/exposure_classify.hpp"

namespace hdrsel {

/// Row of a consecutive-ones matrix: ones exactly in columns lo..hi (1-based).
struct Interval {
    int lo;
    int hi;
    std::uint64_t multiplicity = 1;

    bool contains(int column) const { return lo <= column && column <= hi; }
};

/// Weighted set-covering instance whose rows have the consecutive ones
/// property, stored as intervals rather than an explicit 0-1 matrix.
struct WeightedInstance {
    int n = 0;
    std::vector<Interval> rows;
    std::vector<double> weights; // w_1..w_n at indices 0..n-1

    double weight(int column) const { return weights[static_cast<std::size_t>(column - 1)]; }
    void validate() const;

    static WeightedInstance from_coverage(const CoverageInstance& cov, std::span<const double> weights);
    static WeightedInstance unit(int n, std::vector<Interval> rows);
};

struct Selection {
    std::vector<int> columns; // sorted, 1-based
    double total_cost = 0.0;

    friend bool operator==(const Selection&, const Selection&) = default;
};

/// Sum of the weights of `columns`, accumulated in ascending column order.
double selection_cost(const WeightedInstance& inst, std::span<const int> columns);

struct ReductionTrace {
    /// Row `row` removed because row `witness` has N_witness a subset of N_row.
    struct RowRemoval {
        std::size_t row;
        std::size_t witness;
    };
    /// Column `column` removed because M_column is a subset of M_witness and
    /// w_column >= w_witness.
    struct ColumnRemoval {
        int column;
        int witness;
    };
    std::vector<RowRemoval> removed_rows;
    std::vector<ColumnRemoval> removed_columns;
};

struct Reduction {
    /// Surviving rows and columns. Columns are renumbered 1..k; `column_map`
    /// gives each surviving column's index in the input instance.
    WeightedInstance instance;
    std::vector<int> column_map;
    /// Input index of each surviving row.
    std::vector<std::size_t> row_map;
    ReductionTrace trace;
};

/// Applies row dominance (drop a row whose column set contains another
/// row's) and column dominance (drop a column whose row set is contained in
/// a no-more-expensive column's) until neither applies. Between mutually
/// dominating rows or columns the lowest index survives.
Reduction reduce(const WeightedInstance& inst);

/// Unit-cost solve by reduction alone: every column that survives reduce()
/// and still covers a row is selected.
struct UnitSolveResult {
    Selection selection;
    /// True when the reduction result was feasible and matched the optimum;
    /// false means the shortest-path fallback was returned instead.
    bool reduction_sufficient = true;
};

UnitSolveResult solve_unit_detailed(const WeightedInstance& inst);
Selection solve_unit(const WeightedInstance& inst);

/// Minimum-cost cover by shortest path over picks 0 < c_1 < ... < c_k < n+1,
/// where consecutive picks may not leave a row strictly between them. Ties go
/// to fewer columns, then to the lexicographically smallest column set.
Selection solve_weighted(const WeightedInstance& inst);

/// Exhaustive search over all 2^n subsets, same tie-breaking. n <= 20.
Selection brute_force(const WeightedInstance& inst);
inline constexpr int kBruteForceMaxColumns = 20;

bool verify_cover(const WeightedInstance& inst, const Selection& sel);

std::string selection_to_json(const Selection& sel);
Selection selection_from_json(const std::string& text);

} // namespace hdrsel
