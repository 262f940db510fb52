#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "smallimpact/grid.hpp"

namespace smallimpact {

/// A coefficient sampled on a time grid, optionally times a spatial grid in
/// the factor variable. Values are stored row-major (time, space).
///
/// Evaluation is bilinear. The factor coordinate is clamped to the hull of
/// the spatial grid and the sample reports whether clamping happened.
/// A node whose interpolation weight is exactly zero is never read, so a
/// singular terminal value (+inf at t = T) does not leak into t < T.
class CoefficientField {
public:
    struct Sample {
        double value;
        bool clamped;
    };

    CoefficientField() = default;
    /// Deterministic field: one value per time node.
    CoefficientField(GridPtr grid, std::vector<double> values);
    /// Spatial field: values.size() == grid->size() * chi.size().
    CoefficientField(GridPtr grid, std::vector<double> chi, std::vector<double> values);

    [[nodiscard]] bool spatial() const { return !chi_.empty(); }
    [[nodiscard]] const GridPtr& grid() const { return grid_; }
    [[nodiscard]] std::span<const double> chi_grid() const { return chi_; }
    [[nodiscard]] std::size_t width() const { return chi_.empty() ? 1 : chi_.size(); }

    [[nodiscard]] double node(std::size_t i, std::size_t j = 0) const { return values_[i * width() + j]; }
    double& node(std::size_t i, std::size_t j = 0) { return values_[i * width() + j]; }
    [[nodiscard]] std::span<const double> row(std::size_t i) const {
        return std::span<const double>(values_).subspan(i * width(), width());
    }
    [[nodiscard]] std::span<const double> values() const { return values_; }

    [[nodiscard]] Sample at(double t, double chi) const;
    /// Interpolates in chi only, at time node i.
    [[nodiscard]] Sample at_node(std::size_t i, double chi) const;

    /// Values along a factor path: node-wise when the grids coincide, bilinear
    /// otherwise. Adds the number of clamped evaluations to `clamped`.
    [[nodiscard]] std::vector<double> along(const SampledPath& chi, std::size_t& clamped) const;

private:
    GridPtr grid_;
    std::vector<double> chi_;
    std::vector<double> values_;
};

}  // namespace smallimpact
