#include "smallimpact/field.hpp"

#include <algorithm>
#include <stdexcept>

namespace smallimpact {

CoefficientField::CoefficientField(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (!grid_ || values_.size() != grid_->size())
        throw std::invalid_argument("CoefficientField: value count does not match the time grid");
}

CoefficientField::CoefficientField(GridPtr grid, std::vector<double> chi, std::vector<double> values)
    : grid_(std::move(grid)), chi_(std::move(chi)), values_(std::move(values)) {
    if (!grid_ || chi_.size() < 2 || values_.size() != grid_->size() * chi_.size())
        throw std::invalid_argument("CoefficientField: value count does not match the space-time grid");
    if (!std::is_sorted(chi_.begin(), chi_.end()))
        throw std::invalid_argument("CoefficientField: spatial grid must be sorted");
}

CoefficientField::Sample CoefficientField::at_node(std::size_t i, double chi) const {
    if (!spatial()) return {values_[i], false};
    bool clamped = false;
    if (chi < chi_.front()) {
        chi = chi_.front();
        clamped = true;
    } else if (chi > chi_.back()) {
        chi = chi_.back();
        clamped = true;
    }
    auto it = std::upper_bound(chi_.begin(), chi_.end(), chi);
    std::size_t j = it == chi_.begin() ? 0 : static_cast<std::size_t>(it - chi_.begin()) - 1;
    if (j + 1 >= chi_.size()) j = chi_.size() - 2;
    const double w = (chi - chi_[j]) / (chi_[j + 1] - chi_[j]);
    const auto r = row(i);
    double v = 0.0;
    if (w != 1.0) v += (1.0 - w) * r[j];
    if (w != 0.0) v += w * r[j + 1];
    return {v, clamped};
}

CoefficientField::Sample CoefficientField::at(double t, double chi) const {
    const auto& g = *grid_;
    const std::size_t i = g.locate(t);
    double w = (std::clamp(t, 0.0, g.horizon()) - g[i]) / g.step(i);
    w = std::clamp(w, 0.0, 1.0);
    Sample s{0.0, false};
    if (w != 1.0) {
        const auto a = at_node(i, chi);
        s.value += (1.0 - w) * a.value;
        s.clamped = a.clamped;
    }
    if (w != 0.0) {
        const auto b = at_node(i + 1, chi);
        s.value += w * b.value;
        s.clamped = s.clamped || b.clamped;
    }
    return s;
}

std::vector<double> CoefficientField::along(const SampledPath& chi, std::size_t& clamped) const {
    std::vector<double> out(chi.size());
    const bool same = same_grid(grid_, chi.grid);
    for (std::size_t i = 0; i < chi.size(); ++i) {
        const auto s = same ? at_node(i, chi[i]) : at(chi.t(i), chi[i]);
        out[i] = s.value;
        if (s.clamped) ++clamped;
    }
    return out;
}

}  // namespace smallimpact
