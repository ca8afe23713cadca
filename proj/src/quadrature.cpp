#include "skewdiff/quadrature.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <queue>
#include <vector>

#include "skewdiff/error.hpp"

namespace skewdiff {

namespace {

struct Panel {
    double lo, hi, value, error;
    bool operator<(const Panel& o) const noexcept { return error < o.error; }
};

Panel kronrod(const std::function<double(double)>& f, double lo, double hi) {
    using Rule = boost::math::quadrature::gauss_kronrod<double, 15>;
    double err = 0.0;
    const double v = Rule::integrate(f, lo, hi, 0, 0.0, &err);
    return {lo, hi, v, err};
}

}  // namespace

// Global adaptive bisection: always split the panel with the largest error estimate.
QuadratureResult integrate(const std::function<double(double)>& f, double lo, double hi, double abs_tol,
                           int max_depth) {
    if (hi <= lo) return {};
    const std::size_t max_panels = std::size_t{64} * static_cast<std::size_t>(std::max(max_depth, 1));
    std::priority_queue<Panel> heap;
    heap.push(kronrod(f, lo, hi));
    double value = heap.top().value, error = heap.top().error;
    while (error > abs_tol && heap.size() < max_panels) {
        const Panel p = heap.top();
        heap.pop();
        const double mid = 0.5 * (p.lo + p.hi);
        if (!(mid > p.lo && mid < p.hi)) {
            heap.push({p.lo, p.hi, p.value, 0.0});  // cannot split further
            error -= p.error;
            continue;
        }
        const Panel a = kronrod(f, p.lo, mid), b = kronrod(f, mid, p.hi);
        value += a.value + b.value - p.value;
        error += a.error + b.error - p.error;
        heap.push(a);
        heap.push(b);
    }
    // re-sum to shed the drift of the incremental updates
    value = 0.0;
    error = 0.0;
    for (auto h = heap; !h.empty(); h.pop()) {
        value += h.top().value;
        error += h.top().error;
    }
    if (!std::isfinite(value)) throw NumericalError("non-finite integral");
    if (error > abs_tol) throw QuadratureError("Gauss-Kronrod did not converge", error, abs_tol);
    return {value, error};
}

QuadratureResult integrate_split(const std::function<double(double)>& f, double lo, double hi,
                                 std::span<const double> breakpoints, double abs_tol) {
    std::vector<double> cuts{lo};
    for (double b : breakpoints)
        if (b > lo && b < hi) cuts.push_back(b);
    cuts.push_back(hi);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    QuadratureResult total;
    const double per_panel = abs_tol / static_cast<double>(cuts.size() - 1);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const auto part = integrate(f, cuts[i], cuts[i + 1], per_panel);
        total.value += part.value;
        total.error += part.error;
    }
    return total;
}

}  // namespace skewdiff
