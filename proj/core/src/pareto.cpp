#include "itc/pareto.hpp"

#include "itc/error.hpp"

#include <algorithm>
#include <cmath>

namespace itc {

ParetoPoint aggregate(std::string label, std::span<const RunRecord> records) {
    if (records.empty()) throw EmptyResultError("no records for " + label);
    std::int64_t tokens = 0;
    std::size_t correct = 0;
    for (const auto& r : records) {
        tokens += r.total_completion_tokens;
        if (r.correct && !r.error) ++correct;
    }
    const auto n = static_cast<double>(records.size());
    return {std::move(label), static_cast<double>(tokens) / n, static_cast<double>(correct) / n, records.size()};
}

bool dominates(const ParetoPoint& p, const ParetoPoint& q) {
    return p.compute <= q.compute && p.accuracy >= q.accuracy && (p.compute < q.compute || p.accuracy > q.accuracy);
}

std::vector<ParetoPoint> pareto_front(std::vector<ParetoPoint> points) {
    for (const auto& p : points) {
        if (!std::isfinite(p.compute) || p.compute < 0) throw ValidationError("compute", "must be finite and >= 0");
        if (!(p.accuracy >= 0.0 && p.accuracy <= 1.0)) throw ValidationError("accuracy", "must lie in [0, 1]");
    }
    std::sort(points.begin(), points.end(), [](const ParetoPoint& a, const ParetoPoint& b) {
        if (a.compute != b.compute) return a.compute < b.compute;
        if (a.accuracy != b.accuracy) return a.accuracy > b.accuracy;
        return a.label < b.label;
    });

    std::vector<ParetoPoint> front;
    double best = -1.0;
    for (std::size_t i = 0; i < points.size();) {
        std::size_t j = i;
        while (j < points.size() && points[j].compute == points[i].compute) ++j;
        // Sorted by accuracy descending within a compute group, so points[i]
        // holds the group maximum.
        const double top = points[i].accuracy;
        if (top > best) {
            for (std::size_t k = i; k < j && points[k].accuracy == top; ++k) front.push_back(points[k]);
            best = top;
        }
        i = j;
    }
    return front;
}

} // namespace itc
