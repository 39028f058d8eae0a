#pragma once

#include "itc/domain.hpp"

#include <span>
#include <string>
#include <vector>

namespace itc {

struct ParetoPoint {
    std::string label;
    /// Mean completion tokens per query, counting every call.
    double compute = 0.0;
    double accuracy = 0.0;
    std::size_t n_queries = 0;

    bool operator==(const ParetoPoint&) const = default;
};

/// Failed or unanswered records count as incorrect but keep their tokens.
/// Throws EmptyResultError on empty input.
ParetoPoint aggregate(std::string label, std::span<const RunRecord> records);

/// p dominates q: no more compute, no less accuracy, and strictly better in one.
bool dominates(const ParetoPoint& p, const ParetoPoint& q);

/// Non-dominated points sorted by compute ascending (then accuracy
/// descending, then label). Points with identical coordinates are all kept.
std::vector<ParetoPoint> pareto_front(std::vector<ParetoPoint> points);

} // namespace itc
