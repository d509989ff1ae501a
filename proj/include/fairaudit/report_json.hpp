#pragma once

#include <json.hpp>

#include "fairaudit/causal.hpp"
#include "fairaudit/group_metrics.hpp"
#include "fairaudit/incompatibility.hpp"
#include "fairaudit/individual_metrics.hpp"

// JSON envelopes for audit results. Group metrics share one shape:
//   {"metric": ..., "groups": {label: value | null}, "gap": x | null,
//    "ratio": x | null, "undefined": {label: reason}}
// with a "components" list for composite criteria.

namespace fairaudit {

using ojson = nlohmann::ordered_json;

ojson to_json(const MetricReport& r);
ojson to_json(const StratifiedReport& r);
ojson to_json(const CalibrationReport& r);
ojson to_json(const FlipReport& r);
ojson to_json(const LipschitzReport& r);
ojson to_json(const CriteriaGaps& g);
ojson to_json(const ExclusionVerdict& v);
ojson to_json(const CounterfactualResult& r);
ojson to_json(const CounterfactualGapReport& r);
ojson to_json(const ThresholdPolicy& p);

}  // namespace fairaudit
