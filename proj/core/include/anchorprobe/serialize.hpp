#pragma once

// JSON encodings of analysis results. Non-finite numbers are written as null.

#include <vector>

#include "anchorprobe/behavior.hpp"
#include "anchorprobe/dimension.hpp"
#include "anchorprobe/fusion.hpp"
#include "anchorprobe/json_io.hpp"
#include "anchorprobe/sweep.hpp"

namespace anchorprobe {

Json to_json(const stats::AnovaResult& r);
Json to_json(const stats::RankTestResult& r);
Json to_json(const stats::Correlation& r);

Json to_json(const LayerSweepResult& r);
LayerSweepResult sweep_from_json(const Json& j);
Json to_json(const LayerComparison& c);

Json to_json(const FusionCurve& c);
FusionCurve fusion_curve_from_json(const Json& j);

Json to_json(const VarianceSpectrum& s);
Json to_json(const std::vector<VarianceSpectrum>& trajectory);

Json to_json(const SusceptibilitySummary& s);
Json to_json(const DeltaAnalysis& d);
Json to_json(const ConfigComparison& c);
Json to_json(const ReformulationAnalysis& r);
Json to_json(const DegradationComparison& d);

}  // namespace anchorprobe
