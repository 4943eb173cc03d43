#pragma once

// JSON and CSV renderings of library results.

#include "puo/app/config.hpp"
#include "puo/dynamics.hpp"
#include "puo/embedding.hpp"

#include <ostream>

namespace puo::app {

Json matrix_json(const Mat4& m);
Json vector_json(const Vec4& v);

Json map_json(const embedding::TransformMap& m);
Json verification_json(const embedding::MapVerification& v);
Json reconciliation_json(const embedding::Reconciliation& r);

Json trajectory_summary(const dynamics::Trajectory& tr);
Json trajectory_json(const dynamics::Trajectory& tr);
Json threshold_json(const dynamics::ThresholdReport& r);

/// {"version", "command", "config"} followed by the body.
Json envelope(const std::string& command, const RunConfig& config);

inline constexpr const char* kCsvHeader = "t,q,qd,qdd,qddd,x1,x2,p1,p2,H1,H2,Hint";

/// Comment line with the config and version, the fixed header, then one row per sample,
/// all numbers at round-trip precision.
void write_csv(std::ostream& os, const dynamics::Trajectory& tr, const RunConfig& config);

}  // namespace puo::app
