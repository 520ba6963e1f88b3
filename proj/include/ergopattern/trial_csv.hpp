#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "ergopattern/record.hpp"

namespace ergo {

/// Column order of per-trial logs.
inline constexpr const char* kTrialCsvHeader =
    "time,agent_id,x,y,heading,u1,u2,collided,dimple,ergodic_metric,heterogeneity";

/// One row per agent per step; doubles printed round-trip exact. The
/// heterogeneity field is empty for single-agent teams.
void write_trial_csv(std::ostream& out, const TrialRecord& record);
void write_trial_csv(const std::filesystem::path& path, const TrialRecord& record);

/// Rebuilds rows, dimples, dt, team size and step count from a log.
/// Throws ParseError with the offending line number.
TrialRecord parse_trial_csv(std::istream& in);
TrialRecord read_trial_csv(const std::filesystem::path& path);

} // namespace ergo
