#pragma once

#include <filesystem>
#include <vector>

#include "anc/experiment.hpp"

namespace anc {

/// Writes per-arm CSVs, the adaptive convergence trace, summary.json and the
/// weight snapshots into `out_dir` (created if missing). Every file is
/// written atomically. Returns the paths written.
///
/// CSV schemas:
///   <arm>_timeseries.csv   sample,time_s,mic,disturbance,error
///   <arm>_nr.csv           interval,start_s,end_s,status,nr_db
///   <arm>_psd.csv          freq_hz,power,power_db
///   <arm>_spectrogram.csv  frame,time_s,freq_hz,power_db
///   adaptive_trace.csv     sample,mse,msd
std::vector<std::filesystem::path> export_report(const ScenarioResult& result, const std::filesystem::path& out_dir,
                                                 std::size_t decimation = 8);

}  // namespace anc
