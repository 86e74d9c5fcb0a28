#pragma once

// File formats: frame streams (JSON Lines), reference events, predictions,
// sweep and sensitivity tables (CSV), schedules (CSV) and sweep grids (JSON).
// CSV numbers use '.' decimals and 9 significant digits; frame files keep
// full round-trip precision.

#include "cprfit/evaluation.hpp"
#include "cprfit/geometry.hpp"
#include "cprfit/sinusoid.hpp"
#include "cprfit/synth.hpp"

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cprfit::io {

inline constexpr std::string_view kEventsHeader = "start_s,end_s,depth_cm,freq_cpm";
inline constexpr std::string_view kPredictionsHeader =
    "t_update,window_start,window_end,omega_rad_s,cpm,amplitude_m,depth_p2p_cm,offset_m,"
    "phase_rad,rmse_m,generations,converged_vtr";
inline constexpr std::string_view kSweepHeader =
    "joint,f_u_hz,s_len_s,np,g_max,mae_cpm,mae_cm,n_events";
inline constexpr std::string_view kSensitivityHeader = "variable,target,correlation_ratio";
inline constexpr std::string_view kScheduleHeader = "t_s,cpm,depth_cm";
inline constexpr std::string_view kEventTableHeader =
    "start_s,end_s,ref_cpm,ref_cm,pred_cpm,pred_cm,n_contributing,status";

/// "%.9g", locale independent.
std::string format_number(double v);

/// Throws IoError.
std::string read_text_file(const std::filesystem::path &path);
/// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path &path, std::string_view content);

std::string frame_to_json_line(const JointFrame &frame);
/// Throws ParseError (including for a zero plane normal or non-finite values).
JointFrame frame_from_json_line(std::string_view line);

void write_frames_jsonl(std::ostream &out, std::span<const JointFrame> frames);
std::vector<JointFrame> parse_frames_jsonl(std::istream &in);
std::vector<JointFrame> read_frames_jsonl(const std::filesystem::path &path);

void write_events_csv(std::ostream &out, std::span<const CompressionEvent> events);
std::vector<CompressionEvent> parse_events_csv(std::istream &in);
std::vector<CompressionEvent> read_events_csv(const std::filesystem::path &path);

void write_predictions_csv(std::ostream &out, std::span<const FitResult> fits);
/// Restores the fields present in the file; sse is rebuilt as 0 and n_samples
/// is left at 0.
std::vector<FitResult> parse_predictions_csv(std::istream &in);
std::vector<FitResult> read_predictions_csv(const std::filesystem::path &path);

void write_event_table_csv(std::ostream &out, const EvaluationReport &report);

void write_sweep_csv(std::ostream &out, std::span<const SweepCell> cells);
std::vector<SweepCell> parse_sweep_csv(std::istream &in);
std::vector<SweepCell> read_sweep_csv(const std::filesystem::path &path);

void write_sensitivity_csv(std::ostream &out, std::span<const SensitivityRow> rows);

std::vector<ScheduleKnot> parse_schedule_csv(std::istream &in);
std::vector<ScheduleKnot> read_schedule_csv(const std::filesystem::path &path);

/// Either a single block object or {"blocks": [...]} with optional "cr",
/// "f", "vtr", "seed". Block keys: joints, f_u_hz, s_len_s, np, g_max; an
/// omitted key takes the single recommended value (shoulders, 1, 3, 50, 80).
SweepGrid parse_grid_json(std::string_view text);
SweepGrid read_grid_json(const std::filesystem::path &path);

} // namespace cprfit::io
