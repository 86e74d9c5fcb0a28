#include "cprfit/io.hpp"

#include "cprfit/errors.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <system_error>

namespace cprfit::io {

using nlohmann::json;
using nlohmann::ordered_json;

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string read_text_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) {
    throw IoError("failed reading " + path.string());
  }
  return buf.str();
}

void write_file_atomic(const std::filesystem::path &path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw IoError("cannot open " + tmp.string() + " for writing");
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      throw IoError("failed writing " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move output into place at " + path.string());
  }
}

namespace {

ordered_json vec_json(Vec3 v) { return ordered_json::array({v.x, v.y, v.z}); }

Vec3 vec_from_json(const json &j, const char *what) {
  if (!j.is_array() || j.size() != 3) {
    throw ParseError(std::string(what) + " must be an array of 3 numbers");
  }
  Vec3 v{j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
  if (!v.is_finite()) {
    throw ParseError(std::string(what) + " has non-finite coordinates");
  }
  return v;
}

std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t pos = 0;
  for (;;) {
    const std::size_t comma = line.find(',', pos);
    fields.emplace_back(line.substr(pos, comma == std::string_view::npos ? comma : comma - pos));
    if (comma == std::string_view::npos) {
      break;
    }
    pos = comma + 1;
  }
  return fields;
}

std::string_view trim_eol(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == '\n')) {
    s.remove_suffix(1);
  }
  return s;
}

double parse_double(std::string_view text, std::size_t line, const char *column) {
  double v = 0.0;
  const char *begin = text.data();
  const char *end = begin + text.size();
  if (!text.empty() && *begin == '+') {
    ++begin;
  }
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw ParseError("line " + std::to_string(line) + ": column " + column +
                     ": not a number: '" + std::string(text) + "'");
  }
  return v;
}

std::optional<double> parse_optional_double(std::string_view text, std::size_t line,
                                            const char *column) {
  if (text.empty()) {
    return std::nullopt;
  }
  return parse_double(text, line, column);
}

std::size_t parse_count(std::string_view text, std::size_t line, const char *column) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw ParseError("line " + std::to_string(line) + ": column " + column +
                     ": not a non-negative integer: '" + std::string(text) + "'");
  }
  return v;
}

/// Reads a CSV body after checking the header; calls row(fields, line_no).
template <typename RowFn>
void read_csv(std::istream &in, std::string_view header, std::size_t columns, RowFn row) {
  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError("missing CSV header, expected '" + std::string(header) + "'");
  }
  std::string_view head = trim_eol(line);
  if (head.starts_with("\xEF\xBB\xBF")) {
    head.remove_prefix(3);
  }
  if (head != header) {
    throw ParseError("unexpected CSV header '" + std::string(head) + "', expected '" +
                     std::string(header) + "'");
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view body = trim_eol(line);
    if (body.empty()) {
      continue;
    }
    const std::vector<std::string> fields = split_csv(body);
    if (fields.size() != columns) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(columns) + " fields, got " + std::to_string(fields.size()));
    }
    row(fields, line_no);
  }
}

std::ifstream open_input(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  return in;
}

std::string optional_number(const std::optional<double> &v) {
  return v ? format_number(*v) : std::string();
}

} // namespace

std::string frame_to_json_line(const JointFrame &frame) {
  ordered_json j;
  j["t"] = frame.t;
  j["plane"] = {{"n", vec_json(frame.plane.normal())}, {"a", frame.plane.offset()}};
  ordered_json joints = ordered_json::object();
  for (JointType type : kAllJointTypes) {
    if (const auto &pair = frame.joint(type)) {
      joints[std::string(to_string(type))] = {{"l", vec_json(pair->left)},
                                              {"r", vec_json(pair->right)}};
    }
  }
  j["joints"] = std::move(joints);
  return j.dump();
}

JointFrame frame_from_json_line(std::string_view line) {
  try {
    const json j = json::parse(line);
    JointFrame frame;
    frame.t = j.at("t").get<double>();
    if (!std::isfinite(frame.t)) {
      throw ParseError("timestamp is not finite");
    }
    const json &plane = j.at("plane");
    frame.plane = FloorPlane(vec_from_json(plane.at("n"), "plane normal"), plane.at("a").get<double>());
    if (const auto it = j.find("joints"); it != j.end()) {
      for (const auto &[name, pair] : it->items()) {
        const auto type = parse_joint_type(name);
        if (!type) {
          throw ParseError("unknown joint '" + name + "'");
        }
        frame.joint(*type) =
            JointPair{vec_from_json(pair.at("l"), "left joint"), vec_from_json(pair.at("r"), "right joint")};
      }
    }
    return frame;
  } catch (const json::exception &e) {
    throw ParseError(std::string("malformed frame: ") + e.what());
  } catch (const GeometryError &e) {
    throw ParseError(std::string("invalid plane: ") + e.what());
  }
}

void write_frames_jsonl(std::ostream &out, std::span<const JointFrame> frames) {
  for (const JointFrame &frame : frames) {
    out << frame_to_json_line(frame) << '\n';
  }
}

std::vector<JointFrame> parse_frames_jsonl(std::istream &in) {
  std::vector<JointFrame> frames;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view body = trim_eol(line);
    if (body.empty()) {
      continue;
    }
    try {
      frames.push_back(frame_from_json_line(body));
    } catch (const ParseError &e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return frames;
}

std::vector<JointFrame> read_frames_jsonl(const std::filesystem::path &path) {
  auto in = open_input(path);
  try {
    return parse_frames_jsonl(in);
  } catch (const ParseError &e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_events_csv(std::ostream &out, std::span<const CompressionEvent> events) {
  out << kEventsHeader << '\n';
  for (const CompressionEvent &e : events) {
    out << format_number(e.start) << ',' << format_number(e.end) << ','
        << format_number(e.depth_cm) << ',' << format_number(e.freq_cpm) << '\n';
  }
}

std::vector<CompressionEvent> parse_events_csv(std::istream &in) {
  std::vector<CompressionEvent> events;
  read_csv(in, kEventsHeader, 4, [&](const std::vector<std::string> &f, std::size_t line) {
    CompressionEvent e{parse_double(f[0], line, "start_s"), parse_double(f[1], line, "end_s"),
                       parse_double(f[2], line, "depth_cm"), parse_double(f[3], line, "freq_cpm")};
    try {
      e.validate();
    } catch (const ConfigError &err) {
      throw ParseError("line " + std::to_string(line) + ": " + err.what());
    }
    events.push_back(e);
  });
  return events;
}

std::vector<CompressionEvent> read_events_csv(const std::filesystem::path &path) {
  auto in = open_input(path);
  try {
    return parse_events_csv(in);
  } catch (const ParseError &e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_predictions_csv(std::ostream &out, std::span<const FitResult> fits) {
  out << kPredictionsHeader << '\n';
  for (const FitResult &f : fits) {
    out << format_number(f.t_update) << ',' << format_number(f.window_start) << ','
        << format_number(f.window_end) << ',' << format_number(f.params.omega) << ','
        << format_number(f.cpm()) << ',' << format_number(f.params.amplitude) << ','
        << format_number(f.depth_p2p_cm()) << ',' << format_number(f.params.offset) << ','
        << format_number(f.params.phase) << ',' << format_number(f.rmse) << ','
        << f.generations_run << ',' << (f.converged_by_vtr ? 1 : 0) << '\n';
  }
}

std::vector<FitResult> parse_predictions_csv(std::istream &in) {
  std::vector<FitResult> fits;
  read_csv(in, kPredictionsHeader, 12, [&](const std::vector<std::string> &f, std::size_t line) {
    FitResult r;
    r.t_update = parse_double(f[0], line, "t_update");
    r.window_start = parse_double(f[1], line, "window_start");
    r.window_end = parse_double(f[2], line, "window_end");
    r.params.omega = parse_double(f[3], line, "omega_rad_s");
    r.params.amplitude = parse_double(f[5], line, "amplitude_m");
    r.params.offset = parse_double(f[7], line, "offset_m");
    r.params.phase = parse_double(f[8], line, "phase_rad");
    r.rmse = parse_double(f[9], line, "rmse_m");
    r.generations_run = parse_count(f[10], line, "generations");
    const std::size_t converged = parse_count(f[11], line, "converged_vtr");
    if (converged > 1) {
      throw ParseError("line " + std::to_string(line) + ": converged_vtr must be 0 or 1");
    }
    r.converged_by_vtr = converged == 1;
    if (!(r.window_start < r.window_end)) {
      throw ParseError("line " + std::to_string(line) + ": window_start must precede window_end");
    }
    fits.push_back(r);
  });
  return fits;
}

std::vector<FitResult> read_predictions_csv(const std::filesystem::path &path) {
  auto in = open_input(path);
  try {
    return parse_predictions_csv(in);
  } catch (const ParseError &e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_event_table_csv(std::ostream &out, const EvaluationReport &report) {
  out << kEventTableHeader << '\n';
  for (const EventEvaluation &ev : report.events) {
    out << format_number(ev.event.start) << ',' << format_number(ev.event.end) << ','
        << format_number(ev.event.freq_cpm) << ',' << format_number(ev.event.depth_cm) << ',';
    if (ev.prediction) {
      out << format_number(ev.prediction->p_freq) << ',' << format_number(ev.prediction->p_depth)
          << ',' << ev.prediction->contributing.size();
    } else {
      out << ",,0";
    }
    out << ',' << to_string(ev.status) << '\n';
  }
}

void write_sweep_csv(std::ostream &out, std::span<const SweepCell> cells) {
  out << kSweepHeader << '\n';
  for (const SweepCell &c : cells) {
    out << to_string(c.point.joint) << ',' << format_number(c.point.update_hz) << ','
        << format_number(c.point.window_s) << ',' << c.point.np << ',' << c.point.g_max << ','
        << optional_number(c.mae_freq) << ',' << optional_number(c.mae_depth) << ','
        << c.n_events << '\n';
  }
}

std::vector<SweepCell> parse_sweep_csv(std::istream &in) {
  std::vector<SweepCell> cells;
  read_csv(in, kSweepHeader, 8, [&](const std::vector<std::string> &f, std::size_t line) {
    SweepCell c;
    const auto joint = parse_joint_type(f[0]);
    if (!joint) {
      throw ParseError("line " + std::to_string(line) + ": unknown joint '" + f[0] + "'");
    }
    c.point.joint = *joint;
    c.point.update_hz = parse_double(f[1], line, "f_u_hz");
    c.point.window_s = parse_double(f[2], line, "s_len_s");
    c.point.np = parse_count(f[3], line, "np");
    c.point.g_max = parse_count(f[4], line, "g_max");
    c.mae_freq = parse_optional_double(f[5], line, "mae_cpm");
    c.mae_depth = parse_optional_double(f[6], line, "mae_cm");
    c.n_events = parse_count(f[7], line, "n_events");
    cells.push_back(c);
  });
  return cells;
}

std::vector<SweepCell> read_sweep_csv(const std::filesystem::path &path) {
  auto in = open_input(path);
  try {
    return parse_sweep_csv(in);
  } catch (const ParseError &e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_sensitivity_csv(std::ostream &out, std::span<const SensitivityRow> rows) {
  out << kSensitivityHeader << '\n';
  for (const SensitivityRow &r : rows) {
    out << r.variable << ',' << to_string(r.target) << ',' << optional_number(r.value) << '\n';
  }
}

std::vector<ScheduleKnot> parse_schedule_csv(std::istream &in) {
  std::vector<ScheduleKnot> knots;
  read_csv(in, kScheduleHeader, 3, [&](const std::vector<std::string> &f, std::size_t line) {
    knots.push_back({parse_double(f[0], line, "t_s"), parse_double(f[1], line, "cpm"),
                     parse_double(f[2], line, "depth_cm")});
  });
  return knots;
}

std::vector<ScheduleKnot> read_schedule_csv(const std::filesystem::path &path) {
  auto in = open_input(path);
  try {
    return parse_schedule_csv(in);
  } catch (const ParseError &e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

namespace {

template <typename T> std::vector<T> list_or(const json &block, const char *key, T fallback) {
  const auto it = block.find(key);
  if (it == block.end()) {
    return {fallback};
  }
  if (!it->is_array()) {
    throw ParseError(std::string("grid key '") + key + "' must be an array");
  }
  return it->get<std::vector<T>>();
}

GridBlock block_from_json(const json &j) {
  if (!j.is_object()) {
    throw ParseError("grid block must be an object");
  }
  GridBlock b;
  for (const std::string &name : list_or<std::string>(j, "joints", "shoulders")) {
    const auto joint = parse_joint_type(name);
    if (!joint) {
      throw ParseError("grid: unknown joint '" + name + "'");
    }
    b.joints.push_back(*joint);
  }
  b.update_hz = list_or<double>(j, "f_u_hz", 1.0);
  b.window_s = list_or<double>(j, "s_len_s", 3.0);
  b.np = list_or<std::size_t>(j, "np", 50);
  b.g_max = list_or<std::size_t>(j, "g_max", 80);
  return b;
}

} // namespace

SweepGrid parse_grid_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    if (!j.is_object()) {
      throw ParseError("grid must be a JSON object");
    }
    SweepGrid grid;
    if (const auto it = j.find("blocks"); it != j.end()) {
      if (!it->is_array()) {
        throw ParseError("grid 'blocks' must be an array");
      }
      for (const json &b : *it) {
        grid.blocks.push_back(block_from_json(b));
      }
    } else {
      grid.blocks.push_back(block_from_json(j));
    }
    grid.crossover_rate = j.value("cr", grid.crossover_rate);
    grid.amplification = j.value("f", grid.amplification);
    grid.value_to_reach = j.value("vtr", grid.value_to_reach);
    grid.seed = j.value("seed", grid.seed);
    return grid;
  } catch (const json::exception &e) {
    throw ParseError(std::string("malformed grid: ") + e.what());
  }
}

SweepGrid read_grid_json(const std::filesystem::path &path) {
  const std::string text = read_text_file(path);
  try {
    return parse_grid_json(text);
  } catch (const ParseError &e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

} // namespace cprfit::io
