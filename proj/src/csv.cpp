#include "csv.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>

#include "error.hpp"

namespace sere {

namespace {

[[noreturn]] void row_error(const std::string& path, size_t line_no, const std::string& what) {
  raise(Errc::SchemaViolation, path + ":" + std::to_string(line_no) + ": " + what);
}

double parse_double(std::string_view cell, const std::string& path, size_t line_no) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
    row_error(path, line_no, "expected a number, got \"" + std::string(cell) + "\"");
  }
  return value;
}

long parse_long(std::string_view cell, const std::string& path, size_t line_no) {
  long value = 0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
    row_error(path, line_no, "expected an integer, got \"" + std::string(cell) + "\"");
  }
  return value;
}

std::vector<std::string_view> split_row(std::string_view line) {
  std::vector<std::string_view> cells;
  size_t start = 0;
  while (true) {
    const size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return cells;
}

std::ofstream open_output(const std::string& path, bool overwrite) {
  ensure_writable(path, overwrite);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(Errc::IoError, "cannot open for writing: " + path);
  return out;
}

void finish_output(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) raise(Errc::IoError, "write failed: " + path);
}

std::string stream_header(int dim) {
  std::string h = "t,modality";
  for (int i = 1; i <= dim; ++i) h += ",v" + std::to_string(i);
  h += ",anchor_i,anchor_j,seq";
  return h;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) raise(Errc::IoError, "failed to format a number");
  return std::string(buf, ptr);
}

void ensure_writable(const std::string& path, bool overwrite) {
  std::error_code ec;
  if (!overwrite && std::filesystem::exists(path, ec)) {
    raise(Errc::IoError, "refusing to overwrite existing file: " + path + " (use --force)");
  }
}

void write_stream_csv(const std::string& path, const std::vector<MeasurementRecord>& records,
                      int dim, bool overwrite) {
  if (dim < 1) raise(Errc::InvalidArgument, "stream dimension must be >= 1");
  std::ofstream out = open_output(path, overwrite);
  out << stream_header(dim) << '\n';
  for (const auto& rec : records) {
    if (rec.value.size() > dim) {
      raise(Errc::DimensionMismatch, "record value wider than the stream layout");
    }
    out << format_double(rec.t) << ',' << modality_token(rec.modality);
    for (int i = 0; i < dim; ++i) {
      out << ',';
      if (i < rec.value.size()) out << format_double(rec.value(i));
    }
    out << ',' << rec.anchor_i << ',' << rec.anchor_j << ',' << rec.seq << '\n';
  }
  finish_output(out, path);
}

StreamFile read_stream_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::IoError, "cannot open for reading: " + path);

  std::string line;
  if (!std::getline(in, line)) raise(Errc::SchemaViolation, path + ":1: missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  StreamFile file;
  {
    const auto cells = split_row(line);
    // t,modality,v1..vD,anchor_i,anchor_j,seq -> at least 6 columns
    if (cells.size() < 6 || cells[0] != "t" || cells[1] != "modality" ||
        cells[cells.size() - 3] != "anchor_i" || cells[cells.size() - 2] != "anchor_j" ||
        cells[cells.size() - 1] != "seq") {
      row_error(path, 1, "unexpected stream header \"" + line + "\"");
    }
    file.dim = static_cast<int>(cells.size()) - 5;
    for (int i = 1; i <= file.dim; ++i) {
      if (cells[static_cast<size_t>(1 + i)] != "v" + std::to_string(i)) {
        row_error(path, 1, "unexpected stream header \"" + line + "\"");
      }
    }
  }

  size_t line_no = 1;
  const size_t n_cols = static_cast<size_t>(file.dim) + 5;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_row(line);
    if (cells.size() != n_cols) {
      row_error(path, line_no,
                "expected " + std::to_string(n_cols) + " columns, got " +
                    std::to_string(cells.size()));
    }
    MeasurementRecord rec;
    rec.t = parse_double(cells[0], path, line_no);
    try {
      rec.modality = parse_modality(std::string(cells[1]));
    } catch (const Error&) {
      row_error(path, line_no, "unknown modality token \"" + std::string(cells[1]) + "\"");
    }
    int width = 0;
    for (int i = 0; i < file.dim; ++i) {
      const auto cell = cells[static_cast<size_t>(2 + i)];
      if (cell.empty()) break;
      ++width;
    }
    if (width == 0) row_error(path, line_no, "record carries no value");
    for (int i = width; i < file.dim; ++i) {
      if (!cells[static_cast<size_t>(2 + i)].empty()) {
        row_error(path, line_no, "value cells must be contiguous from v1");
      }
    }
    rec.value.resize(width);
    for (int i = 0; i < width; ++i) {
      rec.value(i) = parse_double(cells[static_cast<size_t>(2 + i)], path, line_no);
    }
    rec.anchor_i = static_cast<int>(parse_long(cells[n_cols - 3], path, line_no));
    rec.anchor_j = static_cast<int>(parse_long(cells[n_cols - 2], path, line_no));
    rec.seq = parse_long(cells[n_cols - 1], path, line_no);
    file.records.push_back(std::move(rec));
  }
  return file;
}

void write_truth_csv(const std::string& path, const std::vector<TruthSample>& samples,
                     bool overwrite) {
  std::ofstream out = open_output(path, overwrite);
  const int d = samples.empty() ? 0 : static_cast<int>(samples.front().pos.size());
  out << 't';
  for (const char* prefix : {"p", "v", "a"}) {
    for (int i = 1; i <= d; ++i) out << ',' << prefix << i;
  }
  out << '\n';
  for (const auto& s : samples) {
    out << format_double(s.t);
    for (const auto* vec : {&s.pos, &s.vel, &s.acc}) {
      for (Eigen::Index i = 0; i < vec->size(); ++i) out << ',' << format_double((*vec)(i));
    }
    out << '\n';
  }
  finish_output(out, path);
}

void write_estimates_csv(const std::string& path, const std::vector<EstimateRow>& rows,
                         bool overwrite) {
  std::ofstream out = open_output(path, overwrite);
  const int d = rows.empty() ? 0 : static_cast<int>(rows.front().pos.size());
  out << 't';
  for (const char* prefix : {"p", "v", "a"}) {
    for (int i = 1; i <= d; ++i) out << ',' << prefix << i;
  }
  out << '\n';
  for (const auto& r : rows) {
    out << format_double(r.t);
    for (const auto* vec : {&r.pos, &r.vel, &r.acc}) {
      for (Eigen::Index i = 0; i < vec->size(); ++i) out << ',' << format_double((*vec)(i));
    }
    out << '\n';
  }
  finish_output(out, path);
}

void write_polygon_csv(const std::string& path, const ControlPolygon& polygon, bool overwrite) {
  std::ofstream out = open_output(path, overwrite);
  const auto& points = polygon.points();
  const int d = polygon.dim();
  out << "index,t";
  for (int i = 1; i <= d; ++i) out << ",c" << i;
  out << '\n';
  for (size_t k = 0; k < points.size(); ++k) {
    out << k << ',' << format_double(polygon.knot_time(static_cast<int>(k) + 1));
    for (Eigen::Index i = 0; i < points[k].size(); ++i) {
      out << ',' << format_double(points[k](i));
    }
    out << '\n';
  }
  finish_output(out, path);
}

void write_step_log_csv(const std::string& path, const std::vector<FilterStepReport>& reports,
                        bool overwrite) {
  std::ofstream out = open_output(path, overwrite);
  out << "t,modality,accepted,stale,knot_advances,mahalanobis_sq\n";
  for (const auto& r : reports) {
    out << format_double(r.t) << ',' << modality_token(r.modality) << ',' << (r.accepted ? 1 : 0)
        << ',' << (r.stale ? 1 : 0) << ',' << r.knot_advances << ','
        << format_double(r.mahalanobis_sq) << '\n';
  }
  finish_output(out, path);
}

void write_outlier_csv(const std::string& path, const std::vector<MeasurementRecord>& records,
                       bool overwrite) {
  std::ofstream out = open_output(path, overwrite);
  out << "seq,t,modality\n";
  for (const auto& rec : records) {
    if (!rec.outlier) continue;
    out << rec.seq << ',' << format_double(rec.t) << ',' << modality_token(rec.modality) << '\n';
  }
  finish_output(out, path);
}

void write_text_file(const std::string& path, const std::string& content, bool overwrite) {
  std::ofstream out = open_output(path, overwrite);
  out << content;
  finish_output(out, path);
}

}  // namespace sere
