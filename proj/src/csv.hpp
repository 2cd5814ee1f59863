#pragma once

#include <string>
#include <vector>

#include "filter.hpp"
#include "model.hpp"
#include "scenario.hpp"
#include "spline.hpp"

namespace sere {

// Shortest decimal form that parses back to the identical double, so a
// write -> read -> write cycle is byte-stable.
std::string format_double(double value);

// Opens `path` for writing; IoError if it exists and overwrite is false, or
// if the file cannot be created.
void ensure_writable(const std::string& path, bool overwrite);

struct StreamFile {
  std::vector<MeasurementRecord> records;
  int dim = 0;  // number of value columns in the file
};

// Measurement stream, schema: t,modality,v1..vD,anchor_i,anchor_j,seq with a
// mandatory header row. Rows appear in (t, seq) order. Value cells beyond a
// record's output size stay empty; unused anchor ids are -1.
void write_stream_csv(const std::string& path, const std::vector<MeasurementRecord>& records,
                      int dim, bool overwrite);
StreamFile read_stream_csv(const std::string& path);

// Ground truth: t, position, velocity, acceleration per axis.
void write_truth_csv(const std::string& path, const std::vector<TruthSample>& samples,
                     bool overwrite);

// Trajectory estimates sampled from the fitted curve: t, position, velocity,
// acceleration per axis.
struct EstimateRow {
  double t = 0.0;
  Eigen::VectorXd pos;
  Eigen::VectorXd vel;
  Eigen::VectorXd acc;
};
void write_estimates_csv(const std::string& path, const std::vector<EstimateRow>& rows,
                         bool overwrite);

// Control points with their knot timestamps: index,t,c1..cD.
void write_polygon_csv(const std::string& path, const ControlPolygon& polygon, bool overwrite);

// Per-measurement filter decisions: t, modality, accepted, stale,
// knot_advances, squared Mahalanobis distance.
void write_step_log_csv(const std::string& path, const std::vector<FilterStepReport>& reports,
                        bool overwrite);

// Sequence ids of records carrying an injected outlier.
void write_outlier_csv(const std::string& path, const std::vector<MeasurementRecord>& records,
                       bool overwrite);

// Writes arbitrary text (JSON summaries, tables) under the same overwrite
// policy as the CSV writers.
void write_text_file(const std::string& path, const std::string& content, bool overwrite);

}  // namespace sere
