#include <doctest.h>

#include <Eigen/Dense>
#include <bit>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "csv.hpp"

using namespace sere;

namespace {

template <typename Fn>
Errc thrown_code(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::Ok;
}

template <typename Fn>
std::string thrown_message(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

std::filesystem::path test_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "sere_config_csv_tests";
  std::filesystem::create_directories(dir);
  return dir;
}

std::string path_in_dir(const std::string& name) { return (test_dir() / name).string(); }

std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(bool(in));
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_raw(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("the three presets load and describe their scenarios") {
  const std::vector<std::string> names = preset_names();
  REQUIRE(names.size() == 3);
  for (const char* expected : {"case-study", "tdoa-real", "toa-inertial"}) {
    CHECK(std::find(names.begin(), names.end(), expected) != names.end());
  }

  const RunConfig cs = preset_config("case-study");
  CHECK(cs.scenario.kind == ScenarioConfig::Kind::LissajousCv);
  CHECK(cs.scenario.dim() == 2);
  CHECK(cs.scenario.duration == 6.0);
  CHECK(cs.scenario.truth_rate == 100.0);
  REQUIRE(cs.scenario.sensors.size() == 1);
  CHECK(cs.scenario.sensors[0].modality == Modality::LinearPosition);
  CHECK(cs.scenario.sensors[0].rate == 100.0);
  CHECK(cs.filter.dim == 2);
  CHECK(cs.filter.tau == 0.01);
  CHECK(cs.filter.process_noise.omega == 0.5);
  CHECK(cs.filter.process_noise.nu == 1.0);
  CHECK(cs.mc_runs == 200);
  CHECK(cs.eval.stop == 6.0);

  const RunConfig toa = preset_config("toa-inertial");
  CHECK(toa.scenario.kind == ScenarioConfig::Kind::Flight3d);
  CHECK(toa.scenario.dim() == 3);
  REQUIRE(toa.scenario.sensors.size() == 2);
  CHECK(toa.scenario.sensors[0].modality == Modality::Toa);
  CHECK(toa.scenario.sensors[1].modality == Modality::Accelerometer);
  CHECK(toa.scenario.anchors.size() == 8);
  REQUIRE(toa.scenario.initial_position.has_value());
  CHECK(toa.scenario.initial_position->size() == 3);
  CHECK(toa.filter.dim == 3);
  CHECK(toa.filter.tau == 1.0);

  const RunConfig tdoa = preset_config("tdoa-real");
  CHECK(tdoa.scenario.kind == ScenarioConfig::Kind::Flight3d);
  REQUIRE(tdoa.scenario.sensors.size() == 1);
  CHECK(tdoa.scenario.sensors[0].modality == Modality::Tdoa);
  CHECK(tdoa.scenario.outliers.probability == 0.05);
  REQUIRE(tdoa.filter.gate.count(Modality::Tdoa) == 1);
  CHECK(tdoa.filter.gate.at(Modality::Tdoa) == 15.0);
  CHECK(tdoa.filter.tau == 2.0);
  CHECK(tdoa.filter.sigma0 == 0.5);

  CHECK(thrown_code([] { preset_config("nope"); }) == Errc::SchemaViolation);
}

TEST_CASE("a preset reference in JSON equals the preset itself") {
  for (const std::string& name : preset_names()) {
    const RunConfig direct = preset_config(name);
    const RunConfig via_json = parse_config("{\"preset\": \"" + name + "\"}");
    CHECK(config_to_json(direct) == config_to_json(via_json));
  }
}

TEST_CASE("serialized configurations parse back unchanged") {
  for (const std::string& name : preset_names()) {
    const RunConfig original = preset_config(name);
    const std::string first = config_to_json(original);
    const RunConfig reparsed = parse_config(first);
    const std::string second = config_to_json(reparsed);
    CHECK(first == second);
  }
}

TEST_CASE("sibling keys override preset fields selectively") {
  const RunConfig cfg = parse_config(R"({
    "preset": "case-study",
    "mc_runs": 7,
    "filter": {"tau": 0.05},
    "scenario": {"duration": 3.0}
  })");
  CHECK(cfg.mc_runs == 7);
  CHECK(cfg.filter.tau == 0.05);
  CHECK(cfg.scenario.duration == 3.0);
  // Untouched preset fields survive.
  CHECK(cfg.scenario.truth_rate == 100.0);
  CHECK(cfg.scenario.sensors.size() == 1);
  CHECK(cfg.filter.process_noise.omega == 0.5);
  CHECK(cfg.seed_base == 1000);
}

TEST_CASE("unknown keys are rejected loudly") {
  CHECK(thrown_code([] { parse_config(R"({"preset": "case-study", "bogus": 1})"); }) ==
        Errc::SchemaViolation);
  CHECK(thrown_code([] { parse_config(R"({"preset": "case-study", "filter": {"taus": 1}})"); }) ==
        Errc::SchemaViolation);
  CHECK(thrown_code([] {
          parse_config(R"({"preset": "case-study", "scenario": {"sensor": []}})");
        }) == Errc::SchemaViolation);
  const std::string msg = thrown_message(
      [] { parse_config(R"({"preset": "case-study", "filter": {"taus": 1}})"); });
  CHECK(contains(msg, "unknown key"));
}

TEST_CASE("malformed JSON is a parse error, not a schema error") {
  CHECK(thrown_code([] { parse_config("{oops"); }) == Errc::ConfigParse);
  CHECK(thrown_code([] { parse_config(""); }) == Errc::ConfigParse);
  CHECK(thrown_code([] { parse_config("[1, 2]"); }) == Errc::SchemaViolation);
}

TEST_CASE("a full custom configuration parses from scratch") {
  const RunConfig cfg = parse_config(R"({
    "name": "bench-a",
    "scenario": {
      "kind": "lissajous-cv",
      "duration": 2.0,
      "truth_rate": 50.0,
      "sensors": [{"modality": "gps", "rate": 10.0, "noise": 0.02}]
    },
    "filter": {"tau": 0.5, "sigma0": 2.0, "process_noise": {"omega": 0.1, "nu": 0.2}},
    "eval": {"start": 0.5, "stop": 1.5, "rate": 20.0},
    "mc_runs": 3,
    "seed_base": 99
  })");
  CHECK(cfg.name == "bench-a");
  CHECK(cfg.scenario.duration == 2.0);
  REQUIRE(cfg.scenario.sensors.size() == 1);
  const Eigen::MatrixXd& noise = cfg.scenario.sensors[0].noise;
  REQUIRE(noise.rows() == 2);
  CHECK(noise(0, 0) == 0.02);
  CHECK(noise(1, 1) == 0.02);
  CHECK(noise(0, 1) == 0.0);
  CHECK(cfg.filter.dim == 2);
  CHECK(cfg.filter.sigma0 == 2.0);
  CHECK(cfg.eval.start == 0.5);
  CHECK(cfg.eval.rate == 20.0);
  CHECK(cfg.mc_runs == 3);
  CHECK(cfg.seed_base == 99);
}

TEST_CASE("noise accepts scalar, diagonal and full-matrix forms") {
  const RunConfig cfg = parse_config(R"({
    "preset": "toa-inertial",
    "scenario": {"sensors": [
      {"modality": "toa", "rate": 5.0, "noise": 0.04},
      {"modality": "acc", "rate": 10.0, "noise": [0.1, 0.2, 0.3]},
      {"modality": "gps", "rate": 1.0,
       "noise": [[0.1, 0.01, 0.0], [0.01, 0.2, 0.0], [0.0, 0.0, 0.3]]}
    ]}
  })");
  REQUIRE(cfg.scenario.sensors.size() == 3);

  const Eigen::MatrixXd& toa_r = cfg.scenario.sensors[0].noise;
  REQUIRE(toa_r.rows() == 1);
  CHECK(toa_r(0, 0) == 0.04);

  const Eigen::MatrixXd& acc_r = cfg.scenario.sensors[1].noise;
  REQUIRE(acc_r.rows() == 3);
  CHECK(acc_r(0, 0) == 0.1);
  CHECK(acc_r(1, 1) == 0.2);
  CHECK(acc_r(2, 2) == 0.3);
  CHECK(acc_r(0, 1) == 0.0);

  const Eigen::MatrixXd& gps_r = cfg.scenario.sensors[2].noise;
  REQUIRE(gps_r.rows() == 3);
  CHECK(gps_r(0, 1) == 0.01);
  CHECK(gps_r(2, 2) == 0.3);

  // Diagonal length must match the modality's output dimension.
  CHECK(thrown_code([] {
          parse_config(R"({"preset": "case-study",
            "scenario": {"sensors": [{"modality": "gps", "rate": 10.0,
                                      "noise": [0.1, 0.2, 0.3]}]}})");
        }) == Errc::SchemaViolation);
}

TEST_CASE("gate thresholds parse per modality token") {
  const RunConfig cfg =
      parse_config(R"({"preset": "case-study", "filter": {"gate": {"gps": 9.0}}})");
  REQUIRE(cfg.filter.gate.count(Modality::LinearPosition) == 1);
  CHECK(cfg.filter.gate.at(Modality::LinearPosition) == 9.0);
  CHECK(thrown_code([] {
          parse_config(R"({"preset": "case-study", "filter": {"gate": {"sonar": 9.0}}})");
        }) == Errc::SchemaViolation);
}

TEST_CASE("configuration values are validated after parsing") {
  CHECK(thrown_code([] {
          parse_config(R"({"preset": "case-study", "scenario": {"duration": -1.0}})");
        }) == Errc::SchemaViolation);
  CHECK(thrown_code([] {
          parse_config(R"({"preset": "case-study", "filter": {"tau": 0.0}})");
        }) == Errc::SchemaViolation);
  CHECK(thrown_code([] { parse_config(R"({"preset": "case-study", "mc_runs": 0})"); }) ==
        Errc::SchemaViolation);
  CHECK(thrown_code([] {
          parse_config(R"({"preset": "case-study",
            "scenario": {"sensors": [{"modality": "gps", "rate": 0.0, "noise": 0.01}]}})");
        }) == Errc::SchemaViolation);
}

TEST_CASE("config files round-trip through disk") {
  const std::string path = path_in_dir("roundtrip_config.json");
  const RunConfig original = preset_config("tdoa-real");
  write_text_file(path, config_to_json(original), true);
  const RunConfig loaded = load_config_file(path);
  CHECK(config_to_json(loaded) == config_to_json(original));

  CHECK(thrown_code([] { load_config_file("/nonexistent/nowhere.json"); }) == Errc::IoError);
}

TEST_CASE("stream files are byte-stable across write-read-write") {
  ScenarioConfig sc;
  sc.kind = ScenarioConfig::Kind::Flight3d;
  sc.duration = 5.0;
  sc.truth_rate = 100.0;
  sc.anchors = {
      (Eigen::VectorXd(3) << 4.0, 4.0, 0.3).finished(),
      (Eigen::VectorXd(3) << -4.0, 4.0, 0.3).finished(),
      (Eigen::VectorXd(3) << -4.0, -4.0, 2.7).finished(),
  };
  SensorSpec toa;
  toa.modality = Modality::Toa;
  toa.rate = 20.0;
  toa.noise = 0.01 * Eigen::MatrixXd::Identity(1, 1);
  SensorSpec acc;
  acc.modality = Modality::Accelerometer;
  acc.rate = 50.0;
  acc.noise = 0.01 * Eigen::MatrixXd::Identity(3, 3);
  SensorSpec tdoa;
  tdoa.modality = Modality::Tdoa;
  tdoa.rate = 30.0;
  tdoa.noise = 0.05 * Eigen::MatrixXd::Identity(1, 1);
  sc.sensors = {toa, acc, tdoa};

  const std::vector<TruthSample> truth = make_truth(sc, 321);
  const std::vector<MeasurementRecord> records = sample_measurements(truth, sc, 321);
  REQUIRE(!records.empty());

  const std::string first_path = path_in_dir("stream_first.csv");
  const std::string second_path = path_in_dir("stream_second.csv");
  write_stream_csv(first_path, records, 3, true);
  const StreamFile loaded = read_stream_csv(first_path);
  CHECK(loaded.dim == 3);
  REQUIRE(loaded.records.size() == records.size());
  for (size_t k = 0; k < records.size(); k += 7) {
    CHECK(loaded.records[k].t == records[k].t);
    CHECK(loaded.records[k].modality == records[k].modality);
    CHECK(loaded.records[k].anchor_i == records[k].anchor_i);
    CHECK(loaded.records[k].anchor_j == records[k].anchor_j);
    CHECK(loaded.records[k].seq == records[k].seq);
    REQUIRE(loaded.records[k].value.size() == records[k].value.size());
    CHECK((loaded.records[k].value - records[k].value).cwiseAbs().maxCoeff() == 0.0);
  }
  write_stream_csv(second_path, loaded.records, loaded.dim, true);
  CHECK(read_bytes(first_path) == read_bytes(second_path));
}

TEST_CASE("an empty stream is a header-only file that round-trips") {
  const std::string path = path_in_dir("stream_empty.csv");
  write_stream_csv(path, {}, 2, true);
  CHECK(read_bytes(path) == "t,modality,v1,v2,anchor_i,anchor_j,seq\n");
  const StreamFile loaded = read_stream_csv(path);
  CHECK(loaded.records.empty());
  CHECK(loaded.dim == 2);
  const std::string again = path_in_dir("stream_empty2.csv");
  write_stream_csv(again, loaded.records, loaded.dim, true);
  CHECK(read_bytes(path) == read_bytes(again));
}

TEST_CASE("stream parsing failures carry the file position") {
  const std::string good = "t,modality,v1,v2,anchor_i,anchor_j,seq\n";

  const std::string bad_header = path_in_dir("bad_header.csv");
  write_raw(bad_header, "time,modality,v1,v2,anchor_i,anchor_j,seq\n");
  CHECK(thrown_code([&] { read_stream_csv(bad_header); }) == Errc::SchemaViolation);
  CHECK(contains(thrown_message([&] { read_stream_csv(bad_header); }), ":1:"));

  const std::string bad_modality = path_in_dir("bad_modality.csv");
  write_raw(bad_modality, good + "0.5,gps,1.0,2.0,-1,-1,0\n0.6,sonar,1.0,2.0,-1,-1,1\n");
  const std::string msg = thrown_message([&] { read_stream_csv(bad_modality); });
  CHECK(thrown_code([&] { read_stream_csv(bad_modality); }) == Errc::SchemaViolation);
  CHECK(contains(msg, ":3:"));
  CHECK(contains(msg, "sonar"));

  const std::string bad_number = path_in_dir("bad_number.csv");
  write_raw(bad_number, good + "abc,gps,1.0,2.0,-1,-1,0\n");
  CHECK(thrown_code([&] { read_stream_csv(bad_number); }) == Errc::SchemaViolation);
  CHECK(contains(thrown_message([&] { read_stream_csv(bad_number); }), ":2:"));

  const std::string bad_columns = path_in_dir("bad_columns.csv");
  write_raw(bad_columns, good + "0.5,gps,1.0,-1,0\n");
  CHECK(thrown_code([&] { read_stream_csv(bad_columns); }) == Errc::SchemaViolation);

  const std::string no_value = path_in_dir("no_value.csv");
  write_raw(no_value, good + "0.5,gps,,,-1,-1,0\n");
  CHECK(thrown_code([&] { read_stream_csv(no_value); }) == Errc::SchemaViolation);

  const std::string gap = path_in_dir("gap_value.csv");
  write_raw(gap, "t,modality,v1,v2,v3,anchor_i,anchor_j,seq\n0.5,toa,1.0,,2.0,-1,-1,0\n");
  const std::string gap_msg = thrown_message([&] { read_stream_csv(gap); });
  CHECK(thrown_code([&] { read_stream_csv(gap); }) == Errc::SchemaViolation);
  CHECK(contains(gap_msg, "contiguous"));

  CHECK(thrown_code([] { read_stream_csv("/nonexistent/stream.csv"); }) == Errc::IoError);

  const std::string empty_file = path_in_dir("empty_file.csv");
  write_raw(empty_file, "");
  CHECK(thrown_code([&] { read_stream_csv(empty_file); }) == Errc::SchemaViolation);
}

TEST_CASE("carriage returns and blank lines are tolerated") {
  const std::string path = path_in_dir("crlf_stream.csv");
  write_raw(path, "t,modality,v1,v2,anchor_i,anchor_j,seq\r\n0.5,gps,1.0,2.0,-1,-1,0\r\n\r\n");
  const StreamFile loaded = read_stream_csv(path);
  REQUIRE(loaded.records.size() == 1);
  CHECK(loaded.records[0].t == 0.5);
  CHECK(loaded.records[0].value(1) == 2.0);
}

TEST_CASE("existing outputs are protected unless overwriting is forced") {
  const std::string path = path_in_dir("protected.csv");
  write_raw(path, "already here\n");
  CHECK(thrown_code([&] { ensure_writable(path, false); }) == Errc::IoError);
  CHECK(contains(thrown_message([&] { ensure_writable(path, false); }), "refusing to overwrite"));
  CHECK_NOTHROW(ensure_writable(path, true));
  CHECK(thrown_code([&] { write_stream_csv(path, {}, 2, false); }) == Errc::IoError);
  CHECK_NOTHROW(write_stream_csv(path, {}, 2, true));
  const std::string fresh = path_in_dir("fresh_output.csv");
  std::filesystem::remove(fresh);
  CHECK_NOTHROW(ensure_writable(fresh, false));
}

TEST_CASE("numbers serialize to their shortest exact decimal form") {
  CHECK(format_double(6.0) == "6");
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(-0.5) == "-0.5");

  const std::vector<double> awkward = {
      0.1, 1.0 / 3.0, 1e-17, 5e-324, 1.7976931348623157e308, -0.0, 6.0,
      3.141592653589793, 1e300, -123456.789, 2.2250738585072014e-308};
  for (double v : awkward) {
    const std::string text = format_double(v);
    const double back = std::strtod(text.c_str(), nullptr);
    CHECK(std::bit_cast<std::uint64_t>(back) == std::bit_cast<std::uint64_t>(v));
  }
}

TEST_CASE("auxiliary outputs have the documented headers") {
  std::vector<TruthSample> truth(2);
  truth[0].t = 0.0;
  truth[0].pos = Eigen::Vector2d(1, 2);
  truth[0].vel = Eigen::Vector2d(3, 4);
  truth[0].acc = Eigen::Vector2d(5, 6);
  truth[1] = truth[0];
  truth[1].t = 0.5;
  const std::string truth_path = path_in_dir("truth.csv");
  write_truth_csv(truth_path, truth, true);
  const std::string truth_text = read_bytes(truth_path);
  CHECK(contains(truth_text, "t,p1,p2,v1,v2,a1,a2\n"));
  CHECK(contains(truth_text, "0,1,2,3,4,5,6\n"));

  std::vector<EstimateRow> rows(1);
  rows[0].t = 1.5;
  rows[0].pos = Eigen::Vector2d(1, 2);
  rows[0].vel = Eigen::Vector2d(0, 0);
  rows[0].acc = Eigen::Vector2d(-1, 1);
  const std::string est_path = path_in_dir("estimates.csv");
  write_estimates_csv(est_path, rows, true);
  CHECK(contains(read_bytes(est_path), "t,p1,p2,v1,v2,a1,a2\n"));

  std::vector<Eigen::VectorXd> points(5, Eigen::Vector2d(0.5, -0.5));
  const ControlPolygon poly(0.0, 0.5, points);
  const std::string poly_path = path_in_dir("polygon.csv");
  write_polygon_csv(poly_path, poly, true);
  const std::string poly_text = read_bytes(poly_path);
  CHECK(contains(poly_text, "index,t,c1,c2\n"));
  CHECK(contains(poly_text, "0,0,0.5,-0.5\n"));

  FilterStepReport rep;
  rep.t = 0.25;
  rep.modality = Modality::Toa;
  rep.accepted = false;
  rep.knot_advances = 2;
  rep.mahalanobis_sq = 17.5;
  const std::string steps_path = path_in_dir("steps.csv");
  write_step_log_csv(steps_path, {rep}, true);
  const std::string steps_text = read_bytes(steps_path);
  CHECK(contains(steps_text, "t,modality,accepted,stale,knot_advances,mahalanobis_sq\n"));
  CHECK(contains(steps_text, "0.25,toa,0,0,2,17.5\n"));

  MeasurementRecord clean;
  clean.t = 0.5;
  clean.seq = 3;
  clean.value = Eigen::Vector2d(0, 0);
  MeasurementRecord dirty = clean;
  dirty.seq = 4;
  dirty.t = 0.75;
  dirty.outlier = true;
  dirty.modality = Modality::Tdoa;
  const std::string outlier_path = path_in_dir("outliers.csv");
  write_outlier_csv(outlier_path, {clean, dirty}, true);
  const std::string outlier_text = read_bytes(outlier_path);
  CHECK(contains(outlier_text, "seq,t,modality\n"));
  CHECK(contains(outlier_text, "4,0.75,tdoa\n"));
  CHECK(!contains(outlier_text, "\n3,"));
}
