#include "sere/sere.h"

#include <cstring>
#include <new>
#include <string>

#include "config.hpp"
#include "error.hpp"
#include "filter.hpp"
#include "montecarlo.hpp"
#include "runner.hpp"

namespace {

thread_local std::string g_last_error;

sere_status status_from(sere::Errc code) {
  return static_cast<sere_status>(static_cast<int>(code));
}

sere_status fail(sere_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

sere_status fail_invalid(const std::string& message) {
  return fail(SERE_ERR_INVALID_ARGUMENT, message);
}

// Runs `body`, translating every escaping exception into a status code.
template <typename Fn>
sere_status guarded(Fn&& body) {
  try {
    body();
    return SERE_OK;
  } catch (const sere::Error& e) {
    return fail(status_from(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(SERE_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SERE_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(SERE_ERR_INTERNAL, "unknown failure");
  }
}

char* copy_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

sere::RunnerOverrides overrides_from(const sere_run_options* options) {
  sere::RunnerOverrides o;
  if (options == nullptr) return o;
  if (options->has_seed) o.seed = options->seed;
  if (options->has_gate) o.gate = options->gate;
  if (options->has_tau) o.tau = options->tau;
  o.skip_stale = options->skip_stale != 0;
  o.force = options->force != 0;
  return o;
}

using RunnerFn = std::string (*)(const sere::RunConfig&, const sere::RunnerOverrides&,
                                 const std::string&);

sere_status run_driver(RunnerFn driver, const char* config_json, const char* out_path,
                       const sere_run_options* options, char** summary_out) {
  if (config_json == nullptr) return fail_invalid("config_json must not be NULL");
  if (out_path == nullptr) return fail_invalid("out_path must not be NULL");
  return guarded([&] {
    const sere::RunConfig config = sere::parse_config(config_json);
    const std::string summary = driver(config, overrides_from(options), out_path);
    if (summary_out != nullptr) *summary_out = copy_string(summary);
  });
}

}  // namespace

struct sere_filter {
  sere::Filter impl;
  sere::ModalityBank bank;

  explicit sere_filter(const sere::RunConfig& config)
      : impl(config.filter), bank(sere::scenario_bank(config.scenario)) {}
};

extern "C" {

const char* sere_version(void) { return "1.0.0"; }

const char* sere_status_name(sere_status status) {
  if (status == SERE_ERR_INTERNAL) return "Internal";
  const int code = static_cast<int>(status);
  if (code < 0 || code > static_cast<int>(sere::Errc::InvalidArgument)) return "Unknown";
  return sere::errc_name(static_cast<sere::Errc>(code));
}

const char* sere_last_error(void) { return g_last_error.c_str(); }

void sere_string_free(char* s) { delete[] s; }

sere_status sere_config_render(const char* config_json, char** json_out) {
  if (config_json == nullptr) return fail_invalid("config_json must not be NULL");
  if (json_out == nullptr) return fail_invalid("json_out must not be NULL");
  return guarded([&] {
    const sere::RunConfig config = sere::parse_config(config_json);
    *json_out = copy_string(sere::config_to_json(config));
  });
}

const char* sere_config_presets(void) { return "case-study,tdoa-real,toa-inertial"; }

sere_status sere_filter_create(const char* config_json, sere_filter** out) {
  if (config_json == nullptr) return fail_invalid("config_json must not be NULL");
  if (out == nullptr) return fail_invalid("out must not be NULL");
  *out = nullptr;
  return guarded([&] {
    const sere::RunConfig config = sere::parse_config(config_json);
    *out = new sere_filter(config);
  });
}

void sere_filter_destroy(sere_filter* filter) { delete filter; }

int sere_filter_dim(const sere_filter* filter) {
  return filter == nullptr ? 0 : filter->impl.config().dim;
}

int sere_filter_is_initialized(const sere_filter* filter) {
  return filter != nullptr && filter->impl.initialized() ? 1 : 0;
}

sere_status sere_filter_init(sere_filter* filter, double t_first, const double* position,
                             int dim) {
  if (filter == nullptr) return fail_invalid("filter must not be NULL");
  if (position == nullptr) return fail_invalid("position must not be NULL");
  return guarded([&] {
    if (dim != filter->impl.config().dim) {
      sere::raise(sere::Errc::DimensionMismatch, "position length does not match the filter");
    }
    filter->impl.initialize(t_first, Eigen::Map<const Eigen::VectorXd>(position, dim));
  });
}

sere_status sere_filter_ingest(sere_filter* filter, double t, const char* modality,
                               const double* value, int value_len, int anchor_i, int anchor_j,
                               int* accepted_out) {
  if (filter == nullptr) return fail_invalid("filter must not be NULL");
  if (modality == nullptr) return fail_invalid("modality must not be NULL");
  if (value == nullptr || value_len < 1) return fail_invalid("value must carry >= 1 entries");
  return guarded([&] {
    sere::MeasurementRecord rec;
    rec.t = t;
    rec.modality = sere::parse_modality(modality);
    rec.value = Eigen::Map<const Eigen::VectorXd>(value, value_len);
    rec.anchor_i = anchor_i;
    rec.anchor_j = anchor_j;
    const sere::SensorModel model = filter->bank.model_for(rec);
    if (!filter->impl.initialized()) {
      if (rec.modality != sere::Modality::LinearPosition) {
        sere::raise(sere::Errc::InsufficientInitData,
                    "filter must be initialized before range or inertial data");
      }
      filter->impl.initialize(rec.t, rec.value);
      if (accepted_out != nullptr) *accepted_out = 1;
      return;
    }
    const sere::FilterStepReport report = filter->impl.step(rec, model);
    if (accepted_out != nullptr) *accepted_out = report.accepted ? 1 : 0;
  });
}

sere_status sere_filter_interpolate(const sere_filter* filter, double t, int order,
                                    double* mean_out, double* cov_out) {
  if (filter == nullptr) return fail_invalid("filter must not be NULL");
  if (mean_out == nullptr) return fail_invalid("mean_out must not be NULL");
  return guarded([&] {
    if (!filter->impl.initialized()) {
      sere::raise(sere::Errc::InsufficientInitData, "filter is not initialized");
    }
    const sere::MotionPosterior posterior = filter->impl.interpolate_posterior({{t, order}});
    const int d = filter->impl.config().dim;
    for (int i = 0; i < d; ++i) mean_out[i] = posterior.mean(i);
    if (cov_out != nullptr) {
      for (int r = 0; r < d; ++r) {
        for (int c = 0; c < d; ++c) cov_out[r * d + c] = posterior.cov(r, c);
      }
    }
  });
}

int sere_filter_control_point_count(const sere_filter* filter) {
  return filter == nullptr ? 0 : filter->impl.total_control_points();
}

sere_status sere_filter_control_points(const sere_filter* filter, double* knot_times_out,
                                       double* points_out) {
  if (filter == nullptr) return fail_invalid("filter must not be NULL");
  return guarded([&] {
    if (!filter->impl.initialized()) {
      sere::raise(sere::Errc::InsufficientInitData, "filter is not initialized");
    }
    const sere::ControlPolygon polygon = filter->impl.control_polygon();
    const auto& points = polygon.points();
    const int d = polygon.dim();
    for (size_t k = 0; k < points.size(); ++k) {
      if (knot_times_out != nullptr) {
        knot_times_out[k] = polygon.knot_time(static_cast<int>(k) + 1);
      }
      if (points_out != nullptr) {
        for (int i = 0; i < d; ++i) points_out[k * static_cast<size_t>(d) + i] = points[k](i);
      }
    }
  });
}

sere_status sere_run_simulate(const char* config_json, const char* out_path,
                              const sere_run_options* options, char** summary_out) {
  return run_driver(&sere::run_simulate, config_json, out_path, options, summary_out);
}

sere_status sere_run_track(const char* config_json, const char* stream_path, const char* out_path,
                           const sere_run_options* options, char** summary_out) {
  if (config_json == nullptr) return fail_invalid("config_json must not be NULL");
  if (stream_path == nullptr) return fail_invalid("stream_path must not be NULL");
  if (out_path == nullptr) return fail_invalid("out_path must not be NULL");
  return guarded([&] {
    const sere::RunConfig config = sere::parse_config(config_json);
    const std::string summary =
        sere::run_track(config, overrides_from(options), stream_path, out_path);
    if (summary_out != nullptr) *summary_out = copy_string(summary);
  });
}

sere_status sere_run_mc(const char* config_json, const char* out_path,
                        const sere_run_options* options, char** summary_out) {
  return run_driver(&sere::run_mc, config_json, out_path, options, summary_out);
}

sere_status sere_run_evaluate(const char* config_json, const char* out_path,
                              const sere_run_options* options, char** summary_out) {
  return run_driver(&sere::run_evaluate, config_json, out_path, options, summary_out);
}

sere_status sere_run_sweep(const char* config_json, const char* out_path,
                           const sere_run_options* options, char** summary_out) {
  return run_driver(&sere::run_sweep, config_json, out_path, options, summary_out);
}

}  // extern "C"
