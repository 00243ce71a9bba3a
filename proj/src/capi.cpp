#include "qcd/qcd.h"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <string>

#include "qcd/error.hpp"
#include "qcd/runner.hpp"

struct qcd_config {
  qcd::RunConfig cfg;
  std::string command;
};

struct qcd_result {
  qcd::RunResult result;
  std::string report;
  double elapsed = 0.0;
};

namespace {

thread_local std::string last_error;

qcd_status fail(qcd_status s, const std::string& msg) {
  last_error = msg;
  return s;
}

template <class F>
qcd_status guarded(F&& f) {
  try {
    last_error.clear();
    return f();
  } catch (const qcd::Error& e) {
    return fail(static_cast<qcd_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return fail(QCD_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(QCD_ERR_INTERNAL, e.what());
  }
}

char* duplicate(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

qcd_status null_handle(const char* what) { return fail(QCD_ERR_INVALID_ARGUMENT, std::string(what) + " is NULL"); }

qcd_status adopt(qcd::RunConfig cfg, qcd_config** out) {
  auto* c = new qcd_config{std::move(cfg), {}};
  c->command = qcd::to_string(c->cfg.command);
  *out = c;
  return QCD_OK;
}

}  // namespace

extern "C" {

const char* qcd_version(void) { return qcd::artifact_version; }

const char* qcd_last_error(void) { return last_error.c_str(); }

const char* qcd_status_name(qcd_status status) { return qcd::to_string(static_cast<qcd::ErrorCode>(status)); }

qcd_status qcd_config_load(const char* path, const char* command, qcd_config** out) {
  if (!path) return null_handle("path");
  if (!out) return null_handle("out");
  *out = nullptr;
  return guarded([&] { return adopt(qcd::parse_config(path, command ? command : ""), out); });
}

qcd_status qcd_config_parse(const char* json_text, const char* command, qcd_config** out) {
  if (!json_text) return null_handle("json_text");
  if (!out) return null_handle("out");
  *out = nullptr;
  return guarded([&] { return adopt(qcd::parse_config_text(json_text, command ? command : ""), out); });
}

void qcd_config_free(qcd_config* config) { delete config; }

qcd_status qcd_config_set_seed(qcd_config* config, uint64_t seed) {
  if (!config) return null_handle("config");
  config->cfg.seed = seed;
  return QCD_OK;
}

qcd_status qcd_config_set_tolerance(qcd_config* config, double tolerance) {
  if (!config) return null_handle("config");
  if (!std::isfinite(tolerance) || !(tolerance > 0.0))
    return fail(QCD_ERR_INVALID_ARGUMENT, "tolerance must be a positive finite number");
  config->cfg.tolerance = tolerance;
  return QCD_OK;
}

qcd_status qcd_config_set_out_dir(qcd_config* config, const char* dir) {
  if (!config) return null_handle("config");
  if (!dir || !*dir) return fail(QCD_ERR_INVALID_ARGUMENT, "output directory must be a nonempty path");
  return guarded([&] {
    config->cfg.out_dir = dir;
    return QCD_OK;
  });
}

qcd_status qcd_config_set_csv(qcd_config* config, int enabled) {
  if (!config) return null_handle("config");
  config->cfg.csv = enabled != 0;
  return QCD_OK;
}

const char* qcd_config_command(const qcd_config* config) { return config ? config->command.c_str() : ""; }

qcd_status qcd_config_to_json(const qcd_config* config, char** out) {
  if (!config) return null_handle("config");
  if (!out) return null_handle("out");
  return guarded([&] {
    *out = duplicate(qcd::dump_json(qcd::config_to_json(config->cfg)));
    return QCD_OK;
  });
}

qcd_status qcd_run(const qcd_config* config, qcd_result** out) {
  if (!config) return null_handle("config");
  if (!out) return null_handle("out");
  *out = nullptr;
  return guarded([&] {
    const auto start = std::chrono::steady_clock::now();
    auto* r = new qcd_result{qcd::run_suite(config->cfg), {}, 0.0};
    r->elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    r->report = qcd::dump_json(r->result.report);
    *out = r;
    return QCD_OK;
  });
}

void qcd_result_free(qcd_result* result) { delete result; }

int qcd_result_exit_code(const qcd_result* result) { return result ? result->result.exit_code : QCD_EXIT_ERROR; }

const char* qcd_result_report(const qcd_result* result) { return result ? result->report.c_str() : ""; }

size_t qcd_result_summary_count(const qcd_result* result) { return result ? result->result.summary.size() : 0; }

const char* qcd_result_summary_line(const qcd_result* result, size_t index) {
  if (!result || index >= result->result.summary.size()) return "";
  return result->result.summary[index].c_str();
}

qcd_status qcd_result_write(const qcd_result* result, const qcd_config* config, char** report_path) {
  if (!result) return null_handle("result");
  if (!config) return null_handle("config");
  return guarded([&] {
    const std::string path = qcd::write_artifacts(config->cfg, result->result, result->elapsed);
    if (report_path) *report_path = duplicate(path);
    return QCD_OK;
  });
}

void qcd_string_free(char* s) { std::free(s); }

}  // extern "C"
