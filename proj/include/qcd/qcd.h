#ifndef QCD_QCD_H
#define QCD_QCD_H

/* C interface to the duality library. Objects are opaque handles; every
 * fallible call returns a qcd_status and leaves a message retrievable with
 * qcd_last_error() on the calling thread. */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define QCD_API __declspec(dllexport)
#else
#define QCD_API __attribute__((visibility("default")))
#endif

typedef enum qcd_status {
  QCD_OK = 0,
  QCD_ERR_DIMENSION = 1,
  QCD_ERR_SINGULAR_SYSTEM = 2,
  QCD_ERR_UNDEFINED_ROOTS = 3,
  QCD_ERR_CONVERGENCE = 4,
  QCD_ERR_SINGULAR_CONFIGURATION = 5,
  QCD_ERR_DEGENERATE_EPSILON = 6,
  QCD_ERR_FLOW_SINGULARITY = 7,
  QCD_ERR_REGIME_MISMATCH = 8,
  QCD_ERR_POLE = 9,
  QCD_ERR_EXCLUDED_LOCUS = 10,
  QCD_ERR_DIMENSION_CAP = 11,
  QCD_ERR_RESAMPLE_POINTS = 12,
  QCD_ERR_DEGENERACY = 13,
  QCD_ERR_INVALID_OCCUPATIONS = 14,
  QCD_ERR_INVALID_ARGUMENT = 15,
  QCD_ERR_SCHEMA = 16,
  QCD_ERR_INVARIANT = 17,
  QCD_ERR_IO = 18,
  QCD_ERR_INTERNAL = 99
} qcd_status;

/* Exit codes of a run. */
enum { QCD_EXIT_PASS = 0, QCD_EXIT_FAIL = 1, QCD_EXIT_ERROR = 2 };

typedef struct qcd_config qcd_config;
typedef struct qcd_result qcd_result;

QCD_API const char* qcd_version(void);
/* Message of the last failed call on this thread ("" if none). */
QCD_API const char* qcd_last_error(void);
QCD_API const char* qcd_status_name(qcd_status status);

/* command may be NULL to use the file's own "command" field; otherwise it
 * selects the command and a conflicting field in the file is an error. */
QCD_API qcd_status qcd_config_load(const char* path, const char* command, qcd_config** out);
QCD_API qcd_status qcd_config_parse(const char* json_text, const char* command, qcd_config** out);
QCD_API void qcd_config_free(qcd_config* config);

QCD_API qcd_status qcd_config_set_seed(qcd_config* config, uint64_t seed);
QCD_API qcd_status qcd_config_set_tolerance(qcd_config* config, double tolerance);
QCD_API qcd_status qcd_config_set_out_dir(qcd_config* config, const char* dir);
QCD_API qcd_status qcd_config_set_csv(qcd_config* config, int enabled);
/* Command name, owned by the config. */
QCD_API const char* qcd_config_command(const qcd_config* config);
/* Canonical JSON; release with qcd_string_free. */
QCD_API qcd_status qcd_config_to_json(const qcd_config* config, char** out);

/* Runs the configured command. Verification failures and runtime errors are
 * part of the result (see qcd_result_exit_code); only invalid handles or
 * internal faults make this call fail. */
QCD_API qcd_status qcd_run(const qcd_config* config, qcd_result** out);
QCD_API void qcd_result_free(qcd_result* result);
QCD_API int qcd_result_exit_code(const qcd_result* result);
/* Report JSON, owned by the result. */
QCD_API const char* qcd_result_report(const qcd_result* result);
QCD_API size_t qcd_result_summary_count(const qcd_result* result);
QCD_API const char* qcd_result_summary_line(const qcd_result* result, size_t index);
/* Writes report, sidecar and CSV files into the configured directory. The
 * report path is returned through report_path (release with qcd_string_free)
 * when it is not NULL. */
QCD_API qcd_status qcd_result_write(const qcd_result* result, const qcd_config* config, char** report_path);

QCD_API void qcd_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif
