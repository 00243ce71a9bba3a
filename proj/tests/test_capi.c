/* Exercises the C interface from a C translation unit. */

#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "qcd/qcd.h"

static int failures = 0;

#define EXPECT(cond)                                              \
  do {                                                            \
    if (!(cond)) {                                                \
      fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                 \
    }                                                             \
  } while (0)

static const char* vacuum =
    "{\"command\":\"verify-duality\",\"chain\":{\"n\":2,"
    "\"q\":[{\"re\":0.11,\"im\":0.07},{\"re\":-0.42,\"im\":0.21},{\"re\":0.38,\"im\":-0.19}],"
    "\"V\":[{\"re\":0.8,\"im\":0.3},{\"re\":1.35,\"im\":-0.25}],"
    "\"hbar\":{\"re\":0.35,\"im\":0.2}}}";

static void test_run(void) {
  qcd_config* cfg = NULL;
  qcd_result* res = NULL;
  EXPECT(qcd_config_parse(vacuum, NULL, &cfg) == QCD_OK);
  EXPECT(cfg != NULL);
  EXPECT(strcmp(qcd_config_command(cfg), "verify-duality") == 0);
  EXPECT(qcd_config_set_seed(cfg, 11) == QCD_OK);
  EXPECT(qcd_run(cfg, &res) == QCD_OK);
  EXPECT(qcd_result_exit_code(res) == QCD_EXIT_PASS);
  EXPECT(strstr(qcd_result_report(res), "\"status\": \"verified\"") != NULL);
  EXPECT(strstr(qcd_result_report(res), "\"seed\": 11") != NULL);
  EXPECT(qcd_result_summary_count(res) == 1);
  EXPECT(strncmp(qcd_result_summary_line(res, 0), "verify-duality: PASS", 20) == 0);
  EXPECT(strcmp(qcd_result_summary_line(res, 5), "") == 0);

  char* text = NULL;
  EXPECT(qcd_config_to_json(cfg, &text) == QCD_OK);
  EXPECT(text != NULL && strstr(text, "\"command\": \"verify-duality\"") != NULL);
  qcd_string_free(text);
  qcd_result_free(res);

  EXPECT(qcd_config_set_tolerance(cfg, 1e-30) == QCD_OK);
  EXPECT(qcd_run(cfg, &res) == QCD_OK);
  EXPECT(qcd_result_exit_code(res) == QCD_EXIT_FAIL);
  qcd_result_free(res);
  qcd_config_free(cfg);
}

static void test_errors(void) {
  qcd_config* cfg = NULL;
  EXPECT(qcd_config_parse("{broken", NULL, &cfg) == QCD_ERR_SCHEMA);
  EXPECT(cfg == NULL);
  EXPECT(strstr(qcd_last_error(), "invalid JSON") != NULL);

  EXPECT(qcd_config_parse(vacuum, "solve-bethe", &cfg) == QCD_ERR_SCHEMA);
  EXPECT(strstr(qcd_last_error(), "config.command") != NULL);

  EXPECT(qcd_config_load("/nonexistent/cfg.json", NULL, &cfg) == QCD_ERR_IO);
  EXPECT(qcd_config_parse(NULL, NULL, &cfg) == QCD_ERR_INVALID_ARGUMENT);
  EXPECT(qcd_run(NULL, NULL) == QCD_ERR_INVALID_ARGUMENT);
  EXPECT(qcd_config_set_seed(NULL, 1) == QCD_ERR_INVALID_ARGUMENT);
  EXPECT(qcd_result_exit_code(NULL) == QCD_EXIT_ERROR);

  EXPECT(qcd_config_parse(vacuum, NULL, &cfg) == QCD_OK);
  EXPECT(qcd_config_set_tolerance(cfg, -1.0) == QCD_ERR_INVALID_ARGUMENT);
  EXPECT(qcd_config_set_out_dir(cfg, "") == QCD_ERR_INVALID_ARGUMENT);
  qcd_config_free(cfg);

  EXPECT(strcmp(qcd_status_name(QCD_ERR_INVARIANT), "invariant") == 0);
  EXPECT(strlen(qcd_version()) > 0);
}

static void test_runtime_error(void) {
  qcd_config* cfg = NULL;
  qcd_result* res = NULL;
  EXPECT(qcd_config_parse("{\"command\":\"simulate-rs\",\"rs\":{\"nu\":0.4,\"q\":[0.3,0.3],\"qdot\":[0.1,0.2]}}",
                          NULL, &cfg) == QCD_OK);
  EXPECT(qcd_run(cfg, &res) == QCD_OK);
  EXPECT(qcd_result_exit_code(res) == QCD_EXIT_ERROR);
  EXPECT(strstr(qcd_result_report(res), "flow-singularity") != NULL);
  qcd_result_free(res);
  qcd_config_free(cfg);
}

int main(void) {
  test_run();
  test_errors();
  test_runtime_error();
  if (failures) {
    fprintf(stderr, "%d C API check(s) failed\n", failures);
    return 1;
  }
  printf("C API checks passed\n");
  return 0;
}
