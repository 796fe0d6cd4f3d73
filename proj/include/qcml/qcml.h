/* C interface to the qcml toolkit. */
#ifndef QCML_H
#define QCML_H

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define QCML_API __declspec(dllexport)
#else
#define QCML_API __attribute__((visibility("default")))
#endif

/* Status codes; they double as process exit codes. */
typedef enum qcml_status {
  QCML_OK = 0,
  QCML_ERR_CONFIG = 1,
  QCML_ERR_DOMAIN = 2,
  QCML_ERR_SOLVER = 3,
  QCML_ERR_INVALID_ARGUMENT = 4
} qcml_status;

typedef struct qcml_context qcml_context;

QCML_API qcml_context* qcml_context_new(void);
QCML_API void qcml_context_free(qcml_context* ctx);

/* Runs one command.  config_json has the form
 *   {"command": "snake", "action": "threshold", "params": {"s": 0.5},
 *    "format": "json", "output": "", "seed": 0}
 * Results stay owned by ctx until the next run or qcml_context_free. */
QCML_API qcml_status qcml_run(qcml_context* ctx, const char* config_json);

QCML_API const char* qcml_result_json(const qcml_context* ctx);
QCML_API const char* qcml_result_csv(const qcml_context* ctx);
/* Error class name such as "DomainError", or "" after success. */
QCML_API const char* qcml_error_kind(const qcml_context* ctx);
QCML_API const char* qcml_error_message(const qcml_context* ctx);

QCML_API const char* qcml_status_string(qcml_status status);
QCML_API const char* qcml_version(void);

#ifdef __cplusplus
}
#endif

#endif
