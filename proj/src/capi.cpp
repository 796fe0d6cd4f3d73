#include "qcml/qcml.h"

#include <new>
#include <string>

#include "qcml/dispatch.hpp"

struct qcml_context {
  qcml::DispatchResult result;
};

extern "C" {

qcml_context* qcml_context_new(void) { return new (std::nothrow) qcml_context(); }

void qcml_context_free(qcml_context* ctx) { delete ctx; }

qcml_status qcml_run(qcml_context* ctx, const char* config_json) {
  if (!ctx || !config_json) return QCML_ERR_INVALID_ARGUMENT;
  try {
    ctx->result = qcml::dispatch(config_json);
  } catch (...) {
    ctx->result = {};
    ctx->result.exit_code = QCML_ERR_SOLVER;
    ctx->result.error_kind = "InternalError";
    ctx->result.error_message = "unexpected failure";
  }
  return static_cast<qcml_status>(ctx->result.exit_code);
}

const char* qcml_result_json(const qcml_context* ctx) { return ctx ? ctx->result.json.c_str() : ""; }
const char* qcml_result_csv(const qcml_context* ctx) { return ctx ? ctx->result.csv.c_str() : ""; }
const char* qcml_error_kind(const qcml_context* ctx) { return ctx ? ctx->result.error_kind.c_str() : ""; }
const char* qcml_error_message(const qcml_context* ctx) { return ctx ? ctx->result.error_message.c_str() : ""; }

const char* qcml_status_string(qcml_status status) {
  switch (status) {
    case QCML_OK: return "ok";
    case QCML_ERR_CONFIG: return "configuration error";
    case QCML_ERR_DOMAIN: return "domain error";
    case QCML_ERR_SOLVER: return "solver or undecidable error";
    case QCML_ERR_INVALID_ARGUMENT: return "invalid argument";
  }
  return "unknown status";
}

const char* qcml_version(void) { return qcml::version(); }

}
