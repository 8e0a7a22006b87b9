/* C ABI for the g-natural bundle-metric engine.
 * Mirrors crates/ffi/src/lib.rs; regenerate with `cbindgen --crate gnatural-ffi`.
 */

#ifndef GNATURAL_H
#define GNATURAL_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes returned by every fallible entry point. */
typedef enum GnatStatus {
  /* Operation ran and its verdict passed. */
  GNAT_STATUS_OK = 0,
  /* Operation ran and its verdict failed; a report is still available. */
  GNAT_STATUS_FAILED = 1,
  /* Null pointer, non-UTF-8 input, or missing argument. */
  GNAT_STATUS_INVALID_ARGUMENT = 2,
  /* Scenario JSON did not parse. */
  GNAT_STATUS_PARSE_ERROR = 3,
  /* The geometry engine rejected the scenario; details via gnat_last_error. */
  GNAT_STATUS_GEOMETRY_ERROR = 4,
  /* Internal panic was caught at the boundary. */
  GNAT_STATUS_PANIC = 5,
} GnatStatus;

/* Opaque session: owns the last report and the last error message. */
typedef struct GnatSession GnatSession;

/* Creates a session; release with gnat_session_free. */
GnatSession *gnat_session_new(void);

/* Frees a session created by gnat_session_new; a null pointer is a no-op. */
void gnat_session_free(GnatSession *session);

/* Runs one scenario given as JSON; on OK/FAILED the report is available
 * through gnat_last_report_json until the next run on this session. */
GnatStatus gnat_run_scenario_json(GnatSession *session, const char *scenario_json);

/* Last report as a JSON string, or null if the last run produced none.
 * The pointer stays valid until the next run on this session or its free. */
const char *gnat_last_report_json(const GnatSession *session);

/* Last error message, or null when the last call succeeded. */
const char *gnat_last_error(const GnatSession *session);

/* K-contact scalar condition of a sextet spec at t = 1 for S^(2m+1);
 * writes the residual to out. */
GnatStatus gnat_kcontact_condition(const char *sextet_spec, uint32_t m, double *out);

/* Library version as a static string. */
const char *gnat_version(void);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* GNATURAL_H */
