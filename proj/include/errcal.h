/* errcal: error-calculus library, C interface.
 *
 * Every entry point is exception-free; failures come back as a status code
 * with a thread-local message readable through ec_last_error().  Reports
 * are opaque; render them to CSV or JSON text owned by the report handle.
 */
#ifndef ERRCAL_H
#define ERRCAL_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ec_status {
  EC_OK = 0,         /* success */
  EC_INTERNAL = 1,   /* unexpected failure (bug or resource exhaustion) */
  EC_CONFIG = 2,     /* invalid config: bad field, insufficient smoothness */
  EC_CAPABILITY = 3, /* request outside what the structure supports */
  EC_NUMERIC = 4     /* computation aborted on a numeric invariant */
} ec_status;

typedef struct ec_report ec_report;

/* Runs `command` (price, sens, levelvol, ibp, perturb-check, triangle) on
 * the JSON object in config_json.  overrides_json may be NULL; when given,
 * its top-level fields replace the config's before anything is read, and
 * the report's config hash covers the merged object.  On EC_OK, *out holds
 * a new report to free with ec_report_free. */
ec_status ec_run(const char* command, const char* config_json,
                 const char* overrides_json, ec_report** out);

/* Renders the report: format "csv", "json", or NULL/"" for the config's
 * default.  The string lives until the next render on this report or
 * ec_report_free.  NULL on bad format (see ec_last_error). */
const char* ec_report_render(ec_report* report, const char* format);

/* Output path from the config ("out" field); "" means stdout. */
const char* ec_report_out_path(const ec_report* report);

void ec_report_free(ec_report* report);

/* Message for the most recent failure on this thread; never NULL. */
const char* ec_last_error(void);

const char* ec_version(void);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* ERRCAL_H */
