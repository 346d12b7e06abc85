#ifndef QBNF_H
#define QBNF_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QbnfStatus {
  QBNF_STATUS_OK = 0,
  QBNF_STATUS_NULL_POINTER = 1,
  QBNF_STATUS_INVALID_UTF8 = 2,
  QBNF_STATUS_DOMAIN = 3,
  QBNF_STATUS_INPUT = 4,
  QBNF_STATUS_CONFIGURATION = 5,
  QBNF_STATUS_SHAPE = 6,
  QBNF_STATUS_SIZE = 7,
  QBNF_STATUS_RESONANT = 8,
  QBNF_STATUS_SMALL_DIVISOR = 9,
  QBNF_STATUS_VALIDITY = 10,
  QBNF_STATUS_NUMERIC = 11,
  QBNF_STATUS_FIT = 12,
  QBNF_STATUS_SEQUENCING = 13,
  QBNF_STATUS_SELECTION = 14,
  QBNF_STATUS_IO = 15,
  QBNF_STATUS_PANIC = 16,
} QbnfStatus;

/**
 * Parsed problem configuration.
 */
typedef struct QbnfConfig QbnfConfig;

/**
 * Approximation function `Delta`.
 */
typedef struct QbnfDelta QbnfDelta;

/**
 * Pipeline report.
 */
typedef struct QbnfReport QbnfReport;

/**
 * Truncated torus symbol.
 */
typedef struct QbnfSymbol QbnfSymbol;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *qbnf_version(void);

/**
 * Message of the last failed call on this thread, or NULL. Valid until the
 * next call into the library from the same thread.
 */
const char *qbnf_last_error_message(void);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library and not yet freed.
 */
void qbnf_string_free(char *s);

/**
 * # Safety
 * `out` must point to writable memory for one `double`.
 */
enum QbnfStatus qbnf_gamma(double x, double *out);

/**
 * # Safety
 * `out` must point to writable memory for one `double`.
 */
enum QbnfStatus qbnf_beta(double x, double y, double *out);

/**
 * `Delta(t) = (1+t)^exponent`.
 *
 * # Safety
 * `out` must point to writable memory for one handle pointer.
 */
enum QbnfStatus qbnf_delta_polynomial(double exponent, double sigma, struct QbnfDelta **out);

/**
 * `Delta(t) = exp(t^a / a)`, requires `a < 1/sigma`.
 *
 * # Safety
 * `out` must point to writable memory for one handle pointer.
 */
enum QbnfStatus qbnf_delta_sub_exponential(double a, double sigma, struct QbnfDelta **out);

/**
 * `Delta(t) = exp(t^(1/sigma) / (1 + log^gamma(1+t)))`.
 *
 * # Safety
 * `out` must point to writable memory for one handle pointer.
 */
enum QbnfStatus qbnf_delta_log_tempered(double gamma, double sigma, struct QbnfDelta **out);

/**
 * `(1+t)^power * Delta(t)` as a new handle.
 *
 * # Safety
 * `delta` must be a live handle; `out` must point to writable memory for one handle pointer.
 */
enum QbnfStatus qbnf_delta_with_power(const struct QbnfDelta *delta,
                                      double power,
                                      struct QbnfDelta **out);

/**
 * # Safety
 * `delta` must be a live handle; `out` must point to writable memory for one `double`.
 */
enum QbnfStatus qbnf_delta_eval(const struct QbnfDelta *delta, double t, double *out);

/**
 * `Gamma_s(eta) = sup_t (1+t)^s Delta(t) exp(-eta t^(1/sigma))` and its argmax.
 *
 * # Safety
 * `delta` must be a live handle; `out_value` and `out_argmax` must be writable (`out_argmax` may be NULL).
 */
enum QbnfStatus qbnf_delta_gamma_sup(const struct QbnfDelta *delta,
                                     double s,
                                     double eta,
                                     double *out_value,
                                     double *out_argmax);

/**
 * # Safety
 * `delta` must be NULL or a handle not yet freed.
 */
void qbnf_delta_free(struct QbnfDelta *delta);

/**
 * Scans `0 < |k|_1 <= k_radius` and reports `kappa_max = min |<k,omega>| Delta(|k|)`
 * and the minimizing mode (written to `out_worst_k`, `n` entries).
 *
 * # Safety
 * `omega` must point to `n` doubles, `out_worst_k` to `n` writable `int64_t`
 * (or be NULL), `out_kappa_max` to one writable `double`.
 */
enum QbnfStatus qbnf_scan_divisors(const double *omega,
                                   size_t n,
                                   const struct QbnfDelta *delta,
                                   uint64_t k_radius,
                                   double kappa,
                                   double *out_kappa_max,
                                   int64_t *out_worst_k);

/**
 * Parses a TOML configuration from a string.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must point to writable memory for one handle pointer.
 */
enum QbnfStatus qbnf_config_parse(const char *text,
                                  struct QbnfConfig **out);

/**
 * Parses a TOML configuration file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must point to writable memory for one handle pointer.
 */
enum QbnfStatus qbnf_config_parse_file(const char *path,
                                       struct QbnfConfig **out);

/**
 * # Safety
 * `config` must be NULL or a handle not yet freed.
 */
void qbnf_config_free(struct QbnfConfig *config);

/**
 * Runs the pipeline. A report is produced even when a stage fails; check
 * [`qbnf_report_success`].
 *
 * # Safety
 * `config` must be a live handle; `out` must point to writable memory for one handle pointer.
 */
enum QbnfStatus qbnf_run(const struct QbnfConfig *config,
                         double tolerance,
                         bool check_only,
                         struct QbnfReport **out);

/**
 * # Safety
 * `report` must be NULL or a live handle.
 */
bool qbnf_report_success(const struct QbnfReport *report);

/**
 * Serializes the report; free the string with [`qbnf_string_free`].
 *
 * # Safety
 * `report` must be a live handle; `out` must point to writable memory for one pointer.
 */
enum QbnfStatus qbnf_report_to_json(const struct QbnfReport *report, char **out);

/**
 * # Safety
 * `report` must be NULL or a handle not yet freed.
 */
void qbnf_report_free(struct QbnfReport *report);

/**
 * # Safety
 * `json` must be a NUL-terminated string; `out` must point to writable memory for one handle pointer.
 */
enum QbnfStatus qbnf_symbol_from_json(const char *json,
                                      struct QbnfSymbol **out);

/**
 * # Safety
 * `symbol` must be a live handle; `out` must point to writable memory for one pointer.
 */
enum QbnfStatus qbnf_symbol_to_json(const struct QbnfSymbol *symbol, char **out);

/**
 * `a # b` truncated to the union of both shapes. `out_clipped` (nullable)
 * receives the discarded l1 mass.
 *
 * # Safety
 * `a` and `b` must be live handles; `out` must point to writable memory for one handle pointer.
 */
enum QbnfStatus qbnf_symbol_compose(const struct QbnfSymbol *a,
                                    const struct QbnfSymbol *b,
                                    struct QbnfSymbol **out,
                                    double *out_clipped);

/**
 * # Safety
 * `symbol` must be NULL or a handle not yet freed.
 */
void qbnf_symbol_free(struct QbnfSymbol *symbol);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QBNF_H */
