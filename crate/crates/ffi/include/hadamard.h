/* Generated by cbindgen. Do not edit. */

#ifndef HADAMARD_H
#define HADAMARD_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * `sign` argument of the second-order calls.
 */
#define HD_SIGN_PLUS 0

#define HD_SIGN_MINUS 1

/**
 * Result code of every fallible call.
 */
typedef enum HdStatus {
  HD_STATUS_OK = 0,
  HD_STATUS_NULL_POINTER = 1,
  HD_STATUS_INVALID_UTF8 = 2,
  HD_STATUS_PARSE = 3,
  HD_STATUS_INVALID_ARGUMENT = 4,
  HD_STATUS_DOMAIN = 5,
  HD_STATUS_NUMERICAL = 6,
  HD_STATUS_CONFIG = 7,
  HD_STATUS_PANIC = 8,
} HdStatus;

/**
 * Opaque bound evaluation.
 */
typedef struct HdBoundReport HdBoundReport;

/**
 * Opaque function handle.
 */
typedef struct HdFunction HdFunction;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or `""`. Valid until the
 * next call on the same thread.
 */
const char *hd_last_error(void);

/**
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void hd_string_free(char *s);

/**
 * Parses `pow:N`, `exp:C` or `poly:C0,C1,...`.
 *
 * # Safety
 * `spec` is a NUL-terminated string, the out-pointer valid.
 */
enum HdStatus hd_function_parse(const char *spec, struct HdFunction **out_fn);

/**
 * # Safety
 * `f` is null or a handle from [`hd_function_parse`].
 */
void hd_function_free(struct HdFunction *f);

/**
 * The `order`-th derivative (0 to 3) at `x`.
 *
 * # Safety
 * `f` is a live handle, the out-pointer valid.
 */
enum HdStatus hd_function_eval(const struct HdFunction *f,
                               double x,
                               uint32_t order,
                               double *out_value);

/**
 * Canonical spec string; free with [`hd_string_free`].
 *
 * # Safety
 * `f` is a live handle, the out-pointer valid.
 */
enum HdStatus hd_function_to_string(const struct HdFunction *f, char **out_str);

/**
 * Evaluates one bound. `p`, `q` and `m` are NaN when absent; `theorem` is an
 * id such as `"thm2.4"`.
 *
 * # Safety
 * `theorem` is a NUL-terminated string, `f` a live handle, the out-pointer valid.
 */
enum HdStatus hd_bound_evaluate(const char *theorem,
                                const struct HdFunction *f,
                                double a,
                                double b,
                                double p,
                                double q,
                                double m,
                                int sign_convention,
                                struct HdBoundReport **out_report);

/**
 * # Safety
 * `r` is null or a handle from [`hd_bound_evaluate`].
 */
void hd_bound_free(struct HdBoundReport *r);

/**
 * `|lhs|`, or NaN for a null handle.
 *
 * # Safety
 * `r` is null or a live handle.
 */
double hd_bound_lhs(const struct HdBoundReport *r);

/**
 * # Safety
 * `r` is null or a live handle.
 */
double hd_bound_rhs(const struct HdBoundReport *r);

/**
 * `rhs - |lhs|`.
 *
 * # Safety
 * `r` is null or a live handle.
 */
double hd_bound_margin(const struct HdBoundReport *r);

/**
 * 1 if every hypothesis passed, 0 if not, -1 for a null handle.
 *
 * # Safety
 * `r` is null or a live handle.
 */
int hd_bound_hypotheses_ok(const struct HdBoundReport *r);

/**
 * The full report as JSON; free with [`hd_string_free`].
 *
 * # Safety
 * `r` is a live handle, the out-pointer valid.
 */
enum HdStatus hd_bound_to_json(const struct HdBoundReport *r, char **out_json);

/**
 * # Safety
 * The out-pointer is valid.
 */
enum HdStatus hd_gamma(double x, double *out_value);

/**
 * # Safety
 * The out-pointer is valid.
 */
enum HdStatus hd_beta(double x, double y, double *out_value);

/**
 * `L_n^n(a, b) = (b^{n+1} - a^{n+1}) / ((n+1)(b-a))`.
 *
 * # Safety
 * The out-pointer is valid.
 */
enum HdStatus hd_log_mean_pow(double a, double b, uint32_t n, double *out_value);

/**
 * Both sides of the trapezoid-error identity for `f` on `[a, b]`.
 *
 * # Safety
 * `f` is a live handle, `lhs` and `rhs` valid pointers.
 */
enum HdStatus hd_lemma11(const struct HdFunction *f, double a, double b, double *lhs, double *rhs);

/**
 * `D1 = avg f - (b f(b) - a f(a)) / (b - a)`.
 *
 * # Safety
 * `f` is a live handle, the out-pointer valid.
 */
enum HdStatus hd_deviation_d1(const struct HdFunction *f, double a, double b, double *out_value);

/**
 * `D2 = D1 ± (b f'(b) + a f'(a)) / 2`, plus for [`HD_SIGN_PLUS`].
 *
 * # Safety
 * `f` is a live handle, the out-pointer valid.
 */
enum HdStatus hd_deviation_d2(const struct HdFunction *f,
                              double a,
                              double b,
                              int sign_convention,
                              double *out_value);

/**
 * Runs the property suites described by `config_json` (the `verify` config
 * file format; `"{}"` for defaults) and returns the JSON report.
 * `exit_code` receives what `hadamard verify` would exit with: 0 or 1.
 *
 * # Safety
 * `config_json` is a NUL-terminated string, the out-pointers are valid.
 */
enum HdStatus hd_verify_json(const char *config_json, char **out_json, int *exit_code);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HADAMARD_H */
