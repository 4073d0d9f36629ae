/* C interface to the Wilson-Nevanlinna library. */

#ifndef WNEV_H
#define WNEV_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
#define WNEV_OK 0

/**
 * The point is a pole of the model.
 */
#define WNEV_POLE 1

/**
 * No finite value exists (undefined point or missing evaluator).
 */
#define WNEV_UNDEFINED 2

/**
 * Null pointer or malformed argument.
 */
#define WNEV_BAD_ARGUMENT 3

/**
 * Computation failed; wnev_last_error() has the reason.
 */
#define WNEV_COMPUTE_ERROR 4

/**
 * Opaque handle to a catalog model.
 */
typedef struct WnevModel WnevModel;

/**
 * Nevanlinna functionals at one radius.
 */
typedef struct WnevCharacteristicRow {
  double r;
  double m;
  double big_n;
  double t;
  double quadrature_error;
} WnevCharacteristicRow;

/**
 * Wilson counting functions at one radius.
 */
typedef struct WnevCountRow {
  double r;
  uint64_t n_w;
  uint64_t n_w_tilde;
  double big_n_w;
  double big_n_w_tilde;
} WnevCountRow;

/**
 * Wilson defect estimates over a log grid.
 */
typedef struct WnevDefects {
  double theta_w;
  double vartheta_w;
  double delta;
} WnevDefects;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * The message from the most recent failure on this thread. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *wnev_last_error(void);

/**
 * Builds a model from a catalog label such as "exp", "product_i(1)",
 * "g_iii(2,1)" or "ghyp". Returns null on failure.
 *
 * # Safety
 * `label` must point to a valid NUL-terminated string.
 */
struct WnevModel *wnev_model_new(const char *label);

/**
 * Frees a model handle; null is a no-op.
 *
 * # Safety
 * `model` must be null or a live pointer from wnev_model_new, not freed
 * twice.
 */
void wnev_model_free(struct WnevModel *model);

/**
 * Evaluates the model at x = re + i im.
 *
 * # Safety
 * `model` must be a live handle; `out_re` and `out_im` must be writable.
 */
int32_t wnev_model_eval(const struct WnevModel *model,
                        double re,
                        double im,
                        double *out_re,
                        double *out_im);

/**
 * T(r, 1/(f-a)) decomposition at radius r; pass has_a = 0 for poles.
 *
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
int32_t wnev_characteristic_row(const struct WnevModel *model,
                                int32_t has_a,
                                double a_re,
                                double a_im,
                                double r,
                                struct WnevCharacteristicRow *out);

/**
 * Wilson counting functions n_W, n_W~, N_W, N_W~ at radius r with shift
 * c = c_re + i c_im (pass 0, 1 for the default shift).
 *
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
int32_t wnev_count_row(const struct WnevModel *model,
                       int32_t has_a,
                       double a_re,
                       double a_im,
                       double r,
                       double c_re,
                       double c_im,
                       struct WnevCountRow *out);

/**
 * Wilson defect estimates over the log grid [r_min, r_max] with
 * points_per_decade sample density.
 *
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
int32_t wnev_defect_estimates(const struct WnevModel *model,
                              int32_t has_a,
                              double a_re,
                              double a_im,
                              double r_min,
                              double r_max,
                              uint32_t points_per_decade,
                              struct WnevDefects *out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* WNEV_H */
