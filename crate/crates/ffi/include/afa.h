#ifndef AFA_H
#define AFA_H

#include <stddef.h>

typedef enum AfaStatus {
  AFA_STATUS_OK = 0,
  AFA_STATUS_NULL_POINTER = 1,
  AFA_STATUS_VALIDATION = 2,
  AFA_STATUS_NUMERICAL = 3,
  AFA_STATUS_BUFFER_TOO_SMALL = 4,
  AFA_STATUS_PANIC = 5,
} AfaStatus;

/**
 * Opaque coalition game.
 */
typedef struct AfaGame AfaGame;

/**
 * Opaque symmetric kernel.
 */
typedef struct AfaKernel AfaKernel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failed call on this thread, or null. The
 * pointer stays valid until the next `afa_*` call on the same thread.
 */
const char *afa_last_error_message(void);

/**
 * Builds a game from `2^n` values indexed by coalition bitmask.
 *
 * # Safety
 * `values` must point to `len` readable doubles and `out` must be writable.
 */
enum AfaStatus afa_game_new(size_t n, const double *values, size_t len, struct AfaGame **out);

/**
 * Parses `{"n": .., "values": [..]}`.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` must be writable.
 */
enum AfaStatus afa_game_from_json(const char *json, struct AfaGame **out);

/**
 * # Safety
 * `game` must be a live handle and `n` writable.
 */
enum AfaStatus afa_game_n(const struct AfaGame *game, size_t *n);

/**
 * # Safety
 * `game` must be null or a handle not yet freed.
 */
void afa_game_free(struct AfaGame *game);

/**
 * Builds a kernel from a spec string such as `"shap"`, `"fesp:0.3"` or
 * `"custom:1,0,2"`.
 *
 * # Safety
 * `spec` must be a NUL-terminated string and `out` must be writable.
 */
enum AfaStatus afa_kernel_from_spec(const char *spec, size_t n, struct AfaKernel **out);

/**
 * Copies `w[0..=n]` into `out`, which must hold at least `n + 1` values.
 *
 * # Safety
 * `kernel` must be a live handle and `out` must point to `len` writable doubles.
 */
enum AfaStatus afa_kernel_weights(const struct AfaKernel *kernel, double *out, size_t len);

/**
 * # Safety
 * `kernel` must be null or a handle not yet freed.
 */
void afa_kernel_free(struct AfaKernel *kernel);

/**
 * Efficient attribution for `kernel`; writes `n` values to `phi`.
 *
 * # Safety
 * Handles must be live and `phi` must point to `len` writable doubles.
 */
enum AfaStatus afa_solve_constrained(const struct AfaGame *game,
                                     const struct AfaKernel *kernel,
                                     double *phi,
                                     size_t len);

/**
 * Attribution without the efficiency constraint; writes `n` values to `phi`.
 *
 * # Safety
 * Handles must be live and `phi` must point to `len` writable doubles.
 */
enum AfaStatus afa_solve_unconstrained(const struct AfaGame *game,
                                       const struct AfaKernel *kernel,
                                       double *phi,
                                       size_t len);

/**
 * # Safety
 * `game` must be live and `phi` must point to `len` writable doubles.
 */
enum AfaStatus afa_shapley(const struct AfaGame *game, double *phi, size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AFA_H */
