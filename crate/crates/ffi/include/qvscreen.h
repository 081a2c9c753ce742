#ifndef QVSCREEN_H
#define QVSCREEN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum QvsStatus {
  QVS_STATUS_OK = 0,
  QVS_STATUS_NULL_POINTER = 1,
  QVS_STATUS_INVALID_ARGUMENT = 2,
  QVS_STATUS_DIMENSION_MISMATCH = 3,
  QVS_STATUS_PARSE_ERROR = 4,
  QVS_STATUS_IO_ERROR = 5,
  QVS_STATUS_SINGLE_CLASS = 6,
  QVS_STATUS_PANIC = 7,
} QvsStatus;

// Opaque kernel matrix.
typedef struct QvsGram QvsGram;

// Opaque trained classifier on a precomputed kernel.
typedef struct QvsSvc QvsSvc;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer stays
// valid until the next failing call on the same thread.
const char *qvs_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *qvs_version(void);

uintptr_t qvs_descriptor_count(void);

// Static name of descriptor `index`, or null when out of range.
const char *qvs_descriptor_name(uintptr_t index);

// Writes the descriptor vector of `smiles` into `out` (`out_len` must be at
// least [`qvs_descriptor_count`]). On a parse error the byte offset is stored
// in `error_position` when it is non-null.
//
// # Safety
// `smiles` must be a NUL-terminated string and `out` must hold `out_len` doubles.
enum QvsStatus qvs_smiles_descriptors(const char *smiles,
                                      double *out,
                                      uintptr_t out_len,
                                      uintptr_t *error_position);

// Exact fidelity kernel between two angle vectors of length `n_qubits`.
//
// # Safety
// `x` and `x_prime` must hold `n_qubits` doubles; `out` must be writable.
enum QvsStatus qvs_kernel_exact(const double *x,
                                const double *x_prime,
                                uintptr_t n_qubits,
                                uintptr_t depth,
                                double *out);

// Shot-sampled fidelity kernel estimate; deterministic for a given seed.
//
// # Safety
// As for [`qvs_kernel_exact`].
enum QvsStatus qvs_kernel_sampled(const double *x,
                                  const double *x_prime,
                                  uintptr_t n_qubits,
                                  uintptr_t depth,
                                  uint64_t shots,
                                  uint64_t seed,
                                  double *out);

// Builds the kernel matrix between the rows of `a` (`a_rows` × `n_qubits`)
// and the rows of `b`; pass a null `b` for the self-Gram of `a`. `shots == 0`
// selects exact mode. `psd_repair` only affects sampled self-Grams.
//
// # Safety
// `a` must hold `a_rows * n_qubits` doubles, `b` (if non-null) `b_rows *
// n_qubits`; `out` must be writable. Free the result with [`qvs_gram_free`].
enum QvsStatus qvs_gram_new(const double *a,
                            uintptr_t a_rows,
                            const double *b,
                            uintptr_t b_rows,
                            uintptr_t n_qubits,
                            uintptr_t depth,
                            uint64_t shots,
                            uint64_t seed,
                            bool psd_repair,
                            struct QvsGram **out);

// # Safety
// `g` must be a live handle from [`qvs_gram_new`].
uintptr_t qvs_gram_rows(const struct QvsGram *g);

// # Safety
// `g` must be a live handle from [`qvs_gram_new`].
uintptr_t qvs_gram_cols(const struct QvsGram *g);

// Copies the matrix row-major into `out`, which must hold rows × cols values.
//
// # Safety
// `g` must be live and `out` must hold `out_len` doubles.
enum QvsStatus qvs_gram_copy(const struct QvsGram *g, double *out, uintptr_t out_len);

// Writes the matrix to `path` in QKM1 format.
//
// # Safety
// `g` must be live and `path` NUL-terminated.
enum QvsStatus qvs_gram_write_qkm(const struct QvsGram *g, const char *path);

// # Safety
// `g` must come from [`qvs_gram_new`] and not be used afterwards. Null is a no-op.
void qvs_gram_free(struct QvsGram *g);

// Trains an SVC on the `n` × `n` row-major kernel `k` with labels `y` in
// {+1, −1} and box constraint `c`.
//
// # Safety
// `k` must hold `n * n` doubles, `y` `n` doubles; `out` must be writable.
// Free the result with [`qvs_svc_free`].
enum QvsStatus qvs_svc_train(const double *k,
                             uintptr_t n,
                             const double *y,
                             double c,
                             struct QvsSvc **out);

// Decision values for `n_test` rows of the test-vs-train kernel `k_test`
// (`n_test` × n_train, row-major).
//
// # Safety
// `svc` must be live; `k_test` must hold `n_test * n_train` doubles and
// `out` `n_test` doubles.
enum QvsStatus qvs_svc_decision(const struct QvsSvc *svc,
                                const double *k_test,
                                uintptr_t n_test,
                                double *out);

// Number of support vectors, 0 for a null handle.
//
// # Safety
// `svc` must be live or null.
uintptr_t qvs_svc_support_count(const struct QvsSvc *svc);

// Bias term b, NaN for a null handle.
//
// # Safety
// `svc` must be live or null.
double qvs_svc_bias(const struct QvsSvc *svc);

// # Safety
// `svc` must come from [`qvs_svc_train`] and not be used afterwards. Null is a no-op.
void qvs_svc_free(struct QvsSvc *svc);

// AUC-ROC of `scores` against labels `y` (+1 active, −1 inactive).
//
// # Safety
// `y` and `scores` must hold `n` values; `out` must be writable.
enum QvsStatus qvs_roc_auc(const int8_t *y, const double *scores, uintptr_t n, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QVSCREEN_H */
