#ifndef BOTDYN_H
#define BOTDYN_H

/* Generated by cbindgen from crates/ffi/src; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  BOTDYN_STATUS_OK = 0,
  BOTDYN_STATUS_NULL_POINTER = 1,
  BOTDYN_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Malformed or out-of-range input data.
   */
  BOTDYN_STATUS_INPUT_ERROR = 3,
  /**
   * Numerical failure such as a non-converging stationary distribution.
   */
  BOTDYN_STATUS_INTERNAL_ERROR = 4,
  BOTDYN_STATUS_BUFFER_TOO_SMALL = 5,
  BOTDYN_STATUS_PANIC = 6,
} BotdynStatus;

typedef enum {
  BOTDYN_BINNING_QUARTILE = 0,
  BOTDYN_BINNING_RANK_UNIFORM = 1,
  BOTDYN_BINNING_EXPONENTIAL = 2,
} BotdynBinning;

/**
 * Opaque validated corpus.
 */
typedef struct BotdynCorpus BotdynCorpus;

/**
 * Opaque reconstructed machine.
 */
typedef struct BotdynMachine BotdynMachine;

/**
 * Reconstruction parameters. `max_len` is the history window length `L`.
 */
typedef struct {
  size_t max_len;
  double alpha;
  uint64_t min_count;
} BotdynParams;

typedef struct {
  double complexity;
  double entropy_rate;
  double predictable_information;
  size_t n_states;
} BotdynMeasures;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or NULL. The pointer
 * stays valid until the next call into the library from this thread.
 */
const char *botdyn_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *botdyn_version(void);

/**
 * Defaults: `L = 3`, `alpha = 0.001`, `min_count = 5`.
 */
BotdynParams botdyn_params_default(void);

/**
 * Reconstructs a machine from `len` symbols in `0..alphabet_size`.
 *
 * # Safety
 * `symbols` must point to `len` bytes and `out` must be writable.
 */
BotdynStatus botdyn_machine_reconstruct(const uint8_t *symbols,
                                        size_t len,
                                        size_t alphabet_size,
                                        BotdynParams params,
                                        BotdynMachine **out);

/**
 * # Safety
 * `machine` must come from [`botdyn_machine_reconstruct`] and not be used
 * afterwards. NULL is ignored.
 */
void botdyn_machine_free(BotdynMachine *machine);

/**
 * # Safety
 * `machine` must be a live handle and `out` writable.
 */
BotdynStatus botdyn_machine_num_states(const BotdynMachine *machine, size_t *out);

/**
 * Statistical complexity in bits.
 *
 * # Safety
 * `machine` must be a live handle and `out` writable.
 */
BotdynStatus botdyn_machine_complexity(const BotdynMachine *machine, double *out);

/**
 * Entropy rate in bits per symbol.
 *
 * # Safety
 * `machine` must be a live handle and `out` writable.
 */
BotdynStatus botdyn_machine_entropy_rate(const BotdynMachine *machine, double *out);

/**
 * Copies the stationary distribution into `out` (capacity `cap`) and
 * stores the number of states in `written`. Returns `BufferTooSmall`
 * without copying when `cap` is insufficient; `written` is still set.
 *
 * # Safety
 * `out` must have room for `cap` doubles; `written` must be writable.
 */
BotdynStatus botdyn_machine_stationary(const BotdynMachine *machine,
                                       double *out,
                                       size_t cap,
                                       size_t *written);

/**
 * Serializes the machine to JSON. Release the string with
 * [`botdyn_string_free`].
 *
 * # Safety
 * `machine` must be a live handle and `out` writable.
 */
BotdynStatus botdyn_machine_to_json(const BotdynMachine *machine, char **out);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards. NULL is
 * ignored.
 */
void botdyn_string_free(char *s);

/**
 * Reconstructs and measures a symbol string in one call.
 *
 * # Safety
 * `symbols` must point to `len` bytes and `out` must be writable.
 */
BotdynStatus botdyn_measure_symbols(const uint8_t *symbols,
                                    size_t len,
                                    size_t alphabet_size,
                                    BotdynParams params,
                                    BotdynMeasures *out);

/**
 * Discretizes `len` scores into symbols `0..4` written to `out`.
 * `exp_base` is only read for `Exponential`.
 *
 * # Safety
 * `raw` must point to `len` doubles and `out` to `len` writable bytes.
 */
BotdynStatus botdyn_bin(const double *raw,
                        size_t len,
                        BotdynBinning kind,
                        double exp_base,
                        uint8_t *out);

/**
 * Shannon entropy in bits of a probability vector.
 *
 * # Safety
 * `dist` must point to `len` doubles and `out` must be writable.
 */
BotdynStatus botdyn_shannon_entropy(const double *dist, size_t len, double *out);

/**
 * Reads and validates a corpus file (`.csv` or `.jsonl`).
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` writable.
 */
BotdynStatus botdyn_corpus_read(const char *path, BotdynCorpus **out);

/**
 * Number of records, or 0 for NULL.
 *
 * # Safety
 * `corpus` must be NULL or a live handle.
 */
size_t botdyn_corpus_len(const BotdynCorpus *corpus);

/**
 * # Safety
 * `corpus` must come from [`botdyn_corpus_read`] and not be used
 * afterwards. NULL is ignored.
 */
void botdyn_corpus_free(BotdynCorpus *corpus);

/**
 * Runs the whole pipeline from a JSON configuration (same schema as the
 * CLI's `--config`).
 *
 * # Safety
 * `config_json` must be a NUL-terminated string.
 */
BotdynStatus botdyn_pipeline_run(const char *config_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BOTDYN_H */
