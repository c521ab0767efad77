#ifndef ODDM_H
#define ODDM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. Zero is success.
 */
typedef enum OddmStatus {
  ODDM_STATUS_OK = 0,
  ODDM_STATUS_NULL_POINTER = 1,
  ODDM_STATUS_INVALID_PARAMS = 2,
  ODDM_STATUS_DIMENSION_MISMATCH = 3,
  ODDM_STATUS_BUFFER_TOO_SMALL = 4,
  ODDM_STATUS_INSUFFICIENT_SPAN = 5,
  ODDM_STATUS_CHANNEL_OUT_OF_RANGE = 6,
  ODDM_STATUS_TOO_LARGE = 7,
  ODDM_STATUS_NUMERICAL = 8,
  ODDM_STATUS_PANIC = 9,
} OddmStatus;

/**
 * Channel together with its DD-domain matrix on the modem grid.
 */
typedef struct OddmChannel OddmChannel;

/**
 * Grid parameters together with the designed pulse trains.
 */
typedef struct OddmModem OddmModem;

/**
 * Complex sample with the layout of C99 `double _Complex`.
 */
typedef struct OddmComplex {
  double re;
  double im;
} OddmComplex;

/**
 * One delay-Doppler path: gain, delay bin `l >= 0` and Doppler bin `k`.
 */
typedef struct OddmPath {
  struct OddmComplex gain;
  size_t delay;
  int64_t doppler;
} OddmPath;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *oddm_version(void);

/**
 * Message of the last failed call on this thread, empty after a success.
 * The pointer stays valid until the next library call on this thread.
 */
const char *oddm_last_error(void);

/**
 * Designs the pulse for an `m × n` grid and writes a new handle to `out`.
 *
 * # Safety
 *
 * `out` must be valid for one pointer write.
 */
enum OddmStatus oddm_modem_new(size_t m,
                               size_t n,
                               double scs_hz,
                               size_t q,
                               size_t oversample,
                               size_t cp_len,
                               double rolloff,
                               struct OddmModem **out);

/**
 * # Safety
 *
 * `modem` must be null or a handle from [`oddm_modem_new`] not yet freed.
 */
void oddm_modem_free(struct OddmModem *modem);

/**
 * Number of DD symbols `M·N`; zero for a null handle.
 *
 * # Safety
 *
 * `modem` must be null or a live handle.
 */
size_t oddm_modem_grid_len(const struct OddmModem *modem);

/**
 * Sample span of a modulated frame (with CP): first index and length.
 *
 * # Safety
 *
 * `modem` must be a live handle; `start` and `len` valid for one write.
 */
enum OddmStatus oddm_modem_waveform_span(const struct OddmModem *modem,
                                         int64_t *start,
                                         size_t *len);

/**
 * Sample span the demodulator reads: first index and length.
 *
 * # Safety
 *
 * `modem` must be a live handle; `start` and `len` valid for one write.
 */
enum OddmStatus oddm_modem_demod_span(const struct OddmModem *modem, int64_t *start, size_t *len);

/**
 * Discrete ambiguity `A(mT/M, n/(NT))` of the pulse train without CP.
 *
 * # Safety
 *
 * `modem` must be a live handle; `out` valid for one write.
 */
enum OddmStatus oddm_ambiguity(const struct OddmModem *modem,
                               int64_t m,
                               int64_t n,
                               struct OddmComplex *out);

/**
 * Modulates `M·N` symbols (index `m·N + n`) into `out`, which must hold the
 * waveform span length. Sample `i` of `out` is at index `start + i`.
 *
 * # Safety
 *
 * `modem` must be a live handle; `symbols` readable for `symbols_len`
 * elements and `out` writable for `out_cap` elements.
 */
enum OddmStatus oddm_modulate(const struct OddmModem *modem,
                              const struct OddmComplex *symbols,
                              size_t symbols_len,
                              struct OddmComplex *out,
                              size_t out_cap);

/**
 * Matched-filter demodulation of `len` samples starting at index `start`
 * into `M·N` symbols.
 *
 * # Safety
 *
 * `modem` must be a live handle; `samples` readable for `len` elements and
 * `out` writable for `out_cap` elements.
 */
enum OddmStatus oddm_demodulate(const struct OddmModem *modem,
                                const struct OddmComplex *samples,
                                size_t len,
                                int64_t start,
                                struct OddmComplex *out,
                                size_t out_cap);

/**
 * Builds a channel from `count` paths and its DD matrix on the modem grid.
 *
 * # Safety
 *
 * `modem` must be a live handle, `paths` readable for `count` elements and
 * `out` valid for one pointer write.
 */
enum OddmStatus oddm_channel_new(const struct OddmModem *modem,
                                 const struct OddmPath *paths,
                                 size_t count,
                                 struct OddmChannel **out);

/**
 * # Safety
 *
 * `channel` must be null or a handle from [`oddm_channel_new`] not yet freed.
 */
void oddm_channel_free(struct OddmChannel *channel);

/**
 * Noiseless waveform channel. The output keeps index `start` and is
 * `cp_len · J` samples longer than the input.
 *
 * # Safety
 *
 * `channel` must be a live handle; `samples` readable for `len` elements
 * and `out` writable for `out_cap` elements.
 */
enum OddmStatus oddm_channel_apply(const struct OddmChannel *channel,
                                   const struct OddmComplex *samples,
                                   size_t len,
                                   int64_t start,
                                   struct OddmComplex *out,
                                   size_t out_cap);

/**
 * `y = H x` with the DD-domain channel matrix; both vectors have `M·N`
 * entries.
 *
 * # Safety
 *
 * `channel` must be a live handle; `x` readable for `len` elements and `y`
 * writable for `y_cap` elements.
 */
enum OddmStatus oddm_ddmatrix_matvec(const struct OddmChannel *channel,
                                     const struct OddmComplex *x,
                                     size_t len,
                                     struct OddmComplex *y,
                                     size_t y_cap);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ODDM_H */
