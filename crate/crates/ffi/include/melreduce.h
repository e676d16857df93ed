#ifndef MELREDUCE_H
#define MELREDUCE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MrStatus {
  MR_STATUS_OK = 0,
  MR_STATUS_NULL_POINTER = 1,
  MR_STATUS_INVALID_UTF8 = 2,
  MR_STATUS_PARSE = 3,
  MR_STATUS_INVALID_PHRASE = 4,
  MR_STATUS_REDUCTION = 5,
  MR_STATUS_OUT_OF_RANGE = 6,
  MR_STATUS_CONFIG = 7,
  MR_STATUS_BUFFER_TOO_SMALL = 8,
  MR_STATUS_PANIC = 9,
} MrStatus;

/**
 * A reduced melody together with the phrase it came from.
 */
typedef struct MrMelody MrMelody;

/**
 * Phrases parsed from one lead-sheet document.
 */
typedef struct MrPhraseList MrPhraseList;

/**
 * One reduced note. Times are exact fractions of a quarter note.
 */
typedef struct MrNote {
  int64_t onset_num;
  int64_t onset_den;
  int64_t duration_num;
  int64_t duration_den;
  uint8_t pitch;
  bool tie_to_next;
} MrNote;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until the next call.
 */
const char *mr_last_error_message(void);

/**
 * Parse a lead-sheet JSON document of `len` bytes.
 *
 * # Safety
 * `data` must point to `len` readable bytes and `out` must be writable.
 */
enum MrStatus mr_phrase_list_from_json(const uint8_t *data, size_t len, struct MrPhraseList **out);

/**
 * Number of phrases; 0 for a null handle.
 *
 * # Safety
 * `list` must be null or a live handle.
 */
size_t mr_phrase_list_len(const struct MrPhraseList *list);

/**
 * # Safety
 * `list` must be null or a handle not yet freed.
 */
void mr_phrase_list_free(struct MrPhraseList *list);

/**
 * Reduce phrase `index`. `cost_json` may be null for the default cost model.
 *
 * # Safety
 * `list` must be a live handle, `cost_json` null or a C string, `out` writable.
 */
enum MrStatus mr_reduce(const struct MrPhraseList *list,
                        size_t index,
                        const char *cost_json,
                        uint64_t seed,
                        struct MrMelody **out);

/**
 * Half-note downsampling baseline of phrase `index`.
 *
 * # Safety
 * `list` must be a live handle and `out` writable.
 */
enum MrStatus mr_ds_obs(const struct MrPhraseList *list, size_t index, struct MrMelody **out);

/**
 * Least-cost path of phrase `index`. Writes up to `capacity` node indices to
 * `nodes`, the full node count to `len_out` and the path cost to `cost_out`.
 * Returns `BufferTooSmall` (with `len_out` set) when `capacity` is short.
 *
 * # Safety
 * `nodes` must have room for `capacity` entries; `len_out` and `cost_out` must be writable.
 */
enum MrStatus mr_path(const struct MrPhraseList *list,
                      size_t index,
                      const char *cost_json,
                      size_t *nodes,
                      size_t capacity,
                      size_t *len_out,
                      double *cost_out);

/**
 * # Safety
 * `melody` must be null or a live handle.
 */
size_t mr_melody_len(const struct MrMelody *melody);

/**
 * # Safety
 * `melody` must be a live handle and `out` writable.
 */
enum MrStatus mr_melody_note_at(const struct MrMelody *melody, size_t index, struct MrNote *out);

/**
 * Reduction as a lead-sheet JSON document; free the result with [`mr_string_free`].
 *
 * # Safety
 * `melody` must be a live handle and `out` writable.
 */
enum MrStatus mr_melody_to_json(const struct MrMelody *melody, char **out);

/**
 * # Safety
 * `melody` must be null or a handle not yet freed.
 */
void mr_melody_free(struct MrMelody *melody);

/**
 * Default cost model as JSON; free the result with [`mr_string_free`].
 *
 * # Safety
 * `out` must be writable.
 */
enum MrStatus mr_cost_config_default(char **out);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void mr_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MELREDUCE_H */
