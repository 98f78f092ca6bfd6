#ifndef DIACHRON_H
#define DIACHRON_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DiachronStatus {
  DIACHRON_STATUS_OK = 0,
  DIACHRON_STATUS_NULL_POINTER = 1,
  DIACHRON_STATUS_INVALID_UTF8 = 2,
  DIACHRON_STATUS_PARSE = 3,
  DIACHRON_STATUS_INVALID_TRACE = 4,
  DIACHRON_STATUS_METRIC = 5,
  DIACHRON_STATUS_IO = 6,
  DIACHRON_STATUS_OUT_OF_RANGE = 7,
  DIACHRON_STATUS_PANIC = 8,
} DiachronStatus;

typedef enum DiachronTask {
  DIACHRON_TASK_TAGGING = 0,
  DIACHRON_TASK_CLASSIFICATION = 1,
} DiachronTask;

// Incremental metric accumulator fed one step at a time.
typedef struct DiachronStream DiachronStream;

// One validated incremental trace.
typedef struct DiachronTrace DiachronTrace;

// An ordered collection of traces, as read from a trace file.
typedef struct DiachronTraceSet DiachronTraceSet;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. The pointer stays
// valid until the next failing call on the same thread.
const char *diachron_last_error(void);

// Library version as a static NUL-terminated string.
const char *diachron_version(void);

// # Safety
// `s` must be NULL or a string returned by this library, not yet freed.
void diachron_string_free(char *s);

// Builds a trace from `n` tokens and the concatenated labels of all steps:
// `n * (n + 1) / 2` labels for tagging (1, then 2, ...), `n` for
// classification.
//
// # Safety
// `tokens` and `labels` must point to arrays of that many valid C strings;
// `id` must be a valid C string and `out` writable.
enum DiachronStatus diachron_trace_new(const char *id,
                                       enum DiachronTask task,
                                       const char *const *tokens,
                                       size_t n,
                                       const char *const *labels,
                                       struct DiachronTrace **out);

// Parses one trace JSONL record.
//
// # Safety
// `json` must be a valid C string and `out` writable.
enum DiachronStatus diachron_trace_from_json(const char *json, struct DiachronTrace **out);

// # Safety
// `trace` must be NULL or a handle from this library, not yet freed.
void diachron_trace_free(struct DiachronTrace *trace);

// Number of tokens, or 0 for NULL.
//
// # Safety
// `trace` must be NULL or a live handle.
size_t diachron_trace_len(const struct DiachronTrace *trace);

// Serializes the trace as one JSONL record (without newline).
//
// # Safety
// `trace` must be a live handle and `out` writable.
enum DiachronStatus diachron_trace_to_json(const struct DiachronTrace *trace, char **out);

// Edit overhead at `delay`. `num` and `den` may be NULL; when given they
// receive the exact reduced fraction.
//
// # Safety
// `trace` must be a live handle; `out` writable; `num`/`den` NULL or writable.
enum DiachronStatus diachron_edit_overhead(const struct DiachronTrace *trace,
                                           size_t delay,
                                           double *out,
                                           uint64_t *num,
                                           uint64_t *den);

// Correction time score; see [`diachron_edit_overhead`] for the outputs.
//
// # Safety
// As for [`diachron_edit_overhead`].
enum DiachronStatus diachron_correction_time(const struct DiachronTrace *trace,
                                             double *out,
                                             uint64_t *num,
                                             uint64_t *den);

// Relative correctness at `delay`; see [`diachron_edit_overhead`].
//
// # Safety
// As for [`diachron_edit_overhead`].
enum DiachronStatus diachron_relative_correctness(const struct DiachronTrace *trace,
                                                  size_t delay,
                                                  double *out,
                                                  uint64_t *num,
                                                  uint64_t *den);

// Reads and validates a trace JSONL file.
//
// # Safety
// `path` must be a valid C string and `out` writable.
enum DiachronStatus diachron_traces_read(const char *path, struct DiachronTraceSet **out);

// # Safety
// `set` must be NULL or a handle from this library, not yet freed.
void diachron_traces_free(struct DiachronTraceSet *set);

// # Safety
// `set` must be NULL or a live handle.
size_t diachron_traces_len(const struct DiachronTraceSet *set);

// Copies trace `index` into a new handle owned by the caller.
//
// # Safety
// `set` must be a live handle and `out` writable.
enum DiachronStatus diachron_traces_get(const struct DiachronTraceSet *set,
                                        size_t index,
                                        struct DiachronTrace **out);

// Corpus report as pretty JSON: per-delay means, mean CT, gold scores when
// the traces carry gold labels, and per-sequence values.
//
// # Safety
// `set` must be a live handle, `delays` an array of `n_delays` values and
// `out` writable.
enum DiachronStatus diachron_traces_report(const struct DiachronTraceSet *set,
                                           const size_t *delays,
                                           size_t n_delays,
                                           char **out);

// Starts a streaming computation of EO and RC at each delay, plus CT.
//
// # Safety
// `delays` must point to `n_delays` values and `out` be writable.
enum DiachronStatus diachron_stream_new(enum DiachronTask task,
                                        const size_t *delays,
                                        size_t n_delays,
                                        struct DiachronStream **out);

// Feeds the full output of the next step.
//
// # Safety
// `stream` must be a live handle and `labels` an array of `len` C strings.
enum DiachronStatus diachron_stream_push(struct DiachronStream *stream,
                                         const char *const *labels,
                                         size_t len);

// Consumes the stream and writes the result as JSON:
// `{"n": .., "ct": .., "delays": [{"delay": .., "eo": .., "rc": ..}]}`.
// The handle is freed even when this fails.
//
// # Safety
// `stream` must be a live handle (it is invalid afterwards) and `out` writable.
enum DiachronStatus diachron_stream_finish(struct DiachronStream *stream, char **out);

// Releases a stream without finishing it.
//
// # Safety
// `stream` must be NULL or a live handle.
void diachron_stream_free(struct DiachronStream *stream);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DIACHRON_H */
