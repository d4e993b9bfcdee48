#ifndef TDTA_H
#define TDTA_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Mode for the constructions that depend on it.
typedef enum TdtaMode {
  TDTA_MODE_UC = 0,
  TDTA_MODE_LINEAR = 1,
} TdtaMode;

// Status codes returned by every function.
typedef enum TdtaStatus {
  TDTA_STATUS_OK = 0,
  TDTA_STATUS_NULL_ARG = 1,
  TDTA_STATUS_PARSE_ERROR = 2,
  TDTA_STATUS_INVALID = 3,
  // A construction refused its input; the message names the reason code and stage.
  TDTA_STATUS_NEGATIVE_VERDICT = 4,
  // The translation is undefined on the given tree.
  TDTA_STATUS_UNDEFINED = 5,
  TDTA_STATUS_LIMIT = 6,
  TDTA_STATUS_INTERNAL = 7,
} TdtaStatus;

// Opaque transducer handle.
typedef struct TdtaTransducer TdtaTransducer;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Parses a document and returns its last transducer, validated.
//
// # Safety
// `src` must be a NUL-terminated string and `out` a valid pointer.
enum TdtaStatus tdta_parse_transducer(const char *src, struct TdtaTransducer **out);

// Releases a handle. Null is ignored.
//
// # Safety
// `h` must come from this library and not be used afterwards.
void tdta_transducer_free(struct TdtaTransducer *h);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not be used afterwards.
void tdta_string_free(char *s);

// Message of the last failing call on this thread, or null. Owned by the library.
const char *tdta_last_error_message(void);

// Self-contained document text (alphabets, automaton, transducer).
//
// # Safety
// `h` must be a live handle and `out` a valid pointer.
enum TdtaStatus tdta_transducer_print(const struct TdtaTransducer *h, char **out);

// Translates a ground input tree such as `f(a,b)`.
//
// # Safety
// `h` must be a live handle, `tree` NUL-terminated and `out` a valid pointer.
enum TdtaStatus tdta_eval(const struct TdtaTransducer *h, const char *tree, char **out);

// Earliest form. The input is left untouched.
//
// # Safety
// `h` must be a live handle and `out` a valid pointer.
enum TdtaStatus tdta_earliest(const struct TdtaTransducer *h,
                              enum TdtaMode mode,
                              struct TdtaTransducer **out);

// Canonical form of an earliest transducer.
//
// # Safety
// `h` must be a live handle and `out` a valid pointer.
enum TdtaStatus tdta_canonicalize(const struct TdtaTransducer *h, struct TdtaTransducer **out);

// Look-ahead removal.
//
// # Safety
// `h` must be a live handle and `out` a valid pointer.
enum TdtaStatus tdta_remove_lookahead(const struct TdtaTransducer *h,
                                      enum TdtaMode mode,
                                      struct TdtaTransducer **out);

// Inspection removal.
//
// # Safety
// `h` must be a live handle and `out` a valid pointer.
enum TdtaStatus tdta_remove_inspection(const struct TdtaTransducer *h,
                                       enum TdtaMode mode,
                                       struct TdtaTransducer **out);

// Sets `*equal` to 1 if the translations coincide, 0 otherwise. When they differ and a
// witness is known, `*witness` receives it (else null); pass null to skip it.
//
// # Safety
// Handles must be live; `equal` valid; `witness` valid or null.
enum TdtaStatus tdta_equivalent(const struct TdtaTransducer *a,
                                const struct TdtaTransducer *b,
                                int32_t *equal,
                                char **witness);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* TDTA_H */
