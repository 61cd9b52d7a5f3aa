#ifndef QSURGERY_H
#define QSURGERY_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call. Values match the command line exit codes
// where they overlap.
typedef enum QsStatus {
  QS_STATUS_OK = 0,
  QS_STATUS_INTERNAL = 1,
  QS_STATUS_INVALID_INPUT = 2,
  QS_STATUS_CAP_EXCEEDED = 3,
  QS_STATUS_NULL_POINTER = 4,
  QS_STATUS_PANIC = 5,
} QsStatus;

// A stabilizer code.
typedef struct QsCode QsCode;

// A compiled measurement schedule.
typedef struct QsCompilation QsCompilation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static string.
const char *qs_version(void);

// Message of the last failed call on this thread, or null. The pointer is
// valid until the next call into this library on the same thread.
const char *qs_last_error_message(void);

// Releases a string returned by this library.
//
// # Safety
// `s` is null or a string from this library not yet freed.
void qs_string_free(char *s);

// Parses a code from its text form.
//
// # Safety
// `src` is a NUL-terminated string; `out_code` is writable.
enum QsStatus qs_code_parse(const char *src, struct QsCode **out_code);

// Built-in code by name: `4_2_2`, `steane`, `bell`, `5_1_3`, `surface3`, `rep2`.
//
// # Safety
// `name` is a NUL-terminated string; `out_code` is writable.
enum QsStatus qs_code_fixture(const char *name, struct QsCode **out_code);

// # Safety
// `code` is null or a handle from this library not yet freed.
void qs_code_free(struct QsCode *code);

// Number of physical and logical qubits.
//
// # Safety
// `code` is a live handle; both outputs are writable.
enum QsStatus qs_code_params(const struct QsCode *code, size_t *out_n, size_t *out_k);

// Exact distance for codes with at most `max_n` qubits; 0 when the code
// has no logical qubits.
//
// # Safety
// `code` is a live handle; `out_d` is writable.
enum QsStatus qs_code_distance(const struct QsCode *code, size_t max_n, size_t *out_d);

// Builds a measurement graph for `op` and the merged code, then checks the
// merged-code invariants. Reports the merged qubit count and logical count.
//
// # Safety
// `code` is a live handle; `op` is a NUL-terminated Pauli string; outputs
// are writable.
enum QsStatus qs_code_merge(const struct QsCode *code,
                            const char *op,
                            uint64_t seed,
                            size_t *out_qubits,
                            size_t *out_k);

// Compiles a circuit (text form) for a partition and block map (JSON).
//
// # Safety
// All strings are NUL-terminated; `out_comp` is writable.
enum QsStatus qs_compile(const char *circuit,
                         const char *partition_json,
                         const char *blockmap_json,
                         struct QsCompilation **out_comp);

// # Safety
// `comp` is null or a handle from this library not yet freed.
void qs_compilation_free(struct QsCompilation *comp);

// Schedule depth, reduced depth and magic state count.
//
// # Safety
// `comp` is a live handle; outputs are writable.
enum QsStatus qs_compilation_stats(const struct QsCompilation *comp,
                                   size_t *out_depth,
                                   size_t *out_lambda,
                                   size_t *out_magic);

// Schedule as JSON; release with [`qs_string_free`].
//
// # Safety
// `comp` is a live handle; `out_json` is writable.
enum QsStatus qs_compilation_schedule_json(const struct QsCompilation *comp, char **out_json);

// Replays the schedule on a state vector and compares with direct
// simulation. `out_ok` is set to 1 on agreement, 0 otherwise.
//
// # Safety
// `comp` is a live handle; `out_ok` is writable.
enum QsStatus qs_compilation_verify(const struct QsCompilation *comp,
                                    size_t max_qubits,
                                    uint64_t seed,
                                    uint8_t *out_ok);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QSURGERY_H */
