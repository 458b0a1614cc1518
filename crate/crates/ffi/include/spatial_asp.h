#ifndef SPATIAL_ASP_H
#define SPATIAL_ASP_H

#include <stddef.h>
#include <stdint.h>

typedef enum SaspDataset {
  SASP_DATASET_STEPGAME = 0,
  SASP_DATASET_SPARQA = 1,
} SaspDataset;

// Result codes. Positive values are program failures, negative values are
// misuse of the API.
typedef enum SaspStatus {
  SASP_STATUS_OK = 0,
  SASP_STATUS_PARSE = 1,
  SASP_STATUS_UNSAFE = 2,
  SASP_STATUS_GROUND = 3,
  SASP_STATUS_UNSTRATIFIABLE = 4,
  SASP_STATUS_UNSAT = 5,
  SASP_STATUS_NULL_ARGUMENT = -1,
  SASP_STATUS_INVALID_UTF8 = -2,
  SASP_STATUS_PANIC = -3,
} SaspStatus;

// The stable model of a solved program.
typedef struct SaspModel SaspModel;

// A parsed program.
typedef struct SaspProgram SaspProgram;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. Valid until the
// next call into this library on the same thread.
const char *sasp_last_error(void);

// Parses `text` into a new program handle stored in `*out`.
//
// # Safety
// `text` must be a NUL-terminated string and `out` a valid pointer.
enum SaspStatus sasp_program_parse(const char *text, struct SaspProgram **out);

// Appends the bundled knowledge program for `dataset`.
//
// # Safety
// `program` must be a live handle from [`sasp_program_parse`].
enum SaspStatus sasp_program_add_knowledge(struct SaspProgram *program, enum SaspDataset dataset);

// Number of rules in the program.
//
// # Safety
// `program` must be null or a live handle.
uintptr_t sasp_program_rule_count(const struct SaspProgram *program);

// # Safety
// `program` must be null or a handle not yet freed.
void sasp_program_free(struct SaspProgram *program);

// Checks safety, grounds and solves. A `domain_bound` or `ceiling` of 0
// selects the default. On success `*out` receives a model handle.
//
// # Safety
// `program` must be a live handle and `out` a valid pointer.
enum SaspStatus sasp_solve(const struct SaspProgram *program,
                           int64_t domain_bound,
                           uint64_t ceiling,
                           struct SaspModel **out);

// Number of atoms in the model.
//
// # Safety
// `model` must be null or a live handle.
uintptr_t sasp_model_len(const struct SaspModel *model);

// Atom `index` in sorted order, or null when out of range. The string is
// owned by the model.
//
// # Safety
// `model` must be null or a live handle.
const char *sasp_model_atom(const struct SaspModel *model, uintptr_t index);

// Argument tuples of `predicate` atoms, one `(a,b)` per line, in a new
// string released with [`sasp_string_free`].
//
// # Safety
// `model` must be a live handle, `predicate` a NUL-terminated string and
// `out` a valid pointer.
enum SaspStatus sasp_model_answers(const struct SaspModel *model,
                                   const char *predicate,
                                   char **out);

// # Safety
// `model` must be null or a handle not yet freed.
void sasp_model_free(struct SaspModel *model);

// Canonical answer label for `token`, or `<unknown>`, in a new string.
//
// # Safety
// `token` must be a NUL-terminated string and `out` a valid pointer.
enum SaspStatus sasp_normalize_answer(const char *token, enum SaspDataset dataset, char **out);

// Source of the bundled knowledge program; static, never freed.
const char *sasp_knowledge_text(enum SaspDataset dataset);

// Releases a string returned by this library.
//
// # Safety
// `s` must be null or a string from this library not yet freed.
void sasp_string_free(char *s);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* SPATIAL_ASP_H */
