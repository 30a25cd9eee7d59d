#ifndef PHOENIX_H
#define PHOENIX_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PhxStatus {
  PHX_STATUS_OK = 0,
  PHX_STATUS_NULL_ARGUMENT = 1,
  PHX_STATUS_INVALID_UTF8 = 2,
  PHX_STATUS_NO_MATH_FOUND = 3,
  PHX_STATUS_PARSE_ERROR = 4,
  PHX_STATUS_INVALID_EXPRESSION = 5,
  PHX_STATUS_NOT_A_COMMAND = 6,
  PHX_STATUS_TARGET_NOT_FOUND = 7,
  PHX_STATUS_AMBIGUOUS_TARGET = 8,
  PHX_STATUS_INVALID_COMMAND = 9,
  PHX_STATUS_NOT_FOUND = 10,
  PHX_STATUS_INVALID_DOCUMENT = 11,
  PHX_STATUS_EMPTY_NODE = 12,
  PHX_STATUS_UNSUPPORTED_IN_PROFILE = 13,
  PHX_STATUS_INVALID_ARGUMENT = 14,
  PHX_STATUS_IO = 15,
  PHX_STATUS_PANIC = 16,
} PhxStatus;

typedef enum PhxExportFormat {
  PHX_EXPORT_FORMAT_LATEX = 0,
  PHX_EXPORT_FORMAT_WORD_MATHML = 1,
  PHX_EXPORT_FORMAT_PRINT_HTML = 2,
} PhxExportFormat;

/**
 * Opaque lexicon handle.
 */
typedef struct PhxLexicon PhxLexicon;

/**
 * Opaque workspace handle.
 */
typedef struct PhxWorkspace PhxWorkspace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failure on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *phx_last_error(void);

/**
 * Static, NUL-terminated name of a status code.
 */
const char *phx_status_name(int32_t status);

/**
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void phx_string_free(char *s);

/**
 * # Safety
 * `data`/`len` must be a buffer returned by this library and not yet freed.
 */
void phx_bytes_free(uint8_t *data, size_t len);

/**
 * The built-in STEM lexicon merged with each file in `paths` (may be null
 * when `count` is 0).
 *
 * # Safety
 * `paths` must point to `count` NUL-terminated strings; `out` must be writable.
 */
enum PhxStatus phx_lexicon_load(const char *const *paths,
                                size_t count,
                                struct PhxLexicon **out_lexicon);

/**
 * # Safety
 * `lexicon` must come from [`phx_lexicon_load`] or be null.
 */
void phx_lexicon_free(struct PhxLexicon *lexicon);

/**
 * Transcribes one utterance. `out_residual` may be null.
 *
 * # Safety
 * Pointers must be valid; `lexicon` must be a live handle.
 */
enum PhxStatus phx_transcribe(const struct PhxLexicon *lexicon,
                              const char *utterance,
                              char **out_latex,
                              char **out_residual);

/**
 * Applies a spoken edit command to a LaTeX equation.
 *
 * # Safety
 * Pointers must be valid; `lexicon` must be a live handle.
 */
enum PhxStatus phx_apply_edit(const struct PhxLexicon *lexicon,
                              const char *latex,
                              const char *command,
                              char **out_latex);

/**
 * Converts LaTeX to MathML; `word_restricted` selects the Word profile.
 *
 * # Safety
 * Pointers must be valid.
 */
enum PhxStatus phx_latex_to_mathml(const char *latex, bool word_restricted, char **out_mathml);

/**
 * # Safety
 * Pointers must be valid.
 */
enum PhxStatus phx_workspace_new(const char *title, struct PhxWorkspace **out_workspace);

/**
 * Parses a schema_version 1 document.
 *
 * # Safety
 * `data` must point to `len` readable bytes.
 */
enum PhxStatus phx_workspace_load(const uint8_t *data,
                                  size_t len,
                                  struct PhxWorkspace **out_workspace);

/**
 * Serializes the workspace as a NUL-terminated JSON document.
 *
 * # Safety
 * `workspace` must be a live handle; `out_json` must be writable.
 */
enum PhxStatus phx_workspace_save(const struct PhxWorkspace *workspace, char **out_json);

/**
 * Adds a node at (`x`, `y`). `parent` 0 means no parent.
 *
 * # Safety
 * `workspace` must be a live handle; `out_node` must be writable.
 */
enum PhxStatus phx_workspace_add_node(struct PhxWorkspace *workspace,
                                      double x,
                                      double y,
                                      uint64_t parent,
                                      uint64_t *out_node);

/**
 * Appends an equation to `node`. `parent_equation` 0 selects the default parent.
 *
 * # Safety
 * Pointers must be valid; `workspace` must be a live handle.
 */
enum PhxStatus phx_workspace_add_equation(struct PhxWorkspace *workspace,
                                          uint64_t node,
                                          const char *latex,
                                          uint64_t parent_equation,
                                          uint64_t *out_equation);

/**
 * Exports `node`; `format` is a [`PhxExportFormat`] value. The payload is written to `out_data`/`out_len` (free with
 * [`phx_bytes_free`]); `out_media_type` may be null.
 *
 * # Safety
 * Pointers must be valid; `workspace` must be a live handle.
 */
enum PhxStatus phx_export(const struct PhxWorkspace *workspace,
                          uint64_t node,
                          uint32_t format,
                          bool include_annotations,
                          uint8_t **out_data,
                          size_t *out_len,
                          char **out_media_type);

/**
 * # Safety
 * `workspace` must come from this library or be null.
 */
void phx_workspace_free(struct PhxWorkspace *workspace);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PHOENIX_H */
