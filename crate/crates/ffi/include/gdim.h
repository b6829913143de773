#ifndef GDIM_H
#define GDIM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum GdimStatus {
  GDIM_STATUS_OK = 0,
  GDIM_STATUS_NULL_POINTER = 1,
  GDIM_STATUS_INVALID_UTF8 = 2,
  GDIM_STATUS_INVALID_ARGUMENT = 3,
  GDIM_STATUS_IO = 4,
  GDIM_STATUS_FORMAT = 5,
  GDIM_STATUS_UNSUPPORTED = 6,
  GDIM_STATUS_PANIC = 7,
} GdimStatus;

typedef enum GdimLabel {
  GDIM_LABEL_MASCULINE = 0,
  GDIM_LABEL_FEMININE = 1,
  GDIM_LABEL_NEUTRAL = 2,
  GDIM_LABEL_UNKNOWN = 3,
} GdimLabel;

typedef enum GdimDimension {
  GDIM_DIMENSION_ABOUT = 0,
  GDIM_DIMENSION_TO = 1,
  GDIM_DIMENSION_AS = 2,
} GdimDimension;

typedef enum GdimMaskMode {
  GDIM_MASK_MODE_NONE = 0,
  GDIM_MASK_MODE_WORDS = 1,
  GDIM_MASK_MODE_WORDS_AND_NAMES = 2,
} GdimMaskMode;

// Word lists, name table and kinship terms.
typedef struct GdimLexicon GdimLexicon;

// A trained classifier.
typedef struct GdimModel GdimModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static string.
const char *gdim_version(void);

// Copy of the last error message on this thread, or null if none. Free with
// [`gdim_string_free`].
char *gdim_last_error(void);

// # Safety
// `s` must be null or a string returned by this library, freed once.
void gdim_string_free(char *s);

// Loads a model file.
//
// # Safety
// `path` must be a NUL-terminated string and `out` writable.
enum GdimStatus gdim_model_load(const char *path, struct GdimModel **out);

// # Safety
// `model` must be null or a handle from [`gdim_model_load`], freed once.
void gdim_model_free(struct GdimModel *model);

// Whether the model was trained on `dim` (a [`GdimDimension`]).
//
// # Safety
// `model` must be a live handle and `out` writable.
enum GdimStatus gdim_model_supports(const struct GdimModel *model, uint32_t dim, bool *out);

// Most probable label on `dim` (a [`GdimDimension`]) and its probability.
//
// # Safety
// `model` must be a live handle, `text` a NUL-terminated string, and the
// output pointers writable.
enum GdimStatus gdim_model_predict(const struct GdimModel *model,
                                   const char *text,
                                   uint32_t dim,
                                   enum GdimLabel *out_label,
                                   double *out_probability);

// Class probabilities on `dim` written as masculine, feminine, neutral into
// `out[0..3]`; classes the dimension lacks get 0.
//
// # Safety
// `model` must be a live handle, `text` a NUL-terminated string, and `out`
// writable for three doubles.
enum GdimStatus gdim_model_probabilities(const struct GdimModel *model,
                                         const char *text,
                                         uint32_t dim,
                                         double *out);

// P(ABOUT = masculine | text).
//
// # Safety
// `model` must be a live handle, `text` a NUL-terminated string, and `out`
// writable.
enum GdimStatus gdim_model_about_masculine_probability(const struct GdimModel *model,
                                                       const char *text,
                                                       double *out);

// The built-in lexicon.
//
// # Safety
// `out` must be writable.
enum GdimStatus gdim_lexicon_builtin(struct GdimLexicon **out);

// Loads a lexicon directory (`masculine.txt`, `feminine.txt`, optional
// `names.tsv`, `kinship.tsv`, `stopwords.txt`, `pronouns.tsv`).
//
// # Safety
// `dir` must be a NUL-terminated string and `out` writable.
enum GdimStatus gdim_lexicon_load_dir(const char *dir, struct GdimLexicon **out);

// # Safety
// `lexicon` must be null or a handle from this library, freed once.
void gdim_lexicon_free(struct GdimLexicon *lexicon);

// Occurrences of masculine and feminine list words in `text`.
//
// # Safety
// `lexicon` must be a live handle, `text` a NUL-terminated string, and the
// output pointers writable.
enum GdimStatus gdim_count_gendered(const struct GdimLexicon *lexicon,
                                    const char *text,
                                    uint64_t *out_masculine,
                                    uint64_t *out_feminine);

// Word-list label of `text`: the majority of gendered words, neutral on ties.
//
// # Safety
// `lexicon` must be a live handle, `text` a NUL-terminated string, and `out`
// writable.
enum GdimStatus gdim_word_list_label(const struct GdimLexicon *lexicon,
                                     const char *text,
                                     enum GdimLabel *out);

// `text` with gendered words (and names, per the [`GdimMaskMode`] `mode`)
// replaced by `<MASK>`. Free the
// result with [`gdim_string_free`].
//
// # Safety
// `lexicon` must be a live handle, `text` a NUL-terminated string, and `out`
// writable.
enum GdimStatus gdim_mask_text(const struct GdimLexicon *lexicon,
                               const char *text,
                               uint32_t mode,
                               char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GDIM_H */
