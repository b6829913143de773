//! C ABI for loading `gdim` models and lexicons and scoring text.
//!
//! Handles are opaque and must be released with their `_free` function.
//! Every fallible call returns a [`GdimStatus`]; on failure the message is
//! available from [`gdim_last_error`] on the same thread. Strings returned by
//! the library are freed with [`gdim_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use gdim::classifier::BiEncoderModel;
use gdim::textkit::{count_gendered, mask_text, tokenize, word_list_label, Lexicon, MaskMode};
use gdim::{Dimension, Error, GenderLabel};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GdimStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Io = 4,
    Format = 5,
    Unsupported = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GdimLabel {
    Masculine = 0,
    Feminine = 1,
    Neutral = 2,
    Unknown = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GdimDimension {
    About = 0,
    To = 1,
    As = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GdimMaskMode {
    None = 0,
    Words = 1,
    WordsAndNames = 2,
}

/// A trained classifier.
pub struct GdimModel {
    inner: BiEncoderModel,
}

/// Word lists, name table and kinship terms.
pub struct GdimLexicon {
    inner: Lexicon,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

struct Failure(GdimStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Io { .. } => GdimStatus::Io,
            Error::ModelFormat(_)
            | Error::VersionMismatch { .. }
            | Error::Lexicon(_)
            | Error::MalformedRecord { .. } => GdimStatus::Format,
            Error::UnsupportedDimension(_) | Error::UnsupportedClass(_) => GdimStatus::Unsupported,
            _ => GdimStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> GdimStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GdimStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            GdimStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(GdimStatus::NullPointer, format!("{what} is null"))
}

/// # Safety
/// `p` must be null or a valid NUL-terminated string.
unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        Failure(
            GdimStatus::InvalidUtf8,
            format!("{what} is not valid UTF-8"),
        )
    })
}

/// # Safety
/// `p` must be null or point to a live value of `T`.
unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

/// # Safety
/// `p` must be null or point to writable memory for a `T`.
unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

/// Input enums travel as `uint32_t` so that out-of-range values are rejected
/// rather than undefined.
fn dimension(d: u32) -> Result<Dimension, Failure> {
    match d {
        x if x == GdimDimension::About as u32 => Ok(Dimension::About),
        x if x == GdimDimension::To as u32 => Ok(Dimension::To),
        x if x == GdimDimension::As as u32 => Ok(Dimension::As),
        _ => Err(Failure(
            GdimStatus::InvalidArgument,
            format!("unknown dimension {d}"),
        )),
    }
}

fn label(l: GenderLabel) -> GdimLabel {
    match l {
        GenderLabel::Masculine => GdimLabel::Masculine,
        GenderLabel::Feminine => GdimLabel::Feminine,
        GenderLabel::Neutral => GdimLabel::Neutral,
        GenderLabel::Unknown => GdimLabel::Unknown,
    }
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " "))
        .map(CString::into_raw)
        .unwrap_or(ptr::null_mut())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn gdim_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copy of the last error message on this thread, or null if none. Free with
/// [`gdim_string_free`].
#[no_mangle]
pub extern "C" fn gdim_last_error() -> *mut c_char {
    LAST_ERROR.with(|e| {
        e.borrow()
            .as_ref()
            .map_or(ptr::null_mut(), |s| s.clone().into_raw())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn gdim_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Loads a model file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gdim_model_load(
    path: *const c_char,
    out: *mut *mut GdimModel,
) -> GdimStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let path = str_arg(path, "path")?;
        let inner = BiEncoderModel::load(Path::new(path))?;
        *out = Box::into_raw(Box::new(GdimModel { inner }));
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a handle from [`gdim_model_load`], freed once.
#[no_mangle]
pub unsafe extern "C" fn gdim_model_free(model: *mut GdimModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Whether the model was trained on `dim` (a [`GdimDimension`]).
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gdim_model_supports(
    model: *const GdimModel,
    dim: u32,
    out: *mut bool,
) -> GdimStatus {
    guard(|| {
        let model = ref_arg(model, "model")?;
        *out_arg(out, "out")? = model.inner.supports(dimension(dim)?);
        Ok(())
    })
}

/// Most probable label on `dim` (a [`GdimDimension`]) and its probability.
///
/// # Safety
/// `model` must be a live handle, `text` a NUL-terminated string, and the
/// output pointers writable.
#[no_mangle]
pub unsafe extern "C" fn gdim_model_predict(
    model: *const GdimModel,
    text: *const c_char,
    dim: u32,
    out_label: *mut GdimLabel,
    out_probability: *mut f64,
) -> GdimStatus {
    guard(|| {
        let model = ref_arg(model, "model")?;
        let text = str_arg(text, "text")?;
        let out_label = out_arg(out_label, "out_label")?;
        let out_probability = out_arg(out_probability, "out_probability")?;
        let (l, p) = model.inner.predict(text, dimension(dim)?)?;
        *out_label = label(l);
        *out_probability = p;
        Ok(())
    })
}

/// Class probabilities on `dim` written as masculine, feminine, neutral into
/// `out[0..3]`; classes the dimension lacks get 0.
///
/// # Safety
/// `model` must be a live handle, `text` a NUL-terminated string, and `out`
/// writable for three doubles.
#[no_mangle]
pub unsafe extern "C" fn gdim_model_probabilities(
    model: *const GdimModel,
    text: *const c_char,
    dim: u32,
    out: *mut f64,
) -> GdimStatus {
    guard(|| {
        let model = ref_arg(model, "model")?;
        let text = str_arg(text, "text")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let probs = model.inner.probabilities(text, dimension(dim)?)?;
        let out = std::slice::from_raw_parts_mut(out, 3);
        for (slot, class) in out.iter_mut().zip(GenderLabel::CLASSES) {
            *slot = probs
                .iter()
                .find(|(l, _)| *l == class)
                .map_or(0.0, |(_, p)| *p);
        }
        Ok(())
    })
}

/// P(ABOUT = masculine | text).
///
/// # Safety
/// `model` must be a live handle, `text` a NUL-terminated string, and `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn gdim_model_about_masculine_probability(
    model: *const GdimModel,
    text: *const c_char,
    out: *mut f64,
) -> GdimStatus {
    guard(|| {
        let model = ref_arg(model, "model")?;
        let text = str_arg(text, "text")?;
        *out_arg(out, "out")? = model.inner.about_masculine_probability(text)?;
        Ok(())
    })
}

/// The built-in lexicon.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gdim_lexicon_builtin(out: *mut *mut GdimLexicon) -> GdimStatus {
    guard(|| {
        *out_arg(out, "out")? = Box::into_raw(Box::new(GdimLexicon {
            inner: Lexicon::builtin(),
        }));
        Ok(())
    })
}

/// Loads a lexicon directory (`masculine.txt`, `feminine.txt`, optional
/// `names.tsv`, `kinship.tsv`, `stopwords.txt`, `pronouns.tsv`).
///
/// # Safety
/// `dir` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gdim_lexicon_load_dir(
    dir: *const c_char,
    out: *mut *mut GdimLexicon,
) -> GdimStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let dir = str_arg(dir, "dir")?;
        let inner = Lexicon::from_dir(Path::new(dir))?;
        *out = Box::into_raw(Box::new(GdimLexicon { inner }));
        Ok(())
    })
}

/// # Safety
/// `lexicon` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn gdim_lexicon_free(lexicon: *mut GdimLexicon) {
    if !lexicon.is_null() {
        drop(Box::from_raw(lexicon));
    }
}

/// Occurrences of masculine and feminine list words in `text`.
///
/// # Safety
/// `lexicon` must be a live handle, `text` a NUL-terminated string, and the
/// output pointers writable.
#[no_mangle]
pub unsafe extern "C" fn gdim_count_gendered(
    lexicon: *const GdimLexicon,
    text: *const c_char,
    out_masculine: *mut u64,
    out_feminine: *mut u64,
) -> GdimStatus {
    guard(|| {
        let lexicon = ref_arg(lexicon, "lexicon")?;
        let text = str_arg(text, "text")?;
        let m = out_arg(out_masculine, "out_masculine")?;
        let f = out_arg(out_feminine, "out_feminine")?;
        let c = count_gendered(&tokenize(text), &lexicon.inner);
        *m = c.masculine;
        *f = c.feminine;
        Ok(())
    })
}

/// Word-list label of `text`: the majority of gendered words, neutral on ties.
///
/// # Safety
/// `lexicon` must be a live handle, `text` a NUL-terminated string, and `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn gdim_word_list_label(
    lexicon: *const GdimLexicon,
    text: *const c_char,
    out: *mut GdimLabel,
) -> GdimStatus {
    guard(|| {
        let lexicon = ref_arg(lexicon, "lexicon")?;
        let text = str_arg(text, "text")?;
        *out_arg(out, "out")? = label(word_list_label(&tokenize(text), &lexicon.inner));
        Ok(())
    })
}

/// `text` with gendered words (and names, per the [`GdimMaskMode`] `mode`)
/// replaced by `<MASK>`. Free the
/// result with [`gdim_string_free`].
///
/// # Safety
/// `lexicon` must be a live handle, `text` a NUL-terminated string, and `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn gdim_mask_text(
    lexicon: *const GdimLexicon,
    text: *const c_char,
    mode: u32,
    out: *mut *mut c_char,
) -> GdimStatus {
    guard(|| {
        let lexicon = ref_arg(lexicon, "lexicon")?;
        let text = str_arg(text, "text")?;
        let out = out_arg(out, "out")?;
        let mode = match mode {
            x if x == GdimMaskMode::None as u32 => MaskMode::None,
            x if x == GdimMaskMode::Words as u32 => MaskMode::Words,
            x if x == GdimMaskMode::WordsAndNames as u32 => MaskMode::WordsAndNames,
            _ => {
                return Err(Failure(
                    GdimStatus::InvalidArgument,
                    format!("unknown mask mode {mode}"),
                ))
            }
        };
        *out = owned_string(mask_text(text, &lexicon.inner, mode));
        Ok(())
    })
}
