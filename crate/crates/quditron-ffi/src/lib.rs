//! C ABI over the quditron classifier.
//!
//! Models travel as opaque [`QuditronModel`] handles created by the load
//! functions and released with [`quditron_model_free`]. Every fallible call
//! returns a [`QuditronStatus`] code; `QUDITRON_STATUS_OK` is zero.

use quditron::QuditClassifierModel;
use std::ffi::{CStr, CString, c_char};
use std::panic::{AssertUnwindSafe, catch_unwind};

/// Result code of an FFI call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuditronStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// File could not be read or written.
    Io = 3,
    /// Model JSON failed to parse or validate.
    Parse = 4,
    /// A buffer length did not match the model's dimensions.
    Dimension = 5,
    /// Any other internal failure.
    Internal = 6,
}

/// Opaque trained-model handle.
pub struct QuditronModel {
    inner: QuditClassifierModel,
}

fn status_of(err: &quditron::Error) -> QuditronStatus {
    use quditron::Error;
    match err {
        Error::Io(_) => QuditronStatus::Io,
        Error::Json(_) | Error::CorruptFile { .. } | Error::SchemaVersionMismatch { .. } => {
            QuditronStatus::Parse
        }
        Error::DimensionMismatch { .. } => QuditronStatus::Dimension,
        _ => QuditronStatus::Internal,
    }
}

fn guarded(body: impl FnOnce() -> QuditronStatus) -> QuditronStatus {
    catch_unwind(AssertUnwindSafe(body)).unwrap_or(QuditronStatus::Internal)
}

/// Library version as a static NUL-terminated string.
#[unsafe(no_mangle)]
pub extern "C" fn quditron_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}

/// Static human-readable description of a status code.
#[unsafe(no_mangle)]
pub extern "C" fn quditron_status_message(status: QuditronStatus) -> *const c_char {
    let text: &'static str = match status {
        QuditronStatus::Ok => "ok\0",
        QuditronStatus::NullPointer => "null pointer argument\0",
        QuditronStatus::InvalidUtf8 => "string argument is not valid UTF-8\0",
        QuditronStatus::Io => "file could not be read or written\0",
        QuditronStatus::Parse => "model JSON failed to parse or validate\0",
        QuditronStatus::Dimension => "buffer length does not match the model\0",
        QuditronStatus::Internal => "internal error\0",
    };
    text.as_ptr().cast()
}

unsafe fn cstr_arg<'a>(ptr: *const c_char) -> Result<&'a str, QuditronStatus> {
    if ptr.is_null() {
        return Err(QuditronStatus::NullPointer);
    }
    unsafe { CStr::from_ptr(ptr) }
        .to_str()
        .map_err(|_| QuditronStatus::InvalidUtf8)
}

fn emit_model(model: QuditClassifierModel, out: *mut *mut QuditronModel) -> QuditronStatus {
    let handle = Box::new(QuditronModel { inner: model });
    unsafe { *out = Box::into_raw(handle) };
    QuditronStatus::Ok
}

/// Loads a model from a JSON file written by `quditron train`.
///
/// # Safety
/// `path` must point to a NUL-terminated string and `out_model` to a
/// writable pointer slot. On success the slot receives a handle that must
/// be released with [`quditron_model_free`].
#[unsafe(no_mangle)]
pub unsafe extern "C" fn quditron_model_load(
    path: *const c_char,
    out_model: *mut *mut QuditronModel,
) -> QuditronStatus {
    guarded(|| {
        if out_model.is_null() {
            return QuditronStatus::NullPointer;
        }
        let path = match unsafe { cstr_arg(path) } {
            Ok(p) => p,
            Err(status) => return status,
        };
        match QuditClassifierModel::load(std::path::Path::new(path)) {
            Ok(model) => emit_model(model, out_model),
            Err(e) => status_of(&e),
        }
    })
}

/// Parses a model from an in-memory JSON document.
///
/// # Safety
/// As for [`quditron_model_load`], with `json` NUL-terminated.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn quditron_model_from_json(
    json: *const c_char,
    out_model: *mut *mut QuditronModel,
) -> QuditronStatus {
    guarded(|| {
        if out_model.is_null() {
            return QuditronStatus::NullPointer;
        }
        let text = match unsafe { cstr_arg(json) } {
            Ok(t) => t,
            Err(status) => return status,
        };
        match QuditClassifierModel::from_json(text) {
            Ok(model) => emit_model(model, out_model),
            Err(e) => status_of(&e),
        }
    })
}

/// Writes the model back to a JSON file.
///
/// # Safety
/// `model` must be a live handle from a load call; `path` NUL-terminated.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn quditron_model_save(
    model: *const QuditronModel,
    path: *const c_char,
) -> QuditronStatus {
    guarded(|| {
        let Some(handle) = (unsafe { model.as_ref() }) else {
            return QuditronStatus::NullPointer;
        };
        let path = match unsafe { cstr_arg(path) } {
            Ok(p) => p,
            Err(status) => return status,
        };
        match handle.inner.save(std::path::Path::new(path)) {
            Ok(()) => QuditronStatus::Ok,
            Err(e) => status_of(&e),
        }
    })
}

/// Releases a model handle. Accepts null.
///
/// # Safety
/// `model` must be null or a handle not yet freed.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn quditron_model_free(model: *mut QuditronModel) {
    if !model.is_null() {
        drop(unsafe { Box::from_raw(model) });
    }
}

/// Number of classes (the qudit dimension d). Zero for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn quditron_model_classes(model: *const QuditronModel) -> usize {
    unsafe { model.as_ref() }.map_or(0, |m| m.inner.d)
}

/// Raw input length the model expects (pixels per image). Zero for null.
///
/// # Safety
/// `model` must be null or a live handle.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn quditron_model_input_dim(model: *const QuditronModel) -> usize {
    unsafe { model.as_ref() }.map_or(0, |m| m.inner.pca.input_dim)
}

/// Classifies one feature row of `len` doubles; writes the class label.
///
/// # Safety
/// `features` must point to `len` readable doubles and `out_label` to a
/// writable slot; `model` must be a live handle.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn quditron_predict(
    model: *const QuditronModel,
    features: *const f64,
    len: usize,
    out_label: *mut i64,
) -> QuditronStatus {
    unsafe { quditron_predict_batch(model, features, 1, len, out_label) }
}

/// Classifies `count` rows stored row-major in one buffer.
///
/// # Safety
/// `features` must hold `count * len` doubles; `out_labels` must hold
/// `count` writable slots; `model` must be a live handle.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn quditron_predict_batch(
    model: *const QuditronModel,
    features: *const f64,
    count: usize,
    len: usize,
    out_labels: *mut i64,
) -> QuditronStatus {
    guarded(|| {
        let Some(handle) = (unsafe { model.as_ref() }) else {
            return QuditronStatus::NullPointer;
        };
        if features.is_null() || out_labels.is_null() {
            return QuditronStatus::NullPointer;
        }
        if len != handle.inner.pca.input_dim {
            return QuditronStatus::Dimension;
        }
        let rows = unsafe { std::slice::from_raw_parts(features, count * len) };
        let out = unsafe { std::slice::from_raw_parts_mut(out_labels, count) };
        let predictor = match handle.inner.predictor() {
            Ok(p) => p,
            Err(e) => return status_of(&e),
        };
        for (row, slot) in rows.chunks_exact(len).zip(out.iter_mut()) {
            match predictor.predict(row) {
                Ok(label) => *slot = label,
                Err(e) => return status_of(&e),
            }
        }
        QuditronStatus::Ok
    })
}

/// Outcome probabilities for one row: writes `d` labels and their
/// probabilities in outcome order (probabilities sum to 1).
///
/// # Safety
/// `features` must hold `len` doubles; `out_labels` and `out_probs` must
/// hold `d` writable slots each (`d` from [`quditron_model_classes`]);
/// `model` must be a live handle.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn quditron_predict_proba(
    model: *const QuditronModel,
    features: *const f64,
    len: usize,
    out_labels: *mut i64,
    out_probs: *mut f64,
    d: usize,
) -> QuditronStatus {
    guarded(|| {
        let Some(handle) = (unsafe { model.as_ref() }) else {
            return QuditronStatus::NullPointer;
        };
        if features.is_null() || out_labels.is_null() || out_probs.is_null() {
            return QuditronStatus::NullPointer;
        }
        if len != handle.inner.pca.input_dim || d != handle.inner.d {
            return QuditronStatus::Dimension;
        }
        let row = unsafe { std::slice::from_raw_parts(features, len) };
        let labels_out = unsafe { std::slice::from_raw_parts_mut(out_labels, d) };
        let probs_out = unsafe { std::slice::from_raw_parts_mut(out_probs, d) };
        let predictor = match handle.inner.predictor() {
            Ok(p) => p,
            Err(e) => return status_of(&e),
        };
        match predictor.predict_proba(row) {
            Ok(proba) => {
                labels_out.copy_from_slice(&proba.labels);
                probs_out.copy_from_slice(&proba.probs);
                QuditronStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Serializes the model to a newly allocated NUL-terminated JSON string;
/// free it with [`quditron_string_free`].
///
/// # Safety
/// `model` must be a live handle and `out_json` a writable pointer slot.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn quditron_model_to_json(
    model: *const QuditronModel,
    out_json: *mut *mut c_char,
) -> QuditronStatus {
    guarded(|| {
        let Some(handle) = (unsafe { model.as_ref() }) else {
            return QuditronStatus::NullPointer;
        };
        if out_json.is_null() {
            return QuditronStatus::NullPointer;
        }
        match handle.inner.to_json() {
            Ok(text) => match CString::new(text) {
                Ok(cstring) => {
                    unsafe { *out_json = cstring.into_raw() };
                    QuditronStatus::Ok
                }
                Err(_) => QuditronStatus::Internal,
            },
            Err(e) => status_of(&e),
        }
    })
}

/// Frees a string allocated by this library. Accepts null.
///
/// # Safety
/// `s` must be null or a string returned by [`quditron_model_to_json`],
/// not yet freed.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn quditron_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}
