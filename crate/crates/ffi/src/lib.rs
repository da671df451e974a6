//! C ABI over `tactile-core`.
//!
//! Every fallible function returns a [`TactileStatus`]; on failure the message
//! is available from [`tactile_last_error`] on the same thread. Objects that
//! cross the boundary are opaque handles freed by their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use tactile_core::dataset::{ClassLabel, ContactMode, Dataset, Row, StrainTrace, Task};
use tactile_core::eval::cross_validate;
use tactile_core::features::{stiffness_features, texture_features};
use tactile_core::learn::{Classifier, ModelSpec, StandardizedModel, TrainedModel};
use tactile_core::simulator::{presets, simulate_trial, SimConfig};
use tactile_core::stats::rank_sum_p;
use tactile_core::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TactileStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    BufferTooSmall = 3,
    /// The input data could not be processed (too short, single class, ...).
    DataError = 4,
    Panic = 5,
}

pub const TACTILE_TASK_TEXTURE: i32 = 0;
pub const TACTILE_TASK_STIFFNESS: i32 = 1;

pub const TACTILE_MODE_FC: i32 = 0;
pub const TACTILE_MODE_AC: i32 = 1;

pub const TACTILE_MODEL_KNN: i32 = 0;
pub const TACTILE_MODEL_SVM_LINEAR: i32 = 1;
pub const TACTILE_MODEL_SVM_RBF: i32 = 2;
pub const TACTILE_MODEL_DTREE: i32 = 3;

/// Number of texture features for the default window.
pub const TACTILE_TEXTURE_FEATURES: usize = 91;
/// Number of stiffness features: slope, intercept, r.
pub const TACTILE_STIFFNESS_FEATURES: usize = 3;

/// Labelled feature rows collected before training or evaluation.
pub struct TactileDataset {
    task: Task,
    mode: ContactMode,
    n_features: usize,
    rows: Vec<Row>,
}

/// A trained, standardised classifier.
pub struct TactileModel {
    task: Task,
    inner: StandardizedModel<TrainedModel>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(TactileStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::UnknownLabel(_)
            | Error::ConfigInvalid(_)
            | Error::IndexOutOfRange { .. }
            | Error::DimensionMismatch { .. } => TactileStatus::InvalidArgument,
            _ => TactileStatus::DataError,
        };
        Failure(status, e.to_string())
    }
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> TactileStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TactileStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            TactileStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(TactileStatus::NullPointer, format!("`{what}` is null"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(TactileStatus::InvalidArgument, msg.into())
}

/// Borrows `len` doubles; a null pointer is accepted only when `len` is 0.
unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn task_of(code: i32) -> Result<Task, Failure> {
    match code {
        TACTILE_TASK_TEXTURE => Ok(Task::Texture),
        TACTILE_TASK_STIFFNESS => Ok(Task::Stiffness),
        _ => Err(invalid(format!("unknown task code {code}"))),
    }
}

fn mode_of(code: i32) -> Result<ContactMode, Failure> {
    match code {
        TACTILE_MODE_FC => Ok(ContactMode::Flexion),
        TACTILE_MODE_AC => Ok(ContactMode::Abduction),
        _ => Err(invalid(format!("unknown contact mode code {code}"))),
    }
}

fn model_of(code: i32) -> Result<ModelSpec, Failure> {
    let name = match code {
        TACTILE_MODEL_KNN => "knn",
        TACTILE_MODEL_SVM_LINEAR => "svm-linear",
        TACTILE_MODEL_SVM_RBF => "svm-rbf",
        TACTILE_MODEL_DTREE => "dtree",
        _ => return Err(invalid(format!("unknown model code {code}"))),
    };
    Ok(name.parse()?)
}

fn copy_out(
    values: &[f64],
    out: *mut f64,
    out_len: usize,
    written: *mut usize,
) -> Result<(), Failure> {
    if !written.is_null() {
        unsafe { *written = values.len() };
    }
    if out_len < values.len() {
        return Err(Failure(
            TactileStatus::BufferTooSmall,
            format!("buffer holds {out_len} values, {} required", values.len()),
        ));
    }
    if out.is_null() {
        return Err(null("out"));
    }
    unsafe { ptr::copy_nonoverlapping(values.as_ptr(), out, values.len()) };
    Ok(())
}

fn features_of(task: Task, samples: *const f64, n: usize, fs_hz: f64) -> Result<Vec<f64>, Failure> {
    let s = unsafe { slice(samples, n, "samples")? };
    let label = task.labels().remove(0);
    let trace = StrainTrace::new(
        s.to_vec(),
        fs_hz,
        task,
        ContactMode::Flexion,
        label,
        "ffi",
        None,
    )?;
    let fv = match task {
        Task::Texture => texture_features(&trace)?,
        Task::Stiffness => stiffness_features(&trace)?,
    };
    Ok(fv.into_parts().1)
}

/// Message of the last failed call on this thread, or null if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn tactile_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tactile_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Texture features (DFT magnitudes of the cropped, zero-meaned window).
///
/// `*written` receives the feature count even when the buffer is too small.
///
/// # Safety
/// `samples` must point to `n` doubles and `out` to `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn tactile_texture_features(
    samples: *const f64,
    n: usize,
    fs_hz: f64,
    out: *mut f64,
    out_len: usize,
    written: *mut usize,
) -> TactileStatus {
    guard(|| {
        let v = features_of(Task::Texture, samples, n, fs_hz)?;
        copy_out(&v, out, out_len, written)
    })
}

/// Hold-phase regression features `[slope, intercept, r]` of a tap trace.
///
/// # Safety
/// `samples` must point to `n` doubles and `out` to at least 3 doubles.
#[no_mangle]
pub unsafe extern "C" fn tactile_stiffness_features(
    samples: *const f64,
    n: usize,
    fs_hz: f64,
    out: *mut f64,
) -> TactileStatus {
    guard(|| {
        let v = features_of(Task::Stiffness, samples, n, fs_hz)?;
        copy_out(&v, out, TACTILE_STIFFNESS_FEATURES, ptr::null_mut())
    })
}

/// Two-sided Wilcoxon rank-sum p-value.
///
/// # Safety
/// `a` and `b` must point to `na` and `nb` doubles; `p` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tactile_rank_sum_p(
    a: *const f64,
    na: usize,
    b: *const f64,
    nb: usize,
    p: *mut f64,
) -> TactileStatus {
    guard(|| {
        if p.is_null() {
            return Err(null("p"));
        }
        let value = rank_sum_p(slice(a, na, "a")?, slice(b, nb, "b")?)?;
        *p = value;
        Ok(())
    })
}

/// Simulates one trial of preset class `class_index` (in label order) with the
/// default simulator settings.
///
/// # Safety
/// `out` must point to `out_len` doubles; `written` may be null.
#[no_mangle]
pub unsafe extern "C" fn tactile_simulate_trial(
    task: i32,
    mode: i32,
    class_index: usize,
    seed: u64,
    out: *mut f64,
    out_len: usize,
    written: *mut usize,
) -> TactileStatus {
    guard(|| {
        let task = task_of(task)?;
        let mode = mode_of(mode)?;
        let (label, spec) = presets(task)
            .into_iter()
            .nth(class_index)
            .ok_or_else(|| invalid(format!("class index {class_index} out of range")))?;
        let trace = simulate_trial(&spec, label, mode, &SimConfig::default(), seed, "ffi")?;
        copy_out(trace.samples(), out, out_len, written)
    })
}

/// Copies the name of class `ordinal` of `task` into `buf` (NUL-terminated).
///
/// # Safety
/// `buf` must point to `buf_len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn tactile_label_name(
    task: i32,
    ordinal: usize,
    buf: *mut c_char,
    buf_len: usize,
) -> TactileStatus {
    guard(|| {
        let task = task_of(task)?;
        let name = task
            .label_names()
            .get(ordinal)
            .ok_or_else(|| invalid(format!("ordinal {ordinal} out of range")))?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        if buf_len < name.len() + 1 {
            return Err(Failure(
                TactileStatus::BufferTooSmall,
                format!("label needs {} bytes", name.len() + 1),
            ));
        }
        ptr::copy_nonoverlapping(name.as_ptr().cast(), buf, name.len());
        *buf.add(name.len()) = 0;
        Ok(())
    })
}

/// New empty dataset, or null on invalid codes (see `tactile_last_error`).
#[no_mangle]
pub extern "C" fn tactile_dataset_new(
    task: i32,
    mode: i32,
    n_features: usize,
) -> *mut TactileDataset {
    let mut handle = ptr::null_mut();
    guard(|| {
        if n_features == 0 {
            return Err(invalid("n_features must be positive"));
        }
        handle = Box::into_raw(Box::new(TactileDataset {
            task: task_of(task)?,
            mode: mode_of(mode)?,
            n_features,
            rows: Vec::new(),
        }));
        Ok(())
    });
    handle
}

/// Appends one row with a label name from the dataset's task.
///
/// # Safety
/// `ds` must come from `tactile_dataset_new`; `values` must point to
/// `n_features` doubles; `label` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn tactile_dataset_push(
    ds: *mut TactileDataset,
    values: *const f64,
    n_features: usize,
    label: *const c_char,
) -> TactileStatus {
    guard(|| {
        let ds = ds.as_mut().ok_or_else(|| null("ds"))?;
        if label.is_null() {
            return Err(null("label"));
        }
        if n_features != ds.n_features {
            return Err(Error::DimensionMismatch {
                expected: ds.n_features,
                actual: n_features,
            }
            .into());
        }
        let name = CStr::from_ptr(label)
            .to_str()
            .map_err(|_| invalid("label is not UTF-8"))?;
        let values = slice(values, n_features, "values")?.to_vec();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite.into());
        }
        let label: ClassLabel = ds.task.label(name)?;
        ds.rows.push(Row { values, label });
        Ok(())
    })
}

/// Number of rows, or 0 for a null handle.
///
/// # Safety
/// `ds` must be null or come from `tactile_dataset_new`.
#[no_mangle]
pub unsafe extern "C" fn tactile_dataset_len(ds: *const TactileDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.rows.len())
}

/// # Safety
/// `ds` must be null or come from `tactile_dataset_new`, and not be used again.
#[no_mangle]
pub unsafe extern "C" fn tactile_dataset_free(ds: *mut TactileDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

fn to_dataset(ds: &TactileDataset) -> Result<Dataset, Failure> {
    let names = (0..ds.n_features).map(|i| format!("x{i}")).collect();
    Ok(Dataset::from_rows(
        names,
        ds.rows.clone(),
        ds.task,
        ds.mode,
    )?)
}

/// Repeated stratified k-fold cross-validation; writes the mean accuracy.
///
/// # Safety
/// `ds` must come from `tactile_dataset_new`; `mean_accuracy` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tactile_cross_validate(
    ds: *const TactileDataset,
    model: i32,
    k: usize,
    runs: usize,
    seed: u64,
    mean_accuracy: *mut f64,
) -> TactileStatus {
    guard(|| {
        let ds = ds.as_ref().ok_or_else(|| null("ds"))?;
        if mean_accuracy.is_null() {
            return Err(null("mean_accuracy"));
        }
        let spec = model_of(model)?;
        let report = cross_validate(&to_dataset(ds)?, &spec, k, runs, seed)?;
        *mean_accuracy = report.mean_accuracy;
        Ok(())
    })
}

/// Trains a standardised model on every row of `ds`.
///
/// # Safety
/// `ds` must come from `tactile_dataset_new`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tactile_model_fit(
    ds: *const TactileDataset,
    model: i32,
    out: *mut *mut TactileModel,
) -> TactileStatus {
    guard(|| {
        let ds = ds.as_ref().ok_or_else(|| null("ds"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let spec = model_of(model)?;
        let inner = StandardizedModel::fit(&spec, &to_dataset(ds)?)?;
        *out = Box::into_raw(Box::new(TactileModel {
            task: ds.task,
            inner,
        }));
        Ok(())
    })
}

/// Predicts one row; writes the class ordinal (see `tactile_label_name`).
///
/// # Safety
/// `model` must come from `tactile_model_fit`; `x` must point to `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn tactile_model_predict(
    model: *const TactileModel,
    x: *const f64,
    n: usize,
    ordinal: *mut usize,
) -> TactileStatus {
    guard(|| {
        let model = model.as_ref().ok_or_else(|| null("model"))?;
        if ordinal.is_null() {
            return Err(null("ordinal"));
        }
        let label = model.inner.predict(slice(x, n, "x")?)?;
        debug_assert!(model.task.label(label.name()).is_ok());
        *ordinal = label.ordinal();
        Ok(())
    })
}

/// # Safety
/// `model` must be null or come from `tactile_model_fit`, and not be used again.
#[no_mangle]
pub unsafe extern "C" fn tactile_model_free(model: *mut TactileModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}
