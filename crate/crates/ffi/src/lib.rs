//! C ABI over `qvscreen`.
//!
//! Every fallible function returns a [`QvsStatus`]; on failure the message is
//! available from [`qvs_last_error_message`] on the same thread. Matrices are
//! passed as row-major `double` buffers. Objects cross the boundary as opaque
//! handles that must be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::sync::OnceLock;

use nalgebra::DMatrix;
use qvscreen::eval::roc_auc;
use qvscreen::qkernel::{self, qkm, FeatureMapSpec, KernelMatrix, KernelMode};
use qvscreen::smiles::{descriptors_for, DESCRIPTOR_NAMES};
use qvscreen::svm::{decision_function, SmoParams, TrainedSvcModel};
use qvscreen::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QvsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    ParseError = 4,
    IoError = 5,
    SingleClass = 6,
    Panic = 7,
}

enum Failure {
    Null(&'static str),
    Arg(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn status(&self) -> QvsStatus {
        match self {
            Failure::Null(_) => QvsStatus::NullPointer,
            Failure::Arg(_) => QvsStatus::InvalidArgument,
            Failure::Core(e) => match e {
                Error::DimensionMismatch { .. } => QvsStatus::DimensionMismatch,
                Error::Smiles(_) | Error::Format(_) | Error::Csv(_) | Error::Json(_) => {
                    QvsStatus::ParseError
                }
                Error::Io { .. } => QvsStatus::IoError,
                Error::SingleClass(_) => QvsStatus::SingleClass,
                _ => QvsStatus::InvalidArgument,
            },
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Null(what) => format!("null pointer: {what}"),
            Failure::Arg(m) => m.clone(),
            Failure::Core(e) => e.to_string(),
        }
    }
}

type FfiResult<T = ()> = Result<T, Failure>;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nuls removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Runs `f`, records any failure or panic and converts it to a status.
fn guard(f: impl FnOnce() -> FfiResult) -> QvsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QvsStatus::Ok,
        Ok(Err(fail)) => {
            set_last_error(fail.message());
            fail.status()
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            QvsStatus::Panic
        }
    }
}

fn non_null<T>(p: *const T, what: &'static str) -> FfiResult<*const T> {
    if p.is_null() {
        Err(Failure::Null(what))
    } else {
        Ok(p)
    }
}

/// # Safety
/// `p` must point at `len` readable values (or be null, which is an error).
unsafe fn slice<'a, T>(p: *const T, len: usize, what: &'static str) -> FfiResult<&'a [T]> {
    if len == 0 {
        return Ok(&[]);
    }
    Ok(std::slice::from_raw_parts(non_null(p, what)?, len))
}

/// # Safety
/// `p` must point at `len` writable values.
unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, what: &'static str) -> FfiResult<&'a mut [T]> {
    if len == 0 {
        return Ok(&mut []);
    }
    non_null(p, what)?;
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn write_out<T>(p: *mut T, v: T, what: &'static str) -> FfiResult {
    non_null(p, what)?;
    p.write(v);
    Ok(())
}

unsafe fn str_arg<'a>(p: *const c_char, what: &'static str) -> FfiResult<&'a str> {
    CStr::from_ptr(non_null(p, what)?)
        .to_str()
        .map_err(|_| Failure::Arg(format!("{what} is not valid UTF-8")))
}

unsafe fn matrix(
    p: *const f64,
    rows: usize,
    cols: usize,
    what: &'static str,
) -> FfiResult<DMatrix<f64>> {
    let len = rows
        .checked_mul(cols)
        .ok_or_else(|| Failure::Arg(format!("{what}: size overflow")))?;
    Ok(DMatrix::from_row_slice(rows, cols, slice(p, len, what)?))
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn qvs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qvs_version() -> *const c_char {
    static V: OnceLock<CString> = OnceLock::new();
    V.get_or_init(|| CString::new(qvscreen::VERSION).expect("no nul"))
        .as_ptr()
}

#[no_mangle]
pub extern "C" fn qvs_descriptor_count() -> usize {
    DESCRIPTOR_NAMES.len()
}

/// Static name of descriptor `index`, or null when out of range.
#[no_mangle]
pub extern "C" fn qvs_descriptor_name(index: usize) -> *const c_char {
    static NAMES: OnceLock<Vec<CString>> = OnceLock::new();
    NAMES
        .get_or_init(|| {
            DESCRIPTOR_NAMES
                .iter()
                .map(|n| CString::new(*n).expect("no nul"))
                .collect()
        })
        .get(index)
        .map_or(ptr::null(), |c| c.as_ptr())
}

/// Writes the descriptor vector of `smiles` into `out` (`out_len` must be at
/// least [`qvs_descriptor_count`]). On a parse error the byte offset is stored
/// in `error_position` when it is non-null.
///
/// # Safety
/// `smiles` must be a NUL-terminated string and `out` must hold `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn qvs_smiles_descriptors(
    smiles: *const c_char,
    out: *mut f64,
    out_len: usize,
    error_position: *mut usize,
) -> QvsStatus {
    guard(|| {
        let s = str_arg(smiles, "smiles")?;
        if out_len < DESCRIPTOR_NAMES.len() {
            return Err(Failure::Core(Error::DimensionMismatch {
                expected: DESCRIPTOR_NAMES.len(),
                got: out_len,
            }));
        }
        let out = slice_mut(out, out_len, "out")?;
        match descriptors_for(s) {
            Ok(d) => {
                out[..DESCRIPTOR_NAMES.len()].copy_from_slice(&d.to_array());
                Ok(())
            }
            Err(e) => {
                if !error_position.is_null() {
                    error_position.write(e.position);
                }
                Err(Error::from(e).into())
            }
        }
    })
}

fn feature_map(n_qubits: usize, depth: usize) -> FfiResult<FeatureMapSpec> {
    Ok(FeatureMapSpec::new(n_qubits, depth)?)
}

/// Exact fidelity kernel between two angle vectors of length `n_qubits`.
///
/// # Safety
/// `x` and `x_prime` must hold `n_qubits` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qvs_kernel_exact(
    x: *const f64,
    x_prime: *const f64,
    n_qubits: usize,
    depth: usize,
    out: *mut f64,
) -> QvsStatus {
    guard(|| {
        let fm = feature_map(n_qubits, depth)?;
        let k = qkernel::kernel_exact(
            slice(x, n_qubits, "x")?,
            slice(x_prime, n_qubits, "x_prime")?,
            &fm,
        )?;
        write_out(out, k, "out")
    })
}

/// Shot-sampled fidelity kernel estimate; deterministic for a given seed.
///
/// # Safety
/// As for [`qvs_kernel_exact`].
#[no_mangle]
pub unsafe extern "C" fn qvs_kernel_sampled(
    x: *const f64,
    x_prime: *const f64,
    n_qubits: usize,
    depth: usize,
    shots: u64,
    seed: u64,
    out: *mut f64,
) -> QvsStatus {
    guard(|| {
        let fm = feature_map(n_qubits, depth)?;
        let k = qkernel::kernel_sampled(
            slice(x, n_qubits, "x")?,
            slice(x_prime, n_qubits, "x_prime")?,
            &fm,
            shots,
            seed,
        )?;
        write_out(out, k, "out")
    })
}

/// Opaque kernel matrix.
pub struct QvsGram(KernelMatrix);

/// Builds the kernel matrix between the rows of `a` (`a_rows` × `n_qubits`)
/// and the rows of `b`; pass a null `b` for the self-Gram of `a`. `shots == 0`
/// selects exact mode. `psd_repair` only affects sampled self-Grams.
///
/// # Safety
/// `a` must hold `a_rows * n_qubits` doubles, `b` (if non-null) `b_rows *
/// n_qubits`; `out` must be writable. Free the result with [`qvs_gram_free`].
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn qvs_gram_new(
    a: *const f64,
    a_rows: usize,
    b: *const f64,
    b_rows: usize,
    n_qubits: usize,
    depth: usize,
    shots: u64,
    seed: u64,
    psd_repair: bool,
    out: *mut *mut QvsGram,
) -> QvsStatus {
    guard(|| {
        non_null(out, "out")?;
        let fm = feature_map(n_qubits, depth)?;
        let a = matrix(a, a_rows, n_qubits, "a")?;
        let b = if b.is_null() {
            None
        } else {
            Some(matrix(b, b_rows, n_qubits, "b")?)
        };
        let mode = if shots == 0 {
            KernelMode::Exact
        } else {
            KernelMode::Sampled { shots }
        };
        let k = qkernel::gram_matrix(&a, b.as_ref(), &fm, mode, seed, psd_repair)?;
        out.write(Box::into_raw(Box::new(QvsGram(k))));
        Ok(())
    })
}

/// # Safety
/// `g` must be a live handle from [`qvs_gram_new`].
#[no_mangle]
pub unsafe extern "C" fn qvs_gram_rows(g: *const QvsGram) -> usize {
    g.as_ref().map_or(0, |g| g.0.nrows())
}

/// # Safety
/// `g` must be a live handle from [`qvs_gram_new`].
#[no_mangle]
pub unsafe extern "C" fn qvs_gram_cols(g: *const QvsGram) -> usize {
    g.as_ref().map_or(0, |g| g.0.ncols())
}

/// Copies the matrix row-major into `out`, which must hold rows × cols values.
///
/// # Safety
/// `g` must be live and `out` must hold `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn qvs_gram_copy(
    g: *const QvsGram,
    out: *mut f64,
    out_len: usize,
) -> QvsStatus {
    guard(|| {
        let g = &non_null(g, "gram")?.as_ref().expect("checked").0;
        let n = g.nrows() * g.ncols();
        if out_len < n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: out_len,
            }
            .into());
        }
        let out = slice_mut(out, n, "out")?;
        for r in 0..g.nrows() {
            for c in 0..g.ncols() {
                out[r * g.ncols() + c] = g.data[(r, c)];
            }
        }
        Ok(())
    })
}

/// Writes the matrix to `path` in QKM1 format.
///
/// # Safety
/// `g` must be live and `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn qvs_gram_write_qkm(g: *const QvsGram, path: *const c_char) -> QvsStatus {
    guard(|| {
        let g = &non_null(g, "gram")?.as_ref().expect("checked").0;
        Ok(qkm::save(g, Path::new(str_arg(path, "path")?))?)
    })
}

/// # Safety
/// `g` must come from [`qvs_gram_new`] and not be used afterwards. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn qvs_gram_free(g: *mut QvsGram) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Opaque trained classifier on a precomputed kernel.
pub struct QvsSvc(TrainedSvcModel);

/// Trains an SVC on the `n` × `n` row-major kernel `k` with labels `y` in
/// {+1, −1} and box constraint `c`.
///
/// # Safety
/// `k` must hold `n * n` doubles, `y` `n` doubles; `out` must be writable.
/// Free the result with [`qvs_svc_free`].
#[no_mangle]
pub unsafe extern "C" fn qvs_svc_train(
    k: *const f64,
    n: usize,
    y: *const f64,
    c: f64,
    out: *mut *mut QvsSvc,
) -> QvsStatus {
    guard(|| {
        non_null(out, "out")?;
        let k = matrix(k, n, n, "k")?;
        let y = slice(y, n, "y")?;
        let m = TrainedSvcModel::fit_precomputed(&k, y, c, &SmoParams::default())?;
        out.write(Box::into_raw(Box::new(QvsSvc(m))));
        Ok(())
    })
}

/// Decision values for `n_test` rows of the test-vs-train kernel `k_test`
/// (`n_test` × n_train, row-major).
///
/// # Safety
/// `svc` must be live; `k_test` must hold `n_test * n_train` doubles and
/// `out` `n_test` doubles.
#[no_mangle]
pub unsafe extern "C" fn qvs_svc_decision(
    svc: *const QvsSvc,
    k_test: *const f64,
    n_test: usize,
    out: *mut f64,
) -> QvsStatus {
    guard(|| {
        let m = &non_null(svc, "svc")?.as_ref().expect("checked").0;
        let k = matrix(k_test, n_test, m.n_train(), "k_test")?;
        let scores = decision_function(m, &k)?;
        slice_mut(out, n_test, "out")?.copy_from_slice(&scores);
        Ok(())
    })
}

/// Number of support vectors, 0 for a null handle.
///
/// # Safety
/// `svc` must be live or null.
#[no_mangle]
pub unsafe extern "C" fn qvs_svc_support_count(svc: *const QvsSvc) -> usize {
    svc.as_ref().map_or(0, |m| m.0.solution.support.len())
}

/// Bias term b, NaN for a null handle.
///
/// # Safety
/// `svc` must be live or null.
#[no_mangle]
pub unsafe extern "C" fn qvs_svc_bias(svc: *const QvsSvc) -> f64 {
    svc.as_ref().map_or(f64::NAN, |m| m.0.solution.b)
}

/// # Safety
/// `svc` must come from [`qvs_svc_train`] and not be used afterwards. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn qvs_svc_free(svc: *mut QvsSvc) {
    if !svc.is_null() {
        drop(Box::from_raw(svc));
    }
}

/// AUC-ROC of `scores` against labels `y` (+1 active, −1 inactive).
///
/// # Safety
/// `y` and `scores` must hold `n` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qvs_roc_auc(
    y: *const i8,
    scores: *const f64,
    n: usize,
    out: *mut f64,
) -> QvsStatus {
    guard(|| {
        let auc = roc_auc(slice(y, n, "y")?, slice(scores, n, "scores")?)?;
        write_out(out, auc, "out")
    })
}
