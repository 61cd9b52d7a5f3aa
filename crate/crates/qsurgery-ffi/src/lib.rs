//! C ABI over the qsurgery toolkit.
//!
//! Objects cross the boundary as opaque handles released with the matching
//! `qs_*_free`. Every fallible call returns a [`QsStatus`]; on failure the
//! message is available from
//! [`qs_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_rational::Ratio;
use qsurgery::archkit::BlockMap;
use qsurgery::config::Caps;
use qsurgery::paulicode::{self, fixtures, ldpc_profile, Distance, PauliOperator, StabilizerCode};
use qsurgery::pbc::{self, BlockPartition, Circuit, Compilation};
use qsurgery::surgery;
use qsurgery::Error;

/// Result of every fallible call. Values match the command line exit codes
/// where they overlap.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QsStatus {
    Ok = 0,
    Internal = 1,
    InvalidInput = 2,
    CapExceeded = 3,
    NullPointer = 4,
    Panic = 5,
}

/// A stabilizer code.
pub struct QsCode(StabilizerCode);

/// A compiled measurement schedule.
pub struct QsCompilation(Compilation);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> QsStatus {
    match e.exit_code() {
        2 => QsStatus::InvalidInput,
        3 => QsStatus::CapExceeded,
        _ => QsStatus::Internal,
    }
}

/// Runs `f`, recording its error or panic.
fn guard(f: impl FnOnce() -> Result<(), (QsStatus, String)>) -> QsStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QsStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            QsStatus::Panic
        }
    }
}

fn lib(e: Error) -> (QsStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (QsStatus, String) {
    (QsStatus::NullPointer, format!("{what} is null"))
}

/// # Safety
/// `s` is null or a valid NUL-terminated string.
unsafe fn text<'a>(s: *const c_char, what: &str) -> Result<&'a str, (QsStatus, String)> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s).to_str().map_err(|_| (QsStatus::InvalidInput, format!("{what} is not UTF-8")))
}

/// # Safety
/// `p` is null or points to a live handle.
unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, (QsStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

fn out<T>(p: *mut T, what: &str) -> Result<(), (QsStatus, String)> {
    if p.is_null() {
        Err(null(what))
    } else {
        Ok(())
    }
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn qs_version() -> *const c_char {
    static V: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version"),
    };
    V.as_ptr()
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn qs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` is null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a code from its text form.
///
/// # Safety
/// `src` is a NUL-terminated string; `out_code` is writable.
#[no_mangle]
pub unsafe extern "C" fn qs_code_parse(src: *const c_char, out_code: *mut *mut QsCode) -> QsStatus {
    guard(|| {
        out(out_code, "out_code")?;
        let code = StabilizerCode::from_text(text(src, "src")?).map_err(lib)?;
        *out_code = Box::into_raw(Box::new(QsCode(code)));
        Ok(())
    })
}

/// Built-in code by name: `4_2_2`, `steane`, `bell`, `5_1_3`, `surface3`, `rep2`.
///
/// # Safety
/// `name` is a NUL-terminated string; `out_code` is writable.
#[no_mangle]
pub unsafe extern "C" fn qs_code_fixture(name: *const c_char, out_code: *mut *mut QsCode) -> QsStatus {
    guard(|| {
        out(out_code, "out_code")?;
        let name = text(name, "name")?;
        let code = fixtures::by_name(name).ok_or_else(|| (QsStatus::InvalidInput, format!("unknown fixture {name:?}")))?;
        *out_code = Box::into_raw(Box::new(QsCode(code)));
        Ok(())
    })
}

/// # Safety
/// `code` is null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qs_code_free(code: *mut QsCode) {
    if !code.is_null() {
        drop(Box::from_raw(code));
    }
}

/// Number of physical and logical qubits.
///
/// # Safety
/// `code` is a live handle; both outputs are writable.
#[no_mangle]
pub unsafe extern "C" fn qs_code_params(code: *const QsCode, out_n: *mut usize, out_k: *mut usize) -> QsStatus {
    guard(|| {
        let c = &handle(code, "code")?.0;
        out(out_n, "out_n")?;
        out(out_k, "out_k")?;
        *out_n = c.n();
        *out_k = c.k();
        Ok(())
    })
}

/// Exact distance for codes with at most `max_n` qubits; 0 when the code
/// has no logical qubits.
///
/// # Safety
/// `code` is a live handle; `out_d` is writable.
#[no_mangle]
pub unsafe extern "C" fn qs_code_distance(code: *const QsCode, max_n: usize, out_d: *mut usize) -> QsStatus {
    guard(|| {
        let c = &handle(code, "code")?.0;
        out(out_d, "out_d")?;
        *out_d = match paulicode::distance_bruteforce(c, max_n).map_err(lib)? {
            Distance::Exact(d) => d,
            Distance::AtLeast(d) => d,
            Distance::NoLogical => 0,
        };
        Ok(())
    })
}

/// Builds a measurement graph for `op` and the merged code, then checks the
/// merged-code invariants. Reports the merged qubit count and logical count.
///
/// # Safety
/// `code` is a live handle; `op` is a NUL-terminated Pauli string; outputs
/// are writable.
#[no_mangle]
pub unsafe extern "C" fn qs_code_merge(
    code: *const QsCode,
    op: *const c_char,
    seed: u64,
    out_qubits: *mut usize,
    out_k: *mut usize,
) -> QsStatus {
    guard(|| {
        let c = &handle(code, "code")?.0;
        out(out_qubits, "out_qubits")?;
        out(out_k, "out_k")?;
        let l: PauliOperator = text(op, "op")?.parse().map_err(lib)?;
        if l.n() != c.n() {
            return Err((QsStatus::InvalidInput, format!("operator has {} qubits, code has {}", l.n(), c.n())));
        }
        let caps = Caps::for_measurement_graph(ldpc_profile(c)).with_env_overrides();
        let g = surgery::build_measurement_graph(c, &l, Ratio::from_integer(1), seed, &caps).map_err(lib)?;
        let m = surgery::build_merged_code(c, &l, &g.ported).map_err(lib)?;
        m.verify().map_err(lib)?;
        *out_qubits = m.n_total();
        *out_k = m.code().k();
        Ok(())
    })
}

/// Compiles a circuit (text form) for a partition and block map (JSON).
///
/// # Safety
/// All strings are NUL-terminated; `out_comp` is writable.
#[no_mangle]
pub unsafe extern "C" fn qs_compile(
    circuit: *const c_char,
    partition_json: *const c_char,
    blockmap_json: *const c_char,
    out_comp: *mut *mut QsCompilation,
) -> QsStatus {
    guard(|| {
        out(out_comp, "out_comp")?;
        let c = Circuit::parse(text(circuit, "circuit")?).map_err(lib)?;
        let p = BlockPartition::from_json(text(partition_json, "partition_json")?).map_err(lib)?;
        let m = BlockMap::from_json(text(blockmap_json, "blockmap_json")?).map_err(lib)?;
        let comp = pbc::compile(&c, &p, &m).map_err(lib)?;
        *out_comp = Box::into_raw(Box::new(QsCompilation(comp)));
        Ok(())
    })
}

/// # Safety
/// `comp` is null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qs_compilation_free(comp: *mut QsCompilation) {
    if !comp.is_null() {
        drop(Box::from_raw(comp));
    }
}

/// Schedule depth, reduced depth and magic state count.
///
/// # Safety
/// `comp` is a live handle; outputs are writable.
#[no_mangle]
pub unsafe extern "C" fn qs_compilation_stats(
    comp: *const QsCompilation,
    out_depth: *mut usize,
    out_lambda: *mut usize,
    out_magic: *mut usize,
) -> QsStatus {
    guard(|| {
        let s = &handle(comp, "comp")?.0.schedule;
        out(out_depth, "out_depth")?;
        out(out_lambda, "out_lambda")?;
        out(out_magic, "out_magic")?;
        *out_depth = s.depth;
        *out_lambda = s.lambda;
        *out_magic = s.magic_count;
        Ok(())
    })
}

/// Schedule as JSON; release with [`qs_string_free`].
///
/// # Safety
/// `comp` is a live handle; `out_json` is writable.
#[no_mangle]
pub unsafe extern "C" fn qs_compilation_schedule_json(comp: *const QsCompilation, out_json: *mut *mut c_char) -> QsStatus {
    guard(|| {
        let s = &handle(comp, "comp")?.0.schedule;
        out(out_json, "out_json")?;
        let json = serde_json::to_string(&s.to_json()).map_err(|e| (QsStatus::Internal, e.to_string()))?;
        *out_json = CString::new(json).map_err(|e| (QsStatus::Internal, e.to_string()))?.into_raw();
        Ok(())
    })
}

/// Replays the schedule on a state vector and compares with direct
/// simulation. `out_ok` is set to 1 on agreement, 0 otherwise.
///
/// # Safety
/// `comp` is a live handle; `out_ok` is writable.
#[no_mangle]
pub unsafe extern "C" fn qs_compilation_verify(
    comp: *const QsCompilation,
    max_qubits: usize,
    seed: u64,
    out_ok: *mut u8,
) -> QsStatus {
    guard(|| {
        let c = &handle(comp, "comp")?.0;
        out(out_ok, "out_ok")?;
        let r = pbc::verify_compilation(c, max_qubits, seed).map_err(lib)?;
        *out_ok = u8::from(r.ok);
        Ok(())
    })
}
