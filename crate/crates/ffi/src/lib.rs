//! C ABI over `wdistill`.
//!
//! States and trajectories are opaque heap handles owned by the caller and
//! released with the matching `*_free` function. Every fallible call
//! returns a [`WdStatus`]; on failure a message is kept per thread and can be
//! read with [`wd_last_error_message`]. Output pointers are written only on
//! success.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, UnwindSafe};

use wdistill::channels::{dephasing_fidelity_map, noisy_w_with_fidelity, ChannelKind};
use wdistill::experiments::{retrieval_threshold, Classification};
use wdistill::protocol::{distill_run, run_p, run_pbar, ProtocolConfig, StepResult, Trajectory, VPlacement};
use wdistill::qmath::fidelity_with_pure;
use wdistill::wstructure::w_state;
use wdistill::{Complex, DensityMatrix, Error, Operator};

/// Status code returned by every fallible function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    DegenerateOutcome = 3,
    SamplingFailed = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WdChannel {
    Dephasing = 0,
    Depolarizing = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WdPlacement {
    PerParty = 0,
    PerCopy = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WdClassification {
    W = 0,
    Bell = 1,
    Undistillable = 2,
    Transient = 3,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WdSubprotocol {
    P = 0,
    PBar = 1,
}

/// Opaque 3-qubit density matrix.
pub struct WdState {
    rho: DensityMatrix,
}

/// Opaque result of a recurrence run.
pub struct WdTrajectory {
    traj: Trajectory,
}

/// One subprotocol application.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct WdStep {
    pub fidelity: f64,
    pub p_success: f64,
    pub subprotocol: WdSubprotocol,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> WdStatus {
    match e {
        Error::Input(_) => WdStatus::InvalidInput,
        Error::DegenerateOutcome(_) => WdStatus::DegenerateOutcome,
        Error::Sampling { .. } => WdStatus::SamplingFailed,
    }
}

fn guard<F>(f: F) -> WdStatus
where
    F: FnOnce() -> Result<(), WdStatus> + UnwindSafe,
{
    match catch_unwind(f) {
        Ok(Ok(())) => WdStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            WdStatus::Panic
        }
    }
}

fn lib<T>(r: wdistill::Result<T>) -> Result<T, WdStatus> {
    r.map_err(|e| {
        set_error(&e.to_string());
        status_of(&e)
    })
}

fn invalid(msg: &str) -> WdStatus {
    set_error(msg);
    WdStatus::InvalidInput
}

unsafe fn deref<'a, T>(p: *const T) -> Result<&'a T, WdStatus> {
    p.as_ref().ok_or_else(|| {
        set_error("null pointer argument");
        WdStatus::NullPointer
    })
}

unsafe fn write<T>(p: *mut T, v: T) -> Result<(), WdStatus> {
    if p.is_null() {
        set_error("null output pointer");
        return Err(WdStatus::NullPointer);
    }
    p.write(v);
    Ok(())
}

fn boxed_state(rho: DensityMatrix) -> *mut WdState {
    Box::into_raw(Box::new(WdState { rho }))
}

impl From<WdChannel> for ChannelKind {
    fn from(c: WdChannel) -> Self {
        match c {
            WdChannel::Dephasing => ChannelKind::Dephasing,
            WdChannel::Depolarizing => ChannelKind::Depolarizing,
        }
    }
}

impl From<WdPlacement> for VPlacement {
    fn from(p: WdPlacement) -> Self {
        match p {
            WdPlacement::PerParty => VPlacement::PerParty,
            WdPlacement::PerCopy => VPlacement::PerCopy,
        }
    }
}

fn config(placement: WdPlacement) -> ProtocolConfig {
    ProtocolConfig {
        v_placement: placement.into(),
        ..ProtocolConfig::default()
    }
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length without the NUL.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn wd_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let bytes = e.borrow();
        let bytes = bytes.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn wd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Locally dephased or depolarized W state with fidelity `fidelity`.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn wd_state_noisy_w(channel: WdChannel, fidelity: f64, out: *mut *mut WdState) -> WdStatus {
    guard(|| {
        let rho = lib(noisy_w_with_fidelity(channel.into(), fidelity))?;
        write(out, boxed_state(rho))
    })
}

/// Builds a state from a row-major `dim × dim` matrix given as separate
/// real and imaginary parts. The matrix must be Hermitian with unit trace.
///
/// # Safety
/// `re` and `im` must point to `dim * dim` readable doubles; `out` must be
/// a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn wd_state_from_matrix(
    re: *const f64,
    im: *const f64,
    dim: usize,
    out: *mut *mut WdState,
) -> WdStatus {
    guard(|| {
        if re.is_null() || im.is_null() {
            set_error("null matrix buffer");
            return Err(WdStatus::NullPointer);
        }
        if dim != 8 {
            return Err(invalid("states must be 8 x 8"));
        }
        let n = dim * dim;
        let (re, im) = (std::slice::from_raw_parts(re, n), std::slice::from_raw_parts(im, n));
        let data = re.iter().zip(im).map(|(&a, &b)| Complex::new(a, b)).collect();
        let op = lib(Operator::new(dim, dim, data))?;
        let rho = lib(DensityMatrix::new(op))?;
        write(out, boxed_state(rho))
    })
}

/// Releases a state handle. Null is ignored.
///
/// # Safety
/// `state` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn wd_state_free(state: *mut WdState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// `⟨W^000|ρ|W^000⟩`.
///
/// # Safety
/// `state` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn wd_state_fidelity(state: *const WdState, out: *mut f64) -> WdStatus {
    guard(|| {
        let s = deref(state)?;
        let f = lib(fidelity_with_pure(&s.rho, &w_state()))?;
        write(out, f)
    })
}

/// Copies the matrix into row-major `re`/`im` buffers of `len` entries
/// each (64 needed).
///
/// # Safety
/// `state` must be a live handle; `re` and `im` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn wd_state_matrix(state: *const WdState, re: *mut f64, im: *mut f64, len: usize) -> WdStatus {
    guard(|| {
        let s = deref(state)?;
        if re.is_null() || im.is_null() {
            set_error("null matrix buffer");
            return Err(WdStatus::NullPointer);
        }
        let data = s.rho.as_operator().as_slice();
        if len < data.len() {
            set_error("buffer shorter than dim * dim");
            return Err(WdStatus::BufferTooSmall);
        }
        for (i, z) in data.iter().enumerate() {
            *re.add(i) = z.re;
            *im.add(i) = z.im;
        }
        Ok(())
    })
}

unsafe fn finish_step(step: StepResult, out_state: *mut *mut WdState, out_step: *mut WdStep) -> Result<(), WdStatus> {
    if out_state.is_null() || out_step.is_null() {
        set_error("null output pointer");
        return Err(WdStatus::NullPointer);
    }
    let info = WdStep {
        fidelity: step.fidelity,
        p_success: step.p_success,
        subprotocol: match step.subprotocol {
            wdistill::protocol::Subprotocol::P => WdSubprotocol::P,
            wdistill::protocol::Subprotocol::PBar => WdSubprotocol::PBar,
        },
    };
    out_step.write(info);
    out_state.write(boxed_state(step.rho_out));
    Ok(())
}

/// One application of the W-basis subprotocol. The output state is a new
/// handle.
///
/// # Safety
/// `state` must be a live handle; both output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn wd_run_p(
    state: *const WdState,
    out_state: *mut *mut WdState,
    out_step: *mut WdStep,
) -> WdStatus {
    guard(|| {
        let s = deref(state)?;
        let step = lib(run_p(&s.rho))?;
        finish_step(step, out_state, out_step)
    })
}

/// One application of the dual-basis subprotocol.
///
/// # Safety
/// As for [`wd_run_p`].
#[no_mangle]
pub unsafe extern "C" fn wd_run_pbar(
    state: *const WdState,
    placement: WdPlacement,
    out_state: *mut *mut WdState,
    out_step: *mut WdStep,
) -> WdStatus {
    guard(|| {
        let s = deref(state)?;
        let step = lib(run_pbar(&s.rho, placement.into()))?;
        finish_step(step, out_state, out_step)
    })
}

/// Iterates the recurrence until `target` fidelity, a fixed point, or
/// `max_steps`.
///
/// # Safety
/// `state` must be a live handle and `out` a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn wd_distill_run(
    state: *const WdState,
    max_steps: usize,
    target: f64,
    placement: WdPlacement,
    out: *mut *mut WdTrajectory,
) -> WdStatus {
    guard(|| {
        let s = deref(state)?;
        let traj = lib(distill_run(&s.rho, max_steps, target, &config(placement)))?;
        write(out, Box::into_raw(Box::new(WdTrajectory { traj })))
    })
}

/// Releases a trajectory handle. Null is ignored.
///
/// # Safety
/// `traj` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn wd_trajectory_free(traj: *mut WdTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Number of recurrence steps taken.
///
/// # Safety
/// `traj` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn wd_trajectory_steps(traj: *const WdTrajectory, out: *mut usize) -> WdStatus {
    guard(|| write(out, deref(traj)?.traj.steps.len()))
}

/// Fidelity before the first step and after every step (`steps + 1`
/// values). `written` receives the number needed even when `len` is short.
///
/// # Safety
/// `traj` must be a live handle; `buf` must hold `len` doubles; `written`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn wd_trajectory_fidelities(
    traj: *const WdTrajectory,
    buf: *mut f64,
    len: usize,
    written: *mut usize,
) -> WdStatus {
    guard(|| {
        let f = deref(traj)?.traj.fidelities();
        write(written, f.len())?;
        if len < f.len() {
            set_error("buffer shorter than steps + 1");
            return Err(WdStatus::BufferTooSmall);
        }
        if buf.is_null() {
            set_error("null fidelity buffer");
            return Err(WdStatus::NullPointer);
        }
        std::ptr::copy_nonoverlapping(f.as_ptr(), buf, f.len());
        Ok(())
    })
}

/// Branch the run ended in.
///
/// # Safety
/// `traj` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn wd_trajectory_classification(
    traj: *const WdTrajectory,
    out: *mut WdClassification,
) -> WdStatus {
    guard(|| {
        let c = match deref(traj)?.traj.classification {
            Classification::W => WdClassification::W,
            Classification::Bell => WdClassification::Bell,
            Classification::Undistillable => WdClassification::Undistillable,
            Classification::Transient => WdClassification::Transient,
        };
        write(out, c)
    })
}

/// Expected yield `Π p_i / 3^k`.
///
/// # Safety
/// `traj` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn wd_trajectory_yield(traj: *const WdTrajectory, out: *mut f64) -> WdStatus {
    guard(|| write(out, deref(traj)?.traj.yield_estimate))
}

/// Copy of the last state of the run as a new handle.
///
/// # Safety
/// `traj` must be a live handle and `out` a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn wd_trajectory_final_state(traj: *const WdTrajectory, out: *mut *mut WdState) -> WdStatus {
    guard(|| {
        let rho = deref(traj)?.traj.final_state().clone();
        write(out, boxed_state(rho))
    })
}

/// Closed-form output fidelity and success probability for three dephased
/// W states of fidelity `f`.
///
/// # Safety
/// `out_f` and `out_p` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wd_dephasing_map(f: f64, out_f: *mut f64, out_p: *mut f64) -> WdStatus {
    guard(|| {
        let v = lib(dephasing_fidelity_map(f))?;
        if out_f.is_null() || out_p.is_null() {
            set_error("null output pointer");
            return Err(WdStatus::NullPointer);
        }
        out_f.write(v.fidelity);
        out_p.write(v.success_probability);
        Ok(())
    })
}

/// Bisected retrieval threshold of a noise family.
///
/// # Safety
/// `out_threshold` and `out_width` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wd_retrieval_threshold(
    channel: WdChannel,
    resolution: f64,
    placement: WdPlacement,
    out_threshold: *mut f64,
    out_width: *mut f64,
) -> WdStatus {
    guard(|| {
        let t = lib(retrieval_threshold(channel.into(), resolution, &config(placement)))?;
        if out_threshold.is_null() || out_width.is_null() {
            set_error("null output pointer");
            return Err(WdStatus::NullPointer);
        }
        out_threshold.write(t.f_threshold);
        out_width.write(t.bracket_width);
        Ok(())
    })
}
