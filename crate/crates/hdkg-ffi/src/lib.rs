//! C ABI over the root census, symbol and propagator evaluation, and mode
//! dynamics.
//!
//! Conventions: every fallible call returns an [`HdkgStatus`] and writes its
//! result through out-pointers; handles are opaque and must be released with
//! the matching `_free` function; null pointers are reported as a status,
//! never dereferenced; `_free` accepts null. The message for the most recent
//! failure on the calling thread is available through
//! [`hdkg_last_error_message`]. Panics are caught at the boundary and
//! reported as [`HdkgStatus::Internal`].

use hdkg::dynamics::{build_mode_ode, classify_spectrum, integrate, ModeODE, Trajectory};
use hdkg::model::{mass_scale, ModelParams};
use hdkg::poly::build_poly;
use hdkg::propagator::{Contour, PropagatorSpec};
use hdkg::roots::{real_roots, RootReport};
use hdkg::symbol::{OperatorSymbol, SymbolKind};
use std::cell::RefCell;
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Result of every fallible call.
#[repr(i32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HdkgStatus {
    /// The call succeeded and all out-parameters are filled.
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A parameter failed validation (range, parity, sign, size).
    InvalidArgument = 2,
    /// The computation hit a mathematical obstruction (pole on the
    /// evaluation path, shell collision, amplification guard).
    Obstruction = 3,
    /// An internal cross-check failed; a bug in the library, not bad input.
    Internal = 4,
    /// A caller-supplied buffer is too small for the result.
    InsufficientBuffer = 5,
}

/// Complex number in Cartesian form.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HdkgComplex {
    pub re: f64,
    pub im: f64,
}

/// Which operator symbol a call evaluates.
#[repr(i32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HdkgSymbolKind {
    /// Truncated polynomial symbol of the given derivative order.
    Finite = 0,
    /// Formal full exponential symbol.
    Infinite = 1,
}

/// How propagator evaluation passes the real mass-shell pole.
#[repr(i32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HdkgContour {
    /// Bare real evaluation; points near the pole are refused.
    Bare = 0,
    /// Principal-value prescription.
    PrincipalValue = 1,
    /// Shift into the complex plane by +i eps.
    FeynmanEps = 2,
}

/// Opaque root census handle.
pub struct HdkgRootReport {
    inner: RootReport,
}

/// Opaque single-mode dynamics handle.
pub struct HdkgModeOde {
    inner: ModeODE,
}

/// Opaque integrated-trajectory handle.
pub struct HdkgTrajectory {
    inner: Trajectory,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = msg);
}

fn fail(err: hdkg::Error) -> HdkgStatus {
    let status = match err {
        hdkg::Error::Range(_)
        | hdkg::Error::Validation(_)
        | hdkg::Error::Parity(_)
        | hdkg::Error::Commensurability(_)
        | hdkg::Error::Io(_) => HdkgStatus::InvalidArgument,
        hdkg::Error::PoleProximity(_)
        | hdkg::Error::ShellCollision(_)
        | hdkg::Error::Amplification(_) => HdkgStatus::Obstruction,
        hdkg::Error::Internal(_) => HdkgStatus::Internal,
    };
    set_error(err.to_string());
    status
}

fn null_arg(name: &str) -> HdkgStatus {
    set_error(format!("null pointer passed for {name}"));
    HdkgStatus::NullArgument
}

/// Runs a closure with a panic shield; a caught panic becomes Internal.
fn shielded(f: impl FnOnce() -> HdkgStatus) -> HdkgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("panic caught at the C boundary");
            HdkgStatus::Internal
        }
    }
}

unsafe fn write_out<T>(out: *mut T, name: &str, value: T) -> HdkgStatus {
    if out.is_null() {
        return null_arg(name);
    }
    out.write(value);
    HdkgStatus::Ok
}

unsafe fn fill_buffer<T: Copy>(src: &[T], buf: *mut T, cap: usize) -> HdkgStatus {
    if buf.is_null() {
        return null_arg("buf");
    }
    if cap < src.len() {
        set_error(format!(
            "buffer holds {cap} entries, result needs {}",
            src.len()
        ));
        return HdkgStatus::InsufficientBuffer;
    }
    std::ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    HdkgStatus::Ok
}

fn to_complex(z: hdkg::num_complex::Complex64) -> HdkgComplex {
    HdkgComplex { re: z.re, im: z.im }
}

fn params_for(order: u32, a: f64) -> hdkg::Result<ModelParams> {
    if order < 1 {
        return Err(hdkg::Error::Validation(format!(
            "derivative order must be at least 1, got {order}"
        )));
    }
    ModelParams::new(order, a)
}

fn symbol_for(order: u32, a: f64, kind: HdkgSymbolKind) -> hdkg::Result<OperatorSymbol> {
    let params = params_for(order, a)?;
    let kind = match kind {
        HdkgSymbolKind::Finite => {
            build_poly(order)?;
            SymbolKind::FiniteOrder
        }
        HdkgSymbolKind::Infinite => SymbolKind::InfiniteOrder,
    };
    Ok(OperatorSymbol::new(params, kind))
}

/// Static name for a status code, for logging; never null.
#[no_mangle]
pub extern "C" fn hdkg_status_name(status: HdkgStatus) -> *const c_char {
    let name: &[u8] = match status {
        HdkgStatus::Ok => b"ok\0",
        HdkgStatus::NullArgument => b"null argument\0",
        HdkgStatus::InvalidArgument => b"invalid argument\0",
        HdkgStatus::Obstruction => b"mathematical obstruction\0",
        HdkgStatus::Internal => b"internal error\0",
        HdkgStatus::InsufficientBuffer => b"insufficient buffer\0",
    };
    name.as_ptr() as *const c_char
}

/// Copies the calling thread's most recent failure message into `buf` as a
/// NUL-terminated string, truncating if needed, and returns the size the
/// full message requires including the terminator. `buf` may be null to
/// query the size alone.
///
/// # Safety
/// `buf` must point to `cap` writable bytes, or be null.
#[no_mangle]
pub unsafe extern "C" fn hdkg_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let msg = slot.borrow();
        if !buf.is_null() && cap > 0 {
            let copy = msg.len().min(cap - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr(), buf as *mut u8, copy);
            *buf.add(copy) = 0;
        }
        msg.len() + 1
    })
}

/// Runs the root census for the given derivative order and hands back an
/// owned report. Release with `hdkg_root_report_free`.
///
/// # Safety
/// `out` must be a valid pointer to a report-handle slot.
#[no_mangle]
pub unsafe extern "C" fn hdkg_root_report_compute(
    order: u32,
    out: *mut *mut HdkgRootReport,
) -> HdkgStatus {
    shielded(|| {
        if out.is_null() {
            return null_arg("out");
        }
        if order < 1 {
            set_error(format!("derivative order must be at least 1, got {order}"));
            return HdkgStatus::InvalidArgument;
        }
        match build_poly(order).and_then(|p| real_roots(&p)) {
            Ok(inner) => {
                out.write(Box::into_raw(Box::new(HdkgRootReport { inner })));
                HdkgStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Releases a report handle; accepts null.
///
/// # Safety
/// `report` must come from `hdkg_root_report_compute` and not have been
/// freed already.
#[no_mangle]
pub unsafe extern "C" fn hdkg_root_report_free(report: *mut HdkgRootReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Derivative order the report was computed for; 0 for a null handle.
///
/// # Safety
/// `report` must be a live report handle or null.
#[no_mangle]
pub unsafe extern "C" fn hdkg_root_report_order(report: *const HdkgRootReport) -> u32 {
    report.as_ref().map_or(0, |r| r.inner.order)
}

/// Exact count of real dispersion roots; 0 for a null handle.
///
/// # Safety
/// `report` must be a live report handle or null.
#[no_mangle]
pub unsafe extern "C" fn hdkg_root_report_sturm_count(report: *const HdkgRootReport) -> usize {
    report.as_ref().map_or(0, |r| r.inner.sturm_count)
}

/// Number of entries `hdkg_root_report_real_roots` will write; 0 for a
/// null handle.
///
/// # Safety
/// `report` must be a live report handle or null.
#[no_mangle]
pub unsafe extern "C" fn hdkg_root_report_real_root_count(report: *const HdkgRootReport) -> usize {
    report.as_ref().map_or(0, |r| r.inner.real_roots.len())
}

/// Copies the certified real roots into `buf`.
///
/// # Safety
/// `report` must be a live report handle or null; `buf` must point to `cap`
/// writable doubles.
#[no_mangle]
pub unsafe extern "C" fn hdkg_root_report_real_roots(
    report: *const HdkgRootReport,
    buf: *mut f64,
    cap: usize,
) -> HdkgStatus {
    let Some(r) = report.as_ref() else {
        return null_arg("report");
    };
    fill_buffer(&r.inner.real_roots, buf, cap)
}

/// Copies the full complex root set into `buf`; the count equals the
/// report's order.
///
/// # Safety
/// `report` must be a live report handle or null; `buf` must point to `cap`
/// writable complex slots.
#[no_mangle]
pub unsafe extern "C" fn hdkg_root_report_complex_roots(
    report: *const HdkgRootReport,
    buf: *mut HdkgComplex,
    cap: usize,
) -> HdkgStatus {
    let Some(r) = report.as_ref() else {
        return null_arg("report");
    };
    let values: Vec<HdkgComplex> = r
        .inner
        .complex_roots
        .iter()
        .copied()
        .map(to_complex)
        .collect();
    fill_buffer(&values, buf, cap)
}

/// Writes the positive real root that fixes the mass shell. Fails with
/// InvalidArgument at even orders, which have no real root.
///
/// # Safety
/// `report` must be a live report handle or null; `out` must be a valid
/// double pointer.
#[no_mangle]
pub unsafe extern "C" fn hdkg_root_report_mass_shell(
    report: *const HdkgRootReport,
    out: *mut f64,
) -> HdkgStatus {
    let Some(r) = report.as_ref() else {
        return null_arg("report");
    };
    match r.inner.q_n {
        Some(q) => write_out(out, "out", q),
        None => {
            set_error(format!(
                "order {} has no real dispersion root and no mass shell",
                r.inner.order
            ));
            HdkgStatus::InvalidArgument
        }
    }
}

/// Writes the physical mass sqrt(q_N) / a for an odd order.
///
/// # Safety
/// `out` must be a valid double pointer.
#[no_mangle]
pub unsafe extern "C" fn hdkg_mass_scale(order: u32, a: f64, out: *mut f64) -> HdkgStatus {
    shielded(|| {
        if out.is_null() {
            return null_arg("out");
        }
        match params_for(order, a).and_then(|p| mass_scale(&p)) {
            Ok(m) => write_out(out, "out", m),
            Err(e) => fail(e),
        }
    })
}

/// Writes the operator symbol value at the given momentum-space point.
///
/// # Safety
/// `out` must be a valid double pointer.
#[no_mangle]
pub unsafe extern "C" fn hdkg_symbol_value(
    order: u32,
    a: f64,
    kind: HdkgSymbolKind,
    p_squared: f64,
    out: *mut f64,
) -> HdkgStatus {
    shielded(|| {
        if out.is_null() {
            return null_arg("out");
        }
        match symbol_for(order, a, kind) {
            Ok(sym) => write_out(out, "out", sym.value(p_squared)),
            Err(e) => fail(e),
        }
    })
}

/// Writes the momentum-space propagator value at `p_squared`. `eps` is
/// consumed only by the FeynmanEps contour, which requires it positive.
/// Near-pole bare evaluation fails with Obstruction.
///
/// # Safety
/// `out` must be a valid complex pointer.
#[no_mangle]
pub unsafe extern "C" fn hdkg_propagator_value(
    order: u32,
    a: f64,
    kind: HdkgSymbolKind,
    contour: HdkgContour,
    eps: f64,
    p_squared: f64,
    out: *mut HdkgComplex,
) -> HdkgStatus {
    shielded(|| {
        if out.is_null() {
            return null_arg("out");
        }
        let contour = match contour {
            HdkgContour::Bare => Contour::None,
            HdkgContour::PrincipalValue => Contour::PrincipalValue,
            HdkgContour::FeynmanEps => Contour::FeynmanEps(eps),
        };
        let kind = match kind {
            HdkgSymbolKind::Finite => SymbolKind::FiniteOrder,
            HdkgSymbolKind::Infinite => SymbolKind::InfiniteOrder,
        };
        let result = params_for(order, a)
            .and_then(|p| PropagatorSpec::new(p, kind, contour))
            .and_then(|spec| spec.value(p_squared));
        match result {
            Ok(v) => write_out(out, "out", to_complex(v)),
            Err(e) => fail(e),
        }
    })
}

/// Writes the real mass-shell pole position q_N / a^2 of the truncated
/// symbol. Fails with InvalidArgument at even orders.
///
/// # Safety
/// `out` must be a valid double pointer.
#[no_mangle]
pub unsafe extern "C" fn hdkg_pole_location(order: u32, a: f64, out: *mut f64) -> HdkgStatus {
    shielded(|| {
        if out.is_null() {
            return null_arg("out");
        }
        let spec = match params_for(order, a)
            .and_then(|p| PropagatorSpec::new(p, SymbolKind::FiniteOrder, Contour::None))
        {
            Ok(s) => s,
            Err(e) => return fail(e),
        };
        match spec.pole_location() {
            Some(q) => write_out(out, "out", q),
            None => {
                set_error(format!("order {order} has no real mass-shell pole"));
                HdkgStatus::InvalidArgument
            }
        }
    })
}

/// Builds the single-mode dynamics handle at spatial wavenumber `k`.
/// Release with `hdkg_mode_ode_free`.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn hdkg_mode_ode_new(
    order: u32,
    a: f64,
    k: f64,
    out: *mut *mut HdkgModeOde,
) -> HdkgStatus {
    shielded(|| {
        if out.is_null() {
            return null_arg("out");
        }
        match params_for(order, a).and_then(|p| build_mode_ode(&p, k)) {
            Ok(inner) => {
                out.write(Box::into_raw(Box::new(HdkgModeOde { inner })));
                HdkgStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Releases a mode handle; accepts null.
///
/// # Safety
/// `ode` must come from `hdkg_mode_ode_new` and not have been freed
/// already.
#[no_mangle]
pub unsafe extern "C" fn hdkg_mode_ode_free(ode: *mut HdkgModeOde) {
    if !ode.is_null() {
        drop(Box::from_raw(ode));
    }
}

/// First-order system dimension (twice the derivative order); 0 for a null
/// handle.
///
/// # Safety
/// `ode` must be a live mode handle or null.
#[no_mangle]
pub unsafe extern "C" fn hdkg_mode_ode_dim(ode: *const HdkgModeOde) -> usize {
    ode.as_ref().map_or(0, |o| o.inner.dim())
}

/// Copies the characteristic roots into `buf`; the count equals the system
/// dimension.
///
/// # Safety
/// `ode` must be a live mode handle or null; `buf` must point to `cap`
/// writable complex slots.
#[no_mangle]
pub unsafe extern "C" fn hdkg_mode_ode_char_roots(
    ode: *const HdkgModeOde,
    buf: *mut HdkgComplex,
    cap: usize,
) -> HdkgStatus {
    let Some(o) = ode.as_ref() else {
        return null_arg("ode");
    };
    let values: Vec<HdkgComplex> = o
        .inner
        .char_roots()
        .iter()
        .copied()
        .map(to_complex)
        .collect();
    fill_buffer(&values, buf, cap)
}

/// Writes the root census of the characteristic spectrum.
///
/// # Safety
/// `ode` must be a live mode handle or null; the three count pointers must
/// be valid.
#[no_mangle]
pub unsafe extern "C" fn hdkg_mode_ode_classify(
    ode: *const HdkgModeOde,
    oscillatory_pairs: *mut usize,
    growing: *mut usize,
    decaying: *mut usize,
) -> HdkgStatus {
    let Some(o) = ode.as_ref() else {
        return null_arg("ode");
    };
    if oscillatory_pairs.is_null() || growing.is_null() || decaying.is_null() {
        return null_arg("classification counts");
    }
    let class = classify_spectrum(&o.inner);
    oscillatory_pairs.write(class.oscillatory_pairs);
    growing.write(class.growing);
    decaying.write(class.decaying);
    HdkgStatus::Ok
}

/// Integrates the mode from the given initial state with fixed-step RK4.
/// `initial_len` must equal the system dimension. Release the trajectory
/// with `hdkg_trajectory_free`.
///
/// # Safety
/// `ode` must be a live mode handle or null; `initial` must point to
/// `initial_len` doubles; `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn hdkg_mode_ode_integrate(
    ode: *const HdkgModeOde,
    initial: *const f64,
    initial_len: usize,
    t_end: f64,
    dt: f64,
    out: *mut *mut HdkgTrajectory,
) -> HdkgStatus {
    shielded(|| {
        let Some(o) = ode.as_ref() else {
            return null_arg("ode");
        };
        if initial.is_null() {
            return null_arg("initial");
        }
        if out.is_null() {
            return null_arg("out");
        }
        let state = std::slice::from_raw_parts(initial, initial_len);
        match integrate(&o.inner, state, t_end, dt) {
            Ok(inner) => {
                out.write(Box::into_raw(Box::new(HdkgTrajectory { inner })));
                HdkgStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Releases a trajectory handle; accepts null.
///
/// # Safety
/// `traj` must come from `hdkg_mode_ode_integrate` and not have been
/// freed already.
#[no_mangle]
pub unsafe extern "C" fn hdkg_trajectory_free(traj: *mut HdkgTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Number of stored time steps including the initial state; 0 for a null
/// handle.
///
/// # Safety
/// `traj` must be a live trajectory handle or null.
#[no_mangle]
pub unsafe extern "C" fn hdkg_trajectory_step_count(traj: *const HdkgTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.inner.times.len())
}

/// State vector length per step; 0 for a null handle.
///
/// # Safety
/// `traj` must be a live trajectory handle or null.
#[no_mangle]
pub unsafe extern "C" fn hdkg_trajectory_dim(traj: *const HdkgTrajectory) -> usize {
    traj.as_ref()
        .map_or(0, |t| t.inner.states.first().map_or(0, Vec::len))
}

/// 1 when the integration stopped early at the blow-up guard, else 0.
///
/// # Safety
/// `traj` must be a live trajectory handle or null.
#[no_mangle]
pub unsafe extern "C" fn hdkg_trajectory_blew_up(traj: *const HdkgTrajectory) -> i32 {
    traj.as_ref().map_or(0, |t| i32::from(t.inner.blow_up))
}

/// Copies the step times into `buf`.
///
/// # Safety
/// `traj` must be a live trajectory handle or null; `buf` must point to
/// `cap` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn hdkg_trajectory_times(
    traj: *const HdkgTrajectory,
    buf: *mut f64,
    cap: usize,
) -> HdkgStatus {
    let Some(t) = traj.as_ref() else {
        return null_arg("traj");
    };
    fill_buffer(&t.inner.times, buf, cap)
}

/// Copies the state vector at `step` into `buf`.
///
/// # Safety
/// `traj` must be a live trajectory handle or null; `buf` must point to
/// `cap` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn hdkg_trajectory_state(
    traj: *const HdkgTrajectory,
    step: usize,
    buf: *mut f64,
    cap: usize,
) -> HdkgStatus {
    let Some(t) = traj.as_ref() else {
        return null_arg("traj");
    };
    let Some(state) = t.inner.states.get(step) else {
        set_error(format!(
            "step {step} out of range for a trajectory of {} steps",
            t.inner.states.len()
        ));
        return HdkgStatus::InvalidArgument;
    };
    fill_buffer(state, buf, cap)
}
