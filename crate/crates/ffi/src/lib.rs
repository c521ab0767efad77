//! C ABI over the `oddm` library.
//!
//! Handles are opaque and owned by the caller; every `*_new` has a matching
//! `*_free`. Functions return an [`OddmStatus`]; on failure the message is
//! available from [`oddm_last_error`] on the same thread. Output buffers are
//! caller-allocated and their capacity is checked before anything is written.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use num_complex::Complex64;
use oddm::channel::apply;
use oddm::ddmatrix::build;
use oddm::modem::{demod_span, demodulate, frame_span, modulate};
use oddm::pulse::{ambiguity, build_train, design_srrc};
use oddm::{DdChannel, DdChannelMatrix, DdFrame, DdPath, Error, GridParams, PulseTrain, Waveform};

/// Result codes. Zero is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OddmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParams = 2,
    DimensionMismatch = 3,
    BufferTooSmall = 4,
    InsufficientSpan = 5,
    ChannelOutOfRange = 6,
    TooLarge = 7,
    Numerical = 8,
    Panic = 9,
}

/// Complex sample with the layout of C99 `double _Complex`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OddmComplex {
    pub re: f64,
    pub im: f64,
}

/// One delay-Doppler path: gain, delay bin `l >= 0` and Doppler bin `k`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OddmPath {
    pub gain: OddmComplex,
    pub delay: usize,
    pub doppler: i64,
}

/// Grid parameters together with the designed pulse trains.
pub struct OddmModem {
    params: GridParams,
    u: PulseTrain,
    ucp: PulseTrain,
}

/// Channel together with its DD-domain matrix on the modem grid.
pub struct OddmChannel {
    channel: DdChannel,
    matrix: DdChannelMatrix,
    params: GridParams,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> OddmStatus {
    match e {
        Error::InvalidParams(_) | Error::Config { .. } | Error::Parse(_) | Error::Io(_) => {
            OddmStatus::InvalidParams
        }
        Error::DimensionMismatch { .. } => OddmStatus::DimensionMismatch,
        Error::InsufficientSpan { .. } => OddmStatus::InsufficientSpan,
        Error::PathExceedsCp { .. } | Error::OffGrid(_) => OddmStatus::ChannelOutOfRange,
        Error::TooLarge(_) => OddmStatus::TooLarge,
        Error::Singular(_) | Error::Numerical(_) => OddmStatus::Numerical,
    }
}

struct Fail(OddmStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> OddmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            OddmStatus::Ok
        }
        Ok(Err(Fail(s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            OddmStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(OddmStatus::NullPointer, format!("{what} is null"))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn input<'a>(
    p: *const OddmComplex,
    len: usize,
    what: &str,
) -> Result<&'a [Complex64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    // OddmComplex and Complex64 are both two packed f64 with C layout
    Ok(std::slice::from_raw_parts(p.cast::<Complex64>(), len))
}

unsafe fn output<'a>(
    p: *mut OddmComplex,
    cap: usize,
    need: usize,
    what: &str,
) -> Result<&'a mut [Complex64], Fail> {
    if cap < need {
        return Err(Fail(
            OddmStatus::BufferTooSmall,
            format!("{what} holds {cap} samples, {need} required"),
        ));
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p.cast::<Complex64>(), need))
}

fn span_len((start, end): (i64, i64)) -> usize {
    (end - start) as usize
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn oddm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, empty after a success.
/// The pointer stays valid until the next library call on this thread.
#[no_mangle]
pub extern "C" fn oddm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Designs the pulse for an `m × n` grid and writes a new handle to `out`.
///
/// # Safety
///
/// `out` must be valid for one pointer write.
#[allow(clippy::too_many_arguments)]
#[no_mangle]
pub unsafe extern "C" fn oddm_modem_new(
    m: usize,
    n: usize,
    scs_hz: f64,
    q: usize,
    oversample: usize,
    cp_len: usize,
    rolloff: f64,
    out: *mut *mut OddmModem,
) -> OddmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let params = GridParams::new(m, n, scs_hz, q, oversample, cp_len)?;
        let proto = design_srrc(&params, rolloff)?;
        let u = build_train(&proto, &params, false)?;
        let ucp = build_train(&proto, &params, true)?;
        *out = Box::into_raw(Box::new(OddmModem { params, u, ucp }));
        Ok(())
    })
}

/// # Safety
///
/// `modem` must be null or a handle from [`oddm_modem_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn oddm_modem_free(modem: *mut OddmModem) {
    if !modem.is_null() {
        drop(Box::from_raw(modem));
    }
}

/// Number of DD symbols `M·N`; zero for a null handle.
///
/// # Safety
///
/// `modem` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn oddm_modem_grid_len(modem: *const OddmModem) -> usize {
    modem.as_ref().map_or(0, |md| md.params.grid_len())
}

/// Sample span of a modulated frame (with CP): first index and length.
///
/// # Safety
///
/// `modem` must be a live handle; `start` and `len` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn oddm_modem_waveform_span(
    modem: *const OddmModem,
    start: *mut i64,
    len: *mut usize,
) -> OddmStatus {
    guard(|| {
        let md = handle(modem, "modem")?;
        if start.is_null() || len.is_null() {
            return Err(null("start or len"));
        }
        let span = frame_span(&md.params, true);
        *start = span.0;
        *len = span_len(span);
        Ok(())
    })
}

/// Sample span the demodulator reads: first index and length.
///
/// # Safety
///
/// `modem` must be a live handle; `start` and `len` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn oddm_modem_demod_span(
    modem: *const OddmModem,
    start: *mut i64,
    len: *mut usize,
) -> OddmStatus {
    guard(|| {
        let md = handle(modem, "modem")?;
        if start.is_null() || len.is_null() {
            return Err(null("start or len"));
        }
        let span = demod_span(&md.params);
        *start = span.0;
        *len = span_len(span);
        Ok(())
    })
}

/// Discrete ambiguity `A(mT/M, n/(NT))` of the pulse train without CP.
///
/// # Safety
///
/// `modem` must be a live handle; `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn oddm_ambiguity(
    modem: *const OddmModem,
    m: i64,
    n: i64,
    out: *mut OddmComplex,
) -> OddmStatus {
    guard(|| {
        let md = handle(modem, "modem")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let a = ambiguity(&md.u, m, n);
        *out = OddmComplex { re: a.re, im: a.im };
        Ok(())
    })
}

/// Modulates `M·N` symbols (index `m·N + n`) into `out`, which must hold the
/// waveform span length. Sample `i` of `out` is at index `start + i`.
///
/// # Safety
///
/// `modem` must be a live handle; `symbols` readable for `symbols_len`
/// elements and `out` writable for `out_cap` elements.
#[no_mangle]
pub unsafe extern "C" fn oddm_modulate(
    modem: *const OddmModem,
    symbols: *const OddmComplex,
    symbols_len: usize,
    out: *mut OddmComplex,
    out_cap: usize,
) -> OddmStatus {
    guard(|| {
        let md = handle(modem, "modem")?;
        let x = input(symbols, symbols_len, "symbols")?;
        let frame = DdFrame::from_vec(md.params.m, md.params.n, x.to_vec())?;
        let w = modulate(&frame, &md.ucp, &md.params)?;
        output(out, out_cap, w.len(), "out")?.copy_from_slice(&w.samples);
        Ok(())
    })
}

/// Matched-filter demodulation of `len` samples starting at index `start`
/// into `M·N` symbols.
///
/// # Safety
///
/// `modem` must be a live handle; `samples` readable for `len` elements and
/// `out` writable for `out_cap` elements.
#[no_mangle]
pub unsafe extern "C" fn oddm_demodulate(
    modem: *const OddmModem,
    samples: *const OddmComplex,
    len: usize,
    start: i64,
    out: *mut OddmComplex,
    out_cap: usize,
) -> OddmStatus {
    guard(|| {
        let md = handle(modem, "modem")?;
        let y = Waveform {
            samples: input(samples, len, "samples")?.to_vec(),
            start,
            dt: md.params.sample_interval(),
        };
        let frame = demodulate(&y, &md.u, &md.params)?;
        output(out, out_cap, frame.as_slice().len(), "out")?.copy_from_slice(frame.as_slice());
        Ok(())
    })
}

/// Builds a channel from `count` paths and its DD matrix on the modem grid.
///
/// # Safety
///
/// `modem` must be a live handle, `paths` readable for `count` elements and
/// `out` valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn oddm_channel_new(
    modem: *const OddmModem,
    paths: *const OddmPath,
    count: usize,
    out: *mut *mut OddmChannel,
) -> OddmStatus {
    guard(|| {
        let md = handle(modem, "modem")?;
        if out.is_null() {
            return Err(null("out"));
        }
        if count > 0 && paths.is_null() {
            return Err(null("paths"));
        }
        let raw = if count == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(paths, count)
        };
        let list: Vec<DdPath> = raw
            .iter()
            .map(|p| DdPath::new(Complex64::new(p.gain.re, p.gain.im), p.delay, p.doppler))
            .collect();
        let channel = DdChannel::from_paths(&list)?;
        channel.check_cp(&md.params)?;
        let matrix = build(&channel, &md.params)?;
        *out = Box::into_raw(Box::new(OddmChannel {
            channel,
            matrix,
            params: md.params,
        }));
        Ok(())
    })
}

/// # Safety
///
/// `channel` must be null or a handle from [`oddm_channel_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn oddm_channel_free(channel: *mut OddmChannel) {
    if !channel.is_null() {
        drop(Box::from_raw(channel));
    }
}

/// Noiseless waveform channel. The output keeps index `start` and is
/// `cp_len · J` samples longer than the input.
///
/// # Safety
///
/// `channel` must be a live handle; `samples` readable for `len` elements
/// and `out` writable for `out_cap` elements.
#[no_mangle]
pub unsafe extern "C" fn oddm_channel_apply(
    channel: *const OddmChannel,
    samples: *const OddmComplex,
    len: usize,
    start: i64,
    out: *mut OddmComplex,
    out_cap: usize,
) -> OddmStatus {
    guard(|| {
        let ch = handle(channel, "channel")?;
        let x = Waveform {
            samples: input(samples, len, "samples")?.to_vec(),
            start,
            dt: ch.params.sample_interval(),
        };
        let y = apply(&x, &ch.channel, &ch.params, None)?;
        output(out, out_cap, y.len(), "out")?.copy_from_slice(&y.samples);
        Ok(())
    })
}

/// `y = H x` with the DD-domain channel matrix; both vectors have `M·N`
/// entries.
///
/// # Safety
///
/// `channel` must be a live handle; `x` readable for `len` elements and `y`
/// writable for `y_cap` elements.
#[no_mangle]
pub unsafe extern "C" fn oddm_ddmatrix_matvec(
    channel: *const OddmChannel,
    x: *const OddmComplex,
    len: usize,
    y: *mut OddmComplex,
    y_cap: usize,
) -> OddmStatus {
    guard(|| {
        let ch = handle(channel, "channel")?;
        let hx = ch.matrix.matvec(input(x, len, "x")?)?;
        output(y, y_cap, hx.len(), "y")?.copy_from_slice(&hx);
        Ok(())
    })
}
