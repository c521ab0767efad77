use std::ffi::CStr;
use std::ptr;

use oddm_ffi::*;

fn c(re: f64, im: f64) -> OddmComplex {
    OddmComplex { re, im }
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(oddm_last_error()) }
        .to_string_lossy()
        .into_owned()
}

fn modem(m: usize, n: usize) -> *mut OddmModem {
    let mut md = ptr::null_mut();
    let s = unsafe { oddm_modem_new(m, n, 15e3, 4, 4, 3, 0.25, &mut md) };
    assert_eq!(s, OddmStatus::Ok, "{}", last_error());
    md
}

fn span(md: *const OddmModem) -> (i64, usize) {
    let (mut start, mut len) = (0, 0);
    assert_eq!(
        unsafe { oddm_modem_waveform_span(md, &mut start, &mut len) },
        OddmStatus::Ok
    );
    (start, len)
}

fn symbols(n: usize) -> Vec<OddmComplex> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    (0..n)
        .map(|i| {
            c(
                if i % 3 == 0 { s } else { -s },
                if i % 5 < 2 { s } else { -s },
            )
        })
        .collect()
}

#[test]
fn version_is_crate_version() {
    let v = unsafe { CStr::from_ptr(oddm_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn invalid_params_set_status_and_message() {
    let mut md = ptr::null_mut();
    let s = unsafe { oddm_modem_new(0, 8, 15e3, 4, 4, 3, 0.25, &mut md) };
    assert_eq!(s, OddmStatus::InvalidParams);
    assert!(md.is_null());
    assert!(!last_error().is_empty());
}

#[test]
fn null_arguments_are_rejected() {
    let s = unsafe { oddm_modem_new(16, 8, 15e3, 4, 4, 3, 0.25, ptr::null_mut()) };
    assert_eq!(s, OddmStatus::NullPointer);
    let mut out = c(0.0, 0.0);
    assert_eq!(
        unsafe { oddm_ambiguity(ptr::null(), 0, 0, &mut out) },
        OddmStatus::NullPointer
    );
    assert_eq!(unsafe { oddm_modem_grid_len(ptr::null()) }, 0);
    unsafe {
        oddm_modem_free(ptr::null_mut());
        oddm_channel_free(ptr::null_mut());
    }
}

#[test]
fn ambiguity_is_unit_at_origin() {
    let md = modem(16, 8);
    let mut a = c(0.0, 0.0);
    assert_eq!(unsafe { oddm_ambiguity(md, 0, 0, &mut a) }, OddmStatus::Ok);
    assert!((a.re - 1.0).abs() < 1e-9 && a.im.abs() < 1e-9);
    assert_eq!(unsafe { oddm_ambiguity(md, 1, 0, &mut a) }, OddmStatus::Ok);
    assert!(a.re.hypot(a.im) < 1e-6);
    unsafe { oddm_modem_free(md) };
}

#[test]
fn loopback_recovers_symbols() {
    // wrap residue of the ambiguity function scales as 1/M²
    let md = modem(64, 8);
    let mn = unsafe { oddm_modem_grid_len(md) };
    let x = symbols(mn);
    let (start, len) = span(md);
    let mut w = vec![c(0.0, 0.0); len];
    assert_eq!(
        unsafe { oddm_modulate(md, x.as_ptr(), mn, w.as_mut_ptr(), len) },
        OddmStatus::Ok
    );
    let mut y = vec![c(0.0, 0.0); mn];
    assert_eq!(
        unsafe { oddm_demodulate(md, w.as_ptr(), len, start, y.as_mut_ptr(), mn) },
        OddmStatus::Ok,
        "{}",
        last_error()
    );
    let err = x
        .iter()
        .zip(&y)
        .map(|(a, b)| (a.re - b.re).hypot(a.im - b.im))
        .fold(0.0, f64::max);
    assert!(err < 1e-3, "{err:e}");
    unsafe { oddm_modem_free(md) };
}

#[test]
fn short_buffers_are_reported_without_writing() {
    let md = modem(16, 8);
    let mn = unsafe { oddm_modem_grid_len(md) };
    let x = symbols(mn);
    let (_, len) = span(md);
    let mut w = vec![c(7.0, 7.0); len - 1];
    let s = unsafe { oddm_modulate(md, x.as_ptr(), mn, w.as_mut_ptr(), w.len()) };
    assert_eq!(s, OddmStatus::BufferTooSmall);
    assert!(w.iter().all(|v| *v == c(7.0, 7.0)));
    let s = unsafe { oddm_modulate(md, x.as_ptr(), mn - 1, w.as_mut_ptr(), w.len()) };
    assert_eq!(s, OddmStatus::DimensionMismatch);
    unsafe { oddm_modem_free(md) };
}

#[test]
fn truncated_waveform_is_insufficient_span() {
    let md = modem(16, 8);
    let mn = unsafe { oddm_modem_grid_len(md) };
    let w = [c(0.0, 0.0); 10];
    let mut y = vec![c(0.0, 0.0); mn];
    let s = unsafe { oddm_demodulate(md, w.as_ptr(), w.len(), 0, y.as_mut_ptr(), mn) };
    assert_eq!(s, OddmStatus::InsufficientSpan);
    unsafe { oddm_modem_free(md) };
}

#[test]
fn channel_delay_beyond_cp_is_rejected() {
    let md = modem(16, 8);
    let path = OddmPath {
        gain: c(1.0, 0.0),
        delay: 9,
        doppler: 0,
    };
    let mut ch = ptr::null_mut();
    let s = unsafe { oddm_channel_new(md, &path, 1, &mut ch) };
    assert_eq!(s, OddmStatus::ChannelOutOfRange);
    assert!(ch.is_null());
    unsafe { oddm_modem_free(md) };
}

#[test]
fn waveform_channel_agrees_with_matrix_on_interior_symbol() {
    let (m, n) = (64, 8);
    let md = modem(m, n);
    let mn = m * n;
    let paths = [
        OddmPath {
            gain: c(0.8, 0.0),
            delay: 0,
            doppler: 0,
        },
        OddmPath {
            gain: c(0.0, 0.6),
            delay: 2,
            doppler: 1,
        },
    ];
    let mut ch = ptr::null_mut();
    assert_eq!(
        unsafe { oddm_channel_new(md, paths.as_ptr(), paths.len(), &mut ch) },
        OddmStatus::Ok
    );
    let mut x = vec![c(0.0, 0.0); mn];
    x[20 * n + 3] = c(0.6, -0.8);
    let (start, len) = span(md);
    let mut w = vec![c(0.0, 0.0); len];
    let mut r = vec![c(0.0, 0.0); len + 3 * 4];
    let mut y = vec![c(0.0, 0.0); mn];
    let mut hx = vec![c(0.0, 0.0); mn];
    unsafe {
        assert_eq!(
            oddm_modulate(md, x.as_ptr(), mn, w.as_mut_ptr(), len),
            OddmStatus::Ok
        );
        assert_eq!(
            oddm_channel_apply(ch, w.as_ptr(), len, start, r.as_mut_ptr(), r.len()),
            OddmStatus::Ok
        );
        assert_eq!(
            oddm_demodulate(md, r.as_ptr(), r.len(), start, y.as_mut_ptr(), mn),
            OddmStatus::Ok
        );
        assert_eq!(
            oddm_ddmatrix_matvec(ch, x.as_ptr(), mn, hx.as_mut_ptr(), mn),
            OddmStatus::Ok
        );
        oddm_channel_free(ch);
        oddm_modem_free(md);
    }
    let err = y
        .iter()
        .zip(&hx)
        .map(|(a, b)| (a.re - b.re).hypot(a.im - b.im))
        .fold(0.0, f64::max);
    assert!(err < 1e-9, "{err:e}");
}

#[test]
fn header_declares_the_api() {
    let h =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/oddm.h")).unwrap();
    for f in [
        "oddm_version",
        "oddm_last_error",
        "oddm_modem_new",
        "oddm_modem_free",
        "oddm_modem_grid_len",
        "oddm_modem_waveform_span",
        "oddm_modem_demod_span",
        "oddm_ambiguity",
        "oddm_modulate",
        "oddm_demodulate",
        "oddm_channel_new",
        "oddm_channel_free",
        "oddm_channel_apply",
        "oddm_ddmatrix_matvec",
        "typedef struct OddmModem OddmModem",
        "ODDM_STATUS_OK = 0",
    ] {
        assert!(h.contains(f), "{f} missing from header");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = which_cc() else { return };
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("probe.c");
    std::fs::write(
        &src,
        "#include \"oddm.h\"\nint main(void) { OddmModem *m = 0; \
         OddmStatus s = oddm_modem_new(16, 8, 15e3, 4, 4, 3, 0.25, &m); \
         oddm_modem_free(m); return (int)s; }\n",
    )
    .unwrap();
    let out = std::process::Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(concat!(env!("CARGO_MANIFEST_DIR"), "/include"))
        .arg(&src)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn which_cc() -> Result<&'static str, ()> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| {
            std::process::Command::new(c)
                .arg("--version")
                .output()
                .is_ok()
        })
        .ok_or(())
}
