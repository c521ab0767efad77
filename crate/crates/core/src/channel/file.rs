//! Channel files: CSV rows `l,k,re,im` with an optional header line and `#`
//! comments.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::channel::{DdChannel, DdPath};
use crate::error::{Error, Result};

pub fn parse_channel_csv(text: &str) -> Result<DdChannel> {
    let mut paths = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if paths.is_empty() && fields.first().is_some_and(|f| f.eq_ignore_ascii_case("l")) {
            continue;
        }
        let err = |msg: String| Error::Config { line: idx + 1, msg };
        if fields.len() != 4 {
            return Err(err(format!(
                "expected 4 fields l,k,re,im, got {}",
                fields.len()
            )));
        }
        let l: usize = fields[0]
            .parse()
            .map_err(|_| err(format!("bad delay index {:?}", fields[0])))?;
        let k: i64 = fields[1]
            .parse()
            .map_err(|_| err(format!("bad Doppler index {:?}", fields[1])))?;
        let re: f64 = fields[2]
            .parse()
            .map_err(|_| err(format!("bad real part {:?}", fields[2])))?;
        let im: f64 = fields[3]
            .parse()
            .map_err(|_| err(format!("bad imaginary part {:?}", fields[3])))?;
        paths.push(DdPath::new(Complex64::new(re, im), l, k));
    }
    if paths.is_empty() {
        return Err(Error::Parse("channel file has no paths".into()));
    }
    DdChannel::from_paths(&paths)
}

pub fn write_channel_csv(ch: &DdChannel) -> String {
    let mut out = String::from("l,k,re,im\n");
    for p in ch.paths() {
        let _ = writeln!(out, "{},{},{},{}", p.l, p.k, p.h.re, p.h.im);
    }
    out
}
