use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use permchan::BoundPoint64;
use serde::Serialize;

use crate::args::Format;

pub const CURVE_HEADER: [&str; 7] = ["n", "method", "m", "log2_m", "rate", "eps_bound", "capacity"];

/// `%.17g`: 17 significant digits, trailing zeros dropped, exponent form
/// outside `[1e-4, 1e17)`. Independent of locale.
pub fn g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..17).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (16 - exp) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[derive(Serialize)]
pub struct CurveRow {
    pub n: u64,
    pub method: String,
    pub m: usize,
    pub log2_m: f64,
    pub rate: f64,
    pub eps_bound: Option<f64>,
    pub capacity: f64,
}

impl CurveRow {
    pub fn new(p: &BoundPoint64, capacity: f64) -> Self {
        Self {
            n: p.n,
            method: p.method.as_str().to_string(),
            m: p.m_achieved,
            log2_m: p.log2_m,
            rate: p.rate,
            eps_bound: p.eps_bound,
            capacity,
        }
    }

    fn fields(&self) -> [String; 7] {
        [
            self.n.to_string(),
            self.method.clone(),
            self.m.to_string(),
            g17(self.log2_m),
            g17(self.rate),
            self.eps_bound.map(g17).unwrap_or_default(),
            g17(self.capacity),
        ]
    }
}

/// Standard output or a file, flushed on [`Sink::finish`].
pub struct Sink(Box<dyn Write>);

impl Sink {
    pub fn open(path: Option<&Path>) -> io::Result<Self> {
        Ok(Sink(match path {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        }))
    }

    pub fn finish(mut self) -> io::Result<()> {
        self.0.flush()
    }
}

impl Write for Sink {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        self.0.write(buf)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.0.flush()
    }
}

/// Writes a header and string records as LF-terminated CSV.
pub fn write_csv<W: Write>(out: W, header: &[&str], records: impl IntoIterator<Item = Vec<String>>) -> io::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(header)?;
    for r in records {
        w.write_record(&r)?;
    }
    w.flush()
}

pub fn write_rows<W: Write>(mut out: W, rows: &[CurveRow], format: Format) -> io::Result<()> {
    match format {
        Format::Csv => write_csv(out, &CURVE_HEADER, rows.iter().map(|r| r.fields().to_vec())),
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, rows)?;
            out.write_all(b"\n")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(g17(0.1), "0.10000000000000001");
        assert_eq!(g17(0.5), "0.5");
        assert_eq!(g17(2.0), "2");
        assert_eq!(g17(-3.25), "-3.25");
        assert_eq!(g17(1e-3), "0.001");
        assert_eq!(g17(3.125e-6), "3.1250000000000001e-06");
        assert_eq!(g17(1e20), "1e+20");
        assert_eq!(g17(0.0), "0");
        assert_eq!(g17(f64::INFINITY), "inf");
    }

    #[test]
    fn round_trips() {
        for x in [0.1, 1.0 / 3.0, 2f64.sqrt(), 1e-300, 123456.789, 6.02e23, 9.999999999999999e16] {
            assert_eq!(g17(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn csv_shape() {
        let mut buf = Vec::new();
        let row = CurveRow {
            n: 100,
            method: "APPROX_BSC".into(),
            m: 2,
            log2_m: 1.0,
            rate: 0.5,
            eps_bound: None,
            capacity: 0.5,
        };
        write_rows(&mut buf, &[row], Format::Csv).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "n,method,m,log2_m,rate,eps_bound,capacity\n100,APPROX_BSC,2,1,0.5,,0.5\n"
        );
    }
}
