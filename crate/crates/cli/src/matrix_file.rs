//! Matrix files in CSV and JSON.
//!
//! Every entry is kept twice: as an exact Gaussian rational and as the
//! nearest complex double. Decimal entries convert to their exact decimal
//! value, so `0.1` is `1/10` on the exact path.

use std::fmt::Write as _;
use std::path::Path;

use geninv::exact::{RationalMatrix, RationalScalar};
use geninv::ComplexMatrix;
use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Deserialize;
use serde_json::value::RawValue;

/// Largest decimal exponent accepted in an entry.
const MAX_EXPONENT: i64 = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    /// `.json` (any case) is JSON, anything else CSV.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Csv,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            column,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub exact: RationalScalar,
    pub float: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixFile {
    pub format: Format,
    pub rows: usize,
    pub cols: usize,
    /// Row-major.
    pub entries: Vec<Entry>,
    /// Some component was written as `p/q`.
    pub has_fractions: bool,
}

impl MatrixFile {
    pub fn parse(text: &str, format: Format) -> Result<MatrixFile, ParseError> {
        match format {
            Format::Csv => parse_csv(text),
            Format::Json => parse_json(text),
        }
    }

    pub fn float(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.rows, self.cols, |i, j| self.entries[i * self.cols + j].float)
    }

    pub fn exact(&self) -> RationalMatrix {
        RationalMatrix::from_fn(self.rows, self.cols, |i, j| {
            self.entries[i * self.cols + j].exact.clone()
        })
    }
}

/// One real component: exact value, nearest double, written as a fraction.
type Real = (BigRational, f64, bool);

fn parse_real(tok: &str) -> Result<Real, String> {
    if let Some((p, q)) = tok.split_once('/') {
        let num = parse_integer(p, true).ok_or_else(|| format!("bad numerator `{p}`"))?;
        let den = parse_integer(q, false).ok_or_else(|| format!("bad denominator `{q}`"))?;
        if den.is_zero() {
            return Err(format!("zero denominator in `{tok}`"));
        }
        let r = BigRational::new(num, den);
        let f = r.to_f64().filter(|f| f.is_finite()).ok_or_else(|| format!("`{tok}` overflows"))?;
        return Ok((r, f, true));
    }
    let exact = parse_decimal(tok).ok_or_else(|| format!("`{tok}` is not a number"))?;
    let f: f64 = tok.parse().map_err(|_| format!("`{tok}` is not a number"))?;
    if !f.is_finite() {
        return Err(format!("`{tok}` overflows"));
    }
    Ok((exact, f, false))
}

fn parse_integer(s: &str, signed: bool) -> Option<BigInt> {
    let digits = match s.as_bytes().first()? {
        b'+' | b'-' if signed => &s[1..],
        _ => s,
    };
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

/// `[+-]? (d+ (. d*)? | . d+) ([eE] [+-]? d+)?` as an exact rational.
fn parse_decimal(s: &str) -> Option<BigRational> {
    let (negative, rest) = match s.as_bytes().first()? {
        b'-' => (true, &s[1..]),
        b'+' => (false, &s[1..]),
        _ => (false, s),
    };
    let (mantissa, exponent) = match rest.find(['e', 'E']) {
        Some(pos) => {
            let e = &rest[pos + 1..];
            let digits = e.strip_prefix(['+', '-']).unwrap_or(e);
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) || digits.len() > 6 {
                return None;
            }
            (&rest[..pos], e.parse::<i64>().ok()?)
        }
        None => (rest, 0),
    };
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    if exponent.abs() > MAX_EXPONENT {
        return None;
    }
    let digits: BigInt = format!("0{int}{frac}").parse().ok()?;
    let shift = exponent - frac.len() as i64;
    let ten = BigInt::from(10);
    let power = num_traits::pow(ten, shift.unsigned_abs() as usize);
    let value = if shift >= 0 {
        BigRational::from_integer(digits * power)
    } else {
        BigRational::new(digits, power)
    };
    Some(if negative { -value } else { value })
}

/// `a`, `bi`, `a+bi` or `a-bi`; a bare `i` means `1i`. Whitespace is ignored.
pub fn parse_entry(tok: &str) -> Result<(Entry, bool), String> {
    let t: String = tok.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err("empty entry".into());
    }
    let zero = || (BigRational::zero(), 0.0, false);
    let ((re, fre, a), (im, fim, b)) = match t.strip_suffix('i') {
        Some(body) => {
            let bytes = body.as_bytes();
            let split = (1..bytes.len())
                .rev()
                .find(|&p| matches!(bytes[p], b'+' | b'-') && !matches!(bytes[p - 1], b'e' | b'E'));
            let (re_txt, im_txt) = match split {
                Some(p) => (&body[..p], &body[p..]),
                None => ("", body),
            };
            let im_txt = match im_txt {
                "" | "+" => "1",
                "-" => "-1",
                s => s,
            };
            let re = if re_txt.is_empty() { zero() } else { parse_real(re_txt)? };
            (re, parse_real(im_txt)?)
        }
        None => (parse_real(&t)?, zero()),
    };
    let entry = Entry {
        exact: Complex::new(re, im),
        float: Complex64::new(fre, fim),
    };
    Ok((entry, a || b))
}

fn parse_csv(text: &str) -> Result<MatrixFile, ParseError> {
    let mut entries = Vec::new();
    let mut rows = 0;
    let mut cols = None;
    let mut has_fractions = false;
    for (ln, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut start = 0;
        let mut count = 0;
        for field in line.split(',') {
            let lead = field.len() - field.trim_start().len();
            let column = line[..start + lead].chars().count() + 1;
            let (entry, frac) =
                parse_entry(field).map_err(|m| ParseError::new(ln + 1, column, m))?;
            entries.push(entry);
            has_fractions |= frac;
            count += 1;
            start += field.len() + 1;
        }
        match cols {
            None => cols = Some(count),
            Some(c) if c != count => {
                return Err(ParseError::new(
                    ln + 1,
                    1,
                    format!("row has {count} entries, expected {c}"),
                ))
            }
            _ => {}
        }
        rows += 1;
    }
    Ok(MatrixFile {
        format: Format::Csv,
        rows,
        cols: cols.unwrap_or(0),
        entries,
        has_fractions,
    })
}

#[derive(Deserialize)]
struct JsonMatrix<'a> {
    rows: usize,
    cols: usize,
    #[serde(borrow)]
    data: Vec<Vec<&'a RawValue>>,
}

/// 1-based line and column of byte `offset` in `text`.
fn position(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let line_start = before.rfind('\n').map_or(0, |p| p + 1);
    (line, before[line_start..].chars().count() + 1)
}

/// Position of a value borrowed from `text`.
fn raw_position(text: &str, raw: &RawValue) -> (usize, usize) {
    let offset = raw.get().as_ptr() as usize - text.as_ptr() as usize;
    position(text, offset)
}

fn json_real(raw: &RawValue) -> Result<Real, String> {
    let s = raw.get();
    if s.starts_with('"') {
        let inner: String = serde_json::from_str(s).map_err(|e| e.to_string())?;
        parse_real(inner.trim())
    } else if s.starts_with(|c: char| c == '-' || c.is_ascii_digit()) {
        parse_real(s)
    } else {
        Err(format!("expected a number or a fraction string, got {s}"))
    }
}

fn json_entry(raw: &RawValue) -> Result<(Entry, bool), String> {
    let s = raw.get();
    if s.starts_with('"') {
        let inner: String = serde_json::from_str(s).map_err(|e| e.to_string())?;
        return parse_entry(&inner);
    }
    if s.starts_with('[') {
        let parts: Vec<&RawValue> = serde_json::from_str(s).map_err(|e| e.to_string())?;
        let [re, im] = parts.as_slice() else {
            return Err(format!("a complex entry needs [re, im], got {} values", parts.len()));
        };
        let (re, fre, a) = json_real(re)?;
        let (im, fim, b) = json_real(im)?;
        let entry = Entry {
            exact: Complex::new(re, im),
            float: Complex64::new(fre, fim),
        };
        return Ok((entry, a || b));
    }
    let (re, f, frac) = json_real(raw)?;
    let entry = Entry {
        exact: Complex::new(re, BigRational::zero()),
        float: Complex64::new(f, 0.0),
    };
    Ok((entry, frac))
}

fn parse_json(text: &str) -> Result<MatrixFile, ParseError> {
    let doc: JsonMatrix = serde_json::from_str(text).map_err(|e| {
        let message = e.to_string();
        let message = match message.rfind(" at line ") {
            Some(p) => message[..p].to_string(),
            None => message,
        };
        ParseError::new(e.line().max(1), e.column().max(1), message)
    })?;
    if doc.data.len() != doc.rows {
        return Err(ParseError::new(
            1,
            1,
            format!("`rows` is {} but `data` has {} rows", doc.rows, doc.data.len()),
        ));
    }
    let mut entries = Vec::with_capacity(doc.rows * doc.cols);
    let mut has_fractions = false;
    for (i, row) in doc.data.iter().enumerate() {
        if row.len() != doc.cols {
            let (line, column) = row.first().map_or((1, 1), |r| raw_position(text, r));
            return Err(ParseError::new(
                line,
                column,
                format!("row {i} has {} entries, `cols` is {}", row.len(), doc.cols),
            ));
        }
        for raw in row {
            let (entry, frac) = json_entry(raw).map_err(|m| {
                let (line, column) = raw_position(text, raw);
                ParseError::new(line, column, m)
            })?;
            entries.push(entry);
            has_fractions |= frac;
        }
    }
    Ok(MatrixFile {
        format: Format::Json,
        rows: doc.rows,
        cols: doc.cols,
        entries,
        has_fractions,
    })
}

/// 17 significant digits, positional for moderate exponents, trailing zeros
/// dropped.
pub fn format_f64(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let digits = digits.trim_end_matches('0');
    let digits = if digits.is_empty() { "0" } else { digits };
    let sign = if negative { "-" } else { "" };
    let body = if (-5..17).contains(&exp) {
        if exp < 0 {
            format!("0.{}{digits}", "0".repeat((-exp - 1) as usize))
        } else {
            let point = exp as usize + 1;
            if digits.len() <= point {
                format!("{digits}{}", "0".repeat(point - digits.len()))
            } else {
                format!("{}.{}", &digits[..point], &digits[point..])
            }
        }
    } else if digits.len() == 1 {
        format!("{digits}e{exp}")
    } else {
        format!("{}.{}e{exp}", &digits[..1], &digits[1..])
    };
    format!("{sign}{body}")
}

/// `p` or `p/q` in lowest terms.
pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn join_complex(re: String, im: String, im_zero: bool, re_zero: bool) -> String {
    match (re_zero, im_zero) {
        (_, true) => re,
        (true, false) => format!("{im}i"),
        (false, false) if im.starts_with('-') => format!("{re}{im}i"),
        (false, false) => format!("{re}+{im}i"),
    }
}

pub fn format_complex(z: Complex64) -> String {
    join_complex(format_f64(z.re), format_f64(z.im), z.im == 0.0, z.re == 0.0)
}

pub fn format_exact(z: &RationalScalar) -> String {
    join_complex(format_rational(&z.re), format_rational(&z.im), z.im.is_zero(), z.re.is_zero())
}

/// A JSON value for one real component: numbers for doubles and integers,
/// strings for fractions.
fn json_component_exact(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("\"{}\"", format_rational(r))
    }
}

fn json_matrix(rows: usize, cols: usize, indent: &str, cell: impl Fn(usize, usize) -> String) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{{");
    let _ = writeln!(out, "{indent}  \"rows\": {rows},");
    let _ = writeln!(out, "{indent}  \"cols\": {cols},");
    if rows == 0 {
        let _ = writeln!(out, "{indent}  \"data\": []");
    } else {
        let _ = writeln!(out, "{indent}  \"data\": [");
        for i in 0..rows {
            let cells: Vec<String> = (0..cols).map(|j| cell(i, j)).collect();
            let comma = if i + 1 < rows { "," } else { "" };
            let _ = writeln!(out, "{indent}    [{}]{comma}", cells.join(", "));
        }
        let _ = writeln!(out, "{indent}  ]");
    }
    let _ = write!(out, "{indent}}}");
    out
}

/// JSON object for a float matrix, nested at `indent`.
pub fn float_json(m: &ComplexMatrix, indent: &str) -> String {
    json_matrix(m.rows(), m.cols(), indent, |i, j| {
        let z = m[(i, j)];
        if z.im == 0.0 {
            format_f64(z.re)
        } else {
            format!("[{}, {}]", format_f64(z.re), format_f64(z.im))
        }
    })
}

pub fn exact_json(m: &RationalMatrix, indent: &str) -> String {
    json_matrix(m.rows(), m.cols(), indent, |i, j| {
        let z = &m[(i, j)];
        if z.im.is_zero() {
            json_component_exact(&z.re)
        } else {
            format!("[{}, {}]", json_component_exact(&z.re), json_component_exact(&z.im))
        }
    })
}

/// A matrix without columns has no CSV rows.
fn csv_rows(rows: usize, cols: usize, cell: impl Fn(usize, usize) -> String) -> String {
    let mut out = String::new();
    if cols == 0 {
        return out;
    }
    for i in 0..rows {
        let cells: Vec<String> = (0..cols).map(|j| cell(i, j)).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

pub fn float_csv(m: &ComplexMatrix) -> String {
    csv_rows(m.rows(), m.cols(), |i, j| format_complex(m[(i, j)]))
}

pub fn exact_csv(m: &RationalMatrix) -> String {
    csv_rows(m.rows(), m.cols(), |i, j| format_exact(&m[(i, j)]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rat(p: i64, q: i64) -> BigRational {
        BigRational::new(p.into(), q.into())
    }

    fn one(tok: &str) -> Entry {
        parse_entry(tok).unwrap().0
    }

    #[test]
    fn entry_forms() {
        assert_eq!(one("3").float, Complex64::new(3.0, 0.0));
        assert_eq!(one("2i").float, Complex64::new(0.0, 2.0));
        assert_eq!(one("-i").float, Complex64::new(0.0, -1.0));
        assert_eq!(one("1.5-2.5i").float, Complex64::new(1.5, -2.5));
        assert_eq!(one("1e-3+2E+2i").float, Complex64::new(1e-3, 200.0));
        assert_eq!(one("1e-5i").float, Complex64::new(0.0, 1e-5));
        assert_eq!(one(" 1/2 - 3/4i ").exact, Complex::new(rat(1, 2), rat(-3, 4)));
        assert_eq!(one("0.1").exact.re, rat(1, 10));
        assert_eq!(one("-.25e1").exact.re, rat(-5, 2));
        assert!(parse_entry("1/3").unwrap().1);
        assert!(!parse_entry("0.5").unwrap().1);
    }

    #[test]
    fn rejects_malformed_entries() {
        for bad in ["", "abc", "1/0", "1/-2", "inf", "nan", "1e", "1.2.3", "1+", "1e99999", "--1", "i1"] {
            assert!(parse_entry(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn csv_error_position() {
        let err = MatrixFile::parse("1,2\n3, x\n", Format::Csv).unwrap_err();
        assert_eq!((err.line, err.column), (2, 4));
        let err = MatrixFile::parse("1,2\n\n3\n", Format::Csv).unwrap_err();
        assert_eq!(err.line, 3);
    }

    #[test]
    fn csv_skips_blank_and_comment_lines() {
        let m = MatrixFile::parse("# header\n1,2\n\n3,4\n# residual\n", Format::Csv).unwrap();
        assert_eq!((m.rows, m.cols), (2, 2));
        let empty = MatrixFile::parse("", Format::Csv).unwrap();
        assert_eq!((empty.rows, empty.cols), (0, 0));
    }

    #[test]
    fn json_entries_and_positions() {
        let text = r#"{"rows": 2, "cols": 2, "data": [[1, [0, -2]], ["1/3", "2+i"]], "note": "x"}"#;
        let m = MatrixFile::parse(text, Format::Json).unwrap();
        assert!(m.has_fractions);
        assert_eq!(m.entries[1].float, Complex64::new(0.0, -2.0));
        assert_eq!(m.entries[2].exact.re, rat(1, 3));
        assert_eq!(m.entries[3].float, Complex64::new(2.0, 1.0));

        let err = MatrixFile::parse("{\"rows\": 1, \"cols\": 2,\n \"data\": [[1, true]]}", Format::Json)
            .unwrap_err();
        assert_eq!((err.line, err.column), (2, 15));
        let err = MatrixFile::parse("{\"rows\": 1, \"cols\": 2, \"data\": [[1]]}", Format::Json).unwrap_err();
        assert!(err.message.contains("has 1 entries"));
        let err = MatrixFile::parse("{\"rows\": 1,\n  \"cols\" 2}", Format::Json).unwrap_err();
        assert_eq!(err.line, 2);
    }

    #[test]
    fn float_formatting() {
        assert_eq!(format_f64(0.5), "0.5");
        assert_eq!(format_f64(-3.0), "-3");
        assert_eq!(format_f64(1.0 / 3.0), "0.33333333333333331");
        assert_eq!(format_f64(1e-7), "9.9999999999999995e-8");
        assert_eq!(format_f64(0.1), "0.10000000000000001");
        assert_eq!(format_f64(1e-300), "1e-300");
        assert_eq!(format_f64(1.25e20), "1.25e20");
        assert_eq!(format_f64(0.0001), "0.0001");
        assert_eq!(format_complex(Complex64::new(1.0, -2.0)), "1-2i");
        assert_eq!(format_complex(Complex64::new(0.0, 0.5)), "0.5i");
        assert_eq!(format_exact(&Complex::new(rat(1, 2), rat(1, 3))), "1/2+1/3i");
    }

    fn finite() -> impl Strategy<Value = f64> {
        prop_oneof![
            any::<f64>().prop_filter("finite", |x| x.is_finite()),
            (-1000i32..1000).prop_map(|n| n as f64 / 8.0),
        ]
    }

    proptest! {
        #[test]
        fn float_round_trip(
            rows in 0usize..4,
            cols in 1usize..4,
            vals in proptest::collection::vec((finite(), finite()), 16),
            json in any::<bool>(),
        ) {
            let m = ComplexMatrix::from_fn(rows, cols, |i, j| {
                let (re, im) = vals[i * cols + j];
                Complex64::new(re, im)
            });
            let (text, format) = if json {
                (float_json(&m, ""), Format::Json)
            } else {
                (float_csv(&m), Format::Csv)
            };
            let back = MatrixFile::parse(&text, format).unwrap();
            let back = back.float();
            prop_assert_eq!(back.shape(), if !json && rows == 0 { (0, 0) } else { m.shape() });
            if rows > 0 {
                prop_assert_eq!(back, m);
            }
        }

        #[test]
        fn exact_round_trip(
            rows in 1usize..4,
            cols in 1usize..4,
            vals in proptest::collection::vec((-50i64..50, 1i64..20, -50i64..50, 1i64..20), 16),
            json in any::<bool>(),
        ) {
            let m = RationalMatrix::from_fn(rows, cols, |i, j| {
                let (a, b, c, d) = vals[i * cols + j];
                Complex::new(rat(a, b), rat(c, d))
            });
            let (text, format) = if json {
                (exact_json(&m, ""), Format::Json)
            } else {
                (exact_csv(&m), Format::Csv)
            };
            let back = MatrixFile::parse(&text, format).unwrap();
            prop_assert_eq!(back.exact(), m);
        }
    }
}
