//! Versioned text formats for weight vectors and compressed parameters.
//!
//! Model file:
//!
//! ```text
//! format lc-model
//! version 1
//! family least-squares
//! layers 2
//! matrix weights 4 4
//! bias bias 1
//! mask 11111111111111110
//! values 17
//! 1.0000000000000000e0
//! ...
//! ```
//!
//! Theta file: same `format`/`version` header (`lc-theta`), then
//! `variant <name>` and variant-specific blocks of counted values. Reals are
//! written with 17 significant digits, which round-trips binary64 exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::compress::CompressedParams;
use crate::error::{Error, Result};
use crate::model::{Layer, LayerKind, LossFamily, WeightVector};

pub const FORMAT_VERSION: u32 = 1;
const MODEL_FORMAT: &str = "lc-model";
const THETA_FORMAT: &str = "lc-theta";

fn real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Serializes `w` (with the family it belongs to).
pub fn model_to_string(w: &WeightVector, family: LossFamily) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "format {MODEL_FORMAT}");
    let _ = writeln!(s, "version {FORMAT_VERSION}");
    let _ = writeln!(s, "family {}", family.name());
    let _ = writeln!(s, "layers {}", w.layout().len());
    for layer in w.layout() {
        match layer.kind {
            LayerKind::Matrix { rows, cols } => {
                let _ = writeln!(s, "matrix {} {rows} {cols}", layer.name);
            }
            LayerKind::Bias { len } => {
                let _ = writeln!(s, "bias {} {len}", layer.name);
            }
        }
    }
    let mask: String = w.mask().iter().map(|&m| if m { '1' } else { '0' }).collect();
    let _ = writeln!(s, "mask {mask}");
    let _ = writeln!(s, "values {}", w.len());
    for &v in w.values() {
        let _ = writeln!(s, "{}", real(v));
    }
    s
}

pub fn save_model(path: &Path, w: &WeightVector, family: LossFamily) -> Result<()> {
    write_file(path, &model_to_string(w, family))
}

pub fn load_model(path: &Path) -> Result<(WeightVector, LossFamily)> {
    let text = read_file(path)?;
    parse_model(&text, path)
}

pub fn parse_model(text: &str, path: &Path) -> Result<(WeightVector, LossFamily)> {
    let mut r = Reader::new(text, path);
    r.header(MODEL_FORMAT)?;
    let family = {
        let (line, v) = r.keyed("family")?;
        LossFamily::parse(v).map_err(|e| r.err_at(line, e.to_string()))?
    };
    let count: usize = r.keyed_parse("layers")?;
    let mut layout = Vec::with_capacity(count);
    for _ in 0..count {
        let (line, text) = r.next_line()?;
        let parts: Vec<&str> = text.split_whitespace().collect();
        let dim = |s: &str| s.parse::<usize>().map_err(|_| r.err_at(line, format!("bad dimension `{s}`")));
        let layer = match parts.as_slice() {
            ["matrix", name, rows, cols] => Layer::matrix(*name, dim(rows)?, dim(cols)?),
            ["bias", name, len] => Layer::bias(*name, dim(len)?),
            _ => return Err(r.err_at(line, format!("bad layer line `{text}`"))),
        };
        layout.push(layer);
    }
    let (line, mask_text) = r.keyed("mask")?;
    let mask = mask_text
        .chars()
        .map(|c| match c {
            '1' => Ok(true),
            '0' => Ok(false),
            _ => Err(r.err_at(line, format!("bad mask character `{c}`"))),
        })
        .collect::<Result<Vec<bool>>>()?;
    let n: usize = r.keyed_parse("values")?;
    let values = r.reals(n)?;
    r.finish()?;
    let w = WeightVector::new(values, layout, mask).map_err(|e| r.err_at(r.line, e.to_string()))?;
    Ok((w, family))
}

pub fn theta_to_string(theta: &CompressedParams) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "format {THETA_FORMAT}");
    let _ = writeln!(s, "version {FORMAT_VERSION}");
    let _ = writeln!(s, "variant {}", theta.variant_name());
    let ints = |s: &mut String, key: &str, v: &mut dyn ExactSizeIterator<Item = String>| {
        let _ = writeln!(s, "{key} {}", v.len());
        let joined: Vec<String> = v.collect();
        let _ = writeln!(s, "{}", joined.join(" "));
    };
    let reals = |s: &mut String, key: &str, v: &[f64]| {
        let _ = writeln!(s, "{key} {}", v.len());
        for &x in v {
            let _ = writeln!(s, "{}", real(x));
        }
    };
    match theta {
        CompressedParams::Quant { codebook, assign } => {
            reals(&mut s, "codebook", codebook);
            ints(&mut s, "assign", &mut assign.iter().map(|a| a.to_string()));
        }
        CompressedParams::Sign { signs } => ints(&mut s, "signs", &mut signs.iter().map(|a| a.to_string())),
        CompressedParams::Ternary { levels } => ints(&mut s, "levels", &mut levels.iter().map(|a| a.to_string())),
        CompressedParams::LowRank { rows, cols, rank, u, v } => {
            let _ = writeln!(s, "shape {rows} {cols} {rank}");
            reals(&mut s, "u", u);
            reals(&mut s, "v", v);
        }
        CompressedParams::Sparse { len, support, vals } => {
            let _ = writeln!(s, "len {len}");
            ints(&mut s, "support", &mut support.iter().map(|a| a.to_string()));
            reals(&mut s, "vals", vals);
        }
    }
    s
}

pub fn save_theta(path: &Path, theta: &CompressedParams) -> Result<()> {
    write_file(path, &theta_to_string(theta))
}

pub fn load_theta(path: &Path) -> Result<CompressedParams> {
    let text = read_file(path)?;
    parse_theta(&text, path)
}

pub fn parse_theta(text: &str, path: &Path) -> Result<CompressedParams> {
    let mut r = Reader::new(text, path);
    r.header(THETA_FORMAT)?;
    let (line, variant) = r.keyed("variant")?;
    let theta = match variant {
        "quant" => {
            let n: usize = r.keyed_parse("codebook")?;
            let codebook = r.reals(n)?;
            let n: usize = r.keyed_parse("assign")?;
            let assign = r.ints::<usize>(n)?;
            CompressedParams::Quant { codebook, assign }
        }
        "sign" => {
            let n: usize = r.keyed_parse("signs")?;
            CompressedParams::Sign { signs: r.ints::<i8>(n)? }
        }
        "ternary" => {
            let n: usize = r.keyed_parse("levels")?;
            CompressedParams::Ternary { levels: r.ints::<i8>(n)? }
        }
        "low-rank" => {
            let (line, shape) = r.keyed("shape")?;
            let dims: Vec<usize> = shape
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| r.err_at(line, format!("bad dimension `{t}`"))))
                .collect::<Result<_>>()?;
            let [rows, cols, rank] = dims[..] else {
                return Err(r.err_at(line, "shape needs rows, cols and rank"));
            };
            let n: usize = r.keyed_parse("u")?;
            let u = r.reals(n)?;
            let n: usize = r.keyed_parse("v")?;
            let v = r.reals(n)?;
            CompressedParams::LowRank { rows, cols, rank, u, v }
        }
        "sparse" => {
            let len: usize = r.keyed_parse("len")?;
            let n: usize = r.keyed_parse("support")?;
            let support = r.ints::<usize>(n)?;
            let n: usize = r.keyed_parse("vals")?;
            let vals = r.reals(n)?;
            CompressedParams::Sparse { len, support, vals }
        }
        other => return Err(r.err_at(line, format!("unknown variant `{other}`"))),
    };
    r.finish()?;
    theta.validate().map_err(|e| r.err_at(r.line, e.to_string()))?;
    Ok(theta)
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub(crate) fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Line cursor that reports 1-based line numbers.
struct Reader<'a> {
    lines: Vec<&'a str>,
    /// Lines consumed so far.
    line: usize,
    path: PathBuf,
}

impl<'a> Reader<'a> {
    fn new(text: &'a str, path: &Path) -> Self {
        Reader { lines: text.lines().collect(), line: 0, path: path.to_path_buf() }
    }

    fn err_at(&self, line: usize, message: impl Into<String>) -> Error {
        Error::Parse { path: self.path.clone(), line, message: message.into() }
    }

    fn next_line(&mut self) -> Result<(usize, &'a str)> {
        match self.lines.get(self.line) {
            Some(l) => {
                self.line += 1;
                Ok((self.line, l.trim()))
            }
            None => Err(self.err_at(self.line + 1, "unexpected end of file")),
        }
    }

    fn keyed(&mut self, key: &str) -> Result<(usize, &'a str)> {
        let (line, text) = self.next_line()?;
        match text.split_once(' ') {
            Some((k, rest)) if k == key => Ok((line, rest.trim())),
            _ if text == key => Ok((line, "")),
            _ => Err(self.err_at(line, format!("expected `{key}`, found `{text}`"))),
        }
    }

    fn keyed_parse<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let (line, v) = self.keyed(key)?;
        v.parse().map_err(|_| self.err_at(line, format!("bad value `{v}` for `{key}`")))
    }

    fn header(&mut self, format: &'static str) -> Result<()> {
        let (line, name) = self.keyed("format")?;
        if name != format {
            return Err(self.err_at(line, format!("expected format `{format}`, found `{name}`")));
        }
        let (_, version) = self.keyed("version")?;
        if version != FORMAT_VERSION.to_string() {
            return Err(Error::UnsupportedVersion { format, found: version.to_string(), expected: FORMAT_VERSION });
        }
        Ok(())
    }

    fn reals(&mut self, n: usize) -> Result<Vec<f64>> {
        (0..n)
            .map(|_| {
                let (line, t) = self.next_line()?;
                match t.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    _ => Err(self.err_at(line, format!("bad real `{t}`"))),
                }
            })
            .collect()
    }

    fn ints<T: std::str::FromStr>(&mut self, n: usize) -> Result<Vec<T>> {
        let (line, t) = self.next_line()?;
        let v: Vec<T> = t
            .split_whitespace()
            .map(|x| x.parse().map_err(|_| self.err_at(line, format!("bad integer `{x}`"))))
            .collect::<Result<_>>()?;
        if v.len() != n {
            return Err(self.err_at(line, format!("expected {n} integers, found {}", v.len())));
        }
        Ok(v)
    }

    fn finish(&mut self) -> Result<()> {
        while let Some(l) = self.lines.get(self.line) {
            self.line += 1;
            if !l.trim().is_empty() {
                return Err(self.err_at(self.line, "trailing content"));
            }
        }
        Ok(())
    }
}
