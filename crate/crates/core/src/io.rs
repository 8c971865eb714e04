//! JSON tensor files, CSV point lists and deterministic JSON output.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, Serializer};
use sha2::{Digest, Sha256};

use crate::numrange::BoundaryPoint;
use crate::tensor::DenseTensor;

pub const ORDER: &str = "col-major";

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: malformed tensor JSON: {message}")]
    Parse { path: PathBuf, message: String },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TensorFile {
    row_shape: Vec<usize>,
    col_shape: Vec<usize>,
    order: String,
    data: Vec<[f64; 2]>,
}

/// Writes every `f64` with 17 significant digits; non-finite values become `null`.
#[derive(Debug, Default, Clone, Copy)]
pub struct SigFormatter;

impl Formatter for SigFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{}", fmt_f64(value))
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

/// `{:.16e}`: 17 significant digits, exact round trip.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, SigFormatter);
    value.serialize(&mut ser).expect("serializing to memory cannot fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

pub fn parse_tensor(text: &[u8]) -> Result<DenseTensor, String> {
    let file: TensorFile = serde_json::from_slice(text).map_err(|e| e.to_string())?;
    if file.order != ORDER {
        return Err(format!("unsupported order {:?}, expected {ORDER:?}", file.order));
    }
    let data = file.data.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
    DenseTensor::new(file.row_shape, file.col_shape, data).map_err(|e| e.to_string())
}

pub fn tensor_to_json(t: &DenseTensor) -> String {
    to_json(&TensorFile {
        row_shape: t.row_shape().to_vec(),
        col_shape: t.col_shape().to_vec(),
        order: ORDER.to_string(),
        data: t.data().iter().map(|z| [z.re, z.im]).collect(),
    })
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, IoError> {
    fs::read(path).map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads a tensor file, returning it with the SHA-256 of its bytes.
pub fn read_tensor(path: &Path) -> Result<(DenseTensor, String), IoError> {
    let bytes = read_bytes(path)?;
    let digest = hex::encode(Sha256::digest(&bytes));
    let t = parse_tensor(&bytes).map_err(|message| IoError::Parse {
        path: path.to_path_buf(),
        message,
    })?;
    Ok((t, digest))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| IoError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    fs::write(path, text).map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_tensor(path: &Path, t: &DenseTensor) -> Result<(), IoError> {
    write_text(path, &tensor_to_json(t))
}

pub fn boundary_csv(points: &[BoundaryPoint]) -> String {
    let mut out = String::from("theta,re,im\n");
    for b in points {
        out.push_str(&format!("{},{},{}\n", fmt_f64(b.theta), fmt_f64(b.point.re), fmt_f64(b.point.im)));
    }
    out
}

pub fn samples_csv(points: &[Complex64]) -> String {
    let mut out = String::from("re,im\n");
    for z in points {
        out.push_str(&format!("{},{}\n", fmt_f64(z.re), fmt_f64(z.im)));
    }
    out
}
