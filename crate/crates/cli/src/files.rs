use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use magframe::{CMatrix, Complex64, Error, Result};

/// Opens `path` for writing, or stdout.
pub fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

/// One real column or a real and an imaginary column.
pub fn read_signal(path: &Path) -> Result<CMatrix> {
    let m = magframe::pipeline::read_features_csv(File::open(path)?)?;
    match m.ncols() {
        1 => Ok(m.map(|v| Complex64::new(v, 0.0))),
        2 => Ok(CMatrix::from_fn(m.nrows(), 1, |i, _| Complex64::new(m[(i, 0)], m[(i, 1)]))),
        c => Err(Error::Parse {
            line: 1,
            message: format!("signal needs 1 or 2 columns, found {c}"),
        }),
    }
}

pub fn write_signal<W: Write>(x: &CMatrix, mut w: W) -> Result<()> {
    for v in x.iter() {
        writeln!(w, "{},{}", v.re, v.im)?;
    }
    w.flush()?;
    Ok(())
}

/// Square matrix from `row,col,real,imag` lines; the size is one past the
/// largest index. Missing entries are zero.
pub fn read_triplets(path: &Path) -> Result<CMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(File::open(path)?);
    let mut entries = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let bad = |message: String| Error::Parse { line: i + 1, message };
        if record.len() != 4 {
            return Err(bad(format!("expected row,col,real,imag, found {} fields", record.len())));
        }
        let row: usize = record[0].parse().map_err(|e| bad(format!("row: {e}")))?;
        let col: usize = record[1].parse().map_err(|e| bad(format!("col: {e}")))?;
        let re: f64 = record[2].parse().map_err(|e| bad(format!("real: {e}")))?;
        let im: f64 = record[3].parse().map_err(|e| bad(format!("imag: {e}")))?;
        entries.push((row, col, Complex64::new(re, im)));
    }
    let n = entries.iter().map(|&(r, c, _)| r.max(c) + 1).max().unwrap_or(0);
    let mut m = CMatrix::zeros(n, n);
    for (r, c, v) in entries {
        m[(r, c)] += v;
    }
    Ok(m)
}
