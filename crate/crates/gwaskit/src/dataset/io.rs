//! CSV ingestion and emission for the three matrix kinds.
//!
//! Genotype CSV: header `n,m`, an optional second line of `m` feature names,
//! then one line per observation `label,p_1,q_1,r_1,...,p_m,q_m,r_m`.
//! Categorical CSV: header `n,m,alphabet=S1|S2|...`, rows `label,s_1,...,s_m`.
//! Real CSV: header `n,m`, rows `label,x_1,...,x_m`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::dataset::{
    CategoricalDataset, GenotypeDataset, GenotypeTriple, Label, RealDataset, TRIPLE_SUM_TOLERANCE,
};
use crate::error::{Error, Result};

fn open_lines(path: &Path) -> Result<impl Iterator<Item = std::io::Result<String>>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(BufReader::new(file).lines())
}

fn parse_header(path: &Path, line: Option<std::io::Result<String>>) -> Result<(usize, usize, Vec<String>)> {
    let line = line
        .transpose()
        .map_err(|e| Error::io(path, e))?
        .ok_or_else(|| Error::format(path, 1, "missing header line"))?;
    let fields: Vec<&str> = line.trim().split(',').collect();
    if fields.len() < 2 {
        return Err(Error::format(path, 1, "header must be `n,m`"));
    }
    let n: usize = fields[0]
        .trim()
        .parse()
        .map_err(|_| Error::format(path, 1, format!("bad row count `{}`", fields[0])))?;
    let m: usize = fields[1]
        .trim()
        .parse()
        .map_err(|_| Error::format(path, 1, format!("bad column count `{}`", fields[1])))?;
    let extra = fields[2..].iter().map(|s| s.trim().to_string()).collect();
    Ok((n, m, extra))
}

fn parse_label(path: &Path, line_no: usize, field: &str) -> Result<Label> {
    let value: i64 = field
        .trim()
        .parse()
        .map_err(|_| Error::format(path, line_no, format!("bad label `{field}`")))?;
    Label::from_int(value)
        .map_err(|_| Error::format(path, line_no, format!("label {value} outside {{0,1}}")))
}

fn parse_f64(path: &Path, line_no: usize, field: &str) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::format(path, line_no, format!("bad number `{field}`")))
}

fn default_names(m: usize) -> Vec<String> {
    (0..m).map(|j| format!("f{j}")).collect()
}

/// Loads a genotype probability matrix, validating every triple and
/// reporting the 1-based `(row, column)` of the first violation.
pub fn load_genotype_matrix(path: impl AsRef<Path>) -> Result<GenotypeDataset> {
    let path = path.as_ref();
    let mut lines = open_lines(path)?;
    let (n, m, _) = parse_header(path, lines.next())?;

    let mut cells = Vec::with_capacity(n * m);
    let mut labels = Vec::with_capacity(n);
    let mut feature_names: Option<Vec<String>> = None;
    let mut line_no = 1usize;
    let mut row = 0usize;

    for line in lines {
        let line = line.map_err(|e| Error::io(path, e))?;
        line_no += 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.trim().split(',').collect();
        // A names line has exactly m fields; a data row has 1 + 3m.
        if feature_names.is_none() && row == 0 && fields.len() == m && m != 1 + 3 * m {
            feature_names = Some(fields.iter().map(|s| s.trim().to_string()).collect());
            continue;
        }
        if fields.len() != 1 + 3 * m {
            return Err(Error::format(
                path,
                line_no,
                format!("expected {} fields, found {}", 1 + 3 * m, fields.len()),
            ));
        }
        if row >= n {
            return Err(Error::format(path, line_no, format!("more than {n} data rows")));
        }
        labels.push(parse_label(path, line_no, fields[0])?);
        for col in 0..m {
            let p = parse_f64(path, line_no, fields[1 + 3 * col])?;
            let q = parse_f64(path, line_no, fields[2 + 3 * col])?;
            let r = parse_f64(path, line_no, fields[3 + 3 * col])?;
            let sum = p + q + r;
            if (sum - 1.0).abs() > TRIPLE_SUM_TOLERANCE + 1e-12 {
                return Err(Error::format(
                    path,
                    line_no,
                    format!("triple sum {sum:.6} exceeds tolerance at ({}, {})", row + 1, col + 1),
                ));
            }
            let triple = GenotypeTriple::new(p, q, r).map_err(|e| {
                Error::format(path, line_no, format!("{e} at ({}, {})", row + 1, col + 1))
            })?;
            cells.push(triple);
        }
        row += 1;
    }
    if row != n {
        return Err(Error::format(
            path,
            line_no,
            format!("expected {n} data rows, found {row}"),
        ));
    }
    GenotypeDataset::new(n, m, cells, labels, feature_names.unwrap_or_else(|| default_names(m)))
}

/// Writes a genotype matrix with probabilities at 6 decimal digits,
/// including the feature-name header line.
pub fn write_genotype_matrix(path: impl AsRef<Path>, d: &GenotypeDataset) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io_err = |e| Error::io(path, e);
    writeln!(w, "{},{}", crate::dataset::Dataset::rows(d), d.cols()).map_err(io_err)?;
    writeln!(w, "{}", d.feature_names().join(",")).map_err(io_err)?;
    for i in 0..crate::dataset::Dataset::rows(d) {
        write!(w, "{}", crate::dataset::Dataset::labels(d)[i].as_u8()).map_err(io_err)?;
        for j in 0..d.cols() {
            let t = d.cell(i, j);
            write!(w, ",{:.6},{:.6},{:.6}", t.p(), t.q(), t.r()).map_err(io_err)?;
        }
        writeln!(w).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

/// Loads a categorical matrix; the header carries the alphabet and every
/// cell must spell one of its symbols exactly.
pub fn load_categorical_matrix(path: impl AsRef<Path>) -> Result<CategoricalDataset> {
    let path = path.as_ref();
    let mut lines = open_lines(path)?;
    let (n, m, extra) = parse_header(path, lines.next())?;
    let alphabet_field = extra
        .iter()
        .find_map(|f| f.strip_prefix("alphabet="))
        .ok_or_else(|| Error::format(path, 1, "header must be `n,m,alphabet=S1|S2|...`"))?;
    let alphabet: Vec<String> = alphabet_field.split('|').map(|s| s.to_string()).collect();

    let mut cells = Vec::with_capacity(n * m);
    let mut labels = Vec::with_capacity(n);
    let mut line_no = 1usize;
    let mut row = 0usize;
    for line in lines {
        let line = line.map_err(|e| Error::io(path, e))?;
        line_no += 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != 1 + m {
            return Err(Error::format(
                path,
                line_no,
                format!("expected {} fields, found {}", 1 + m, fields.len()),
            ));
        }
        if row >= n {
            return Err(Error::format(path, line_no, format!("more than {n} data rows")));
        }
        labels.push(parse_label(path, line_no, fields[0])?);
        for (col, field) in fields[1..].iter().enumerate() {
            let sym = field.trim();
            let code = alphabet.iter().position(|s| s == sym).ok_or_else(|| {
                Error::format(
                    path,
                    line_no,
                    format!("unknown symbol `{sym}` at ({}, {})", row + 1, col + 1),
                )
            })?;
            cells.push(code as u8);
        }
        row += 1;
    }
    if row != n {
        return Err(Error::format(
            path,
            line_no,
            format!("expected {n} data rows, found {row}"),
        ));
    }
    CategoricalDataset::new(n, m, alphabet, cells, labels, default_names(m))
}

pub fn write_categorical_matrix(path: impl AsRef<Path>, d: &CategoricalDataset) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io_err = |e| Error::io(path, e);
    writeln!(
        w,
        "{},{},alphabet={}",
        crate::dataset::Dataset::rows(d),
        d.cols(),
        d.alphabet().join("|")
    )
    .map_err(io_err)?;
    for i in 0..crate::dataset::Dataset::rows(d) {
        write!(w, "{}", crate::dataset::Dataset::labels(d)[i].as_u8()).map_err(io_err)?;
        for j in 0..d.cols() {
            write!(w, ",{}", d.symbol(i, j)).map_err(io_err)?;
        }
        writeln!(w).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

pub fn load_real_matrix(path: impl AsRef<Path>) -> Result<RealDataset> {
    let path = path.as_ref();
    let mut lines = open_lines(path)?;
    let (n, m, _) = parse_header(path, lines.next())?;
    let mut cells = Vec::with_capacity(n * m);
    let mut labels = Vec::with_capacity(n);
    let mut line_no = 1usize;
    let mut row = 0usize;
    for line in lines {
        let line = line.map_err(|e| Error::io(path, e))?;
        line_no += 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != 1 + m {
            return Err(Error::format(
                path,
                line_no,
                format!("expected {} fields, found {}", 1 + m, fields.len()),
            ));
        }
        if row >= n {
            return Err(Error::format(path, line_no, format!("more than {n} data rows")));
        }
        labels.push(parse_label(path, line_no, fields[0])?);
        for (col, field) in fields[1..].iter().enumerate() {
            let v = parse_f64(path, line_no, field)?;
            if !v.is_finite() {
                return Err(Error::format(
                    path,
                    line_no,
                    format!("non-finite value at ({}, {})", row + 1, col + 1),
                ));
            }
            cells.push(v);
        }
        row += 1;
    }
    if row != n {
        return Err(Error::format(
            path,
            line_no,
            format!("expected {n} data rows, found {row}"),
        ));
    }
    RealDataset::new(n, m, cells, labels)
}

/// Writes a real matrix with shortest round-trip float formatting, so a
/// load of the output reproduces every cell bit for bit.
pub fn write_real_matrix(path: impl AsRef<Path>, d: &RealDataset) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io_err = |e| Error::io(path, e);
    writeln!(w, "{},{}", crate::dataset::Dataset::rows(d), d.cols()).map_err(io_err)?;
    for i in 0..crate::dataset::Dataset::rows(d) {
        write!(w, "{}", crate::dataset::Dataset::labels(d)[i].as_u8()).map_err(io_err)?;
        for j in 0..d.cols() {
            write!(w, ",{}", d.cell(i, j)).map_err(io_err)?;
        }
        writeln!(w).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}
