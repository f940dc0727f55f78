//! Plain-text dataset and results files.
//!
//! Dataset file (whitespace separated, one item per line):
//!
//! ```text
//! beamlearn-dataset 1
//! n_beams 6
//! n_users 2
//! snr_db 1.0000000000000000e1
//! alpha 2.0000000000000000e0
//! min_radius 1.0000000000000000e-2
//! rng_seed 1
//! n_examples 1
//! <layout_id> <rho_1..rho_K> <theta_1..theta_K> <hex label mask> <oracle_sum_rate>
//! ```
//!
//! Results file: `# key = value` comment lines holding the experiment
//! configuration, then a CSV table `sweep_var,method,mean_sum_rate,stderr,n_samples`.
//!
//! Reals are written with 17 significant digits so that reading a file
//! reproduces the written values exactly. Writers go through a temporary file
//! in the target directory that is renamed into place only on success.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::allocation::ActiveBeamSet;
use crate::error::{Error, ParseErrorKind, Result};
use crate::experiment::{ExperimentConfig, Method, ResultRow};
use crate::learning::{extract_features, LabeledDataset, LabeledExample};
use crate::system::{SystemConfig, UserLayout, UserPosition};

pub const DATASET_MAGIC: &str = "beamlearn-dataset";
pub const RESULTS_MAGIC: &str = "beamlearn-results";
pub const FORMAT_VERSION: u32 = 1;
const RESULTS_COLUMNS: &str = "sweep_var,method,mean_sum_rate,stderr,n_samples";

/// Formats a real with 17 significant digits.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `path` by filling a sibling temporary file and renaming it.
pub fn write_atomic(
    path: &Path,
    fill: impl FnOnce(&mut dyn Write) -> std::io::Result<()>,
) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| Error::Domain(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(
        ".{}.tmp{}",
        name.to_string_lossy(),
        std::process::id()
    ));

    let result = (|| {
        let mut out = BufWriter::new(fs::File::create(&tmp)?);
        fill(&mut out)?;
        out.into_inner().map_err(|e| e.into_error())?.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(Error::io(path, e));
    }
    Ok(())
}

pub fn write_dataset(ds: &LabeledDataset, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), |out| write_dataset_to(ds, out))
}

pub fn write_dataset_to(ds: &LabeledDataset, out: &mut dyn Write) -> std::io::Result<()> {
    let c = ds.config();
    writeln!(out, "{DATASET_MAGIC} {FORMAT_VERSION}")?;
    writeln!(out, "n_beams {}", c.n_beams())?;
    writeln!(out, "n_users {}", c.n_users())?;
    writeln!(out, "snr_db {}", fmt_real(c.snr_db()))?;
    writeln!(out, "alpha {}", fmt_real(c.path_loss_exponent()))?;
    writeln!(out, "min_radius {}", fmt_real(c.min_radius()))?;
    writeln!(out, "rng_seed {}", c.rng_seed())?;
    writeln!(out, "n_examples {}", ds.len())?;
    for ex in ds.examples() {
        let mut line = ex.layout_id().to_string();
        let pos = ex.layout.positions();
        for p in pos {
            line.push(' ');
            line.push_str(&fmt_real(p.rho));
        }
        for p in pos {
            line.push(' ');
            line.push_str(&fmt_real(p.theta));
        }
        line.push(' ');
        line.push_str(&ex.label.to_string());
        line.push(' ');
        line.push_str(&fmt_real(ex.oracle_sum_rate));
        writeln!(out, "{line}")?;
    }
    Ok(())
}

struct LineParser<'a> {
    path: &'a Path,
    line_no: usize,
}

impl LineParser<'_> {
    fn err(&self, kind: ParseErrorKind) -> Error {
        Error::Parse {
            path: self.path.to_path_buf(),
            line: self.line_no,
            kind,
        }
    }

    fn real(&self, tok: &str, what: &str) -> Result<f64> {
        let v: f64 = tok.parse().map_err(|_| {
            self.err(ParseErrorKind::MalformedRecord(format!(
                "{what}: `{tok}` is not a number"
            )))
        })?;
        if !v.is_finite() {
            return Err(self.err(ParseErrorKind::NonFinite(tok.to_string())));
        }
        Ok(v)
    }
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    BufReader::new(file)
        .lines()
        .collect::<std::io::Result<Vec<_>>>()
        .map_err(|e| Error::io(path, e))
}

pub fn read_dataset(path: impl AsRef<Path>) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let lines = read_lines(path)?;
    let mut p = LineParser { path, line_no: 0 };

    // header values; any failure is reported against the line that held it
    let hdr_err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        kind: ParseErrorKind::MalformedHeader(msg),
    };
    let int = |line: usize, s: &str, what: &str| -> Result<u64> {
        s.parse()
            .map_err(|_| hdr_err(line, format!("{what}: `{s}` is not an unsigned integer")))
    };
    let real = |line: usize, s: &str, what: &str| -> Result<f64> {
        let v: f64 = s
            .parse()
            .map_err(|_| hdr_err(line, format!("{what}: `{s}` is not a number")))?;
        if !v.is_finite() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line,
                kind: ParseErrorKind::NonFinite(s.to_string()),
            });
        }
        Ok(v)
    };
    let mut header = |key: &str, lines: &[String]| -> Result<String> {
        p.line_no += 1;
        let line = lines
            .get(p.line_no - 1)
            .ok_or_else(|| p.err(ParseErrorKind::MalformedHeader(format!("missing `{key}`"))))?;
        match line.split_whitespace().collect::<Vec<_>>().as_slice() {
            [k, v] if *k == key => Ok(v.to_string()),
            _ => Err(p.err(ParseErrorKind::MalformedHeader(format!(
                "expected `{key} <value>`, found `{line}`"
            )))),
        }
    };

    if int(1, &header(DATASET_MAGIC, &lines)?, "format version")? != FORMAT_VERSION as u64 {
        return Err(hdr_err(1, "unsupported format version".into()));
    }
    let n_beams = int(2, &header("n_beams", &lines)?, "n_beams")? as usize;
    let n_users = int(3, &header("n_users", &lines)?, "n_users")? as usize;
    let snr_db = real(4, &header("snr_db", &lines)?, "snr_db")?;
    let alpha = real(5, &header("alpha", &lines)?, "alpha")?;
    let min_radius = real(6, &header("min_radius", &lines)?, "min_radius")?;
    let rng_seed = int(7, &header("rng_seed", &lines)?, "rng_seed")?;
    let n_examples = int(8, &header("n_examples", &lines)?, "n_examples")? as usize;
    let config = SystemConfig::from_parts(n_beams, n_users, snr_db, alpha, min_radius, rng_seed)
        .map_err(|e| hdr_err(2, e.to_string()))?;

    let (k, n) = (config.n_users(), config.n_beams());
    let mut ds = LabeledDataset::new(config.clone());
    let mut found = 0usize;
    for (idx, line) in lines.iter().enumerate().skip(8) {
        p.line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        if found == n_examples {
            return Err(p.err(ParseErrorKind::RecordCount {
                expected: n_examples,
                found: found + 1,
            }));
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 2 * k + 3 {
            return Err(p.err(ParseErrorKind::MalformedRecord(format!(
                "expected {} fields, found {}",
                2 * k + 3,
                toks.len()
            ))));
        }
        let layout_id: u64 = toks[0].parse().map_err(|_| {
            p.err(ParseErrorKind::MalformedRecord(format!(
                "bad layout id `{}`",
                toks[0]
            )))
        })?;
        let mut positions = Vec::with_capacity(k);
        for u in 0..k {
            let rho = p.real(toks[1 + u], "rho")?;
            let theta = p.real(toks[1 + k + u], "theta")?;
            if !(rho >= config.min_radius() && rho <= 1.0) {
                return Err(p.err(ParseErrorKind::OutOfRange(format!("rho {rho}"))));
            }
            if !(theta > 0.0 && theta < std::f64::consts::PI) {
                return Err(p.err(ParseErrorKind::OutOfRange(format!("theta {theta}"))));
            }
            positions.push(UserPosition { rho, theta });
        }
        let mask_tok = toks[1 + 2 * k];
        let mask = u64::from_str_radix(mask_tok, 16).map_err(|_| {
            if mask_tok.chars().all(|c| c.is_ascii_hexdigit()) {
                p.err(ParseErrorKind::MaskTooWide {
                    mask: mask_tok.to_string(),
                    n_beams: n,
                })
            } else {
                p.err(ParseErrorKind::MalformedRecord(format!(
                    "bad label mask `{mask_tok}`"
                )))
            }
        })?;
        let label = ActiveBeamSet::from_mask(mask, n).map_err(|_| {
            p.err(ParseErrorKind::MaskTooWide {
                mask: mask_tok.to_string(),
                n_beams: n,
            })
        })?;
        if label.len() > k {
            return Err(p.err(ParseErrorKind::OutOfRange(format!(
                "label {mask_tok} activates more than {k} beams"
            ))));
        }
        let rate = p.real(toks[2 + 2 * k], "oracle_sum_rate")?;
        if rate < 0.0 {
            return Err(p.err(ParseErrorKind::OutOfRange(format!(
                "oracle_sum_rate {rate}"
            ))));
        }

        let layout = UserLayout::new(layout_id, positions, &config)
            .map_err(|e| p.err(ParseErrorKind::MalformedRecord(e.to_string())))?;
        ds.push(LabeledExample {
            feature: extract_features(&layout),
            layout,
            label,
            oracle_sum_rate: rate,
        })
        .map_err(|e| p.err(ParseErrorKind::MalformedRecord(e.to_string())))?;
        found += 1;
    }
    if found != n_examples {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: lines.len() + 1,
            kind: ParseErrorKind::RecordCount {
                expected: n_examples,
                found,
            },
        });
    }
    Ok(ds)
}

/// Which sweep produced a results file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    Snr,
    Size,
}

impl SweepKind {
    fn as_str(self) -> &'static str {
        match self {
            SweepKind::Snr => "snr",
            SweepKind::Size => "size",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultsFile {
    pub sweep: SweepKind,
    pub config: ExperimentConfig,
    pub rows: Vec<ResultRow>,
}

fn join<T>(xs: &[T], f: impl Fn(&T) -> String) -> String {
    xs.iter().map(f).collect::<Vec<_>>().join(",")
}

pub fn write_results(results: &ResultsFile, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), |out| write_results_to(results, out))
}

pub fn write_results_to(results: &ResultsFile, out: &mut dyn Write) -> std::io::Result<()> {
    let c = &results.config;
    let b = &c.base;
    writeln!(out, "# {RESULTS_MAGIC} {FORMAT_VERSION}")?;
    writeln!(out, "# sweep = {}", results.sweep.as_str())?;
    writeln!(out, "# n_beams = {}", b.n_beams())?;
    writeln!(out, "# n_users = {}", b.n_users())?;
    writeln!(out, "# snr_db = {}", fmt_real(b.snr_db()))?;
    writeln!(out, "# alpha = {}", fmt_real(b.path_loss_exponent()))?;
    writeln!(out, "# min_radius = {}", fmt_real(b.min_radius()))?;
    writeln!(out, "# rng_seed = {}", b.rng_seed())?;
    writeln!(
        out,
        "# snr_grid_db = {}",
        join(&c.snr_grid_db, |x| fmt_real(*x))
    )?;
    writeln!(
        out,
        "# training_sizes = {}",
        join(&c.training_sizes, usize::to_string)
    )?;
    writeln!(out, "# n_test = {}", c.n_test)?;
    writeln!(out, "# k = {}", c.k)?;
    writeln!(out, "# train_fraction = {}", fmt_real(c.train_fraction))?;
    writeln!(out, "# output_path = {}", c.output_path.display())?;
    writeln!(out, "{RESULTS_COLUMNS}")?;
    for r in &results.rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            fmt_real(r.sweep_var),
            r.method,
            fmt_real(r.mean_sum_rate),
            fmt_real(r.stderr),
            r.n_samples
        )?;
    }
    Ok(())
}

pub fn read_results(path: impl AsRef<Path>) -> Result<ResultsFile> {
    let path = path.as_ref();
    let lines = read_lines(path)?;
    let err = |line: usize, kind: ParseErrorKind| Error::Parse {
        path: path.to_path_buf(),
        line,
        kind,
    };
    let hdr = |line: usize, msg: String| err(line, ParseErrorKind::MalformedHeader(msg));

    if lines.first().map(String::as_str) != Some(&format!("# {RESULTS_MAGIC} {FORMAT_VERSION}")) {
        return Err(hdr(1, "missing results magic line".into()));
    }
    let keys = [
        "sweep",
        "n_beams",
        "n_users",
        "snr_db",
        "alpha",
        "min_radius",
        "rng_seed",
        "snr_grid_db",
        "training_sizes",
        "n_test",
        "k",
        "train_fraction",
        "output_path",
    ];
    let mut values = Vec::with_capacity(keys.len());
    for (i, key) in keys.iter().enumerate() {
        let line_no = i + 2;
        let line = lines
            .get(i + 1)
            .ok_or_else(|| hdr(line_no, format!("missing `{key}`")))?;
        let prefix = format!("# {key} = ");
        let v = line
            .strip_prefix(&prefix)
            .or_else(|| (line == prefix.trim_end()).then_some(""))
            .ok_or_else(|| {
                hdr(
                    line_no,
                    format!("expected `{prefix}<value>`, found `{line}`"),
                )
            })?;
        values.push(v.to_string());
    }
    let num = |i: usize| -> Result<f64> {
        let v: f64 = values[i]
            .parse()
            .map_err(|_| hdr(i + 2, format!("`{}` is not a number", values[i])))?;
        if !v.is_finite() {
            return Err(err(i + 2, ParseErrorKind::NonFinite(values[i].clone())));
        }
        Ok(v)
    };
    let int = |i: usize| -> Result<u64> {
        values[i]
            .parse()
            .map_err(|_| hdr(i + 2, format!("`{}` is not an unsigned integer", values[i])))
    };
    let sweep = match values[0].as_str() {
        "snr" => SweepKind::Snr,
        "size" => SweepKind::Size,
        other => return Err(hdr(2, format!("unknown sweep `{other}`"))),
    };
    let base = SystemConfig::from_parts(
        int(1)? as usize,
        int(2)? as usize,
        num(3)?,
        num(4)?,
        num(5)?,
        int(6)?,
    )
    .map_err(|e| hdr(3, e.to_string()))?;
    let snr_grid_db = values[7]
        .split(',')
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| hdr(9, format!("bad snr grid entry `{s}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    let training_sizes = values[8]
        .split(',')
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<usize>()
                .map_err(|_| hdr(10, format!("bad training size `{s}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    let config = ExperimentConfig {
        base,
        snr_grid_db,
        training_sizes,
        n_test: int(9)? as usize,
        k: int(10)? as usize,
        train_fraction: num(11)?,
        output_path: PathBuf::from(&values[12]),
    };

    let table_line = keys.len() + 2;
    if lines.get(table_line - 1).map(String::as_str) != Some(RESULTS_COLUMNS) {
        return Err(hdr(
            table_line,
            format!("expected column header `{RESULTS_COLUMNS}`"),
        ));
    }
    let mut rows = Vec::new();
    for (idx, line) in lines.iter().enumerate().skip(table_line) {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |msg: String| err(line_no, ParseErrorKind::MalformedRecord(msg));
        let fields: Vec<&str> = line.split(',').collect();
        let [sweep_var, method, mean, stderr, n] = fields.as_slice() else {
            return Err(bad(format!("expected 5 fields, found {}", fields.len())));
        };
        let real = |s: &str| -> Result<f64> {
            let v: f64 = s
                .parse()
                .map_err(|_| bad(format!("`{s}` is not a number")))?;
            if !v.is_finite() {
                return Err(err(line_no, ParseErrorKind::NonFinite(s.to_string())));
            }
            Ok(v)
        };
        rows.push(ResultRow {
            sweep_var: real(sweep_var)?,
            method: method.parse::<Method>().map_err(bad)?,
            mean_sum_rate: real(mean)?,
            stderr: real(stderr)?,
            n_samples: n
                .parse()
                .map_err(|_| bad(format!("`{n}` is not a count")))?,
        });
    }
    Ok(ResultsFile {
        sweep,
        config,
        rows,
    })
}
