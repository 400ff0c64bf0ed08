//! CSV and JSON forms of the computed curves.
//!
//! Floats are written in their shortest round-trip form, so reading a file
//! back and writing it again reproduces it byte for byte.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use polar_marginals::{BivariateNormalParams, CaseLabel, DensityCurve, PolarGrid, SeriesControl};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const CSV_HEADER: [&str; 2] = ["abscissa", "density"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

pub fn write_curve_csv<W: Write>(out: W, curve: &DensityCurve) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in curve.iter() {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_curve_csv<R: Read>(input: R) -> Result<DensityCurve, CliError> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(|e| CliError::Format(e.to_string()))?;
    if header.iter().ne(CSV_HEADER) {
        return Err(CliError::Format(format!("expected header abscissa,density, got {}", header.iter().collect::<Vec<_>>().join(","))));
    }
    let mut abscissa = Vec::new();
    let mut density = Vec::new();
    for row in r.deserialize::<(f64, f64)>() {
        let (x, y) = row.map_err(|e| CliError::Format(e.to_string()))?;
        abscissa.push(x);
        density.push(y);
    }
    DensityCurve::new(abscissa, density).map_err(|e| CliError::Format(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsDoc {
    pub mu_x: f64,
    pub mu_y: f64,
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveDoc {
    pub abscissa: Vec<f64>,
    pub density: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDoc {
    pub n_theta: usize,
    pub n_r: usize,
    pub r_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesDoc {
    pub tol: f64,
    pub k_max: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaDoc {
    pub method: String,
    pub grid: GridDoc,
    pub series_control: SeriesDoc,
    pub version: String,
}

/// One JSON output file: both marginals of one method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalsDoc {
    pub params: ParamsDoc,
    pub case: String,
    pub theta_marginal: CurveDoc,
    pub r_marginal: CurveDoc,
    pub meta: MetaDoc,
}

impl MarginalsDoc {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        params: &BivariateNormalParams,
        case: CaseLabel,
        method: &str,
        theta: &DensityCurve,
        r: &DensityCurve,
        grid: &PolarGrid,
        ctl: &SeriesControl,
    ) -> Self {
        let curve = |c: &DensityCurve| CurveDoc { abscissa: c.abscissa().to_vec(), density: c.density().to_vec() };
        MarginalsDoc {
            params: ParamsDoc {
                mu_x: params.mu_x,
                mu_y: params.mu_y,
                sigma_x: params.sigma_x,
                sigma_y: params.sigma_y,
                rho: params.rho,
            },
            case: case.letter().to_string(),
            theta_marginal: curve(theta),
            r_marginal: curve(r),
            meta: MetaDoc {
                method: method.to_string(),
                grid: GridDoc { n_theta: grid.n_theta(), n_r: grid.n_r(), r_max: grid.r_max() },
                series_control: SeriesDoc { tol: ctl.tol, k_max: ctl.k_max },
                version: env!("CARGO_PKG_VERSION").to_string(),
            },
        }
    }

    /// Checks the document describes valid parameters and curves.
    pub fn validate(&self) -> Result<(), CliError> {
        let p = &self.params;
        BivariateNormalParams::new(p.mu_x, p.mu_y, p.sigma_x, p.sigma_y, p.rho).map_err(|e| CliError::Format(e.to_string()))?;
        let mut letters = self.case.chars();
        match (letters.next().and_then(CaseLabel::from_letter), letters.next()) {
            (Some(_), None) => {}
            _ => return Err(CliError::Format(format!("unknown case {:?}", self.case))),
        }
        for c in [&self.theta_marginal, &self.r_marginal] {
            DensityCurve::new(c.abscissa.clone(), c.density.clone()).map_err(|e| CliError::Format(e.to_string()))?;
        }
        Ok(())
    }

    pub fn write<W: Write>(&self, mut out: W) -> io::Result<()> {
        serde_json::to_writer_pretty(&mut out, self)?;
        out.write_all(b"\n")?;
        out.flush()
    }

    pub fn read<R: Read>(input: R) -> Result<Self, CliError> {
        let doc: MarginalsDoc = serde_json::from_reader(input).map_err(|e| CliError::Format(e.to_string()))?;
        doc.validate()?;
        Ok(doc)
    }
}

pub(crate) fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

pub fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path).map(BufReader::new).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

pub(crate) fn write_csv_file(path: &Path, curve: &DensityCurve) -> Result<(), CliError> {
    write_curve_csv(create(path)?, curve).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(source) => CliError::Io { path: path.to_path_buf(), source },
        other => CliError::Format(format!("{other:?}")),
    })
}

pub(crate) fn write_json_file(path: &Path, doc: &MarginalsDoc) -> Result<(), CliError> {
    doc.write(create(path)?).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}
