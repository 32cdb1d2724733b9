use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Where a table goes and how it is encoded.
#[derive(Debug, Clone)]
pub struct Sink {
    pub format: Format,
    pub path: Option<PathBuf>,
}

impl Sink {
    pub fn write<R: Serialize>(&self, rows: &[R]) -> io::Result<()> {
        let mut out: Box<dyn Write> = match &self.path {
            Some(p) => Box::new(io::BufWriter::new(File::create(p)?)),
            None => Box::new(io::stdout().lock()),
        };
        match self.format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(&mut out);
                for r in rows {
                    w.serialize(r).map_err(io::Error::other)?;
                }
                w.flush()?;
            }
            Format::Json => {
                serde_json::to_writer_pretty(&mut out, rows).map_err(io::Error::other)?;
                writeln!(out)?;
            }
        }
        out.flush()
    }
}

/// A gnuplot script next to `data`, plotting `y` (with an optional error
/// column) against `x`.
pub struct PlotSpec<'a> {
    pub title: &'a str,
    pub x: &'a str,
    pub y: &'a [&'a str],
    pub logscale_x: bool,
}

pub fn write_gnuplot(data: &Path, spec: &PlotSpec, header: &[&str]) -> io::Result<PathBuf> {
    let script = data.with_extension("gp");
    let png = data.with_extension("png");
    let col = |name: &str| {
        header
            .iter()
            .position(|h| *h == name)
            .map(|i| i + 1)
            .ok_or_else(|| io::Error::other(format!("no column {name}")))
    };
    let xcol = col(spec.x)?;
    let mut f = io::BufWriter::new(File::create(&script)?);
    writeln!(f, "set datafile separator ','")?;
    writeln!(f, "set key autotitle columnhead")?;
    writeln!(f, "set terminal pngcairo size 900,600")?;
    writeln!(f, "set output '{}'", png.display())?;
    writeln!(f, "set title '{}'", spec.title)?;
    writeln!(f, "set xlabel '{}'", spec.x)?;
    writeln!(f, "set grid")?;
    if spec.logscale_x {
        writeln!(f, "set logscale x")?;
    }
    let parts: Vec<String> = spec
        .y
        .iter()
        .map(|y| col(y).map(|c| format!("'{}' using {xcol}:{c} with linespoints", data.display())))
        .collect::<io::Result<_>>()?;
    writeln!(f, "plot {}", parts.join(", \\\n     "))?;
    f.flush()?;
    Ok(script)
}
