use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::harness::experiment::RiskEstimate;

pub const CSV_HEADER: &str = "estimator,model,beta,n,q,visibility,trials,errors,error_rate,ci_halfwidth,seed";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::InvalidArgument(format!("unknown format {other:?}"))),
        }
    }
}

/// Writes results to any sink; `label` names the sink in error messages.
pub fn write_results<W: Write>(results: &[RiskEstimate], format: OutputFormat, sink: W, label: &Path) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(sink);
            let csv_err = |source| Error::Csv {
                path: label.to_path_buf(),
                source,
            };
            // written by hand so an empty result set still gets a header
            w.write_record(CSV_HEADER.split(',')).map_err(csv_err)?;
            for r in results {
                w.serialize(r).map_err(csv_err)?;
            }
            w.flush().map_err(|e| Error::io(label, e))
        }
        OutputFormat::Json => {
            let mut sink = sink;
            serde_json::to_writer_pretty(&mut sink, results).map_err(|source| Error::Json {
                path: label.to_path_buf(),
                source,
            })?;
            writeln!(sink).map_err(|e| Error::io(label, e))
        }
    }
}

pub fn emit_results(results: &[RiskEstimate], format: OutputFormat, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_results(results, format, &mut w, path)?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn parse_results<R: Read>(source: R, format: OutputFormat, label: &Path) -> Result<Vec<RiskEstimate>> {
    match format {
        OutputFormat::Csv => {
            let mut r = csv::Reader::from_reader(source);
            let header = r.headers().map_err(|source| Error::Csv {
                path: label.to_path_buf(),
                source,
            })?;
            if header.iter().collect::<Vec<_>>().join(",") != CSV_HEADER {
                return Err(Error::Parse {
                    path: label.to_path_buf(),
                    line: 1,
                    msg: "unexpected header".into(),
                });
            }
            r.deserialize()
                .collect::<std::result::Result<_, _>>()
                .map_err(|source| Error::Csv {
                    path: label.to_path_buf(),
                    source,
                })
        }
        OutputFormat::Json => serde_json::from_reader(source).map_err(|source| Error::Json {
            path: label.to_path_buf(),
            source,
        }),
    }
}

pub fn read_results(path: &Path, format: OutputFormat) -> Result<Vec<RiskEstimate>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_results(std::io::BufReader::new(file), format, path)
}
