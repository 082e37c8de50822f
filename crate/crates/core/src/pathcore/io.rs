//! CSV and JSON persistence for paths and fields.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pathcore::path::Meta;
use crate::pathcore::{SampledField, SampledPath};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EnvelopeValues {
    Vector(Vec<f64>),
    Matrix(Vec<Vec<f64>>),
}

/// JSON form shared by paths (`ys` absent) and fields.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Envelope {
    pub xs: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ys: Option<Vec<f64>>,
    pub values: EnvelopeValues,
    #[serde(default)]
    pub meta: Meta,
}

impl From<SampledPath> for Envelope {
    fn from(p: SampledPath) -> Self {
        Envelope {
            xs: p.xs().to_vec(),
            ys: None,
            values: EnvelopeValues::Vector(p.values().to_vec()),
            meta: p.meta().clone(),
        }
    }
}

impl From<SampledField> for Envelope {
    fn from(f: SampledField) -> Self {
        Envelope {
            xs: f.xs().to_vec(),
            ys: Some(f.ys().to_vec()),
            values: EnvelopeValues::Matrix(f.rows()),
            meta: f.meta().clone(),
        }
    }
}

impl TryFrom<Envelope> for SampledPath {
    type Error = Error;
    fn try_from(e: Envelope) -> Result<Self> {
        match (e.ys, e.values) {
            (None, EnvelopeValues::Vector(v)) => {
                let mut p = SampledPath::new(e.xs, v)?;
                for (k, val) in e.meta {
                    p = p.with_meta(k, val);
                }
                Ok(p)
            }
            _ => Err(Error::invalid("envelope does not describe a path")),
        }
    }
}

impl TryFrom<Envelope> for SampledField {
    type Error = Error;
    fn try_from(e: Envelope) -> Result<Self> {
        match (e.ys, e.values) {
            (Some(ys), EnvelopeValues::Matrix(rows)) => {
                let mut f = SampledField::from_rows(e.xs, ys, &rows)?;
                for (k, val) in e.meta {
                    f = f.with_meta(k, val);
                }
                Ok(f)
            }
            _ => Err(Error::invalid("envelope does not describe a field")),
        }
    }
}

impl Serialize for SampledPath {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        Envelope::from(self.clone()).serialize(s)
    }
}

impl<'de> Deserialize<'de> for SampledPath {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let e = Envelope::deserialize(d)?;
        SampledPath::try_from(e).map_err(serde::de::Error::custom)
    }
}

impl Serialize for SampledField {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        Envelope::from(self.clone()).serialize(s)
    }
}

impl<'de> Deserialize<'de> for SampledField {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let e = Envelope::deserialize(d)?;
        SampledField::try_from(e).map_err(serde::de::Error::custom)
    }
}

fn parse_cell(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::invalid(format!("cannot parse `{s}` as a number")))
}

/// Columns `x,value`.
pub fn write_path_csv<W: Write>(path: &SampledPath, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["x", "value"])?;
    for (x, v) in path.xs().iter().zip(path.values()) {
        wr.write_record([x.to_string(), v.to_string()])?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_path_csv<R: Read>(r: R) -> Result<SampledPath> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let (mut xs, mut vs) = (Vec::new(), Vec::new());
    for rec in rd.records() {
        let rec = rec?;
        if rec.len() != 2 {
            return Err(Error::invalid("path CSV rows need exactly two columns"));
        }
        xs.push(parse_cell(&rec[0])?);
        vs.push(parse_cell(&rec[1])?);
    }
    SampledPath::new(xs, vs)
}

/// Rectangular matrix: header row holds the second axis, first column the first axis.
pub fn write_field_csv<W: Write>(field: &SampledField, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let mut header = vec!["x\\y".to_string()];
    header.extend(field.ys().iter().map(|y| y.to_string()));
    wr.write_record(&header)?;
    for (i, x) in field.xs().iter().enumerate() {
        let mut rec = vec![x.to_string()];
        rec.extend(field.row(i).iter().map(|v| v.to_string()));
        wr.write_record(&rec)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_field_csv<R: Read>(r: R) -> Result<SampledField> {
    let mut rd = csv::ReaderBuilder::new().has_headers(false).from_reader(r);
    let mut records = rd.records();
    let header = records
        .next()
        .ok_or_else(|| Error::invalid("empty field CSV"))??;
    let ys = header.iter().skip(1).map(parse_cell).collect::<Result<Vec<_>>>()?;
    let (mut xs, mut values) = (Vec::new(), Vec::new());
    for rec in records {
        let rec = rec?;
        if rec.len() != ys.len() + 1 {
            return Err(Error::invalid("ragged field CSV"));
        }
        xs.push(parse_cell(&rec[0])?);
        for cell in rec.iter().skip(1) {
            values.push(parse_cell(cell)?);
        }
    }
    SampledField::new(xs, ys, values)
}
