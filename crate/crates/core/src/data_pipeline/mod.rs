//! Sample data: CSV ingestion, the ridge scorer, and synthetic scenarios.

mod ridge;
mod scenario;

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use log::warn;

pub use ridge::{ridge_score, ridge_weights, RidgeFit, ScorerSpec};
pub use scenario::{generate, nlsy_params, Generated, ScenarioKind, ScenarioParams, ScenarioSpec};

use crate::error::{Error, Result};
use crate::signal_model::{Effort, Group, ScoredSample};

/// Column layout of a sample file.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Schema {
    /// `s, e, theta`
    Scored,
    /// `s, e, x1, ..., xd`
    Featured { dim: usize },
}

impl Schema {
    pub fn header(&self) -> Vec<String> {
        let mut h = vec!["s".to_string(), "e".to_string()];
        match *self {
            Schema::Scored => h.push("theta".into()),
            Schema::Featured { dim } => h.extend((1..=dim).map(|i| format!("x{i}"))),
        }
        h
    }

    /// Infers the schema from a header row.
    pub fn from_header<S: AsRef<str>>(header: &[S]) -> Result<Self> {
        let cols: Vec<&str> = header.iter().map(|c| c.as_ref().trim()).collect();
        if cols.len() < 3 || cols[0] != "s" || cols[1] != "e" {
            return Err(Error::Parse { line: 1, message: format!("expected header s,e,... but found {}", cols.join(",")) });
        }
        if cols.len() == 3 && cols[2] == "theta" {
            return Ok(Schema::Scored);
        }
        let schema = Schema::Featured { dim: cols.len() - 2 };
        if schema.header().iter().map(String::as_str).ne(cols.iter().copied()) {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected header s,e,theta or s,e,x1..xd but found {}", cols.join(",")),
            });
        }
        Ok(schema)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Payload {
    Score(f64),
    Features(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleRecord {
    pub group: Group,
    pub effort: Effort,
    pub payload: Payload,
}

/// Records of one shape.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    schema: Schema,
    records: Vec<SampleRecord>,
}

impl Dataset {
    pub fn new(schema: Schema, records: Vec<SampleRecord>) -> Result<Self> {
        for (i, r) in records.iter().enumerate() {
            let ok = match (&r.payload, schema) {
                (Payload::Score(_), Schema::Scored) => true,
                (Payload::Features(x), Schema::Featured { dim }) => x.len() == dim,
                _ => false,
            };
            if !ok {
                return Err(Error::Config(format!("record {i} does not match schema {schema:?}")));
            }
        }
        Ok(Self { schema, records })
    }

    pub fn schema(&self) -> Schema {
        self.schema
    }

    pub fn records(&self) -> &[SampleRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Record counts indexed `[effort][group]`.
    pub fn counts(&self) -> [[usize; 2]; 2] {
        let mut c = [[0; 2]; 2];
        for r in &self.records {
            c[r.effort.index()][r.group.index()] += 1;
        }
        c
    }

    /// Share of group-1 records.
    pub fn lambda1(&self) -> Result<f64> {
        if self.records.is_empty() {
            return Err(Error::Estimation("empty dataset".into()));
        }
        let n1 = self.records.iter().filter(|r| r.group == Group::One).count();
        Ok(n1 as f64 / self.records.len() as f64)
    }

    /// Scores for density fitting; fails on a featured dataset.
    pub fn scored_samples(&self) -> Result<Vec<ScoredSample<f64>>> {
        self.records
            .iter()
            .map(|r| match r.payload {
                Payload::Score(theta) => Ok(ScoredSample { group: r.group, effort: r.effort, theta }),
                Payload::Features(_) => Err(Error::Config("dataset has features, not scores; score it first".into())),
            })
            .collect()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(self.schema.header())?;
        for r in &self.records {
            let mut row = vec![u8::from(r.group).to_string(), r.effort.as_str().to_string()];
            match &r.payload {
                Payload::Score(t) => row.push(t.to_string()),
                Payload::Features(x) => row.extend(x.iter().map(|v| v.to_string())),
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    fn warn_empty_cells(&self) {
        let c = self.counts();
        for e in Effort::ALL {
            for g in Group::ALL {
                if c[e.index()][g.index()] == 0 {
                    warn!("no records with e={e}, s={g}");
                }
            }
        }
    }
}

/// Reads a sample CSV. With `schema = None` the layout is inferred from the
/// header; otherwise the header must match it.
pub fn read_csv<R: Read>(reader: R, schema: Option<Schema>) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(reader);
    let mut rows = rdr.records();
    let header = match rows.next() {
        Some(h) => h?,
        None => return Err(Error::Parse { line: 1, message: "empty file".into() }),
    };
    let found = Schema::from_header(&header.iter().collect::<Vec<_>>())?;
    let schema = match schema {
        Some(s) if s != found => {
            return Err(Error::Parse { line: 1, message: format!("header {found:?} does not match expected {s:?}") })
        }
        _ => found,
    };
    let width = schema.header().len();
    let mut records = Vec::new();
    for row in rows {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let err = |message: String| Error::Parse { line, message };
        if row.len() != width {
            return Err(err(format!("expected {width} columns, found {}", row.len())));
        }
        let group = Group::parse(&row[0]).map_err(|e| err(e.to_string()))?;
        let effort = Effort::parse(&row[1]).map_err(|e| err(e.to_string()))?;
        let num = |i: usize| -> Result<f64> {
            let v: f64 = row[i].parse().map_err(|_| err(format!("column {} is not a number: {:?}", i + 1, &row[i])))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(err(format!("column {} is not finite", i + 1)))
            }
        };
        let payload = match schema {
            Schema::Scored => Payload::Score(num(2)?),
            Schema::Featured { dim } => Payload::Features((2..2 + dim).map(num).collect::<Result<_>>()?),
        };
        records.push(SampleRecord { group, effort, payload });
    }
    let ds = Dataset { schema, records };
    ds.warn_empty_cells();
    Ok(ds)
}

pub fn load_csv(path: &Path, schema: Option<Schema>) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    read_csv(file, schema)
}
