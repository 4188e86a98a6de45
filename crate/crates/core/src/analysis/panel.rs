use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ot::ActionDistribution;

pub const DEFAULT_ENDOWMENT: u32 = 40;

const COLUMNS: [&str; 4] = ["subject", "group", "round", "contribution"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PanelRecord {
    pub subject: String,
    pub group: String,
    /// 1-indexed.
    pub round: u32,
    pub contribution: u32,
}

/// Contribution records, one per `(subject, round)`. Subjects keep their
/// order of first appearance; each subject's records are sorted by round.
#[derive(Debug, Clone, PartialEq)]
pub struct ContributionPanel {
    endowment: u32,
    subjects: Vec<String>,
    records: Vec<PanelRecord>,
}

/// Which records a historical policy is built from.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Scope {
    #[default]
    Pooled,
    Subject(String),
}

impl ContributionPanel {
    pub fn new(records: Vec<PanelRecord>, endowment: u32) -> Result<Self> {
        let numbered = records
            .into_iter()
            .enumerate()
            .map(|(i, r)| (i as u64 + 1, r))
            .collect();
        Self::from_numbered(numbered, endowment)
    }

    fn from_numbered(records: Vec<(u64, PanelRecord)>, endowment: u32) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::EmptyPanel);
        }
        let mut seen = HashSet::new();
        let mut order: HashMap<String, usize> = HashMap::new();
        let mut subjects = Vec::new();
        for (line, r) in &records {
            if r.subject.is_empty() {
                return Err(Error::PanelRow {
                    line: *line,
                    reason: "empty subject id".into(),
                });
            }
            if r.round == 0 {
                return Err(Error::PanelRow {
                    line: *line,
                    reason: "rounds are 1-indexed".into(),
                });
            }
            if r.contribution > endowment {
                return Err(Error::PanelRow {
                    line: *line,
                    reason: format!("contribution {} outside 0..={endowment}", r.contribution),
                });
            }
            if !seen.insert((r.subject.clone(), r.round)) {
                return Err(Error::PanelRow {
                    line: *line,
                    reason: format!("duplicate record for subject {:?} round {}", r.subject, r.round),
                });
            }
            if !order.contains_key(&r.subject) {
                order.insert(r.subject.clone(), subjects.len());
                subjects.push(r.subject.clone());
            }
        }
        let mut records: Vec<PanelRecord> = records.into_iter().map(|(_, r)| r).collect();
        records.sort_by_key(|r| (order[&r.subject], r.round));
        Ok(Self {
            endowment,
            subjects,
            records,
        })
    }

    pub fn endowment(&self) -> u32 {
        self.endowment
    }

    /// Number of contribution levels, `endowment + 1`.
    pub fn action_count(&self) -> usize {
        self.endowment as usize + 1
    }

    pub fn records(&self) -> &[PanelRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn subjects(&self) -> &[String] {
        &self.subjects
    }

    /// Sorted distinct rounds present in the panel.
    pub fn rounds(&self) -> Vec<u32> {
        let mut r: Vec<u32> = self.records.iter().map(|r| r.round).collect();
        r.sort_unstable();
        r.dedup();
        r
    }

    /// `(round, contribution)` pairs of one subject, in round order.
    pub fn subject_series(&self, subject: &str) -> Vec<(u32, u32)> {
        self.records
            .iter()
            .filter(|r| r.subject == subject)
            .map(|r| (r.round, r.contribution))
            .collect()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for r in &self.records {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }
}

pub fn load_panel(path: impl AsRef<Path>) -> Result<ContributionPanel> {
    read_panel(File::open(path)?, DEFAULT_ENDOWMENT)
}

/// Reads `subject,group,round,contribution` CSV (extra columns ignored).
/// Row errors carry the 1-based file line.
pub fn read_panel<R: Read>(reader: R, endowment: u32) -> Result<ContributionPanel> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(Error::EmptyPanel);
    }
    let mut index = [0usize; 4];
    for (slot, name) in index.iter_mut().zip(COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or(Error::MissingColumn(name))?;
    }
    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let field = |k: usize| row.get(index[k]).unwrap_or("");
        let number = |k: usize| {
            field(k).parse::<u32>().map_err(|e| Error::PanelRow {
                line,
                reason: format!("{} {:?}: {e}", COLUMNS[k], field(k)),
            })
        };
        records.push((
            line,
            PanelRecord {
                subject: field(0).to_string(),
                group: field(1).to_string(),
                round: number(2)?,
                contribution: number(3)?,
            },
        ));
    }
    ContributionPanel::from_numbered(records, endowment)
}

/// Empirical frequency of contributions in rounds `1..=up_to`.
pub fn historical_policy(
    panel: &ContributionPanel,
    scope: &Scope,
    up_to: u32,
) -> Result<ActionDistribution> {
    let actions: Vec<usize> = panel
        .records
        .iter()
        .filter(|r| r.round <= up_to)
        .filter(|r| match scope {
            Scope::Pooled => true,
            Scope::Subject(s) => &r.subject == s,
        })
        .map(|r| r.contribution as usize)
        .collect();
    if actions.is_empty() {
        return Err(Error::NoDataBeforeRound(up_to));
    }
    ActionDistribution::empirical(panel.action_count(), &actions)
}
