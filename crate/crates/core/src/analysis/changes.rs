use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::panel::ContributionPanel;
use crate::error::{Error, Result};

/// Changes strictly below this many tokens count as sticky.
pub const STICKINESS_THRESHOLD: u32 = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseRow {
    pub previous: u32,
    pub count: u64,
    /// Mean `c_t - c_{t-1}` over transitions leaving `previous`; `None` when
    /// the level is never left.
    pub mean_change: Option<f64>,
}

/// Round-to-round contribution changes, over consecutive rounds of the
/// same subject.
#[derive(Debug, Clone, PartialEq)]
pub struct ChangeStats {
    pub endowment: u32,
    /// Index `d + endowment` counts changes of `d`.
    pub delta_histogram: Vec<u64>,
    /// Index `k` counts changes of magnitude `k`.
    pub abs_histogram: Vec<u64>,
    /// `pairwise[from][to]`.
    pub pairwise: Vec<Vec<u64>>,
    pub phase: Vec<PhaseRow>,
    pub transitions: u64,
    pub small_changes: u64,
}

impl ChangeStats {
    /// Fraction of transitions with `|c_t - c_{t-1}| < 5`.
    pub fn stickiness_fraction(&self) -> f64 {
        self.small_changes as f64 / self.transitions as f64
    }

    pub fn pairwise_total(&self) -> u64 {
        self.pairwise.iter().flatten().sum()
    }

    pub fn delta_count(&self, delta: i64) -> u64 {
        let idx = delta + self.endowment as i64;
        if idx < 0 {
            return 0;
        }
        self.delta_histogram.get(idx as usize).copied().unwrap_or(0)
    }

    /// Writes the five tables into `dir` and returns the paths written.
    pub fn write_csv_bundle(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let e = self.endowment as i64;
        let mut written = Vec::new();
        let mut emit = |name: &str, header: &[&str], rows: Vec<Vec<String>>| -> Result<()> {
            let path = dir.join(name);
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(header)?;
            for row in rows {
                w.write_record(row)?;
            }
            w.flush()?;
            written.push(path);
            Ok(())
        };
        emit(
            "change_histogram.csv",
            &["change", "count"],
            self.delta_histogram
                .iter()
                .enumerate()
                .map(|(i, c)| vec![(i as i64 - e).to_string(), c.to_string()])
                .collect(),
        )?;
        emit(
            "abs_change_histogram.csv",
            &["absChange", "count"],
            self.abs_histogram
                .iter()
                .enumerate()
                .map(|(i, c)| vec![i.to_string(), c.to_string()])
                .collect(),
        )?;
        let mut header = vec!["from".to_string()];
        header.extend((0..=self.endowment).map(|t| t.to_string()));
        let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
        emit(
            "pairwise_changes.csv",
            &header_refs,
            self.pairwise
                .iter()
                .enumerate()
                .map(|(from, row)| {
                    std::iter::once(from.to_string())
                        .chain(row.iter().map(|c| c.to_string()))
                        .collect()
                })
                .collect(),
        )?;
        emit(
            "phase_diagram.csv",
            &["previous", "count", "meanChange"],
            self.phase
                .iter()
                .map(|p| {
                    vec![
                        p.previous.to_string(),
                        p.count.to_string(),
                        p.mean_change.map(|m| m.to_string()).unwrap_or_default(),
                    ]
                })
                .collect(),
        )?;
        emit(
            "change_summary.csv",
            &["transitions", "smallChanges", "threshold", "stickinessFraction"],
            vec![vec![
                self.transitions.to_string(),
                self.small_changes.to_string(),
                STICKINESS_THRESHOLD.to_string(),
                self.stickiness_fraction().to_string(),
            ]],
        )?;
        Ok(written)
    }

    pub fn write_summary<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "transitions={} small_changes={} stickiness={:.6}",
            self.transitions,
            self.small_changes,
            self.stickiness_fraction()
        )?;
        Ok(())
    }
}

pub fn change_stats(panel: &ContributionPanel) -> Result<ChangeStats> {
    let e = panel.endowment();
    let levels = e as usize + 1;
    let mut stats = ChangeStats {
        endowment: e,
        delta_histogram: vec![0; 2 * levels - 1],
        abs_histogram: vec![0; levels],
        pairwise: vec![vec![0; levels]; levels],
        phase: Vec::new(),
        transitions: 0,
        small_changes: 0,
    };
    let mut change_sum = vec![0i64; levels];
    for subject in panel.subjects() {
        let series = panel.subject_series(subject);
        for pair in series.windows(2) {
            let ((r0, c0), (r1, c1)) = (pair[0], pair[1]);
            if r1 != r0 + 1 {
                continue;
            }
            let d = c1 as i64 - c0 as i64;
            stats.delta_histogram[(d + e as i64) as usize] += 1;
            stats.abs_histogram[d.unsigned_abs() as usize] += 1;
            stats.pairwise[c0 as usize][c1 as usize] += 1;
            change_sum[c0 as usize] += d;
            stats.transitions += 1;
            if d.unsigned_abs() < STICKINESS_THRESHOLD as u64 {
                stats.small_changes += 1;
            }
        }
    }
    if stats.transitions == 0 {
        return Err(Error::TooFewRounds);
    }
    stats.phase = (0..levels)
        .map(|c| {
            let count: u64 = stats.pairwise[c].iter().sum();
            PhaseRow {
                previous: c as u32,
                count,
                mean_change: (count > 0).then(|| change_sum[c] as f64 / count as f64),
            }
        })
        .collect();
    Ok(stats)
}
