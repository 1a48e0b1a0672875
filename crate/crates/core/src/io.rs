//! Stable file formats: the JSON mode-set document, the per-type sample
//! CSV, the solution document, and the demand CSV.

use serde::{Deserialize, Serialize};

use crate::bounds;
use crate::domain::{CostParams, ModeSet, ModeStats};
use crate::error::{Error, Result};
use crate::solver::Solution;

/// One row of the mode-set document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeRecord {
    pub name: String,
    pub mean: f64,
    pub std: f64,
    pub semivariance: f64,
    pub prob: f64,
}

/// Parses the JSON mode-set document: an array of
/// `{"name", "mean", "std", "semivariance", "prob"}` objects.
pub fn parse_mode_document(text: &str) -> Result<(ModeSet, Vec<String>)> {
    let records: Vec<ModeRecord> =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    mode_set_from_records(&records)
}

pub fn mode_set_from_records(records: &[ModeRecord]) -> Result<(ModeSet, Vec<String>)> {
    let modes: Vec<ModeStats> = records
        .iter()
        .map(|r| ModeStats::new(r.mean, r.std, r.semivariance, r.prob))
        .collect();
    let names = records.iter().map(|r| r.name.clone()).collect();
    Ok((ModeSet::new(modes)?, names))
}

pub fn mode_document(mode_set: &ModeSet, names: &[String]) -> Vec<ModeRecord> {
    mode_set
        .modes()
        .iter()
        .zip(names)
        .map(|(m, name)| ModeRecord {
            name: name.clone(),
            mean: m.mean,
            std: m.std_dev,
            semivariance: m.semivariance,
            prob: m.nominal_prob,
        })
        .collect()
}

/// Parses the sample CSV with header `type_id,duration_min`; type ids are
/// 1-based and need not be contiguous in the file, but define the mode
/// count as the largest id seen. Returns per-mode sample vectors.
pub fn parse_samples_csv(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == "type_id,duration_min" => {}
        Some((_, header)) => {
            return Err(Error::Parse(format!(
                "expected header 'type_id,duration_min', found {header:?}"
            )))
        }
        None => return Err(Error::Parse("empty sample file".into())),
    }
    let mut by_mode: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let id: usize = parts
            .next()
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| Error::Parse(format!("bad type_id on line {}", lineno + 1)))?;
        let value: f64 = parts
            .next()
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| Error::Parse(format!("bad duration on line {}", lineno + 1)))?;
        if id == 0 {
            return Err(Error::Parse(format!(
                "type ids are 1-based; got 0 on line {}",
                lineno + 1
            )));
        }
        if by_mode.len() < id {
            by_mode.resize(id, Vec::new());
        }
        by_mode[id - 1].push(value);
    }
    Ok(by_mode)
}

/// Writes per-mode samples in the sample CSV format.
pub fn samples_to_csv(samples: &[Vec<f64>]) -> String {
    let mut out = String::from("type_id,duration_min\n");
    for (mode, xs) in samples.iter().enumerate() {
        for x in xs {
            out.push_str(&format!("{},{}\n", mode + 1, x));
        }
    }
    out
}

/// Parses the demand CSV with header `date,group_id,count` into per-day
/// per-group counts (group ids 1-based, days keyed by the date string in
/// first-appearance order).
pub fn parse_demand_csv(text: &str, n_groups: usize) -> Result<Vec<Vec<u64>>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == "date,group_id,count" => {}
        Some((_, header)) => {
            return Err(Error::Parse(format!(
                "expected header 'date,group_id,count', found {header:?}"
            )))
        }
        None => return Err(Error::Parse("empty demand file".into())),
    }
    let mut days: Vec<(String, Vec<u64>)> = Vec::new();
    for (lineno, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!("bad demand row on line {}", lineno + 1)));
        }
        let date = parts[0].trim().to_string();
        let group: usize = parts[1]
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad group_id on line {}", lineno + 1)))?;
        let count: u64 = parts[2]
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad count on line {}", lineno + 1)))?;
        if group == 0 || group > n_groups {
            return Err(Error::Parse(format!(
                "group_id {group} outside 1..={n_groups} on line {}",
                lineno + 1
            )));
        }
        let day = match days.iter_mut().find(|(d, _)| *d == date) {
            Some((_, counts)) => counts,
            None => {
                days.push((date, vec![0; n_groups]));
                &mut days.last_mut().unwrap().1
            }
        };
        day[group - 1] += count;
    }
    Ok(days.into_iter().map(|(_, counts)| counts).collect())
}

/// Per-group block of the solution document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerGroupDoc {
    /// 1-based mode indices of the group's members.
    pub modes: Vec<usize>,
    pub duration: f64,
    pub worst_cost: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
}

/// JSON shape of a solved template. Mode indices are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionDoc {
    pub partition: Vec<Vec<usize>>,
    pub durations: Vec<f64>,
    pub objective: f64,
    pub per_group: Vec<PerGroupDoc>,
}

pub fn solution_doc(solution: &Solution, mode_set: &ModeSet, costs: &CostParams) -> SolutionDoc {
    let partition: Vec<Vec<usize>> = solution
        .partition
        .groups()
        .iter()
        .map(|g| g.iter().map(|&l| l + 1).collect())
        .collect();
    let per_group = solution
        .partition
        .groups()
        .iter()
        .zip(&solution.group_solutions)
        .map(|(g, gs)| {
            let b = bounds::group_bounds(g, mode_set, costs);
            PerGroupDoc {
                modes: g.iter().map(|&l| l + 1).collect(),
                duration: gs.duration,
                worst_cost: gs.worst_cost,
                lower_bound: b.lower,
                upper_bound: b.upper,
            }
        })
        .collect();
    SolutionDoc {
        partition,
        durations: solution.group_solutions.iter().map(|g| g.duration).collect(),
        objective: solution.objective,
        per_group,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_document_round_trip() {
        let text = r#"[
            {"name": "30-min", "mean": 48.70, "std": 31.15, "semivariance": 0.59, "prob": 0.5},
            {"name": "60-min", "mean": 73.24, "std": 39.65, "semivariance": 0.47, "prob": 0.5}
        ]"#;
        let (ms, names) = parse_mode_document(text).unwrap();
        assert_eq!(names, vec!["30-min", "60-min"]);
        assert_eq!(ms.len(), 2);
        let records = mode_document(&ms, &names);
        assert_eq!(records[0].mean, 48.70);
    }

    #[test]
    fn samples_csv_round_trip() {
        let samples = vec![vec![10.0, 20.5], vec![31.0]];
        let text = samples_to_csv(&samples);
        assert!(text.starts_with("type_id,duration_min\n"));
        let parsed = parse_samples_csv(&text).unwrap();
        assert_eq!(parsed, samples);
    }

    #[test]
    fn samples_csv_rejects_bad_header() {
        assert!(matches!(
            parse_samples_csv("id,minutes\n1,10\n"),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn demand_csv_aggregates_by_day() {
        let text = "date,group_id,count\n2024-01-01,1,3\n2024-01-01,2,4\n2024-01-02,1,6\n";
        let days = parse_demand_csv(text, 2).unwrap();
        assert_eq!(days, vec![vec![3, 4], vec![6, 0]]);
    }

    #[test]
    fn demand_csv_checks_group_range() {
        let text = "date,group_id,count\n2024-01-01,3,3\n";
        assert!(parse_demand_csv(text, 2).is_err());
    }
}
