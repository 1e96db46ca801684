//! Important and very important cubes, relative to an enumerated set of
//! near-optimal paths.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::Serialize;

use super::flip::InfluenceRecord;
use crate::env::{Environment, SiteIndex};
use crate::error::{Error, Result};
use crate::solver::{backtrack_paths, occupation_times, PathRecord, PathSet, ValueTable};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SurveyParams {
    pub delta: f64,
    pub max_paths: usize,
    /// Side of the boxes used for the important-cube counts.
    pub m: usize,
    /// Repeat at `delta / 10` and compare.
    pub check_nesting: bool,
}

impl SurveyParams {
    pub fn new(delta: f64, m: usize) -> Self {
        SurveyParams { delta, max_paths: 10_000, m, check_nesting: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ImportanceSurvey {
    pub env_seed: u64,
    pub delta: f64,
    pub paths: usize,
    /// The path enumeration hit its cap; the classification is relative to a subset.
    pub partial: bool,
    /// Cubes visited by some enumerated path.
    pub visited: BTreeSet<SiteIndex>,
    pub important: BTreeSet<SiteIndex>,
    pub very_important: BTreeSet<SiteIndex>,
    /// For each `j`, the number of important `k` with `j - k` in `[0, m-1]^d`.
    #[serde(serialize_with = "pairs")]
    pub lambda_counts: BTreeMap<SiteIndex, usize>,
    /// Every enumerated path is displaced by at least `t^(1/4)`.
    pub g_event: bool,
    /// Paths at `delta/10` are a subset of those at `delta`, and importance at
    /// `delta` implies importance at `delta/10`.
    pub nested: Option<bool>,
}

fn pairs<S: serde::Serializer>(map: &BTreeMap<SiteIndex, usize>, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(map.iter())
}

impl ImportanceSurvey {
    pub fn is_important(&self, j: &[i64]) -> bool {
        self.important.contains(&SiteIndex::new(j.to_vec()))
    }

    pub fn is_very_important(&self, j: &[i64]) -> bool {
        self.very_important.contains(&SiteIndex::new(j.to_vec()))
    }

    pub fn max_lambda(&self) -> usize {
        self.lambda_counts.values().copied().max().unwrap_or(0)
    }

    /// Copies the flags onto an influence record.
    pub fn annotate(&self, rec: &mut InfluenceRecord) {
        rec.important = Some(self.important.contains(&rec.site));
        rec.very_important = Some(self.very_important.contains(&rec.site));
    }
}

/// True iff every path satisfies `|gamma(t) - gamma(0)| >= t^(1/4)`.
pub fn diagnose_displacement(paths: &[PathRecord], t: f64) -> bool {
    !paths.is_empty() && paths.iter().all(|p| p.displacement() >= t.powf(0.25))
}

struct Classified {
    visited: BTreeSet<SiteIndex>,
    important: BTreeSet<SiteIndex>,
    very_important: BTreeSet<SiteIndex>,
}

fn classify(set: &PathSet, env: &Environment) -> Result<Classified> {
    let mut visited = BTreeSet::new();
    let mut common: Option<BTreeSet<SiteIndex>> = None;
    for p in &set.paths {
        let cubes: BTreeSet<SiteIndex> = occupation_times(p).into_iter().filter(|(_, v)| *v > 0.0).map(|(k, _)| k).collect();
        visited.extend(cubes.iter().cloned());
        common = Some(match common {
            None => cubes,
            Some(c) => c.intersection(&cubes).cloned().collect(),
        });
    }
    let mut important = BTreeSet::new();
    for j in common.unwrap_or_default() {
        if !env.is_b(&j.0)? {
            important.insert(j);
        }
    }
    let mut very_important = BTreeSet::new();
    for j in &important {
        let mut all_b = true;
        for l in &visited {
            if l != j && !env.is_b(&l.0)? {
                all_b = false;
                break;
            }
        }
        if all_b {
            very_important.insert(j.clone());
        }
    }
    Ok(Classified { visited, important, very_important })
}

fn lambda_counts(important: &BTreeSet<SiteIndex>, m: usize) -> BTreeMap<SiteIndex, usize> {
    let mut out = BTreeMap::new();
    for k in important {
        let d = k.dim();
        let mut z = vec![0i64; d];
        'outer: loop {
            let j: Vec<i64> = k.0.iter().zip(&z).map(|(a, b)| a + b).collect();
            *out.entry(SiteIndex(j)).or_insert(0) += 1;
            for i in (0..d).rev() {
                if z[i] + 1 < m as i64 {
                    z[i] += 1;
                    continue 'outer;
                }
                z[i] = 0;
            }
            break;
        }
    }
    out
}

/// Classifies cubes from the `delta`-paths of a solved table.
pub fn classify_importance(table: &ValueTable, env: &Environment, params: &SurveyParams) -> Result<ImportanceSurvey> {
    if !(params.delta > 0.0) {
        return Err(Error::param("survey.delta", "must be positive"));
    }
    if params.m == 0 {
        return Err(Error::param("survey.m", "must be positive"));
    }
    if table.u() - params.delta < table.floor() {
        return Err(Error::param("survey.delta", "exceeds the band resolved by the table"));
    }
    let set = backtrack_paths(table, env, params.delta, params.max_paths)?;
    let c = classify(&set, env)?;
    let nested = if params.check_nesting && !set.truncated {
        let fine = backtrack_paths(table, env, params.delta / 10.0, params.max_paths)?;
        if fine.truncated {
            None
        } else {
            let coarse: BTreeSet<&Vec<Vec<i64>>> = set.paths.iter().map(|p| &p.nodes).collect();
            let paths_nested = fine.paths.iter().all(|p| coarse.contains(&p.nodes));
            let cf = classify(&fine, env)?;
            Some(paths_nested && c.important.is_subset(&cf.important))
        }
    } else {
        None
    };
    Ok(ImportanceSurvey {
        env_seed: env.seed(),
        delta: params.delta,
        paths: set.paths.len(),
        partial: set.truncated,
        lambda_counts: lambda_counts(&c.important, params.m),
        visited: c.visited,
        important: c.important,
        very_important: c.very_important,
        g_event: diagnose_displacement(&set.paths, table.inputs().params.horizon),
        nested,
    })
}

/// CSV with one row per record.
pub fn write_survey_csv<W: Write>(mut w: W, env_seed: u64, g_flag: bool, records: &[InfluenceRecord]) -> Result<()> {
    let d = records.first().map_or(2, |r| r.site.dim());
    let js: Vec<String> = (0..d).map(|i| format!("j{i}")).collect();
    writeln!(w, "env_seed,{},omega_j,u,sigma_u,rho,delta_weighted,important,very_important,G_flag", js.join(","))?;
    let flag = |b: Option<bool>| b.map_or(String::new(), |v| (v as u8).to_string());
    for r in records {
        let coords: Vec<String> = r.site.0.iter().map(|v| v.to_string()).collect();
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            env_seed,
            coords.join(","),
            r.omega,
            r.u,
            r.sigma_u,
            r.rho,
            r.delta_weighted,
            flag(r.important),
            flag(r.very_important),
            g_flag as u8
        )?;
    }
    Ok(())
}
