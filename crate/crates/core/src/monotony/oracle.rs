//! Brute-force oracle over the grid lattice of a pre-OrchNet.
//!
//! Members are ordered pointwise by grid index. Instead of testing every
//! comparable pair, a pass in code order keeps `F(m)`, the largest `E` over
//! the members strictly below `m`; there is a violating pair with `hi = m`
//! exactly when `E(m) < F(m)`. Covering steps reach every lower member, so
//! this sees the same pairs as the quadratic scan.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use super::{CheckOptions, MonotonyVerdict, Outcome, PairWitness, PreOrchNet};
use crate::number::ExtDate;
use crate::timed::{execute_parts, ExecError, TieBreak, Value};

pub(super) type RunOutcome = (ExtDate, BTreeSet<Value>);

/// Outcomes of every run of every member at every daemon index.
pub(super) struct Table {
    pub sizes: Vec<usize>,
    pub runs: Vec<Vec<Vec<RunOutcome>>>,
    pub omega_count: usize,
}

impl Table {
    pub fn build(pre: &PreOrchNet, tie_break: TieBreak) -> Result<Table, ExecError> {
        let base = pre.base();
        let omega_count = base.omega_count();
        let shared: Vec<(Vec<Value>, Vec<bool>)> =
            (0..omega_count).map(|w| base.evaluate_values(w)).collect::<Result<_, _>>()?;
        let n = pre.member_count() as usize;
        let runs = (0..n)
            .into_par_iter()
            .map(|m| {
                let member = pre.member(&pre.decode(m));
                (0..omega_count)
                    .map(|w| {
                        let (values, guards) = &shared[w];
                        let dates = member.evaluate_dates(w, values, guards)?;
                        Ok(execute_parts(&member, w, &dates, values, guards, tie_break)
                            .into_iter()
                            .map(|r| (r.end_to_end, r.values))
                            .collect())
                    })
                    .collect::<Result<Vec<_>, ExecError>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Table {
            sizes: pre.grid_sizes(),
            runs,
            omega_count,
        })
    }

    fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.sizes.len()];
        for k in (0..self.sizes.len().saturating_sub(1)).rev() {
            s[k] = s[k + 1] * self.sizes[k + 1];
        }
        s
    }

    /// Lower covers of member `m`.
    fn below(&self, strides: &[usize], m: usize) -> impl Iterator<Item = usize> + '_ {
        let strides = strides.to_vec();
        (0..self.sizes.len()).filter_map(move |k| {
            if (m / strides[k]).is_multiple_of(self.sizes[k]) {
                None
            } else {
                Some(m - strides[k])
            }
        })
    }

    /// First `(omega, hi)` in canonical order with some lower member `lo`
    /// and runs `rh`, `rl` such that `E(rh) < E(rl)`. With `keyed`, only
    /// runs returning the same value set are compared.
    pub fn search(&self, keyed: bool) -> Option<Found> {
        let strides = self.strides();
        let n = self.runs.len();
        for w in 0..self.omega_count {
            let mut ids: BTreeMap<&BTreeSet<Value>, usize> = BTreeMap::new();
            if keyed {
                for m in 0..n {
                    for (_, v) in &self.runs[m][w] {
                        let next = ids.len();
                        ids.entry(v).or_insert(next);
                    }
                }
            }
            let groups = ids.len().max(1);
            let key = |v: &BTreeSet<Value>| if keyed { ids[v] } else { 0 };
            // best[m * groups + g] = (E, member, run) maximizing E at or below m.
            let mut best: Vec<Option<(ExtDate, usize, usize)>> = vec![None; n * groups];
            for m in 0..n {
                let mut strict: Vec<Option<(ExtDate, usize, usize)>> = vec![None; groups];
                for b in self.below(&strides, m) {
                    for g in 0..groups {
                        if let Some(c) = best[b * groups + g] {
                            if strict[g].is_none_or(|s| c.0 > s.0) {
                                strict[g] = Some(c);
                            }
                        }
                    }
                }
                for (r, (e, v)) in self.runs[m][w].iter().enumerate() {
                    if let Some((e_lo, lo, lr)) = strict[key(v)] {
                        if *e < e_lo {
                            return Some(Found {
                                omega: w,
                                hi: m,
                                hi_run: r,
                                lo,
                                lo_run: lr,
                            });
                        }
                    }
                }
                let mut own = strict;
                for (r, (e, v)) in self.runs[m][w].iter().enumerate() {
                    let g = key(v);
                    if own[g].is_none_or(|s| *e > s.0) {
                        own[g] = Some((*e, m, r));
                    }
                }
                best[m * groups..(m + 1) * groups].copy_from_slice(&own);
            }
        }
        None
    }

    pub fn witness(&self, pre: &PreOrchNet, f: &Found, tie_break: TieBreak) -> PairWitness {
        let (lo_idx, hi_idx) = (pre.decode(f.lo), pre.decode(f.hi));
        let (e_lo, v_lo) = self.runs[f.lo][f.omega][f.lo_run].clone();
        let (e_hi, v_hi) = self.runs[f.hi][f.omega][f.hi_run].clone();
        PairWitness {
            lo: pre.member(&lo_idx),
            hi: pre.member(&hi_idx),
            omega: f.omega,
            tie_break,
            e_lo,
            e_hi,
            v_lo,
            v_hi,
            lo_member: Some(pre.describe(&lo_idx)),
            hi_member: Some(pre.describe(&hi_idx)),
        }
    }
}

pub(super) struct Found {
    pub omega: usize,
    pub hi: usize,
    pub hi_run: usize,
    pub lo: usize,
    pub lo_run: usize,
}

/// Searches the whole grid for `hi >= lo` with `E(hi) < E(lo)`.
pub fn brute_force_monotony(pre: &PreOrchNet, opts: &CheckOptions) -> Result<MonotonyVerdict, ExecError> {
    if let Err(e) = pre.check_cap(opts.member_cap) {
        return Ok(MonotonyVerdict::undecided(e.to_string()));
    }
    let table = Table::build(pre, opts.tie_break)?;
    Ok(match table.search(false) {
        Some(f) => {
            let mut v = MonotonyVerdict::new(Outcome::NonMonotonic);
            v.pair = Some(table.witness(pre, &f, opts.tie_break));
            v
        }
        None => {
            let mut v = MonotonyVerdict::new(Outcome::Monotonic);
            v.grid_relative = true;
            v.notes.push(format!("monotonic over the {} grid members only", table.runs.len()));
            v
        }
    })
}
