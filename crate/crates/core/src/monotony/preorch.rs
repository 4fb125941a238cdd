//! Pre-OrchNets: an OrchNet skeleton plus finite grids of candidate latencies.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::net::{PlaceIx, TransitionIx};
use crate::number::ExtDate;
use crate::timed::{LatencySpec, OrchNet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PreOrchError {
    #[error("transition `{0}` belongs to no latency class")]
    Unclassified(String),
    #[error("transition `{0}` belongs to several latency classes")]
    Overlap(String),
    #[error("place `{0}` has an initial-date grid but is not minimal")]
    NotMinimal(String),
    #[error("grid of `{0}` is empty")]
    EmptyGrid(String),
    #[error("{count} grid members exceed the cap of {cap}")]
    CapExceeded { count: u128, cap: usize },
}

/// Transitions sharing one latency slot. Without a grid the slot stays at
/// the base OrchNet's specs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatencyClass {
    pub name: String,
    pub members: Vec<TransitionIx>,
    pub grid: Option<Vec<ExtDate>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InitialGrid {
    pub place: PlaceIx,
    pub grid: Vec<ExtDate>,
}

/// One point of the grid lattice: an index into each slot's grid.
pub type MemberIndex = Vec<usize>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SlotRef {
    Class(usize),
    Initial(usize),
}

#[derive(Debug, Clone)]
pub struct PreOrchNet {
    base: OrchNet,
    classes: Vec<LatencyClass>,
    initial_grids: Vec<InitialGrid>,
    upward_closed: bool,
    slots: Vec<SlotRef>,
}

fn normalize(grid: &mut Vec<ExtDate>) {
    grid.sort();
    grid.dedup();
}

impl PreOrchNet {
    pub fn new(
        base: OrchNet,
        mut classes: Vec<LatencyClass>,
        mut initial_grids: Vec<InitialGrid>,
        upward_closed: bool,
    ) -> Result<Self, PreOrchError> {
        let net = base.net();
        let mut seen = BTreeSet::new();
        for c in &mut classes {
            for &t in &c.members {
                if !seen.insert(t) {
                    return Err(PreOrchError::Overlap(net.transition_id(t).to_string()));
                }
            }
            if let Some(g) = &mut c.grid {
                if g.is_empty() {
                    return Err(PreOrchError::EmptyGrid(c.name.clone()));
                }
                normalize(g);
            }
        }
        if let Some(t) = net.transitions().find(|t| !seen.contains(t)) {
            return Err(PreOrchError::Unclassified(net.transition_id(t).to_string()));
        }
        for g in &mut initial_grids {
            let id = net.place_id(g.place);
            if base.initial_spec(g.place).is_none() {
                return Err(PreOrchError::NotMinimal(id.to_string()));
            }
            if g.grid.is_empty() {
                return Err(PreOrchError::EmptyGrid(id.to_string()));
            }
            normalize(&mut g.grid);
        }
        let slots = classes
            .iter()
            .enumerate()
            .filter(|(_, c)| c.grid.is_some())
            .map(|(k, _)| SlotRef::Class(k))
            .chain((0..initial_grids.len()).map(SlotRef::Initial))
            .collect();
        Ok(PreOrchNet {
            base,
            classes,
            initial_grids,
            upward_closed,
            slots,
        })
    }

    /// Every transition in its own class, all sharing `grid`.
    pub fn uniform(base: OrchNet, grid: Vec<ExtDate>, upward_closed: bool) -> Result<Self, PreOrchError> {
        let net = base.net();
        let classes = net
            .transitions()
            .map(|t| LatencyClass {
                name: net.transition_id(t).to_string(),
                members: vec![t],
                grid: Some(grid.clone()),
            })
            .collect();
        PreOrchNet::new(base, classes, Vec::new(), upward_closed)
    }

    pub fn base(&self) -> &OrchNet {
        &self.base
    }

    pub fn classes(&self) -> &[LatencyClass] {
        &self.classes
    }

    pub fn initial_grids(&self) -> &[InitialGrid] {
        &self.initial_grids
    }

    pub fn upward_closed(&self) -> bool {
        self.upward_closed
    }

    pub fn slot_count(&self) -> usize {
        self.slots.len()
    }

    pub fn slot_grid(&self, k: usize) -> &[ExtDate] {
        match self.slots[k] {
            SlotRef::Class(c) => self.classes[c].grid.as_deref().expect("gridded"),
            SlotRef::Initial(i) => &self.initial_grids[i].grid,
        }
    }

    pub fn slot_name(&self, k: usize) -> String {
        match self.slots[k] {
            SlotRef::Class(c) => self.classes[c].name.clone(),
            SlotRef::Initial(i) => self.base.net().place_id(self.initial_grids[i].place).to_string(),
        }
    }

    pub fn grid_sizes(&self) -> Vec<usize> {
        (0..self.slot_count()).map(|k| self.slot_grid(k).len()).collect()
    }

    pub fn member_count(&self) -> u128 {
        self.grid_sizes().iter().fold(1u128, |a, &n| a.saturating_mul(n as u128))
    }

    pub fn check_cap(&self, cap: usize) -> Result<usize, PreOrchError> {
        let count = self.member_count();
        if count > cap as u128 {
            Err(PreOrchError::CapExceeded { count, cap })
        } else {
            Ok(count as usize)
        }
    }

    /// Member at lattice point `index`; grid values hold for every daemon index.
    pub fn member(&self, index: &[usize]) -> OrchNet {
        assert_eq!(index.len(), self.slot_count());
        let mut o = self.base.clone();
        for (k, &i) in index.iter().enumerate() {
            let d = LatencySpec::Const(self.slot_grid(k)[i]);
            match self.slots[k] {
                SlotRef::Class(c) => {
                    for &t in &self.classes[c].members {
                        o.set_latency(t, d.clone());
                    }
                }
                SlotRef::Initial(g) => o.set_initial_date(self.initial_grids[g].place, d),
            }
        }
        o
    }

    /// Mixed-radix decoding, first slot varying slowest.
    pub fn decode(&self, mut n: usize) -> MemberIndex {
        let sizes = self.grid_sizes();
        let mut out = vec![0; sizes.len()];
        for k in (0..sizes.len()).rev() {
            out[k] = n % sizes[k];
            n /= sizes[k];
        }
        out
    }

    pub fn encode(&self, index: &[usize]) -> usize {
        self.grid_sizes().iter().zip(index).fold(0, |acc, (&s, &i)| acc * s + i)
    }

    /// Slot name and chosen value, for reports.
    pub fn describe(&self, index: &[usize]) -> Vec<(String, ExtDate)> {
        index
            .iter()
            .enumerate()
            .map(|(k, &i)| (self.slot_name(k), self.slot_grid(k)[i]))
            .collect()
    }
}
