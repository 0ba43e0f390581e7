//! Zero set and excursion decomposition of a sampled path.
//!
//! A grid point with value exactly zero belongs to the zero set. When two
//! consecutive grid values have opposite signs, a zero is inserted at the
//! linear interpolation of the crossing. The open intervals between
//! consecutive zeros are the excursions; a path that does not start at zero
//! has an initial segment `[origin, first zero)` that is recorded but flagged
//! with `starts_at_zero = false`.

use serde::{Deserialize, Serialize};

use crate::path::{SamplePath, TimeGrid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Excursion {
    /// Left end `g` (last zero before the excursion).
    pub start: f64,
    /// Right end `d`; the horizon when the excursion is incomplete.
    pub end: f64,
    /// Sign of the path strictly inside the interval.
    pub sign: f64,
    /// `false` when the path has not returned to zero by the horizon.
    pub complete: bool,
    /// `false` only for an initial segment of a path started away from zero.
    pub starts_at_zero: bool,
    /// First and last grid indices strictly inside the interval.
    pub first: usize,
    pub last: usize,
}

impl Excursion {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }

    pub fn contains(&self, t: f64) -> bool {
        self.start < t && t < self.end
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExcursionSet {
    grid: TimeGrid,
    excursions: Vec<Excursion>,
    owner: Vec<Option<u32>>,
}

impl ExcursionSet {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn excursions(&self) -> &[Excursion] {
        &self.excursions
    }

    pub fn len(&self) -> usize {
        self.excursions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.excursions.is_empty()
    }

    /// Excursion containing grid point `k`, or `None` on the zero set.
    pub fn owner(&self, k: usize) -> Option<usize> {
        self.owner[k].map(|i| i as usize)
    }

    /// Excursion containing time `t`, if any.
    pub fn excursion_at(&self, t: f64) -> Option<usize> {
        let i = self.excursions.partition_point(|e| e.start < t);
        if i == 0 {
            return None;
        }
        self.excursions[i - 1].contains(t).then_some(i - 1)
    }

    /// Last zero `γ_t = sup{s ≤ t : Y_s = 0}`, with `sup ∅ = origin`.
    pub fn last_zero(&self, t: f64) -> f64 {
        match self.excursion_at(t) {
            Some(i) => self.excursions[i].start,
            None => t,
        }
    }

    /// Whether grid point `k` lies on the zero set.
    pub fn is_zero(&self, k: usize) -> bool {
        self.owner[k].is_none()
    }
}

pub fn decompose_excursions(path: &SamplePath) -> ExcursionSet {
    let grid = *path.grid();
    let y = path.values();
    let mut excursions: Vec<Excursion> = Vec::new();
    let mut owner = vec![None; y.len()];
    // index into `excursions` of the currently open interval
    let mut open: Option<usize> = None;

    for k in 0..y.len() {
        let v = y[k];
        if v == 0.0 {
            if let Some(i) = open.take() {
                let e = &mut excursions[i];
                e.end = grid.time(k);
                e.complete = true;
            }
            continue;
        }
        let sign = v.signum();
        match open {
            Some(i) if excursions[i].sign == sign => {
                excursions[i].last = k;
            }
            Some(i) => {
                // sign change between k-1 and k
                let a = y[k - 1].abs();
                let theta = grid.time(k - 1) + grid.dt() * a / (a + v.abs());
                let e = &mut excursions[i];
                e.end = theta;
                e.complete = true;
                excursions.push(Excursion {
                    start: theta,
                    end: grid.horizon(),
                    sign,
                    complete: false,
                    starts_at_zero: true,
                    first: k,
                    last: k,
                });
                open = Some(excursions.len() - 1);
            }
            None => {
                let (start, starts_at_zero) = if k == 0 {
                    (grid.origin(), false)
                } else {
                    (grid.time(k - 1), true)
                };
                excursions.push(Excursion {
                    start,
                    end: grid.horizon(),
                    sign,
                    complete: false,
                    starts_at_zero,
                    first: k,
                    last: k,
                });
                open = Some(excursions.len() - 1);
            }
        }
        owner[k] = open.map(|i| i as u32);
    }

    ExcursionSet {
        grid,
        excursions,
        owner,
    }
}
