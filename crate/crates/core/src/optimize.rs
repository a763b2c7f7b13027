//! Search for the parameter point with the largest violation
//! `-(<B^2> - <A^2>)` subject to `d_minus > 0`.
//!
//! A multi-start grid over the box is scored in parallel, then the best
//! starts are refined with a bounded Nelder-Mead simplex in unit-cube
//! coordinates. Points with `d_minus <= 0` score `-inf`. Candidates are
//! ranked lexicographically by (violation, `d_minus`, `-b`), so the result
//! does not depend on evaluation order.

use std::cmp::Ordering;
use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::qubit::{ObservableParams, QubitState};
use crate::witness::{d_minus_closed_form, predict, TestPrediction};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn pinned(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    pub fn is_pinned(&self) -> bool {
        self.lo == self.hi
    }

    fn at(&self, t: f64) -> f64 {
        if self.is_pinned() {
            self.lo
        } else {
            self.lo + (self.hi - self.lo) * t.clamp(0.0, 1.0)
        }
    }
}

/// How the state angle is handled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateSearch {
    /// Optimize `psi` jointly within the interval.
    Free(Interval),
    /// Keep `psi` at the given angle.
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchBounds {
    pub a: Interval,
    pub b: Interval,
    pub r: Interval,
    pub beta: Interval,
    pub state: StateSearch,
}

impl Default for SearchBounds {
    fn default() -> Self {
        Self {
            a: Interval::new(0.1, 1.5),
            b: Interval::new(0.1, 1.5),
            r: Interval::new(0.0, 1.0),
            beta: Interval::new(0.0, PI),
            state: StateSearch::Free(Interval::new(-FRAC_PI_2, FRAC_PI_2)),
        }
    }
}

impl SearchBounds {
    fn axes(&self) -> [Interval; 5] {
        let psi = match self.state {
            StateSearch::Free(iv) => iv,
            StateSearch::Fixed(psi) => Interval::pinned(psi),
        };
        [self.a, self.b, self.r, self.beta, psi]
    }

    pub fn validate(&self) -> Result<()> {
        const NAMES: [&str; 5] = ["a", "b", "r", "beta", "psi"];
        for (name, iv) in NAMES.iter().zip(self.axes()) {
            if !(iv.lo.is_finite() && iv.hi.is_finite()) {
                return Err(Error::InvalidBounds {
                    axis: name,
                    reason: "bounds must be finite".into(),
                });
            }
            if iv.lo > iv.hi {
                return Err(Error::InvalidBounds {
                    axis: name,
                    reason: format!("lower {} exceeds upper {}", iv.lo, iv.hi),
                });
            }
        }
        let positive = |axis, iv: Interval| {
            if iv.lo > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidBounds {
                    axis,
                    reason: "must be strictly positive".into(),
                })
            }
        };
        positive("a", self.a)?;
        positive("b", self.b)?;
        if self.r.lo < 0.0 || self.r.hi > 1.0 {
            return Err(Error::InvalidBounds {
                axis: "r",
                reason: "must lie within [0, 1]".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerSettings {
    /// Grid points per free axis.
    pub grid_points: usize,
    /// Number of best grid points refined locally.
    pub refine_starts: usize,
    pub max_iterations: usize,
    /// Points need `d_minus` strictly above this margin.
    pub min_d_minus: f64,
    /// Stop once the simplex spread (unit-cube and objective) falls below this.
    pub tolerance: f64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            grid_points: 17,
            refine_starts: 5,
            max_iterations: 4000,
            min_d_minus: 0.0,
            tolerance: 1e-13,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Optimum {
    pub params: ObservableParams<f64>,
    pub state: QubitState<f64>,
    pub prediction: TestPrediction<f64>,
    /// Objective evaluations used.
    pub evaluations: usize,
}

/// A scored point; `x` lives in the full 5-d box `(a, b, r, beta, psi)`.
#[derive(Debug, Clone, Copy)]
struct Scored {
    x: [f64; 5],
    violation: f64,
    d_minus: f64,
}

impl Scored {
    fn rank(&self, other: &Self) -> Ordering {
        self.violation
            .total_cmp(&other.violation)
            .then(self.d_minus.total_cmp(&other.d_minus))
            .then(other.x[1].total_cmp(&self.x[1]))
            .then_with(|| {
                // final tie-break on coordinates keeps the choice total
                other
                    .x
                    .iter()
                    .zip(self.x.iter())
                    .map(|(o, s)| o.total_cmp(s))
                    .find(|o| *o != Ordering::Equal)
                    .unwrap_or(Ordering::Equal)
            })
    }
}

/// Closed-form objective for a real-amplitude state.
fn score(x: [f64; 5], min_d_minus: f64) -> Scored {
    let [a, b, r, beta, psi] = x;
    let params = ObservableParams { a, b, r, beta };
    let d_minus = d_minus_closed_form(&params);
    let violation = if d_minus > min_d_minus {
        let p0 = psi.cos().powi(2);
        let p1 = (0.5 * beta - psi).cos().powi(2);
        let square_diff = b * b * (r * p1 + 0.25 * (1.0 - r) * (1.0 - r)) - a * a * p0;
        -square_diff
    } else {
        f64::NEG_INFINITY
    };
    Scored {
        x,
        violation,
        d_minus,
    }
}

struct Problem {
    axes: [Interval; 5],
    min_d_minus: f64,
    free: Vec<usize>,
}

impl Problem {
    fn point(&self, unit: &[f64]) -> [f64; 5] {
        let mut x = self.axes.map(|iv| iv.lo);
        for (&axis, &t) in self.free.iter().zip(unit) {
            x[axis] = self.axes[axis].at(t);
        }
        x
    }

    fn unit_of(&self, x: &[f64; 5]) -> Vec<f64> {
        self.free
            .iter()
            .map(|&axis| {
                let iv = self.axes[axis];
                (x[axis] - iv.lo) / (iv.hi - iv.lo)
            })
            .collect()
    }

    fn eval(&self, unit: &[f64]) -> Scored {
        score(self.point(unit), self.min_d_minus)
    }
}

/// Bounded Nelder-Mead maximizing the ranked score; returns the best vertex
/// and the number of evaluations.
fn refine(problem: &Problem, start: &[f64], settings: &OptimizerSettings) -> (Scored, usize) {
    let dim = start.len();
    let clamp = |v: Vec<f64>| -> Vec<f64> { v.into_iter().map(|t| t.clamp(0.0, 1.0)).collect() };
    let step = 0.5 / (settings.grid_points.max(2) - 1) as f64;

    let mut simplex: Vec<(Vec<f64>, Scored)> = Vec::with_capacity(dim + 1);
    simplex.push((start.to_vec(), problem.eval(start)));
    for i in 0..dim {
        let mut v = start.to_vec();
        v[i] = if v[i] + step <= 1.0 { v[i] + step } else { v[i] - step };
        let s = problem.eval(&v);
        simplex.push((v, s));
    }
    let mut evals = dim + 1;

    for _ in 0..settings.max_iterations {
        // best first
        simplex.sort_by(|x, y| y.1.rank(&x.1));
        let best = simplex[0].1;
        let worst = simplex[dim].1;
        let spread = simplex
            .iter()
            .flat_map(|(v, _)| v.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if worst.violation.is_finite()
            && (best.violation - worst.violation).abs() < settings.tolerance
            && spread < settings.tolerance.sqrt()
        {
            break;
        }

        let centroid: Vec<f64> = (0..dim)
            .map(|j| simplex[..dim].iter().map(|(v, _)| v[j]).sum::<f64>() / dim as f64)
            .collect();
        let along = |k: f64| -> Vec<f64> {
            clamp(
                centroid
                    .iter()
                    .zip(&simplex[dim].0)
                    .map(|(c, w)| c + k * (c - w))
                    .collect(),
            )
        };
        let reflected = along(1.0);
        let fr = problem.eval(&reflected);
        evals += 1;
        let second_worst = simplex[dim - 1].1;

        if fr.rank(&best) == Ordering::Greater {
            let expanded = along(2.0);
            let fe = problem.eval(&expanded);
            evals += 1;
            simplex[dim] = if fe.rank(&fr) == Ordering::Greater {
                (expanded, fe)
            } else {
                (reflected, fr)
            };
        } else if fr.rank(&second_worst) == Ordering::Greater {
            simplex[dim] = (reflected, fr);
        } else {
            let outside = fr.rank(&worst) == Ordering::Greater;
            let contracted = if outside { along(0.5) } else { along(-0.5) };
            let fc = problem.eval(&contracted);
            evals += 1;
            let target = if outside { fr } else { worst };
            if fc.rank(&target) != Ordering::Less {
                simplex[dim] = (contracted, fc);
            } else {
                let anchor = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    let shrunk: Vec<f64> = anchor
                        .iter()
                        .zip(&vertex.0)
                        .map(|(a, v)| a + 0.5 * (v - a))
                        .collect();
                    let s = problem.eval(&shrunk);
                    *vertex = (shrunk, s);
                }
                evals += dim;
            }
        }
    }
    let best = simplex
        .iter()
        .map(|(_, s)| *s)
        .max_by(|x, y| x.rank(y))
        .expect("simplex is nonempty");
    (best, evals)
}

/// Finds the point of maximal violation within `bounds`.
///
/// Fails with [`Error::Infeasible`] when no point found has both
/// `d_minus > 0` and `<B^2> - <A^2> < 0`.
pub fn optimize(bounds: &SearchBounds, settings: &OptimizerSettings) -> Result<Optimum> {
    bounds.validate()?;
    let axes = bounds.axes();
    let free: Vec<usize> = (0..5).filter(|&i| !axes[i].is_pinned()).collect();
    let problem = Problem {
        axes,
        free,
        min_d_minus: settings.min_d_minus,
    };
    let dim = problem.free.len();
    let per_axis = settings.grid_points.max(2);
    let total = per_axis.pow(dim as u32);

    let mut grid: Vec<Scored> = (0..total)
        .into_par_iter()
        .map(|mut idx| {
            let unit: Vec<f64> = (0..dim)
                .map(|_| {
                    let k = idx % per_axis;
                    idx /= per_axis;
                    k as f64 / (per_axis - 1) as f64
                })
                .collect();
            problem.eval(&unit)
        })
        .filter(|s| s.violation.is_finite())
        .collect();
    let mut evaluations = total;
    if grid.is_empty() {
        return Err(Error::Infeasible);
    }
    grid.sort_by(|x, y| y.rank(x));
    grid.truncate(settings.refine_starts.max(1));

    let mut best = grid[0];
    if dim > 0 {
        let refined: Vec<(Scored, usize)> = grid
            .par_iter()
            .map(|start| refine(&problem, &problem.unit_of(&start.x), settings))
            .collect();
        for (s, n) in refined {
            evaluations += n;
            if s.rank(&best) == Ordering::Greater {
                best = s;
            }
        }
    }
    if !(best.violation > 0.0) {
        return Err(Error::Infeasible);
    }

    let [a, b, r, beta, psi] = best.x;
    let params = ObservableParams { a, b, r, beta };
    let state = QubitState::new(psi);
    Ok(Optimum {
        params,
        state,
        prediction: predict(&params, &state),
        evaluations,
    })
}
