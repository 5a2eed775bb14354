//! Exact feasibility of small linear programs.
//!
//! All variables are non-negative. Feasibility is decided by phase one of the
//! simplex method over arbitrary-precision rationals, with Bland's rule for
//! both the entering and the leaving variable. Rows whose slack can start in
//! the basis get no artificial variable.

use std::fmt;

use num_traits::{One, Signed, Zero};

use super::Rat;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Constraint {
    terms: Vec<(usize, Rat)>,
    cmp: Cmp,
    rhs: Rat,
}

/// A conjunction of linear constraints over named non-negative variables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinearProgram {
    names: Vec<String>,
    constraints: Vec<Constraint>,
}

/// A feasible point, one value per variable in declaration order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    names: Vec<String>,
    values: Vec<Rat>,
}

impl Witness {
    pub fn values(&self) -> &[Rat] {
        &self.values
    }

    pub fn value(&self, var: usize) -> &Rat {
        &self.values[var]
    }

    pub fn get(&self, name: &str) -> Option<&Rat> {
        self.names.iter().position(|n| n == name).map(|i| &self.values[i])
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (n, v)) in self.names.iter().zip(&self.values).enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{n} = {v}")?;
        }
        Ok(())
    }
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares a fresh variable `≥ 0` and returns its index.
    pub fn var(&mut self, name: impl Into<String>) -> usize {
        self.names.push(name.into());
        self.names.len() - 1
    }

    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// Adds `Σ cᵢ·vᵢ (cmp) rhs`. Repeated variables are summed.
    pub fn constrain(&mut self, terms: impl IntoIterator<Item = (usize, Rat)>, cmp: Cmp, rhs: Rat) {
        let mut merged: Vec<(usize, Rat)> = Vec::new();
        for (v, c) in terms {
            assert!(v < self.names.len(), "undeclared LP variable {v}");
            match merged.iter_mut().find(|(w, _)| *w == v) {
                Some((_, d)) => *d += c,
                None => merged.push((v, c)),
            }
        }
        merged.retain(|(_, c)| !c.is_zero());
        self.constraints.push(Constraint { terms: merged, cmp, rhs });
    }

    /// A feasible point, or `None` when the constraints are inconsistent.
    pub fn feasible(&self) -> Option<Witness> {
        let n = self.names.len();
        let slack_count = self.constraints.iter().filter(|c| c.cmp != Cmp::Eq).count();
        let m = self.constraints.len();
        let mut rows: Vec<Vec<Rat>> = Vec::with_capacity(m);
        let mut rhs: Vec<Rat> = Vec::with_capacity(m);
        let mut basis: Vec<usize> = Vec::with_capacity(m);
        let mut next_slack = n;
        for c in &self.constraints {
            let mut row = vec![Rat::zero(); n + slack_count];
            for (v, coeff) in &c.terms {
                row[*v] = coeff.clone();
            }
            let slack = match c.cmp {
                Cmp::Le => Some((next_slack, Rat::one())),
                Cmp::Ge => Some((next_slack, -Rat::one())),
                Cmp::Eq => None,
            };
            if let Some((j, k)) = &slack {
                row[*j] = k.clone();
                next_slack += 1;
            }
            let mut b = c.rhs.clone();
            if b.is_negative() {
                for x in row.iter_mut() {
                    *x = -x.clone();
                }
                b = -b;
            }
            // A slack with coefficient +1 can start in the basis.
            match slack {
                Some((j, _)) if row[j].is_one() => basis.push(j),
                _ => basis.push(usize::MAX),
            }
            rows.push(row);
            rhs.push(b);
        }
        let art = n + slack_count;
        let needs_artificial: Vec<usize> = (0..m).filter(|&i| basis[i] == usize::MAX).collect();
        let width = art + needs_artificial.len();
        for row in rows.iter_mut() {
            row.resize(width, Rat::zero());
        }
        for (k, &i) in needs_artificial.iter().enumerate() {
            rows[i][art + k] = Rat::one();
            basis[i] = art + k;
        }
        // Reduced costs of the phase-one objective (sum of artificials).
        let mut cost = vec![Rat::zero(); width];
        for &i in &needs_artificial {
            for j in 0..art {
                if !rows[i][j].is_zero() {
                    cost[j] -= &rows[i][j];
                }
            }
        }
        loop {
            let remaining = basis.iter().zip(&rhs).any(|(&b, v)| b >= art && !v.is_zero());
            if !remaining {
                break;
            }
            let Some(enter) = (0..width).find(|&j| cost[j].is_negative()) else {
                break;
            };
            let mut leave: Option<(usize, Rat)> = None;
            for i in 0..m {
                if rows[i][enter].is_positive() {
                    let ratio = &rhs[i] / &rows[i][enter];
                    let better = match &leave {
                        None => true,
                        Some((k, best)) => ratio < *best || (ratio == *best && basis[i] < basis[*k]),
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((r, _)) = leave else {
                // Phase one is bounded below by zero, so this cannot happen.
                unreachable!("unbounded phase-one objective");
            };
            pivot(&mut rows, &mut rhs, &mut cost, r, enter);
            basis[r] = enter;
        }
        let infeasible = basis.iter().zip(&rhs).any(|(&b, v)| b >= art && !v.is_zero());
        if infeasible {
            return None;
        }
        let mut values = vec![Rat::zero(); n];
        for (&b, v) in basis.iter().zip(&rhs) {
            if b < n {
                values[b] = v.clone();
            }
        }
        Some(Witness { names: self.names.clone(), values })
    }

    /// Whether `values` satisfies every constraint.
    pub fn satisfied_by(&self, values: &[Rat]) -> bool {
        values.len() == self.names.len()
            && values.iter().all(|v| !v.is_negative())
            && self.constraints.iter().all(|c| {
                let lhs: Rat = c.terms.iter().map(|(v, k)| k * &values[*v]).sum();
                match c.cmp {
                    Cmp::Le => lhs <= c.rhs,
                    Cmp::Ge => lhs >= c.rhs,
                    Cmp::Eq => lhs == c.rhs,
                }
            })
    }
}

fn pivot(rows: &mut [Vec<Rat>], rhs: &mut [Rat], cost: &mut [Rat], r: usize, col: usize) {
    let p = rows[r][col].clone();
    if !p.is_one() {
        for x in rows[r].iter_mut() {
            if !x.is_zero() {
                *x /= &p;
            }
        }
        rhs[r] /= &p;
    }
    let pivot_row = rows[r].clone();
    let pivot_rhs = rhs[r].clone();
    let nonzero: Vec<usize> = (0..pivot_row.len()).filter(|&j| !pivot_row[j].is_zero()).collect();
    for i in 0..rows.len() {
        if i == r || rows[i][col].is_zero() {
            continue;
        }
        let factor = rows[i][col].clone();
        for &j in &nonzero {
            let delta = &factor * &pivot_row[j];
            rows[i][j] -= delta;
        }
        rhs[i] -= &factor * &pivot_rhs;
    }
    if !cost[col].is_zero() {
        let factor = cost[col].clone();
        for &j in &nonzero {
            let delta = &factor * &pivot_row[j];
            cost[j] -= delta;
        }
    }
}
