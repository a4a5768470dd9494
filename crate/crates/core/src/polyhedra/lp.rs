//! Exact rational simplex for `max c·x  s.t.  A x ≤ b`, `x` free.
//!
//! The solver keeps a dictionary: every basic variable is written as an
//! affine function of the nonbasic ones. Structural variables are free, slack
//! variables are nonnegative. Free variables never leave the basis once they
//! enter, and entering/leaving choices follow Bland's smallest-index rule, so
//! the method terminates on every input.

use std::collections::BTreeMap;

use super::system::DenseSystem;
use super::{LinearSystem, PolyError, Rational};

/// Result of [`lp_maximize`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal {
        value: Rational,
        point: BTreeMap<String, Rational>,
    },
    Unbounded,
    Infeasible,
}

impl LpOutcome {
    pub fn value(&self) -> Option<&Rational> {
        match self {
            LpOutcome::Optimal { value, .. } => Some(value),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum DenseOutcome {
    Optimal {
        value: Rational,
        x: Vec<Rational>,
    },
    Unbounded,
    Infeasible,
    /// The objective provably exceeds the supplied cutoff.
    AboveCutoff,
}

/// Maximizes `objective` over `system`.
pub fn lp_maximize(
    system: &LinearSystem,
    objective: &BTreeMap<String, Rational>,
) -> Result<LpOutcome, PolyError> {
    let index = system.variable_index();
    let mut c = vec![Rational::zero(); system.variables().len()];
    for (name, value) in objective {
        let &i = index
            .get(name.as_str())
            .ok_or_else(|| PolyError::UnknownVariable(name.clone()))?;
        c[i] = value.clone();
    }
    let dense = system.to_dense();
    Ok(match maximize_dense(&dense, &c, None, None) {
        DenseOutcome::Optimal { value, x } => LpOutcome::Optimal {
            value,
            point: system.variables().iter().cloned().zip(x).collect(),
        },
        DenseOutcome::Unbounded => LpOutcome::Unbounded,
        DenseOutcome::Infeasible => LpOutcome::Infeasible,
        DenseOutcome::AboveCutoff => unreachable!("no cutoff supplied"),
    })
}

/// Solves over the rows of `system` (all of them, or those with `active[r]`).
/// With a cutoff, phase two stops as soon as the objective exceeds it.
pub(crate) fn maximize_dense(
    system: &DenseSystem,
    objective: &[Rational],
    active: Option<&[bool]>,
    cutoff: Option<&Rational>,
) -> DenseOutcome {
    let rows: Vec<usize> = (0..system.rows.len())
        .filter(|&r| active.is_none_or(|a| a[r]))
        .collect();
    let mut dict = Dictionary::new(system, &rows, objective.len());
    if !dict.phase_one() {
        return DenseOutcome::Infeasible;
    }
    dict.set_objective(objective);
    match dict.run(cutoff) {
        Step::Optimal => DenseOutcome::Optimal {
            value: dict.obj_const.clone(),
            x: dict.structural_values(),
        },
        Step::Unbounded => DenseOutcome::Unbounded,
        Step::AboveCutoff => DenseOutcome::AboveCutoff,
    }
}

enum Step {
    Optimal,
    Unbounded,
    AboveCutoff,
}

/// Variable numbering: `0..n` structural (free), `n..n+m` slacks,
/// `n+m` the phase-one auxiliary.
struct Dictionary {
    n: usize,
    basic: Vec<usize>,
    nonbasic: Vec<usize>,
    constant: Vec<Rational>,
    coef: Vec<Vec<Rational>>,
    obj_const: Rational,
    obj: Vec<Rational>,
}

impl Dictionary {
    fn new(system: &DenseSystem, rows: &[usize], n: usize) -> Self {
        let m = rows.len();
        let needs_aux = rows.iter().any(|&r| system.rows[r].rhs.is_negative());
        let mut nonbasic: Vec<usize> = (0..n).collect();
        if needs_aux {
            nonbasic.push(n + m);
        }
        let mut constant = Vec::with_capacity(m);
        let mut coef = Vec::with_capacity(m);
        for &r in rows {
            let row = &system.rows[r];
            // s_r = b_r − a_r·x (+ x_aux)
            let mut line: Vec<Rational> = row.coeffs.iter().map(|a| -a).collect();
            if needs_aux {
                line.push(Rational::one());
            }
            constant.push(row.rhs.clone());
            coef.push(line);
        }
        let width = nonbasic.len();
        Dictionary {
            n,
            basic: (n..n + m).collect(),
            nonbasic,
            constant,
            coef,
            obj_const: Rational::zero(),
            obj: vec![Rational::zero(); width],
        }
    }

    fn is_free(&self, var: usize) -> bool {
        var < self.n
    }

    fn aux_var(&self) -> usize {
        self.n + self.basic.len()
    }

    fn has_aux(&self) -> bool {
        self.nonbasic.contains(&self.aux_var()) || self.basic.contains(&self.aux_var())
    }

    /// Returns false iff the system is infeasible.
    fn phase_one(&mut self) -> bool {
        if !self.has_aux() {
            return true;
        }
        let aux = self.aux_var();
        let aux_col = self.nonbasic.iter().position(|&v| v == aux).unwrap();
        // Maximize −x_aux. The first pivot brings x_aux in at the most negative row.
        self.obj = vec![Rational::zero(); self.nonbasic.len()];
        self.obj[aux_col] = -Rational::one();
        self.obj_const = Rational::zero();
        let mut leave = None;
        for r in 0..self.basic.len() {
            if self.is_free(self.basic[r]) {
                continue;
            }
            let better = match leave {
                None => self.constant[r].is_negative(),
                Some(l) => {
                    self.constant[r] < self.constant[l]
                        || (self.constant[r] == self.constant[l] && self.basic[r] < self.basic[l])
                }
            };
            if better {
                leave = Some(r);
            }
        }
        if let Some(r) = leave {
            self.pivot(r, aux_col);
        }
        match self.run(None) {
            Step::Optimal => {}
            Step::Unbounded | Step::AboveCutoff => unreachable!("phase one is bounded by zero"),
        }
        if self.obj_const.is_negative() {
            return false;
        }
        if let Some(r) = self.basic.iter().position(|&v| v == aux) {
            // Degenerate: x_aux is basic at zero. Swap it out, or drop an empty row.
            match self.coef[r].iter().position(|a| !a.is_zero()) {
                Some(col) => self.pivot(r, col),
                None => {
                    self.basic.remove(r);
                    self.constant.remove(r);
                    self.coef.remove(r);
                    return true;
                }
            }
        }
        let col = self
            .nonbasic
            .iter()
            .position(|&v| v == aux)
            .expect("auxiliary variable is nonbasic after phase one");
        self.nonbasic.remove(col);
        for line in &mut self.coef {
            line.remove(col);
        }
        self.obj.remove(col);
        true
    }

    fn set_objective(&mut self, c: &[Rational]) {
        self.obj = vec![Rational::zero(); self.nonbasic.len()];
        self.obj_const = Rational::zero();
        for (col, &var) in self.nonbasic.iter().enumerate() {
            if var < self.n {
                self.obj[col] = c[var].clone();
            }
        }
        for r in 0..self.basic.len() {
            let var = self.basic[r];
            if var < self.n && !c[var].is_zero() {
                let w = &c[var];
                self.obj_const += w * &self.constant[r];
                for (o, a) in self.obj.iter_mut().zip(&self.coef[r]) {
                    if !a.is_zero() {
                        *o += w * a;
                    }
                }
            }
        }
    }

    fn run(&mut self, cutoff: Option<&Rational>) -> Step {
        loop {
            if let Some(limit) = cutoff {
                if &self.obj_const > limit {
                    return Step::AboveCutoff;
                }
            }
            // Bland: the improving nonbasic variable with the smallest index.
            let mut enter: Option<(usize, bool)> = None;
            for (col, &var) in self.nonbasic.iter().enumerate() {
                let d = &self.obj[col];
                let candidate = d.is_positive() || (d.is_negative() && self.is_free(var));
                if candidate && enter.is_none_or(|(c, _)| var < self.nonbasic[c]) {
                    enter = Some((col, d.is_positive()));
                }
            }
            let Some((col, increase)) = enter else {
                return Step::Optimal;
            };
            let mut leave: Option<(usize, Rational)> = None;
            for r in 0..self.basic.len() {
                if self.is_free(self.basic[r]) {
                    continue;
                }
                let a = &self.coef[r][col];
                let rate = if increase { a.clone() } else { -a };
                if !rate.is_negative() {
                    continue;
                }
                let ratio = &self.constant[r] / &(-rate);
                let better = match &leave {
                    None => true,
                    Some((l, best)) => {
                        ratio < *best || (ratio == *best && self.basic[r] < self.basic[*l])
                    }
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
            let Some((row, _)) = leave else {
                return Step::Unbounded;
            };
            self.pivot(row, col);
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let a = self.coef[row][col].clone();
        let inv = a.recip();
        // Solve row for the entering variable.
        let mut pivot_line: Vec<Rational> = self.coef[row].iter().map(|v| -(v * &inv)).collect();
        pivot_line[col] = inv.clone();
        let pivot_const = -(&self.constant[row] * &inv);
        for r in 0..self.basic.len() {
            if r == row {
                continue;
            }
            let f = self.coef[r][col].clone();
            if f.is_zero() {
                continue;
            }
            self.constant[r] += &f * &pivot_const;
            let line = &mut self.coef[r];
            for (k, p) in pivot_line.iter().enumerate() {
                if k == col {
                    line[k] = &f * p;
                } else if !p.is_zero() {
                    line[k] += &f * p;
                }
            }
        }
        let f = self.obj[col].clone();
        if !f.is_zero() {
            self.obj_const += &f * &pivot_const;
            for (k, p) in pivot_line.iter().enumerate() {
                if k == col {
                    self.obj[k] = &f * p;
                } else if !p.is_zero() {
                    self.obj[k] += &f * p;
                }
            }
        }
        self.coef[row] = pivot_line;
        self.constant[row] = pivot_const;
        std::mem::swap(&mut self.basic[row], &mut self.nonbasic[col]);
    }

    fn structural_values(&self) -> Vec<Rational> {
        let mut x = vec![Rational::zero(); self.n];
        for (r, &var) in self.basic.iter().enumerate() {
            if var < self.n {
                x[var] = self.constant[r].clone();
            }
        }
        x
    }
}
