use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::redundancy::prune_dense;
use super::system::{DenseRow, DenseSystem};
use super::{LinearSystem, PolyError, Rational};

/// Projects `system` onto the variables not listed in `vars`, eliminating in the
/// given order and pruning redundant rows after every step.
pub fn fm_eliminate(system: &LinearSystem, vars: &[&str]) -> Result<LinearSystem, PolyError> {
    for v in vars {
        if !system.has_variable(v) {
            return Err(PolyError::UnknownVariable(v.to_string()));
        }
    }
    let mut names: Vec<String> = system.variables().to_vec();
    let mut dense = system.to_dense();
    for v in vars {
        let Some(col) = names.iter().position(|n| n == v) else {
            // listed twice; already gone
            continue;
        };
        dense = eliminate_column(dense, col);
        names.remove(col);
        prune_dense(&mut dense);
    }
    for row in &mut dense.rows {
        make_primitive(row);
    }
    Ok(LinearSystem::from_dense(names, &dense))
}

fn eliminate_column(dense: DenseSystem, col: usize) -> DenseSystem {
    let mut rows: Vec<DenseRow> = dense.rows;
    for row in &mut rows {
        row.normalize();
    }
    let (mut upper, mut lower, mut rest) = (Vec::new(), Vec::new(), Vec::new());
    for row in rows {
        let c = &row.coeffs[col];
        if c.is_positive() {
            upper.push(row);
        } else if c.is_negative() {
            lower.push(row);
        } else {
            rest.push(row);
        }
    }

    let equality = upper.iter().enumerate().find_map(|(i, u)| {
        lower
            .iter()
            .position(|l| l.rhs == -&u.rhs && l.coeffs.iter().zip(&u.coeffs).all(|(a, b)| *a == -b))
            .map(|j| (i, j))
    });

    let mut out = rest;
    if let Some((i, j)) = equality {
        // u·x = b pins the column; substitute into every other row.
        let pin = upper.swap_remove(i);
        lower.swap_remove(j);
        let a = pin.coeffs[col].clone();
        for row in upper.into_iter().chain(lower) {
            let f = &row.coeffs[col] / &a;
            out.push(combine(&row, &Rational::one(), &pin, &(-f)));
        }
    } else {
        for u in &upper {
            for l in &lower {
                let wu = -&l.coeffs[col];
                let wl = u.coeffs[col].clone();
                out.push(combine(u, &wu, l, &wl));
            }
        }
    }

    let mut seen: HashMap<Vec<Rational>, usize> = HashMap::new();
    let mut result: Vec<DenseRow> = Vec::new();
    let mut contradiction = None;
    for mut row in out {
        row.coeffs.remove(col);
        if row.is_trivial() {
            if row.rhs.is_negative() {
                contradiction = Some(row);
            }
            continue;
        }
        row.normalize();
        match seen.get(&row.coeffs) {
            Some(&k) => {
                if row.rhs < result[k].rhs {
                    result[k].rhs = row.rhs;
                }
            }
            None => {
                seen.insert(row.coeffs.clone(), result.len());
                result.push(row);
            }
        }
    }
    if let Some(row) = contradiction {
        result.push(row);
    }
    DenseSystem { rows: result }
}

fn combine(a: &DenseRow, wa: &Rational, b: &DenseRow, wb: &Rational) -> DenseRow {
    DenseRow {
        coeffs: a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(x, y)| wa * x + wb * y)
            .collect(),
        rhs: wa * &a.rhs + wb * &b.rhs,
    }
}

/// Scales a row positively so its coefficients are coprime integers.
fn make_primitive(row: &mut DenseRow) {
    let mut lcm = BigInt::one();
    for c in &row.coeffs {
        lcm = lcm.lcm(&c.denom());
    }
    let mut gcd = BigInt::zero();
    for c in &row.coeffs {
        gcd = gcd.gcd(&(c.numer() * (&lcm / c.denom())));
    }
    if gcd.is_zero() {
        return;
    }
    let scale = Rational::from_bigints(lcm, gcd);
    for c in &mut row.coeffs {
        *c *= &scale;
    }
    row.rhs *= &scale;
}
