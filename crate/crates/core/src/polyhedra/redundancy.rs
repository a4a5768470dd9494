use std::collections::BTreeSet;

use super::lp::{maximize_dense, DenseOutcome};
use super::system::DenseSystem;
use super::{lp_maximize, LinearSystem, LpOutcome, PolyError};

/// Drops every constraint implied by the ones still present, scanning in order.
pub fn remove_redundant(system: &LinearSystem) -> LinearSystem {
    let dense = system.to_dense();
    let kept = redundant_mask(&dense);
    let mut out = LinearSystem::new(system.variables().iter().cloned())
        .expect("variables were already validated");
    for (c, keep) in system.constraints().iter().zip(kept) {
        if keep {
            out.push(c.clone()).expect("same variable set");
        }
    }
    out
}

/// `true` at every row that survives the ordered scan.
pub(crate) fn redundant_mask(dense: &DenseSystem) -> Vec<bool> {
    let mut active = vec![true; dense.rows.len()];
    for r in 0..dense.rows.len() {
        active[r] = false;
        let row = &dense.rows[r];
        let implied = match maximize_dense(dense, &row.coeffs, Some(&active), Some(&row.rhs)) {
            DenseOutcome::Optimal { value, .. } => value <= row.rhs,
            DenseOutcome::Infeasible => true,
            DenseOutcome::Unbounded | DenseOutcome::AboveCutoff => false,
        };
        active[r] = !implied;
    }
    active
}

pub(crate) fn prune_dense(dense: &mut DenseSystem) {
    let mask = redundant_mask(dense);
    let mut keep = mask.into_iter();
    dense.rows.retain(|_| keep.next().unwrap());
}

/// `p ⊆ q` as solution sets. An empty `p` is contained in everything.
pub fn is_subset(p: &LinearSystem, q: &LinearSystem) -> Result<bool, PolyError> {
    let pv: BTreeSet<&String> = p.variables().iter().collect();
    let qv: BTreeSet<&String> = q.variables().iter().collect();
    if pv != qv {
        return Err(PolyError::VariableMismatch);
    }
    for c in q.constraints() {
        match lp_maximize(p, c.coefficients())? {
            LpOutcome::Infeasible => return Ok(true),
            LpOutcome::Unbounded => return Ok(false),
            LpOutcome::Optimal { value, .. } => {
                if &value > c.rhs() {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

pub fn is_equal(p: &LinearSystem, q: &LinearSystem) -> Result<bool, PolyError> {
    Ok(is_subset(p, q)? && is_subset(q, p)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyhedra::{LinearConstraint, Rational};
    use proptest::prelude::*;

    fn r(n: i64) -> Rational {
        Rational::from_integer(n)
    }

    #[test]
    fn dominated_bound() {
        let mut s = LinearSystem::new(["x"]).unwrap();
        s.push(LinearConstraint::le([("x", r(1))], r(1))).unwrap();
        s.push(LinearConstraint::le([("x", r(1))], r(2))).unwrap();
        let out = remove_redundant(&s);
        assert_eq!(out.constraints(), &s.constraints()[..1]);
    }

    #[test]
    fn implied_sum() {
        let mut s = LinearSystem::new(["x", "y"]).unwrap();
        s.push(LinearConstraint::le([("x", r(1))], r(1))).unwrap();
        s.push(LinearConstraint::le([("y", r(1))], r(1))).unwrap();
        s.push(LinearConstraint::le([("x", r(1)), ("y", r(1))], r(3)))
            .unwrap();
        let out = remove_redundant(&s);
        assert_eq!(out.constraints(), &s.constraints()[..2]);
    }

    #[test]
    fn duplicate_keeps_exactly_one() {
        let mut s = LinearSystem::new(["x"]).unwrap();
        for _ in 0..3 {
            s.push(LinearConstraint::le([("x", r(1))], r(1))).unwrap();
        }
        assert_eq!(remove_redundant(&s).len(), 1);
    }

    #[test]
    fn infeasible_system_stays_infeasible() {
        let mut s = LinearSystem::new(["x"]).unwrap();
        s.push(LinearConstraint::le([("x", r(1))], r(-1))).unwrap();
        s.push(LinearConstraint::ge([("x", r(1))], r(1))).unwrap();
        s.push(LinearConstraint::le([("x", r(1))], r(7))).unwrap();
        let out = remove_redundant(&s);
        assert!(matches!(
            lp_maximize(&out, &Default::default()).unwrap(),
            LpOutcome::Infeasible
        ));
    }

    #[test]
    fn subset_needs_matching_variables() {
        let a = LinearSystem::new(["x"]).unwrap();
        let b = LinearSystem::new(["y"]).unwrap();
        assert_eq!(is_subset(&a, &b), Err(PolyError::VariableMismatch));
        let c = LinearSystem::new(["y", "x"]).unwrap();
        assert_eq!(
            is_subset(&a, &c).map(|_| ()),
            Err(PolyError::VariableMismatch)
        );
    }

    fn boxed(bounds: &[(i64, i64)]) -> LinearSystem {
        let names: Vec<String> = (0..bounds.len()).map(|i| format!("x{i}")).collect();
        let mut s = LinearSystem::new(names.clone()).unwrap();
        for (name, &(lo, hi)) in names.iter().zip(bounds) {
            s.push(LinearConstraint::le([(name.as_str(), r(1))], r(hi)))
                .unwrap();
            s.push(LinearConstraint::ge([(name.as_str(), r(1))], r(lo)))
                .unwrap();
        }
        s
    }

    fn random_system() -> impl Strategy<Value = LinearSystem> {
        prop::collection::vec((prop::collection::vec(-3i64..=3, 3), -6i64..=6), 1..8).prop_map(
            |rows| {
                let mut s = LinearSystem::new(["a", "b", "c"]).unwrap();
                for (coeffs, rhs) in rows {
                    let c = LinearConstraint::le(
                        ["a", "b", "c"].into_iter().zip(coeffs.into_iter().map(r)),
                        r(rhs),
                    );
                    s.push(c).unwrap();
                }
                s
            },
        )
    }

    proptest! {
        #[test]
        fn removal_preserves_solution_set(s in random_system()) {
            let out = remove_redundant(&s);
            prop_assert!(is_subset(&s, &out).unwrap());
            prop_assert!(is_subset(&out, &s).unwrap());
            prop_assert_eq!(remove_redundant(&out), out.clone());
        }

        #[test]
        fn nested_boxes(
            base in prop::collection::vec((-5i64..=0, 0i64..=5), 3),
            g1 in prop::collection::vec(0i64..=3, 6),
            g2 in prop::collection::vec(0i64..=3, 6),
        ) {
            let inner = boxed(&base);
            let mid_b: Vec<(i64, i64)> = base.iter().enumerate()
                .map(|(i, &(lo, hi))| (lo - g1[2 * i], hi + g1[2 * i + 1])).collect();
            let outer_b: Vec<(i64, i64)> = mid_b.iter().enumerate()
                .map(|(i, &(lo, hi))| (lo - g2[2 * i], hi + g2[2 * i + 1])).collect();
            let mid = boxed(&mid_b);
            let outer = boxed(&outer_b);
            prop_assert!(is_subset(&inner, &inner).unwrap());
            prop_assert!(is_subset(&inner, &mid).unwrap());
            prop_assert!(is_subset(&mid, &outer).unwrap());
            prop_assert!(is_subset(&inner, &outer).unwrap());
            let strictly_grew = g1.iter().any(|&g| g > 0);
            prop_assert_eq!(is_subset(&mid, &inner).unwrap(), !strictly_grew);
        }

        #[test]
        fn deterministic(s in random_system()) {
            prop_assert_eq!(remove_redundant(&s), remove_redundant(&s));
        }
    }
}
