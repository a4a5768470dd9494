//! Integer stream dimensions realizing a DoF tuple: ZF first, then alignment.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dof_model::{
    build_inner_region, build_scheme_system, d_var, gamma_var, ia_var, third, zf_var,
    ChannelConfig, DoFTuple, ModelError, PAIRS,
};
use crate::polyhedra::{lcm_of_denominators, lp_maximize, LinearConstraint, LpOutcome, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AllocationError {
    #[error("DoF tuple {0} lies outside the achievable region")]
    OutsideRegion(String),
    #[error("allocation entries do not fit in 64 bits")]
    Overflow,
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn pair_index(i: usize, j: usize) -> usize {
    PAIRS
        .iter()
        .position(|&p| p == (i, j))
        .expect("distinct nodes in 1..=3")
}

/// Stream dimensions over `L` channel uses.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StreamAllocation {
    zf: [u64; 6],
    ia: [u64; 6],
    gamma: [u64; 3],
    extension: u64,
}

impl StreamAllocation {
    /// Entries are listed in pair order `12, 13, 21, 23, 31, 32`.
    pub fn new(zf: [u64; 6], ia: [u64; 6], gamma: [u64; 3], extension: u64) -> Self {
        StreamAllocation {
            zf,
            ia,
            gamma,
            extension,
        }
    }

    pub fn zero() -> Self {
        StreamAllocation::new([0; 6], [0; 6], [0; 3], 1)
    }

    pub fn zf(&self, i: usize, j: usize) -> u64 {
        self.zf[pair_index(i, j)]
    }

    pub fn ia(&self, i: usize, j: usize) -> u64 {
        self.ia[pair_index(i, j)]
    }

    pub fn gamma(&self, i: usize) -> u64 {
        self.gamma[i - 1]
    }

    pub fn extension(&self) -> u64 {
        self.extension
    }

    pub fn set_zf(&mut self, i: usize, j: usize, value: u64) {
        self.zf[pair_index(i, j)] = value;
    }

    pub fn set_ia(&mut self, i: usize, j: usize, value: u64) {
        self.ia[pair_index(i, j)] = value;
    }

    pub fn set_gamma(&mut self, i: usize, value: u64) {
        self.gamma[i - 1] = value;
    }

    /// Streams node `i` sends, all kinds and destinations.
    pub fn transmit_count(&self, i: usize) -> u64 {
        PAIRS
            .iter()
            .filter(|p| p.0 == i)
            .map(|&(a, b)| self.zf(a, b) + self.ia(a, b))
            .sum()
    }

    pub fn is_empty(&self) -> bool {
        self.zf.iter().chain(&self.ia).all(|&v| v == 0)
    }

    /// Every field, including `L`, multiplied by `k`.
    pub fn scaled(&self, k: u64) -> Self {
        StreamAllocation {
            zf: self.zf.map(|v| v * k),
            ia: self.ia.map(|v| v * k),
            gamma: self.gamma.map(|v| v * k),
            extension: self.extension * k,
        }
    }

    /// The DoF tuple these dimensions deliver per channel use.
    pub fn dof(&self, config: &ChannelConfig) -> DoFTuple {
        let l = Rational::from(self.extension);
        let values = PAIRS.map(|(i, j)| {
            config.tau_for_stream(i, j) * Rational::from(self.zf(i, j) + self.ia(i, j)) / &l
        });
        DoFTuple::new(values).expect("nonnegative by construction")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("allocation serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[derive(Serialize, Deserialize)]
struct AllocationJson {
    #[serde(rename = "L")]
    extension: u64,
    zf: BTreeMap<String, u64>,
    ia: BTreeMap<String, u64>,
    gamma: [u64; 3],
}

fn pair_key(i: usize, j: usize) -> String {
    format!("{i}{j}")
}

impl Serialize for StreamAllocation {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let map = |values: &[u64; 6]| {
            PAIRS
                .iter()
                .zip(values)
                .map(|(&(i, j), &v)| (pair_key(i, j), v))
                .collect()
        };
        AllocationJson {
            extension: self.extension,
            zf: map(&self.zf),
            ia: map(&self.ia),
            gamma: self.gamma,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for StreamAllocation {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let raw = AllocationJson::deserialize(deserializer)?;
        if raw.extension == 0 {
            return Err(D::Error::custom("L must be positive"));
        }
        let unpack = |map: &BTreeMap<String, u64>| -> Result<[u64; 6], D::Error> {
            let mut out = [0; 6];
            for (key, &v) in map {
                let idx = PAIRS
                    .iter()
                    .position(|&(i, j)| pair_key(i, j) == *key)
                    .ok_or_else(|| D::Error::custom(format!("unknown node pair `{key}`")))?;
                out[idx] = v;
            }
            Ok(out)
        };
        Ok(StreamAllocation {
            zf: unpack(&raw.zf)?,
            ia: unpack(&raw.ia)?,
            gamma: raw.gamma,
            extension: raw.extension,
        })
    }
}

fn maximize(
    system: &crate::polyhedra::LinearSystem,
    objective: &BTreeMap<String, Rational>,
) -> Option<(Rational, BTreeMap<String, Rational>)> {
    match lp_maximize(system, objective).expect("objective over declared variables") {
        LpOutcome::Optimal { value, point } => Some((value, point)),
        LpOutcome::Infeasible => None,
        LpOutcome::Unbounded => unreachable!("scheme variables are bounded"),
    }
}

/// Finds stream dimensions for `d`: maximum ZF use, then maximum alignment.
pub fn allocate(config: &ChannelConfig, d: &DoFTuple) -> Result<StreamAllocation, AllocationError> {
    let outside = || AllocationError::OutsideRegion(d.to_string());
    if !build_inner_region(config)
        .check_point(&d.to_point())
        .map_err(ModelError::from)?
    {
        return Err(outside());
    }
    let mut system = build_scheme_system(config);
    for &(i, j) in &PAIRS {
        system
            .push_all(LinearConstraint::eq(
                [(d_var(i, j), Rational::one())],
                d.get(i, j).clone(),
            ))
            .map_err(ModelError::from)?;
        if config.tau_for_stream(i, j).is_zero() {
            // the link is never on; dimensions spent there buy nothing
            for v in [zf_var(i, j), ia_var(i, j)] {
                system
                    .push(LinearConstraint::le(
                        [(v, Rational::one())],
                        Rational::zero(),
                    ))
                    .map_err(ModelError::from)?;
            }
        }
    }
    let zf_sum: BTreeMap<String, Rational> = PAIRS
        .iter()
        .map(|&(i, j)| (zf_var(i, j), Rational::one()))
        .collect();
    let (best_zf, _) = maximize(&system, &zf_sum).ok_or_else(outside)?;
    system
        .push(LinearConstraint::ge(zf_sum.clone(), best_zf))
        .map_err(ModelError::from)?;
    let gamma_sum: BTreeMap<String, Rational> =
        (1..=3).map(|i| (gamma_var(i), Rational::one())).collect();
    let (_, point) = maximize(&system, &gamma_sum).ok_or_else(outside)?;

    let used: Vec<&Rational> = PAIRS
        .iter()
        .flat_map(|&(i, j)| [&point[&zf_var(i, j)], &point[&ia_var(i, j)]])
        .chain((1..=3).map(|i| &point[&gamma_var(i)]))
        .collect();
    let l = Rational::from_bigints(lcm_of_denominators(used), 1.into());
    let to_int = |v: &Rational| -> Result<u64, AllocationError> {
        let scaled = v * &l;
        debug_assert!(scaled.is_integer());
        scaled.numer().to_u64().ok_or(AllocationError::Overflow)
    };
    let mut alloc = StreamAllocation::zero();
    alloc.extension = to_int(&Rational::one())?;
    for &(i, j) in &PAIRS {
        alloc.set_zf(i, j, to_int(&point[&zf_var(i, j)])?);
        alloc.set_ia(i, j, to_int(&point[&ia_var(i, j)])?);
    }
    for i in 1..=3 {
        alloc.set_gamma(i, to_int(&point[&gamma_var(i)])?);
    }
    Ok(alloc)
}

/// One checked inequality `lhs <= rhs` (or equality when `equality` is set).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AllocationCheck {
    pub name: String,
    pub lhs: Rational,
    pub rhs: Rational,
    pub slack: Rational,
    pub equality: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AllocationReport {
    pub checks: Vec<AllocationCheck>,
}

impl AllocationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &AllocationCheck> {
        self.checks.iter().filter(|c| !c.pass)
    }

    fn at_most(&mut self, name: String, lhs: Rational, rhs: Rational) {
        let slack = &rhs - &lhs;
        let pass = !slack.is_negative();
        self.checks.push(AllocationCheck {
            name,
            lhs,
            rhs,
            slack,
            equality: false,
            pass,
        });
    }

    fn equal(&mut self, name: String, lhs: Rational, rhs: Rational) {
        let slack = &rhs - &lhs;
        let pass = slack.is_zero();
        self.checks.push(AllocationCheck {
            name,
            lhs,
            rhs,
            slack,
            equality: true,
            pass,
        });
    }
}

impl fmt::Display for AllocationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let op = if c.equality { "==" } else { "<=" };
            let verdict = if c.pass { "pass" } else { "FAIL" };
            writeln!(
                f,
                "{verdict} {:<18} {} {op} {} (slack {})",
                c.name, c.lhs, c.rhs, c.slack
            )?;
        }
        Ok(())
    }
}

/// Checks every scheme constraint scaled by `L`, and the exact DoF coupling.
pub fn verify_allocation(
    config: &ChannelConfig,
    d: &DoFTuple,
    alloc: &StreamAllocation,
) -> AllocationReport {
    let mut report = AllocationReport { checks: Vec::new() };
    let q = |v: u64| Rational::from(v);
    let l = q(alloc.extension);
    let lm = |i: usize| &l * Rational::from(config.m(i));
    report.at_most("L>=1".into(), Rational::one(), l.clone());
    for i in 1..=3 {
        let (j, k) = others(i);
        report.at_most(format!("transmit[{i}]"), q(alloc.transmit_count(i)), lm(i));
        let received = alloc.zf(j, i) + alloc.ia(j, i) + alloc.zf(k, i) + alloc.ia(k, i);
        let interference = alloc.ia(j, k) + alloc.ia(k, j);
        report.at_most(
            format!("receive[{i}]"),
            q(received + interference) - q(alloc.gamma(i)),
            lm(i),
        );
        report.at_most(
            format!("align[{i}]<=ia{j}{k}"),
            q(alloc.gamma(i)),
            q(alloc.ia(j, k)),
        );
        report.at_most(
            format!("align[{i}]<=ia{k}{j}"),
            q(alloc.gamma(i)),
            q(alloc.ia(k, j)),
        );
        let overlap = (lm(j) + lm(k) - lm(i)).positive_part();
        report.at_most(format!("align[{i}]<=overlap"), q(alloc.gamma(i)), overlap);
    }
    for &(i, j) in &PAIRS {
        let k = third(i, j);
        report.at_most(
            format!("zf_cap[{i}{j}]"),
            q(alloc.zf(i, j)),
            (lm(i) - lm(k)).positive_part(),
        );
    }
    for &(i, j) in &PAIRS {
        let dims = q(alloc.zf(i, j) + alloc.ia(i, j));
        report.equal(
            format!("coupling[{i}{j}]"),
            d.get(i, j) * &l,
            config.tau_for_stream(i, j) * dims,
        );
    }
    report
}

fn others(i: usize) -> (usize, usize) {
    match i {
        1 => (2, 3),
        2 => (1, 3),
        _ => (1, 2),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dof_model::DOF_VARS;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cfg(m1: u32, m2: u32, m3: u32, num: i64, den: i64) -> ChannelConfig {
        ChannelConfig::from_parts(m1, m2, m3, num, den).unwrap()
    }

    fn fig7() -> (ChannelConfig, DoFTuple) {
        (cfg(5, 7, 4, 1, 2), "1/2,0,1/2,4,0,4".parse().unwrap())
    }

    fn fig7_alloc() -> StreamAllocation {
        let mut a = StreamAllocation::zero();
        a.set_zf(1, 2, 1);
        a.set_zf(2, 1, 1);
        a.set_zf(2, 3, 2);
        a.set_ia(2, 3, 2);
        a.set_ia(3, 2, 4);
        a.set_gamma(1, 2);
        a
    }

    #[test]
    fn reproduces_the_worked_example() {
        let (c, d) = fig7();
        let a = allocate(&c, &d).unwrap();
        assert_eq!(a, fig7_alloc());
        assert_eq!(a.zf(1, 2), 1);
        assert_eq!(a.ia(1, 2), 0);
        assert!(verify_allocation(&c, &d, &a).passed());
        assert_eq!(a.dof(&c), d);
    }

    #[test]
    fn origin_allocates_nothing() {
        for c in [cfg(1, 1, 1, 0, 1), cfg(5, 7, 4, 1, 2), cfg(3, 1, 2, 1, 1)] {
            let a = allocate(&c, &DoFTuple::zero()).unwrap();
            assert_eq!(a, StreamAllocation::zero());
            assert!(a.is_empty());
        }
    }

    #[test]
    fn sum_dof_vertex_allocates() {
        let c = cfg(10, 7, 3, 1, 4);
        let out = lp_maximize(&build_inner_region(&c), &crate::dof_model::sum_objective()).unwrap();
        let LpOutcome::Optimal { point, .. } = out else {
            panic!("bounded region")
        };
        let d = DoFTuple::from_point(&point).unwrap();
        let a = allocate(&c, &d).unwrap();
        assert!(verify_allocation(&c, &d, &a).passed());
        let l = Rational::from(a.extension());
        let weighted: Rational = PAIRS
            .iter()
            .map(|&(i, j)| c.tau_for_stream(i, j) * Rational::from(a.zf(i, j) + a.ia(i, j)))
            .sum();
        assert_eq!(weighted / l, Rational::from_integer(8));
    }

    #[test]
    fn outside_region_is_rejected() {
        let (c, _) = fig7();
        let d: DoFTuple = "5,5,5,5,5,5".parse().unwrap();
        assert!(matches!(
            allocate(&c, &d),
            Err(AllocationError::OutsideRegion(_))
        ));
    }

    #[test]
    fn broken_bookkeeping_is_reported() {
        let (c, d) = fig7();
        let mut a = fig7_alloc();
        a.set_ia(2, 3, 1);
        let report = verify_allocation(&c, &d, &a);
        let failed: Vec<&str> = report.failures().map(|f| f.name.as_str()).collect();
        assert!(failed.contains(&"coupling[23]"), "{failed:?}");

        let mut a = fig7_alloc();
        a.set_gamma(1, 3);
        let report = verify_allocation(&c, &d, &a);
        let failed: Vec<&str> = report.failures().map(|f| f.name.as_str()).collect();
        assert_eq!(failed, ["align[1]<=ia23"]);
    }

    #[test]
    fn json_format() {
        let a = fig7_alloc();
        let text = a.to_json();
        assert!(
            text.starts_with(r#"{"L":1,"zf":{"12":1,"13":0,"21":1,"23":2"#),
            "{text}"
        );
        assert!(text.ends_with(r#""gamma":[2,0,0]}"#), "{text}");
        assert_eq!(StreamAllocation::from_json(&text).unwrap(), a);
        let sparse = r#"{"L":1,"zf":{"12":1},"ia":{},"gamma":[0,0,0]}"#;
        assert_eq!(StreamAllocation::from_json(sparse).unwrap().zf(1, 2), 1);
        assert!(
            StreamAllocation::from_json(r#"{"L":1,"zf":{"11":1},"ia":{},"gamma":[0,0,0]}"#)
                .is_err()
        );
        assert!(StreamAllocation::from_json(r#"{"L":0,"zf":{},"ia":{},"gamma":[0,0,0]}"#).is_err());
    }

    #[test]
    fn vertices_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let taus = [(0, 1), (1, 4), (1, 2), (3, 4), (1, 1)];
        for m1 in 1..=4 {
            for m2 in 1..=4 {
                for m3 in 1..=4 {
                    let (num, den) = taus[(m1 + m2 + m3) as usize % taus.len()];
                    let c = cfg(m1, m2, m3, num, den);
                    let region = build_inner_region(&c);
                    for _ in 0..4 {
                        let objective: BTreeMap<String, Rational> = DOF_VARS
                            .iter()
                            .map(|v| {
                                (
                                    v.to_string(),
                                    Rational::new(rng.random_range(1..=9), rng.random_range(1..=4)),
                                )
                            })
                            .collect();
                        let LpOutcome::Optimal { point, .. } =
                            lp_maximize(&region, &objective).unwrap()
                        else {
                            panic!("bounded region");
                        };
                        let d = DoFTuple::from_point(&point).unwrap();
                        let a = allocate(&c, &d).unwrap();
                        let report = verify_allocation(&c, &d, &a);
                        assert!(report.passed(), "{c} {d}\n{report}");
                    }
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn scaling_preserves_validity(k in 1u64..50, pick in 0usize..3) {
            let (c, d) = fig7();
            let cases = [
                (c.clone(), d.clone(), fig7_alloc()),
                (cfg(2, 1, 1, 1, 1), "1,0,0,0,0,0".parse().unwrap(), {
                    let mut a = StreamAllocation::zero();
                    a.set_zf(1, 2, 1);
                    a
                }),
                (c.clone(), DoFTuple::zero(), StreamAllocation::zero()),
            ];
            let (c, d, a) = &cases[pick];
            prop_assert!(verify_allocation(c, d, a).passed());
            prop_assert!(verify_allocation(c, d, &a.scaled(k)).passed());
        }
    }
}
