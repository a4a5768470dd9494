//! Channel configurations and the DoF regions and bounds built from them.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::polyhedra::{fm_eliminate, LinearConstraint, LinearSystem, PolyError, Rational};

/// The six DoF variables in canonical order.
pub const DOF_VARS: [&str; 6] = ["d12", "d13", "d21", "d23", "d31", "d32"];

/// Ordered pairs `(i, j)` in the same order as [`DOF_VARS`].
pub const PAIRS: [(usize, usize); 6] = [(1, 2), (1, 3), (2, 1), (2, 3), (3, 1), (3, 2)];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("invalid channel configuration: {0}")]
    InvalidConfig(String),
    #[error("the compact region needs tau > 0")]
    DegenerateTau,
    #[error("malformed DoF tuple: {0}")]
    InvalidTuple(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Antenna counts `M1, M2, M3` and the availability probability of node 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawConfig")]
pub struct ChannelConfig {
    #[serde(rename = "M")]
    m: [u32; 3],
    tau: Rational,
}

#[derive(Deserialize)]
struct RawConfig {
    #[serde(rename = "M")]
    m: [u32; 3],
    tau: Rational,
}

impl TryFrom<RawConfig> for ChannelConfig {
    type Error = ModelError;

    fn try_from(raw: RawConfig) -> Result<Self, Self::Error> {
        ChannelConfig::new(raw.m, raw.tau)
    }
}

impl ChannelConfig {
    pub fn new(m: [u32; 3], tau: Rational) -> Result<Self, ModelError> {
        if m.contains(&0) {
            return Err(ModelError::InvalidConfig(format!(
                "antenna counts must be positive, got {m:?}"
            )));
        }
        if tau.is_negative() || tau > Rational::one() {
            return Err(ModelError::InvalidConfig(format!(
                "tau must lie in [0, 1], got {tau}"
            )));
        }
        Ok(ChannelConfig { m, tau })
    }

    /// Shorthand for tests and examples: `tau = num/den`.
    pub fn from_parts(m1: u32, m2: u32, m3: u32, num: i64, den: i64) -> Result<Self, ModelError> {
        ChannelConfig::new([m1, m2, m3], Rational::new(num, den))
    }

    pub fn antennas(&self) -> [u32; 3] {
        self.m
    }

    /// Antenna count of node `i` (1-based).
    pub fn m(&self, i: usize) -> u32 {
        self.m[i - 1]
    }

    fn mr(&self, i: usize) -> Rational {
        Rational::from(self.m(i))
    }

    pub fn tau(&self) -> &Rational {
        &self.tau
    }

    /// Erasure factor of the stream `i → j`: links touching node 1 are intermittent.
    pub fn tau_for_stream(&self, i: usize, j: usize) -> Rational {
        if third(i, j) == 1 {
            Rational::one()
        } else {
            self.tau.clone()
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        serde_json::from_str(text).map_err(|e| ModelError::InvalidConfig(e.to_string()))
    }

    fn swapped_23(&self) -> ChannelConfig {
        ChannelConfig {
            m: [self.m[0], self.m[2], self.m[1]],
            tau: self.tau.clone(),
        }
    }
}

impl fmt::Display for ChannelConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "M=({},{},{}) tau={}",
            self.m[0], self.m[1], self.m[2], self.tau
        )
    }
}

/// The node that is neither `i` nor `j`.
pub fn third(i: usize, j: usize) -> usize {
    6 - i - j
}

/// A DoF tuple `(d12, d13, d21, d23, d31, d32)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct DoFTuple {
    values: [Rational; 6],
}

impl DoFTuple {
    pub fn new(values: [Rational; 6]) -> Result<Self, ModelError> {
        if let Some(v) = values.iter().find(|v| v.is_negative()) {
            return Err(ModelError::InvalidTuple(format!("negative entry {v}")));
        }
        Ok(DoFTuple { values })
    }

    pub fn zero() -> Self {
        DoFTuple::default()
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        let idx = PAIRS
            .iter()
            .position(|&p| p == (i, j))
            .expect("distinct nodes in 1..=3");
        &self.values[idx]
    }

    pub fn values(&self) -> &[Rational; 6] {
        &self.values
    }

    pub fn sum(&self) -> Rational {
        self.values.iter().sum()
    }

    pub fn to_point(&self) -> BTreeMap<String, Rational> {
        DOF_VARS
            .iter()
            .map(|v| v.to_string())
            .zip(self.values.iter().cloned())
            .collect()
    }

    /// Reads the six d-variables out of an LP point or any other assignment.
    pub fn from_point(point: &BTreeMap<String, Rational>) -> Result<Self, ModelError> {
        let mut values: [Rational; 6] = Default::default();
        for (slot, name) in values.iter_mut().zip(DOF_VARS) {
            *slot = point
                .get(name)
                .cloned()
                .ok_or_else(|| ModelError::InvalidTuple(format!("missing {name}")))?;
        }
        DoFTuple::new(values)
    }
}

impl FromStr for DoFTuple {
    type Err = ModelError;

    /// Six comma-separated rationals, e.g. `1/2,0,1/2,4,0,4`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 6 {
            return Err(ModelError::InvalidTuple(format!(
                "expected 6 entries, got {}",
                parts.len()
            )));
        }
        let mut values: [Rational; 6] = Default::default();
        for (slot, part) in values.iter_mut().zip(parts) {
            *slot = part
                .parse()
                .map_err(|e| ModelError::InvalidTuple(format!("{part}: {e}")))?;
        }
        DoFTuple::new(values)
    }
}

impl fmt::Display for DoFTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.values.iter().map(|v| v.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

impl Serialize for DoFTuple {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_point().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DoFTuple {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let point = BTreeMap::<String, Rational>::deserialize(deserializer)?;
        DoFTuple::from_point(&point).map_err(serde::de::Error::custom)
    }
}

pub fn d_var(i: usize, j: usize) -> String {
    format!("d{i}{j}")
}

pub fn zf_var(i: usize, j: usize) -> String {
    format!("zf{i}{j}")
}

pub fn ia_var(i: usize, j: usize) -> String {
    format!("ia{i}{j}")
}

pub fn gamma_var(i: usize) -> String {
    format!("g{i}")
}

fn r(n: i64) -> Rational {
    Rational::from_integer(n)
}

fn terms<'a>(items: impl IntoIterator<Item = (&'a str, Rational)>) -> Vec<(String, Rational)> {
    items.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn sum_le(vars: &[String], rhs: Rational) -> LinearConstraint {
    LinearConstraint::le(vars.iter().map(|v| (v.clone(), r(1))), rhs)
}

fn dof_system() -> LinearSystem {
    LinearSystem::new(DOF_VARS).expect("distinct names")
}

fn push_nonnegativity(system: &mut LinearSystem, vars: &[String]) {
    for v in vars {
        system
            .push(LinearConstraint::ge([(v.clone(), r(1))], r(0)))
            .expect("declared variable");
    }
}

fn dof_names() -> Vec<String> {
    DOF_VARS.iter().map(|s| s.to_string()).collect()
}

/// Every ordered triple of distinct nodes.
fn triples() -> impl Iterator<Item = (usize, usize, usize)> {
    PAIRS.iter().map(|&(i, j)| (i, j, third(i, j)))
}

/// The 21-variable scheme system in stream-dimension space.
pub fn build_scheme_system(config: &ChannelConfig) -> LinearSystem {
    let mut vars: Vec<String> = dof_names();
    vars.extend(PAIRS.iter().map(|&(i, j)| zf_var(i, j)));
    vars.extend(PAIRS.iter().map(|&(i, j)| ia_var(i, j)));
    vars.extend((1..=3).map(gamma_var));
    let mut s = LinearSystem::new(vars.clone()).expect("distinct names");
    let m = |i| config.mr(i);
    let push = |s: &mut LinearSystem, c| s.push(c).expect("declared variable");

    for i in 1..=3 {
        let (j, k) = match i {
            1 => (2, 3),
            2 => (1, 3),
            _ => (1, 2),
        };
        // transmit dimensions at node i
        push(
            &mut s,
            sum_le(
                &[zf_var(i, j), ia_var(i, j), zf_var(i, k), ia_var(i, k)],
                m(i),
            ),
        );
        // receive dimensions at node i, counting aligned interference once
        let recv = LinearConstraint::le(
            [
                (zf_var(j, i), r(1)),
                (ia_var(j, i), r(1)),
                (zf_var(k, i), r(1)),
                (ia_var(k, i), r(1)),
                (ia_var(j, k), r(1)),
                (ia_var(k, j), r(1)),
                (gamma_var(i), r(-1)),
            ],
            m(i),
        );
        push(&mut s, recv);
        // alignment caps
        let overlap = (m(j) + m(k) - m(i)).positive_part();
        push(
            &mut s,
            LinearConstraint::le([(gamma_var(i), r(1)), (ia_var(j, k), r(-1))], r(0)),
        );
        push(
            &mut s,
            LinearConstraint::le([(gamma_var(i), r(1)), (ia_var(k, j), r(-1))], r(0)),
        );
        push(
            &mut s,
            LinearConstraint::le([(gamma_var(i), r(1))], overlap),
        );
    }
    for (i, j, k) in triples() {
        push(
            &mut s,
            LinearConstraint::le([(zf_var(i, j), r(1))], (m(i) - m(k)).positive_part()),
        );
    }
    push_nonnegativity(&mut s, &vars);
    for &(i, j) in &PAIRS {
        let t = config.tau_for_stream(i, j);
        s.push_all(LinearConstraint::eq(
            terms([
                (d_var(i, j).as_str(), r(1)),
                (zf_var(i, j).as_str(), -&t),
                (ia_var(i, j).as_str(), -&t),
            ]),
            r(0),
        ))
        .expect("declared variables");
    }
    s
}

/// The achievable region in d-space, by projecting out every scheme variable.
pub fn build_inner_region(config: &ChannelConfig) -> LinearSystem {
    let raw = build_scheme_system(config);
    let mut order: Vec<String> = (1..=3).map(gamma_var).collect();
    order.extend(PAIRS.iter().map(|&(i, j)| zf_var(i, j)));
    order.extend(PAIRS.iter().map(|&(i, j)| ia_var(i, j)));
    let order: Vec<&str> = order.iter().map(String::as_str).collect();
    fm_eliminate(&raw, &order).expect("all eliminated variables are declared")
}

/// The closed-form achievable region: six max-constraint pairs plus nonnegativity.
pub fn build_compact_region(config: &ChannelConfig) -> Result<LinearSystem, ModelError> {
    if config.tau.is_zero() {
        return Err(ModelError::DegenerateTau);
    }
    let t = config.tau.clone();
    let m = |i| config.mr(i);
    let one = r(1);
    let mut s = dof_system();
    let mut add = |items: &[(&str, &Rational)], rhs: Rational| {
        s.push(LinearConstraint::le(
            items.iter().map(|(k, v)| (k.to_string(), (*v).clone())),
            rhs,
        ))
        .expect("declared variable");
    };
    let tm = |x: Rational| &t * &x;
    add(&[("d12", &one), ("d13", &one)], tm(m(1)));
    add(&[("d21", &one), ("d31", &one)], tm(m(1)));
    add(&[("d21", &one), ("d23", &t)], tm(m(2)));
    add(&[("d12", &one), ("d32", &t)], tm(m(2)));
    add(&[("d31", &one), ("d32", &t)], tm(m(3)));
    add(&[("d13", &one), ("d23", &t)], tm(m(3)));
    add(
        &[("d12", &one), ("d13", &one), ("d23", &t)],
        tm(m(1).max(m(3))),
    );
    add(
        &[("d21", &one), ("d31", &one), ("d32", &t)],
        tm(m(1).max(m(3))),
    );
    add(
        &[("d12", &one), ("d13", &one), ("d32", &t)],
        tm(m(1).max(m(2))),
    );
    add(
        &[("d21", &one), ("d31", &one), ("d23", &t)],
        tm(m(1).max(m(2))),
    );
    add(
        &[("d12", &one), ("d31", &one), ("d32", &t)],
        tm(m(2).max(m(3))),
    );
    add(
        &[("d21", &one), ("d13", &one), ("d23", &t)],
        tm(m(2).max(m(3))),
    );
    push_nonnegativity(&mut s, &dof_names());
    Ok(s)
}

/// Node labels sorted by descending antenna count; ties keep the lower label first.
fn descending_order(config: &ChannelConfig) -> [usize; 3] {
    let mut order = [1, 2, 3];
    order.sort_by(|&a, &b| config.m(b).cmp(&config.m(a)).then(a.cmp(&b)));
    order
}

/// Achievable region without intermittency, independent of tau.
pub fn build_nonintermittent_region(config: &ChannelConfig) -> LinearSystem {
    let p = descending_order(config);
    let m = |s: usize| config.mr(p[s - 1]);
    let d = |a: usize, b: usize| d_var(p[a - 1], p[b - 1]);
    let mut s = dof_system();
    let rows: [(&[(usize, usize)], usize); 8] = [
        (&[(1, 2), (1, 3), (2, 3)], 1),
        (&[(1, 2), (1, 3), (3, 2)], 1),
        (&[(2, 1), (3, 1), (3, 2)], 1),
        (&[(2, 1), (3, 1), (2, 3)], 1),
        (&[(2, 1), (1, 3), (2, 3)], 2),
        (&[(1, 2), (3, 1), (3, 2)], 2),
        (&[(3, 1), (3, 2)], 3),
        (&[(1, 3), (2, 3)], 3),
    ];
    for (streams, bound) in rows {
        let vars: Vec<String> = streams.iter().map(|&(a, b)| d(a, b)).collect();
        s.push(sum_le(&vars, m(bound))).expect("declared variable");
    }
    push_nonnegativity(&mut s, &dof_names());
    s
}

/// Sum-DoF of the intermittent channel in closed form.
pub fn sum_dof_formula(config: &ChannelConfig) -> Rational {
    sum_dof_closed_form(config.antennas(), &config.tau)
}

/// Closed form on raw antenna counts; zero counts are allowed so curves can start at 0.
pub fn sum_dof_closed_form(m: [u32; 3], tau: &Rational) -> Rational {
    let min = *m.iter().min().unwrap();
    let max = *m.iter().max().unwrap();
    let middle = m[0] + m[1] + m[2] - min - max;
    let off = Rational::one() - tau;
    r(2) * off * Rational::from(m[1].min(m[2])) + r(2) * tau * Rational::from(middle)
}

/// Sum-DoF without intermittency: twice the middle antenna count.
pub fn sum_dof_nonintermittent(m: [u32; 3]) -> Rational {
    sum_dof_closed_form(m, &Rational::one())
}

/// Cut-set outer region.
pub fn build_cutset_region(config: &ChannelConfig) -> LinearSystem {
    let t = &config.tau;
    let off = Rational::one() - t;
    let m = |i| config.mr(i);
    let mut s = dof_system();
    let cut1 = t * (m(1).min(m(2) + m(3)));
    s.push(sum_le(&[d_var(1, 2), d_var(1, 3)], cut1.clone()))
        .expect("declared");
    s.push(sum_le(&[d_var(2, 1), d_var(3, 1)], cut1))
        .expect("declared");
    for (i, o) in [(2, 3), (3, 2)] {
        let bound = t * (m(i).min(m(1) + m(o))) + &off * (m(i).min(m(o)));
        s.push(sum_le(&[d_var(i, 1), d_var(i, o)], bound.clone()))
            .expect("declared");
        s.push(sum_le(&[d_var(1, i), d_var(o, i)], bound))
            .expect("declared");
    }
    push_nonnegativity(&mut s, &dof_names());
    s
}

fn swap_23_map() -> HashMap<String, String> {
    [("d12", "d13"), ("d21", "d31"), ("d23", "d32")]
        .into_iter()
        .flat_map(|(a, b)| {
            [
                (a.to_string(), b.to_string()),
                (b.to_string(), a.to_string()),
            ]
        })
        .collect()
}

/// Relabels nodes 2 and 3 in a d-space system.
pub fn swap_nodes_23(system: &LinearSystem) -> LinearSystem {
    let renamed = system
        .renamed(&swap_23_map())
        .expect("a permutation of names");
    let mut out = dof_system();
    out.push_all(renamed.constraints().iter().cloned())
        .expect("same variable set");
    out
}

/// Genie-aided outer region. Each antenna ordering that the configuration
/// satisfies (ties count for both sides) contributes its pair of triplet bounds.
pub fn build_genie_outer_region(config: &ChannelConfig) -> LinearSystem {
    let mut bounds = Vec::new();
    if config.m(2) >= config.m(3) {
        bounds.extend(genie_bounds_2_over_3(config));
    }
    if config.m(3) >= config.m(2) {
        let map = swap_23_map();
        bounds.extend(
            genie_bounds_2_over_3(&config.swapped_23())
                .iter()
                .map(|c| c.rename(&map)),
        );
    }
    let mut s = dof_system();
    for c in bounds {
        if !s.constraints().contains(&c) {
            s.push(c).expect("declared");
        }
    }
    push_nonnegativity(&mut s, &dof_names());
    s
}

/// Triplet bounds for the orderings with `M2 >= M3`.
fn genie_bounds_2_over_3(config: &ChannelConfig) -> Vec<LinearConstraint> {
    let t = &config.tau;
    let off = Rational::one() - t;
    let (m1, m2, m3) = (config.mr(1), config.mr(2), config.mr(3));
    let names =
        |v: [(usize, usize); 3]| -> Vec<String> { v.iter().map(|&(a, b)| d_var(a, b)).collect() };
    let mut out = Vec::new();
    if m1 >= m2 {
        let bound = t * &m2 + &off * &m3;
        out.push(sum_le(&names([(1, 2), (3, 2), (3, 1)]), bound.clone()));
        out.push(sum_le(&names([(1, 3), (2, 3), (2, 1)]), bound));
    }
    if m2 >= m1 && m1 >= m3 {
        let bound = t * &m1 + &off * &m3;
        out.push(sum_le(&names([(1, 3), (2, 3), (1, 2)]), bound.clone()));
        out.push(sum_le(&names([(2, 1), (3, 1), (3, 2)]), bound));
    }
    if m3 >= m1 {
        out.push(sum_le(&names([(1, 3), (2, 3), (1, 2)]), m3.clone()));
        out.push(sum_le(&names([(2, 1), (3, 1), (3, 2)]), m3));
    }
    out
}

/// Largest d31 reachable by non-adaptive encoding.
pub fn d31_nonadaptive_cap(config: &ChannelConfig) -> Rational {
    &config.tau * &config.mr(1).min(config.mr(3))
}

/// d31 reachable by decode-forward relaying through node 2.
pub fn d31_decode_forward(config: &ChannelConfig) -> Rational {
    let t = &config.tau;
    let a = t * &config.mr(1);
    let b = t * &(config.mr(2) + config.mr(3));
    a.min(b).min(config.mr(3))
}

/// Objective `Σ d_ij` for [`crate::polyhedra::lp_maximize`].
pub fn sum_objective() -> BTreeMap<String, Rational> {
    DOF_VARS.iter().map(|v| (v.to_string(), r(1))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyhedra::{is_equal, is_subset, lp_maximize, LpOutcome};

    fn cfg(m1: u32, m2: u32, m3: u32, num: i64, den: i64) -> ChannelConfig {
        ChannelConfig::from_parts(m1, m2, m3, num, den).unwrap()
    }

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn max_sum(s: &LinearSystem) -> Rational {
        match lp_maximize(s, &sum_objective()).unwrap() {
            LpOutcome::Optimal { value, .. } => value,
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    fn tuple(v: [i64; 6]) -> BTreeMap<String, Rational> {
        DoFTuple::new(v.map(r)).unwrap().to_point()
    }

    fn has(s: &LinearSystem, items: &[(&str, Rational)], rhs: Rational) -> bool {
        let c = LinearConstraint::le(items.iter().cloned(), rhs);
        s.constraints().contains(&c)
    }

    /// Direct evaluation of the closed form, written independently of the library's.
    fn table_ii(m: [u32; 3], tau: &Rational) -> Rational {
        let mut sorted = m;
        sorted.sort_unstable();
        let middle = r(sorted[1] as i64);
        let low23 = r(m[1].min(m[2]) as i64);
        r(2) * &low23 + r(2) * tau * &(middle - low23)
    }

    #[test]
    fn config_validation_and_json() {
        assert!(ChannelConfig::from_parts(0, 1, 1, 1, 2).is_err());
        assert!(ChannelConfig::from_parts(1, 1, 1, 3, 2).is_err());
        assert!(ChannelConfig::from_parts(1, 1, 1, -1, 2).is_err());
        let c = ChannelConfig::from_json(r#"{"M":[10,7,3],"tau":"1/4"}"#).unwrap();
        assert_eq!(c, cfg(10, 7, 3, 1, 4));
        assert_eq!(c.to_json(), r#"{"M":[10,7,3],"tau":"1/4"}"#);
        assert_eq!(
            ChannelConfig::from_json(r#"{"M":[1,2,3],"tau":[1,2]}"#)
                .unwrap()
                .tau(),
            &q(1, 2)
        );
        assert!(ChannelConfig::from_json(r#"{"M":[1,2,3],"tau":0.5}"#).is_err());
        assert!(ChannelConfig::from_json(r#"{"M":[0,2,3],"tau":"1/2"}"#).is_err());
    }

    #[test]
    fn tuple_parsing() {
        let d: DoFTuple = "1/2,0,1/2,4,0,4".parse().unwrap();
        assert_eq!(d.get(2, 3), &r(4));
        assert_eq!(d.sum(), r(9));
        assert!("1,2,3".parse::<DoFTuple>().is_err());
        assert!("1,2,3,4,5,-1".parse::<DoFTuple>().is_err());
        let json = serde_json::to_string(&d).unwrap();
        assert_eq!(serde_json::from_str::<DoFTuple>(&json).unwrap(), d);
    }

    #[test]
    fn scheme_system_examples() {
        let s = build_scheme_system(&cfg(5, 7, 4, 1, 2));
        assert_eq!(s.variables().len(), 21);
        assert!(has(&s, &[("zf12", r(1))], r(1)));
        assert!(has(&s, &[("zf21", r(1))], r(3)));
        let s = build_scheme_system(&cfg(6, 3, 2, 1, 2));
        assert!(has(&s, &[("g1", r(1))], r(0)));
    }

    #[test]
    fn inner_region_examples() {
        let inner = build_inner_region(&cfg(10, 7, 3, 1, 4));
        assert_eq!(inner.variables(), dof_names().as_slice());
        assert_eq!(max_sum(&inner), r(8));
        assert_eq!(max_sum(&build_inner_region(&cfg(10, 7, 3, 0, 1))), r(6));
        for m in 1..=4u32 {
            let c = cfg(m, m, m, 1, 1);
            let third_point = DoFTuple::new([(); 6].map(|_| q(m as i64, 3)))
                .unwrap()
                .to_point();
            assert!(build_inner_region(&c).check_point(&third_point).unwrap());
            assert!(build_nonintermittent_region(&c)
                .check_point(&third_point)
                .unwrap());
        }
    }

    #[test]
    fn compact_region_examples() {
        let c = build_compact_region(&cfg(10, 7, 3, 1, 4)).unwrap();
        assert!(has(&c, &[("d12", r(1)), ("d13", r(1))], q(10, 4)));
        assert_eq!(
            build_compact_region(&cfg(10, 7, 3, 0, 1)),
            Err(ModelError::DegenerateTau)
        );
        let full = build_compact_region(&cfg(10, 7, 3, 1, 1)).unwrap();
        assert!(is_equal(&full, &build_nonintermittent_region(&cfg(10, 7, 3, 1, 1))).unwrap());
        let c = cfg(10, 7, 4, 1, 2);
        assert!(is_equal(&build_compact_region(&c).unwrap(), &build_inner_region(&c)).unwrap());
    }

    #[test]
    fn nonintermittent_examples() {
        let s = build_nonintermittent_region(&cfg(10, 7, 4, 1, 1));
        assert!(has(&s, &[("d31", r(1)), ("d32", r(1))], r(4)));
        assert_eq!(max_sum(&s), r(14));
        let s = build_nonintermittent_region(&cfg(4, 7, 10, 1, 1));
        assert!(has(&s, &[("d13", r(1)), ("d12", r(1))], r(4)));
    }

    #[test]
    fn sum_dof_examples() {
        assert_eq!(sum_dof_formula(&cfg(10, 7, 3, 1, 4)), r(8));
        assert_eq!(sum_dof_formula(&cfg(10, 7, 9, 1, 4)), r(15));
        assert_eq!(sum_dof_formula(&cfg(10, 7, 4, 1, 1)), r(14));
        assert_eq!(sum_dof_formula(&cfg(4, 2, 2, 1, 2)), r(4));
        assert_eq!(sum_dof_closed_form([10, 7, 0], &q(1, 4)), q(7, 2));
    }

    #[test]
    fn cutset_and_genie_examples() {
        let c = cfg(4, 2, 2, 1, 2);
        let cut = build_cutset_region(&c);
        assert!(has(&cut, &[("d12", r(1)), ("d13", r(1))], r(2)));
        assert!(has(&cut, &[("d31", r(1)), ("d32", r(1))], r(2)));
        assert!(cut.check_point(&tuple([1; 6])).unwrap());
        assert!(max_sum(&cut) >= r(6));
        let genie = build_genie_outer_region(&c);
        assert!(!genie.check_point(&tuple([1; 6])).unwrap());
        assert_eq!(max_sum(&genie), r(4));
        assert_eq!(
            max_sum(&build_genie_outer_region(&cfg(10, 7, 3, 1, 4))),
            r(8)
        );
        for region in [&cut, &genie] {
            assert!(region.check_point(&tuple([0; 6])).unwrap());
        }
    }

    #[test]
    fn d31_examples() {
        let c = cfg(10, 7, 4, 1, 2);
        assert_eq!(d31_nonadaptive_cap(&c), r(2));
        assert_eq!(d31_decode_forward(&c), r(4));
        assert_eq!(d31_nonadaptive_cap(&cfg(10, 7, 4, 0, 1)), r(0));
        assert_eq!(d31_decode_forward(&cfg(10, 7, 4, 0, 1)), r(0));
        assert_eq!(d31_nonadaptive_cap(&cfg(10, 7, 4, 1, 1)), r(4));
        assert_eq!(d31_decode_forward(&cfg(5, 2, 5, 1, 1)), r(5));
    }

    fn grid(step: usize) -> impl Iterator<Item = ChannelConfig> {
        let taus = [q(0, 1), q(1, 4), q(1, 2), q(3, 4), q(1, 1)];
        let mut out = Vec::new();
        let mut n = 0usize;
        for m1 in 1..=6 {
            for m2 in 1..=6 {
                for m3 in 1..=6 {
                    for t in &taus {
                        if n.is_multiple_of(step) {
                            out.push(ChannelConfig::new([m1, m2, m3], t.clone()).unwrap());
                        }
                        n += 1;
                    }
                }
            }
        }
        out.into_iter()
    }

    #[test]
    fn grid_sum_dof_and_sandwich() {
        for c in grid(7) {
            let inner = build_inner_region(&c);
            let expected = table_ii(c.antennas(), c.tau());
            assert_eq!(sum_dof_formula(&c), expected, "{c}");
            assert_eq!(max_sum(&inner), expected, "{c}");
            let genie = build_genie_outer_region(&c);
            assert_eq!(max_sum(&genie), expected, "{c}");
            assert!(is_subset(&inner, &genie).unwrap(), "{c}");
            assert!(is_subset(&inner, &build_cutset_region(&c)).unwrap(), "{c}");
            if c.tau().is_positive() {
                let compact = build_compact_region(&c).unwrap();
                assert!(is_equal(&inner, &compact).unwrap(), "{c}");
            }
        }
    }

    #[test]
    fn grid_symmetry_23() {
        for c in grid(11) {
            let s = c.swapped_23();
            let pairs = [
                (build_inner_region(&c), build_inner_region(&s)),
                (build_cutset_region(&c), build_cutset_region(&s)),
                (build_genie_outer_region(&c), build_genie_outer_region(&s)),
                (
                    build_nonintermittent_region(&c),
                    build_nonintermittent_region(&s),
                ),
            ];
            for (n, (a, b)) in pairs.into_iter().enumerate() {
                assert!(is_equal(&swap_nodes_23(&a), &b).unwrap(), "{c} region {n}");
            }
            if c.tau().is_positive() {
                let a = build_compact_region(&c).unwrap();
                let b = build_compact_region(&s).unwrap();
                assert!(is_equal(&swap_nodes_23(&a), &b).unwrap(), "{c}");
            }
        }
    }

    #[test]
    fn compact_monotone_in_tau_and_collapses_at_one() {
        let taus = [q(1, 4), q(1, 2), q(3, 4), q(1, 1)];
        for m1 in 1..=6 {
            for m2 in 1..=6 {
                for m3 in 1..=6 {
                    let regions: Vec<LinearSystem> = taus
                        .iter()
                        .map(|t| {
                            build_compact_region(
                                &ChannelConfig::new([m1, m2, m3], t.clone()).unwrap(),
                            )
                            .unwrap()
                        })
                        .collect();
                    for w in regions.windows(2) {
                        assert!(is_subset(&w[0], &w[1]).unwrap());
                    }
                    let c = ChannelConfig::new([m1, m2, m3], r(1)).unwrap();
                    assert!(is_equal(&regions[3], &build_nonintermittent_region(&c)).unwrap());
                }
            }
        }
    }
}
