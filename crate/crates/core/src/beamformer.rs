//! Random channel draws, ZF/IA pre-coder and post-coder synthesis, and numeric checks.
//!
//! Randomness: `ChaCha8Rng::seed_from_u64(seed)`. Stream 0 draws the channel
//! matrices (pairs in order 12, 13, 21, 23, 31, 32, entries column-major), and
//! the design draws its random combinations from the same seed on stream 1.

use std::fmt;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::allocation::StreamAllocation;
use crate::dof_model::{third, ChannelConfig, PAIRS};
use crate::linalg::{
    complex_gaussian, hstack, leading_left_singular, normalize_columns, null_space, orthonormalize,
    range_basis_with_scale, rank, rank_with_scale, singular_values, CMatrix, RANK_TOL,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BeamformerError {
    #[error("allocation cannot be realized: {0}")]
    AllocationInfeasible(String),
    #[error("degenerate channel draw: {0}")]
    DegenerateChannel(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum StreamKind {
    #[serde(rename = "ZF")]
    Zf,
    #[serde(rename = "IA")]
    Ia,
}

impl StreamKind {
    pub const ALL: [StreamKind; 2] = [StreamKind::Zf, StreamKind::Ia];

    pub fn count(self, alloc: &StreamAllocation, i: usize, j: usize) -> usize {
        (match self {
            StreamKind::Zf => alloc.zf(i, j),
            StreamKind::Ia => alloc.ia(i, j),
        }) as usize
    }
}

impl fmt::Display for StreamKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StreamKind::Zf => "ZF",
            StreamKind::Ia => "IA",
        })
    }
}

fn pair_index(i: usize, j: usize) -> usize {
    PAIRS
        .iter()
        .position(|&p| p == (i, j))
        .expect("distinct nodes")
}

fn others(i: usize) -> (usize, usize) {
    match i {
        1 => (2, 3),
        2 => (1, 3),
        _ => (1, 2),
    }
}

/// Channel matrices `H_ij` (receiver `j` × transmitter `i`), power and noise.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    antennas: [usize; 3],
    h: [CMatrix; 6],
    pub power: f64,
    pub sigma2: f64,
    pub seed: u64,
}

impl ChannelRealization {
    /// Channel from node `i` to node `j`, of shape `M_j × M_i`.
    pub fn h(&self, i: usize, j: usize) -> &CMatrix {
        &self.h[pair_index(i, j)]
    }

    pub fn m(&self, i: usize) -> usize {
        self.antennas[i - 1]
    }

    pub fn snr(&self) -> f64 {
        self.power / self.sigma2
    }

    /// Same matrices at a different transmit power.
    pub fn with_power(&self, power: f64) -> Self {
        ChannelRealization {
            power,
            ..self.clone()
        }
    }

    pub fn from_matrices(h: [CMatrix; 6], power: f64, sigma2: f64) -> Self {
        let antennas = [h[0].ncols(), h[2].ncols(), h[4].ncols()];
        ChannelRealization {
            antennas,
            h,
            power,
            sigma2,
            seed: 0,
        }
    }
}

/// Draws a realization; a draw that is not full rank is replaced by the next one.
pub fn sample_channel(
    config: &ChannelConfig,
    seed: u64,
    power: f64,
    sigma2: f64,
) -> Result<ChannelRealization, BeamformerError> {
    if !(power > 0.0 && sigma2 > 0.0) {
        return Err(BeamformerError::InvalidParameter(format!(
            "P and sigma2 must be positive, got P={power}, sigma2={sigma2}"
        )));
    }
    let antennas = config.antennas().map(|m| m as usize);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let h = PAIRS.map(|(i, j)| complex_gaussian(&mut rng, antennas[j - 1], antennas[i - 1]));
        if h.iter().all(|m| rank(m) == m.nrows().min(m.ncols())) {
            return Ok(ChannelRealization {
                antennas,
                h,
                power,
                sigma2,
                seed,
            });
        }
    }
}

/// Pre-coders `V` (per transmitted stream set), post-coders `T`, per-symbol power.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformerSet {
    v: [[CMatrix; 6]; 2],
    t: [[CMatrix; 6]; 2],
    power: [f64; 3],
}

fn kind_index(kind: StreamKind) -> usize {
    match kind {
        StreamKind::Zf => 0,
        StreamKind::Ia => 1,
    }
}

impl BeamformerSet {
    /// Pre-coder of the `kind` streams `i → j`: `M_i × a_ij`.
    pub fn v(&self, i: usize, j: usize, kind: StreamKind) -> &CMatrix {
        &self.v[kind_index(kind)][pair_index(i, j)]
    }

    /// Post-coder at `j` for the `kind` streams from `i`: `a_ij × M_j`.
    pub fn t(&self, i: usize, j: usize, kind: StreamKind) -> &CMatrix {
        &self.t[kind_index(kind)][pair_index(i, j)]
    }

    pub fn v_mut(&mut self, i: usize, j: usize, kind: StreamKind) -> &mut CMatrix {
        &mut self.v[kind_index(kind)][pair_index(i, j)]
    }

    pub fn t_mut(&mut self, i: usize, j: usize, kind: StreamKind) -> &mut CMatrix {
        &mut self.t[kind_index(kind)][pair_index(i, j)]
    }

    /// Per-symbol power of node `i`.
    pub fn power(&self, i: usize) -> f64 {
        self.power[i - 1]
    }

    /// Same beamformers with every per-symbol power multiplied by `factor`.
    pub fn with_power_scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.power.iter_mut().for_each(|p| *p *= factor);
        out
    }

    pub fn is_empty(&self) -> bool {
        self.v.iter().flatten().all(|m| m.ncols() == 0)
    }
}

/// Columns received at `at` that are not the `kind` streams `from → at`:
/// the other kind from `from`, both kinds from the third node, and the
/// streams exchanged between the two other nodes.
fn unwanted_columns(
    real: &ChannelRealization,
    set: &BeamformerSet,
    from: usize,
    at: usize,
    kind: StreamKind,
) -> CMatrix {
    let other = third(from, at);
    let h_f = real.h(from, at);
    let h_o = real.h(other, at);
    let other_kind = match kind {
        StreamKind::Zf => StreamKind::Ia,
        StreamKind::Ia => StreamKind::Zf,
    };
    let blocks = [
        h_f * set.v(from, at, other_kind),
        h_o * set.v(other, at, StreamKind::Zf),
        h_o * set.v(other, at, StreamKind::Ia),
        h_f * set.v(from, other, StreamKind::Zf),
        h_f * set.v(from, other, StreamKind::Ia),
        h_o * set.v(other, from, StreamKind::Zf),
        h_o * set.v(other, from, StreamKind::Ia),
    ];
    let refs: Vec<&CMatrix> = blocks.iter().collect();
    hstack(real.m(at), &refs)
}

/// Builds pre-coders and post-coders for an antenna-space (`L = 1`) allocation.
pub fn design_beamformers(
    real: &ChannelRealization,
    alloc: &StreamAllocation,
) -> Result<BeamformerSet, BeamformerError> {
    if alloc.extension() != 1 {
        return Err(BeamformerError::AllocationInfeasible(format!(
            "symbol extension L = {} is not realized numerically",
            alloc.extension()
        )));
    }
    for i in 1..=3 {
        if alloc.transmit_count(i) as usize > real.m(i) {
            return Err(BeamformerError::AllocationInfeasible(format!(
                "node {i} sends {} streams with {} antennas",
                alloc.transmit_count(i),
                real.m(i)
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(real.seed);
    rng.set_stream(1);
    let empty = |rows: usize| CMatrix::zeros(rows, 0);
    let mut set = BeamformerSet {
        v: [0, 1].map(|_| PAIRS.map(|(i, _)| empty(real.m(i)))),
        t: [0, 1].map(|_| PAIRS.map(|(_, j)| CMatrix::zeros(0, real.m(j)))),
        power: [0.0; 3],
    };

    for &(i, j) in &PAIRS {
        let a = alloc.zf(i, j) as usize;
        if a == 0 {
            continue;
        }
        let k = third(i, j);
        let basis = null_space(real.h(i, k));
        if basis.ncols() < a {
            return Err(BeamformerError::AllocationInfeasible(format!(
                "{a} ZF streams {i}->{j} but the null space of H{i}{k} has dimension {}",
                basis.ncols()
            )));
        }
        let mix = complex_gaussian(&mut rng, basis.ncols(), a);
        *set.v_mut(i, j, StreamKind::Zf) = orthonormalize(&(basis * mix));
    }

    for i in 1..=3 {
        let (j, k) = others(i);
        let g = alloc.gamma(i) as usize;
        let (need_jk, need_kj) = (alloc.ia(j, k) as usize, alloc.ia(k, j) as usize);
        if g > need_jk.min(need_kj) {
            return Err(BeamformerError::AllocationInfeasible(format!(
                "gamma{i} = {g} exceeds the IA streams {j}->{k} ({need_jk}) or {k}->{j} ({need_kj})"
            )));
        }
        let (mj, mk) = (real.m(j), real.m(k));
        let mut p = empty(mj);
        let mut q = empty(mk);
        if g > 0 {
            let stacked = hstack(real.m(i), &[real.h(j, i), &(-real.h(k, i))]);
            let basis = null_space(&stacked);
            if basis.ncols() < g {
                return Err(BeamformerError::AllocationInfeasible(format!(
                    "gamma{i} = {g} but only {} aligned directions exist",
                    basis.ncols()
                )));
            }
            let w = orthonormalize(&(&basis * complex_gaussian(&mut rng, basis.ncols(), g)));
            p = w.rows(0, mj).into_owned();
            q = w.rows(mj, mk).into_owned();
            normalize_columns(&mut p);
            normalize_columns(&mut q);
        }
        let mut fill = |aligned: CMatrix, rows: usize, total: usize| {
            let mut extra = complex_gaussian(&mut rng, rows, total - aligned.ncols());
            normalize_columns(&mut extra);
            hstack(rows, &[&aligned, &extra])
        };
        *set.v_mut(j, k, StreamKind::Ia) = fill(p, mj, need_jk);
        *set.v_mut(k, j, StreamKind::Ia) = fill(q, mk, need_kj);
    }

    for &(i, j) in &PAIRS {
        for kind in StreamKind::ALL {
            let a = kind.count(alloc, i, j);
            if a == 0 {
                continue;
            }
            let desired = real.h(i, j) * set.v(i, j, kind);
            let channel_scale = [real.h(i, j), real.h(third(i, j), j)]
                .iter()
                .filter_map(|h| singular_values(h).first().copied())
                .fold(0.0, f64::max);
            let unwanted = range_basis_with_scale(
                &unwanted_columns(real, &set, i, j, kind),
                Some(channel_scale),
            );
            let projected = &desired - &unwanted * (unwanted.adjoint() * &desired);
            let (u, sigma) = leading_left_singular(&projected, a);
            let scale = singular_values(&desired).first().copied().unwrap_or(0.0);
            if sigma.len() < a || sigma[a - 1] <= RANK_TOL * scale {
                return Err(BeamformerError::DegenerateChannel(format!(
                    "stream set {kind} {i}->{j} loses dimensions after interference projection"
                )));
            }
            *set.t_mut(i, j, kind) = u.adjoint();
        }
    }

    for i in 1..=3 {
        let n = alloc.transmit_count(i);
        set.power[i - 1] = if n == 0 { 0.0 } else { real.power / n as f64 };
    }
    Ok(set)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum CheckKind {
    /// `H_ik V_ij^ZF = 0`
    ZeroForcing,
    /// post-coder annihilates every unwanted column
    Suppression,
    /// post-coded desired channel keeps full rank
    DesiredRank,
    /// measured alignment dimension equals gamma
    Alignment,
    /// transmit columns of a node are independent
    TransmitIndependence,
    /// post-coder rows are orthonormal
    Orthonormality,
    /// per-symbol powers add up to the node budget
    Power,
}

impl CheckKind {
    pub fn label(self) -> &'static str {
        match self {
            CheckKind::ZeroForcing => "a",
            CheckKind::Suppression => "b",
            CheckKind::DesiredRank => "c",
            CheckKind::Alignment => "d",
            CheckKind::TransmitIndependence => "e",
            CheckKind::Orthonormality => "f",
            CheckKind::Power => "power",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BeamCheck {
    pub kind: CheckKind,
    pub subject: String,
    pub measured: f64,
    pub limit: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BeamReport {
    pub checks: Vec<BeamCheck>,
    /// Alignment dimension measured at each receiver.
    pub gamma: [usize; 3],
}

impl BeamReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &BeamCheck> {
        self.checks.iter().filter(|c| !c.pass)
    }

    fn norm_check(&mut self, kind: CheckKind, subject: String, measured: f64, limit: f64) {
        self.checks.push(BeamCheck {
            kind,
            subject,
            measured,
            limit,
            pass: measured <= limit,
        });
    }

    fn count_check(&mut self, kind: CheckKind, subject: String, measured: usize, expected: usize) {
        self.checks.push(BeamCheck {
            kind,
            subject,
            measured: measured as f64,
            limit: expected as f64,
            pass: measured == expected,
        });
    }
}

impl fmt::Display for BeamReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let verdict = if c.pass { "pass" } else { "FAIL" };
            writeln!(
                f,
                "{verdict} ({}) {:<24} measured {:.3e} limit {:.3e}",
                c.kind.label(),
                c.subject,
                c.measured,
                c.limit
            )?;
        }
        writeln!(
            f,
            "measured gamma = ({}, {}, {})",
            self.gamma[0], self.gamma[1], self.gamma[2]
        )
    }
}

/// Numerically checks every algebraic condition the design must satisfy.
/// Norm checks are relative to the size of their operands.
pub fn verify_beamformers(
    real: &ChannelRealization,
    alloc: &StreamAllocation,
    set: &BeamformerSet,
    tol: f64,
) -> BeamReport {
    let mut report = BeamReport {
        checks: Vec::new(),
        gamma: [0; 3],
    };
    for &(i, j) in &PAIRS {
        let v = set.v(i, j, StreamKind::Zf);
        if v.ncols() == 0 && alloc.zf(i, j) == 0 {
            continue;
        }
        let k = third(i, j);
        let h = real.h(i, k);
        report.norm_check(
            CheckKind::ZeroForcing,
            format!("H{i}{k} V{i}{j}^ZF"),
            (h * v).norm(),
            tol * h.norm() * v.norm(),
        );
    }
    for &(i, j) in &PAIRS {
        for kind in StreamKind::ALL {
            let a = kind.count(alloc, i, j);
            let t = set.t(i, j, kind);
            let v = set.v(i, j, kind);
            if a == 0 && t.nrows() == 0 {
                continue;
            }
            let unwanted = unwanted_columns(real, set, i, j, kind);
            let channel_scale = real.h(i, j).norm().max(real.h(third(i, j), j).norm());
            report.norm_check(
                CheckKind::Suppression,
                format!("T{i}{j}^{kind} unwanted"),
                (t * &unwanted).norm(),
                tol * t.norm() * unwanted.norm().max(channel_scale),
            );
            let h = real.h(i, j);
            let scale = singular_values(h).first().copied().unwrap_or(0.0) * v.norm().max(1.0);
            let effective = t * h * v;
            report.count_check(
                CheckKind::DesiredRank,
                format!("T{i}{j}^{kind} H{i}{j} V{i}{j}^{kind}"),
                rank_with_scale(&effective, Some(scale)),
                a,
            );
            let gram = t * t.adjoint();
            let identity = CMatrix::identity(t.nrows(), t.nrows());
            report.norm_check(
                CheckKind::Orthonormality,
                format!("T{i}{j}^{kind} rows"),
                (gram - identity).norm(),
                tol * (t.nrows() as f64).sqrt().max(1.0),
            );
        }
    }
    for i in 1..=3 {
        let (j, k) = others(i);
        let a = real.h(j, i) * set.v(j, k, StreamKind::Ia);
        let b = real.h(k, i) * set.v(k, j, StreamKind::Ia);
        let both = hstack(real.m(i), &[&a, &b]);
        let measured = rank(&a) + rank(&b) - rank(&both);
        report.gamma[i - 1] = measured;
        if alloc.gamma(i) > 0 || measured > 0 {
            report.count_check(
                CheckKind::Alignment,
                format!("gamma{i}"),
                measured,
                alloc.gamma(i) as usize,
            );
        }
    }
    for i in 1..=3 {
        let (j, k) = others(i);
        let blocks = [
            set.v(i, j, StreamKind::Zf),
            set.v(i, j, StreamKind::Ia),
            set.v(i, k, StreamKind::Zf),
            set.v(i, k, StreamKind::Ia),
        ];
        let all = hstack(real.m(i), &blocks);
        if all.ncols() == 0 {
            continue;
        }
        let fits = all.ncols() <= real.m(i);
        let independent = if fits { rank(&all) } else { 0 };
        report.count_check(
            CheckKind::TransmitIndependence,
            format!("node {i} transmit columns"),
            independent,
            all.ncols(),
        );
        let spent = set.power(i) * alloc.transmit_count(i) as f64;
        report.norm_check(
            CheckKind::Power,
            format!("node {i} power"),
            (spent - real.power).abs(),
            1e-12 * real.power,
        );
    }
    report
}

fn matrix_json(m: &CMatrix) -> Value {
    Value::Array(
        m.row_iter()
            .map(|row| {
                Value::Array(
                    row.iter()
                        .map(|z: &Complex64| json!([z.re, z.im]))
                        .collect(),
                )
            })
            .collect(),
    )
}

/// Every channel, pre-coder and post-coder as nested `[re, im]` arrays.
pub fn dump_matrices(real: &ChannelRealization, set: &BeamformerSet) -> Value {
    let mut h = serde_json::Map::new();
    let mut v = serde_json::Map::new();
    let mut t = serde_json::Map::new();
    for &(i, j) in &PAIRS {
        h.insert(format!("{i}{j}"), matrix_json(real.h(i, j)));
        for kind in StreamKind::ALL {
            if set.v(i, j, kind).ncols() > 0 {
                v.insert(format!("{i}{j}_{kind}"), matrix_json(set.v(i, j, kind)));
                t.insert(format!("{i}{j}_{kind}"), matrix_json(set.t(i, j, kind)));
            }
        }
    }
    json!({
        "P": real.power,
        "sigma2": real.sigma2,
        "seed": real.seed,
        "H": h,
        "V": v,
        "T": t,
        "p": set.power,
    })
}
