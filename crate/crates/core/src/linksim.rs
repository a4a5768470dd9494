//! Rates of the designed scheme, DoF slopes over SNR sweeps, and intermittency averages.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::allocation::StreamAllocation;
use crate::beamformer::{
    design_beamformers, sample_channel, verify_beamformers, BeamReport, BeamformerError,
    BeamformerSet, ChannelRealization, StreamKind,
};
use crate::dof_model::{ChannelConfig, PAIRS};
use crate::linalg::{hstack, log2_det_gram, CMatrix};
use crate::polyhedra::format_significant;

/// Tolerance used when a sweep verifies its own designs.
pub const VERIFY_TOL: f64 = 1e-8;

/// How many replacement seeds a sweep tries before giving up on one slot.
const MAX_RESEEDS: u64 = 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinkError {
    #[error("beamformer design was not verified")]
    UnverifiedDesign,
    #[error("SNR grid needs at least 3 points spanning 40 dB, got {0:?}")]
    InvalidGrid(Vec<f64>),
    #[error("seed {0}: no usable channel draw after {MAX_RESEEDS} replacements")]
    Exhausted(u64),
    #[error(transparent)]
    Design(#[from] BeamformerError),
}

/// `tau * log2 det(I + (P/sigma2) H H^H)` in bits per channel use.
pub fn p2p_capacity(h: &CMatrix, tau: f64, power: f64, sigma2: f64) -> f64 {
    if tau == 0.0 {
        return 0.0;
    }
    tau * log2_det_gram(h, power / sigma2)
}

/// Sum capacity of the point-to-point two-way channel: twice the one-way value.
pub fn twc_sum_capacity(h: &CMatrix, tau: f64, power: f64, sigma2: f64) -> f64 {
    2.0 * p2p_capacity(h, tau, power, sigma2)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StreamRate {
    pub from: usize,
    pub to: usize,
    pub kind: StreamKind,
    pub streams: usize,
    pub snr_db: f64,
    pub rate: f64,
}

impl StreamRate {
    pub fn stream_id(&self) -> String {
        format!("{}{}", self.from, self.to)
    }
}

pub fn snr_db(real: &ChannelRealization) -> f64 {
    10.0 * real.snr().log10()
}

/// Rate of every active stream set through its post-coded channel.
pub fn stream_rates(
    config: &ChannelConfig,
    real: &ChannelRealization,
    alloc: &StreamAllocation,
    set: &BeamformerSet,
    verification: Option<&BeamReport>,
) -> Result<Vec<StreamRate>, LinkError> {
    match verification {
        Some(report) if report.passed() => {}
        _ => return Err(LinkError::UnverifiedDesign),
    }
    let mut out = Vec::new();
    for &(i, j) in &PAIRS {
        let tau = config.tau_for_stream(i, j).to_f64();
        for kind in StreamKind::ALL {
            let a = kind.count(alloc, i, j);
            if a == 0 {
                continue;
            }
            let effective = set.t(i, j, kind) * real.h(i, j) * set.v(i, j, kind);
            let rate = tau * log2_det_gram(&effective, set.power(i) / real.sigma2);
            out.push(StreamRate {
                from: i,
                to: j,
                kind,
                streams: a,
                snr_db: snr_db(real),
                rate,
            });
        }
    }
    Ok(out)
}

/// Least-squares slope of `ys` against `xs`.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn check_grid(grid: &[f64]) -> Result<Vec<f64>, LinkError> {
    let mut sorted = grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    let span = sorted.last().copied().unwrap_or(0.0) - sorted.first().copied().unwrap_or(0.0);
    if sorted.len() < 3 || span < 40.0 || sorted.iter().any(|x| !x.is_finite()) {
        return Err(LinkError::InvalidGrid(grid.to_vec()));
    }
    Ok(sorted)
}

/// `log2 rho` at the top (up to four) grid points.
fn regression_points(sorted: &[f64]) -> &[f64] {
    &sorted[sorted.len().saturating_sub(4)..]
}

fn db_to_log2(db: f64) -> f64 {
    db / 10.0 * std::f64::consts::LOG2_10
}

fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateRow {
    pub stream_id: String,
    pub kind: StreamKind,
    pub snr_db: f64,
    /// Mean over seeds.
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StreamSlope {
    pub stream_id: String,
    pub kind: StreamKind,
    pub slope: f64,
    pub target: f64,
    pub abs_err: f64,
}

impl StreamSlope {
    /// Within `max(0.05, 5%)` of the target.
    pub fn within_tolerance(&self) -> bool {
        self.abs_err <= (0.05f64).max(0.05 * self.target.abs())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    pub rows: Vec<RateRow>,
    pub slopes: Vec<StreamSlope>,
    /// `(requested seed, seed actually used)` whenever a draw was replaced.
    pub reseeded: Vec<(u64, u64)>,
}

impl RateReport {
    pub fn slope(&self, stream_id: &str, kind: StreamKind) -> Option<&StreamSlope> {
        self.slopes
            .iter()
            .find(|s| s.stream_id == stream_id && s.kind == kind)
    }

    pub fn all_within_tolerance(&self) -> bool {
        self.slopes.iter().all(StreamSlope::within_tolerance)
    }

    /// CSV with one line per stream set and SNR point.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("stream_id,kind,snr_db,rate,slope,target,abs_err\n");
        for row in &self.rows {
            let s = self
                .slope(&row.stream_id, row.kind)
                .expect("every row has a slope");
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                row.stream_id,
                row.kind,
                format_significant(row.snr_db, 12),
                format_significant(row.rate, 12),
                format_significant(s.slope, 12),
                format_significant(s.target, 12),
                format_significant(s.abs_err, 12),
            )
            .expect("writing to a String");
        }
        out
    }
}

/// Draws, designs and verifies for `seed`, replacing degenerate draws deterministically.
pub fn verified_design(
    config: &ChannelConfig,
    alloc: &StreamAllocation,
    seed: u64,
    power: f64,
) -> Result<(u64, ChannelRealization, BeamformerSet, BeamReport), LinkError> {
    for attempt in 0..=MAX_RESEEDS {
        let used = seed.wrapping_add(attempt.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let real = sample_channel(config, used, power, 1.0)?;
        match design_beamformers(&real, alloc) {
            Ok(set) => {
                let report = verify_beamformers(&real, alloc, &set, VERIFY_TOL);
                if report.passed() {
                    return Ok((used, real, set, report));
                }
            }
            Err(BeamformerError::DegenerateChannel(_)) => {}
            Err(e) => return Err(e.into()),
        }
    }
    Err(LinkError::Exhausted(seed))
}

/// Averages per-stream rates over `seeds` across the SNR grid (noise variance 1)
/// and regresses them on `log2 rho` at the top grid points.
pub fn estimate_dof_slopes(
    config: &ChannelConfig,
    alloc: &StreamAllocation,
    snr_db_grid: &[f64],
    seeds: &[u64],
) -> Result<RateReport, LinkError> {
    let grid = check_grid(snr_db_grid)?;
    let mut reseeded = Vec::new();
    // sums[stream][grid point]
    let mut keys: Vec<(usize, usize, StreamKind, usize)> = Vec::new();
    for &(i, j) in &PAIRS {
        for kind in StreamKind::ALL {
            let a = kind.count(alloc, i, j);
            if a > 0 {
                keys.push((i, j, kind, a));
            }
        }
    }
    let mut sums = vec![vec![0.0; grid.len()]; keys.len()];
    for &seed in seeds {
        let (used, real, set, report) = verified_design(config, alloc, seed, 1.0)?;
        if used != seed {
            reseeded.push((seed, used));
        }
        for (g, &db) in grid.iter().enumerate() {
            let linear = db_to_linear(db);
            let at = real.with_power(linear);
            let scaled = set.with_power_scaled(linear / real.power);
            let rates = stream_rates(config, &at, alloc, &scaled, Some(&report))?;
            for (slot, rate) in sums.iter_mut().zip(rates) {
                slot[g] += rate.rate;
            }
        }
    }
    let n = seeds.len().max(1) as f64;
    let top = regression_points(&grid);
    let xs: Vec<f64> = top.iter().map(|&db| db_to_log2(db)).collect();
    let mut rows = Vec::new();
    let mut slopes = Vec::new();
    for (&(i, j, kind, a), sum) in keys.iter().zip(&sums) {
        let mean: Vec<f64> = sum.iter().map(|s| s / n).collect();
        let stream_id = format!("{i}{j}");
        for (&db, &rate) in grid.iter().zip(&mean) {
            rows.push(RateRow {
                stream_id: stream_id.clone(),
                kind,
                snr_db: db,
                rate,
            });
        }
        let slope = ls_slope(&xs, &mean[grid.len() - top.len()..]);
        let target = config.tau_for_stream(i, j).to_f64() * a as f64;
        slopes.push(StreamSlope {
            stream_id,
            kind,
            slope,
            target,
            abs_err: (slope - target).abs(),
        });
    }
    Ok(RateReport {
        rows,
        slopes,
        reseeded,
    })
}

/// Monte-Carlo estimate of the intermittent capacity: the channel is on in a
/// Bernoulli(tau) fraction of `n_samples` uses. Returns the mean and a
/// three-sigma normal-approximation half-width.
pub fn empirical_state_average(
    h: &CMatrix,
    tau: f64,
    power: f64,
    sigma2: f64,
    n_samples: usize,
    seed: u64,
) -> (f64, f64) {
    let on_rate = log2_det_gram(h, power / sigma2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let on = (0..n_samples)
        .filter(|_| rng.random_bool(tau.clamp(0.0, 1.0)))
        .count();
    let n = n_samples as f64;
    let p = on as f64 / n;
    let mean = if on == n_samples {
        on_rate
    } else {
        p * on_rate
    };
    let variance = if n_samples > 1 {
        p * (1.0 - p) * on_rate * on_rate * n / (n - 1.0)
    } else {
        0.0
    };
    (mean, 3.0 * (variance / n).sqrt())
}

/// Decode-forward rate for the message 3 -> 1 relayed by node 2, with
/// independent Gaussian inputs at equal power.
pub fn decode_forward_rate(real: &ChannelRealization, tau: f64) -> f64 {
    let rho = real.snr();
    let joint = hstack(real.m(1), &[real.h(2, 1), real.h(3, 1)]);
    let broadcast = tau * log2_det_gram(&joint, rho / 2.0);
    let relay = log2_det_gram(real.h(3, 2), rho);
    broadcast.min(relay)
}

/// Slope of the decode-forward rate over an SNR sweep, averaged over seeds.
pub fn decode_forward_slope(
    config: &ChannelConfig,
    snr_db_grid: &[f64],
    seeds: &[u64],
) -> Result<f64, LinkError> {
    let grid = check_grid(snr_db_grid)?;
    let top = regression_points(&grid);
    let xs: Vec<f64> = top.iter().map(|&db| db_to_log2(db)).collect();
    let tau = config.tau().to_f64();
    let mut total = 0.0;
    for &seed in seeds {
        let real = sample_channel(config, seed, 1.0, 1.0)?;
        let ys: Vec<f64> = top
            .iter()
            .map(|&db| decode_forward_rate(&real.with_power(db_to_linear(db)), tau))
            .collect();
        total += ls_slope(&xs, &ys);
    }
    Ok(total / seeds.len().max(1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::complex_gaussian;
    use num_complex::Complex64;

    fn scalar(x: f64) -> CMatrix {
        CMatrix::from_element(1, 1, Complex64::new(x, 0.0))
    }

    fn fig7() -> (ChannelConfig, StreamAllocation) {
        let mut a = StreamAllocation::zero();
        a.set_zf(1, 2, 1);
        a.set_zf(2, 1, 1);
        a.set_zf(2, 3, 2);
        a.set_ia(2, 3, 2);
        a.set_ia(3, 2, 4);
        a.set_gamma(1, 2);
        (ChannelConfig::from_parts(5, 7, 4, 1, 2).unwrap(), a)
    }

    const GRID: [f64; 5] = [40.0, 60.0, 80.0, 100.0, 120.0];

    #[test]
    fn capacity_examples() {
        let eye = CMatrix::identity(2, 2);
        assert_eq!(p2p_capacity(&scalar(1.0), 0.0, 1.0, 1.0), 0.0);
        assert!((p2p_capacity(&scalar(1.0), 1.0, 1.0, 1.0) - 1.0).abs() < 1e-12);
        assert!((p2p_capacity(&eye, 0.5, 3.0, 1.0) - 2.0).abs() < 1e-12);
        assert!((twc_sum_capacity(&scalar(1.0), 1.0, 1.0, 1.0) - 2.0).abs() < 1e-12);
        assert_eq!(twc_sum_capacity(&eye, 0.0, 3.0, 1.0), 0.0);
        assert!((twc_sum_capacity(&eye, 0.5, 3.0, 1.0) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn capacity_increases_with_tau() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let h = complex_gaussian(&mut rng, 3, 2);
        let values: Vec<f64> = (0..=10)
            .map(|k| p2p_capacity(&h, k as f64 / 10.0, 10.0, 1.0))
            .collect();
        assert!(values.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn rates_need_a_passing_report() {
        let (c, a) = fig7();
        let (_, real, set, report) = verified_design(&c, &a, 7, 1e6).unwrap();
        assert_eq!(
            stream_rates(&c, &real, &a, &set, None),
            Err(LinkError::UnverifiedDesign)
        );
        let mut failing = report.clone();
        failing.checks[0].pass = false;
        assert_eq!(
            stream_rates(&c, &real, &a, &set, Some(&failing)),
            Err(LinkError::UnverifiedDesign)
        );
        let rates = stream_rates(&c, &real, &a, &set, Some(&report)).unwrap();
        let rate = |id: &str, kind| {
            rates
                .iter()
                .find(|r| r.stream_id() == id && r.kind == kind)
                .unwrap()
                .rate
        };
        let per_dim_23 = rate("23", StreamKind::Zf) / 2.0;
        assert!(per_dim_23 > rate("21", StreamKind::Zf));
    }

    #[test]
    fn empty_allocation_has_no_rates_or_slopes() {
        let c = ChannelConfig::from_parts(2, 2, 2, 1, 2).unwrap();
        let a = StreamAllocation::zero();
        let (_, real, set, report) = verified_design(&c, &a, 1, 1.0).unwrap();
        assert!(stream_rates(&c, &real, &a, &set, Some(&report))
            .unwrap()
            .is_empty());
        let sweep = estimate_dof_slopes(&c, &a, &GRID, &[1, 2]).unwrap();
        assert!(sweep.slopes.is_empty());
        assert!(sweep.rows.is_empty());
    }

    #[test]
    fn single_stream_matches_point_to_point() {
        let c = ChannelConfig::from_parts(2, 1, 1, 1, 1).unwrap();
        let mut a = StreamAllocation::zero();
        a.set_zf(1, 2, 1);
        let (_, real, set, report) = verified_design(&c, &a, 3, 100.0).unwrap();
        let rates = stream_rates(&c, &real, &a, &set, Some(&report)).unwrap();
        assert_eq!(rates.len(), 1);
        let effective = set.t(1, 2, StreamKind::Zf) * real.h(1, 2) * set.v(1, 2, StreamKind::Zf);
        let expected = p2p_capacity(&effective, 1.0, set.power(1), real.sigma2);
        assert!((rates[0].rate - expected).abs() < 1e-12);
    }

    #[test]
    fn worked_example_slopes() {
        let (c, a) = fig7();
        let seeds: Vec<u64> = (0..10).collect();
        let report = estimate_dof_slopes(&c, &a, &GRID, &seeds).unwrap();
        let ia32 = report.slope("32", StreamKind::Ia).unwrap();
        assert!((ia32.slope - 4.0).abs() <= 0.2, "{ia32:?}");
        let zf21 = report.slope("21", StreamKind::Zf).unwrap();
        assert!((zf21.slope - 0.5).abs() <= 0.05, "{zf21:?}");
        assert!(report.all_within_tolerance());
        let total: f64 = report.slopes.iter().map(|s| s.slope).sum();
        let dof_sum = a.dof(&c).sum().to_f64();
        assert!(
            (total - dof_sum).abs() < 0.05 * dof_sum,
            "{total} vs {dof_sum}"
        );
        let csv = report.to_csv();
        assert!(csv.starts_with("stream_id,kind,snr_db,rate,slope,target,abs_err\n12,ZF,40,"));
        assert!(csv.contains("\n32,IA,120,"));
        assert_eq!(csv.lines().count(), 1 + report.rows.len());
    }

    #[test]
    fn grid_validation() {
        let (c, a) = fig7();
        assert!(matches!(
            estimate_dof_slopes(&c, &a, &[40.0, 60.0], &[1]),
            Err(LinkError::InvalidGrid(_))
        ));
        assert!(matches!(
            estimate_dof_slopes(&c, &a, &[40.0, 50.0, 60.0], &[1]),
            Err(LinkError::InvalidGrid(_))
        ));
    }

    #[test]
    fn state_average_examples() {
        let h = scalar(1.0);
        let (mean, half) = empirical_state_average(&h, 1.0, 1000.0, 1.0, 1000, 1);
        assert_eq!(mean, p2p_capacity(&h, 1.0, 1000.0, 1.0));
        assert_eq!(half, 0.0);
        let (mean, half) = empirical_state_average(&h, 0.0, 1000.0, 1.0, 1000, 1);
        assert_eq!((mean, half), (0.0, 0.0));
        let (mean, half) = empirical_state_average(&h, 0.5, 1000.0, 1.0, 100_000, 11);
        let expected = 0.5 * 1001f64.log2();
        assert!((expected - 4.984).abs() < 1e-3);
        assert!((mean - expected).abs() <= half, "{mean} ± {half}");
    }

    #[test]
    fn state_average_interval_shrinks() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let h = complex_gaussian(&mut rng, 2, 2);
        let (_, wide) = empirical_state_average(&h, 0.3, 100.0, 1.0, 4_000, 5);
        let (_, narrow) = empirical_state_average(&h, 0.3, 100.0, 1.0, 16_000, 5);
        let ratio = wide / narrow;
        assert!((ratio - 2.0).abs() < 0.2, "{ratio}");
    }

    #[test]
    fn decode_forward_examples() {
        let c = ChannelConfig::from_parts(10, 7, 4, 1, 2).unwrap();
        let real = sample_channel(&c, 1, 1e6, 1.0).unwrap();
        assert_eq!(decode_forward_rate(&real, 0.0), 0.0);
        let slope = decode_forward_slope(&c, &GRID, &[1, 2, 3]).unwrap();
        assert!((slope - 4.0).abs() <= 0.2, "{slope}");
        assert!(slope > 2.0);
    }
}
