//! Spectral efficiency, beam-count statistics and empirical CDFs.

use std::cmp::Ordering;

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::CMatrix;

/// `log2(1 + P |w_rxᴴ H w_tx|² / ρ²)` in bits/s/Hz.
pub fn spectral_efficiency(
    h: &CMatrix,
    w_tx: &[Complex64],
    w_rx: &[Complex64],
    tx_power: f64,
    noise_power: f64,
) -> Result<f64> {
    if !(noise_power > 0.0) {
        return invalid(format!("noise power must be positive, got {noise_power}"));
    }
    if w_tx.len() != h.ncols() || w_rx.len() != h.nrows() {
        return invalid(format!(
            "beam sizes ({}, {}) do not match a {}x{} channel",
            w_rx.len(),
            w_tx.len(),
            h.nrows(),
            h.ncols()
        ));
    }
    let mut gain = Complex64::new(0.0, 0.0);
    for (r, w) in w_rx.iter().enumerate() {
        let mut hw = Complex64::new(0.0, 0.0);
        for (t, x) in w_tx.iter().enumerate() {
            hw += h[(r, t)] * x;
        }
        gain += w.conj() * hw;
    }
    Ok((tx_power * gain.norm_sqr() / noise_power).ln_1p() / std::f64::consts::LN_2)
}

/// One (trial, service, method, SNR) outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial: u64,
    pub service: String,
    pub method: String,
    pub snr_db: f64,
    pub spectral_efficiency: f64,
    pub tx_beams_used: usize,
    pub total_switchings: usize,
    pub fallback_used: bool,
}

/// Right-continuous step CDF: one `(value, P[X ≤ value])` per distinct sample.
pub fn empirical_cdf(samples: &[f64]) -> Result<Vec<(f64, f64)>> {
    if samples.is_empty() {
        return invalid("empirical CDF of an empty sample");
    }
    if samples.iter().any(|x| x.is_nan()) {
        return invalid("empirical CDF sample contains NaN");
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut steps: Vec<(f64, f64)> = Vec::new();
    for (i, x) in sorted.iter().enumerate() {
        let p = (i + 1) as f64 / n;
        match steps.last_mut() {
            Some(last) if last.0 == *x => last.1 = p,
            _ => steps.push((*x, p)),
        }
    }
    Ok(steps)
}

/// Evaluates a step CDF from [`empirical_cdf`] at `x`.
pub fn cdf_at(steps: &[(f64, f64)], x: f64) -> f64 {
    steps.iter().take_while(|(v, _)| *v <= x).last().map_or(0.0, |s| s.1)
}

/// Nearest-rank percentile (`q` in `(0, 100]`) of a non-empty sample.
pub fn percentile(samples: &[usize], q: f64) -> Option<usize> {
    if samples.is_empty() {
        return None;
    }
    let mut sorted = samples.to_vec();
    sorted.sort_unstable();
    let rank = ((q / 100.0) * sorted.len() as f64).ceil() as usize;
    Some(sorted[rank.clamp(1, sorted.len()) - 1])
}

/// Aggregate row for one (service, method, SNR) group.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub service: String,
    pub method: String,
    pub snr_db: f64,
    pub n_trials: usize,
    pub mean_spectral_efficiency: f64,
    pub tx_beams_p50: usize,
    pub tx_beams_p95: usize,
    pub tx_beams_p100: usize,
    pub mean_total_switchings: f64,
    pub fallback_count: usize,
}

/// Groups records by (service, method, SNR), sorted by service, method, then SNR.
pub fn aggregate(records: &[TrialRecord]) -> Vec<SummaryRow> {
    let mut order: Vec<&TrialRecord> = records.iter().collect();
    order.sort_by(|a, b| group_cmp(a, b).then(a.trial.cmp(&b.trial)));
    let mut rows = Vec::new();
    for group in order.chunk_by(|a, b| group_cmp(a, b) == Ordering::Equal) {
        let n = group.len();
        let beams: Vec<usize> = group.iter().map(|r| r.tx_beams_used).collect();
        let first = group[0];
        rows.push(SummaryRow {
            service: first.service.clone(),
            method: first.method.clone(),
            snr_db: first.snr_db,
            n_trials: n,
            mean_spectral_efficiency: group.iter().map(|r| r.spectral_efficiency).sum::<f64>() / n as f64,
            tx_beams_p50: percentile(&beams, 50.0).unwrap_or(0),
            tx_beams_p95: percentile(&beams, 95.0).unwrap_or(0),
            tx_beams_p100: percentile(&beams, 100.0).unwrap_or(0),
            mean_total_switchings: group.iter().map(|r| r.total_switchings as f64).sum::<f64>() / n as f64,
            fallback_count: group.iter().filter(|r| r.fallback_used).count(),
        });
    }
    rows
}

fn group_cmp(a: &TrialRecord, b: &TrialRecord) -> Ordering {
    a.service
        .cmp(&b.service)
        .then_with(|| a.method.cmp(&b.method))
        .then_with(|| a.snr_db.total_cmp(&b.snr_db))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn record(service: &str, snr: f64, se: f64, beams: usize) -> TrialRecord {
        TrialRecord {
            trial: 0,
            service: service.into(),
            method: "location_cs".into(),
            snr_db: snr,
            spectral_efficiency: se,
            tx_beams_used: beams,
            total_switchings: beams * beams,
            fallback_used: false,
        }
    }

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn spectral_efficiency_examples() {
        let h = CMatrix::from_element(1, 1, one());
        assert!((spectral_efficiency(&h, &[one()], &[one()], 1.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((spectral_efficiency(&h, &[one()], &[one()], 3.0, 1.0).unwrap() - 2.0).abs() < 1e-15);
        let zero = CMatrix::zeros(1, 1);
        assert_eq!(spectral_efficiency(&zero, &[one()], &[one()], 5.0, 1.0).unwrap(), 0.0);
        assert!(spectral_efficiency(&h, &[one()], &[one()], 1.0, 0.0).is_err());
        assert!(spectral_efficiency(&h, &[one()], &[one()], 1.0, -1.0).is_err());
    }

    #[test]
    fn spectral_efficiency_uses_rx_conjugate() {
        // H = [[1, 2], [3, 4]], w_tx = e1, w_rx = (0, j): w_rxᴴ H w_tx = -j·3
        let h = CMatrix::from_row_slice(2, 2, &[one(), one() * 2.0, one() * 3.0, one() * 4.0]);
        let j = Complex64::new(0.0, 1.0);
        let z = Complex64::new(0.0, 0.0);
        let r = spectral_efficiency(&h, &[one(), z], &[z, j], 1.0, 1.0).unwrap();
        assert!((r - 10f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn cdf_examples() {
        let c = empirical_cdf(&[1.0, 2.0, 3.0]).unwrap();
        assert!((cdf_at(&c, 2.0) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(empirical_cdf(&[4.0, 4.0, 4.0]).unwrap(), vec![(4.0, 1.0)]);
        assert_eq!(
            empirical_cdf(&[5.0, 1.0, 3.0, 3.0]).unwrap(),
            vec![(1.0, 0.25), (3.0, 0.75), (5.0, 1.0)]
        );
        assert!(empirical_cdf(&[]).is_err());
        assert_eq!(cdf_at(&c, 0.5), 0.0);
    }

    #[test]
    fn aggregate_examples() {
        let rows = aggregate(&[record("gps", 0.0, 1.5, 4)]);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].mean_spectral_efficiency, 1.5);
        let rows = aggregate(&[record("gps", 0.0, 1.0, 7), record("gps", 0.0, 3.0, 7)]);
        assert_eq!(rows[0].mean_spectral_efficiency, 2.0);
        assert_eq!(
            (rows[0].tx_beams_p50, rows[0].tx_beams_p95, rows[0].tx_beams_p100),
            (7, 7, 7)
        );
    }

    #[test]
    fn aggregate_orders_groups() {
        let rows = aggregate(&[
            record("wifi", 0.0, 1.0, 1),
            record("gps", 0.0, 1.0, 1),
            record("gps", -10.0, 1.0, 1),
        ]);
        let keys: Vec<_> = rows.iter().map(|r| (r.service.as_str(), r.snr_db)).collect();
        assert_eq!(keys, vec![("gps", -10.0), ("gps", 0.0), ("wifi", 0.0)]);
    }

    #[test]
    fn nearest_rank_percentile() {
        let v: Vec<usize> = (1..=20).collect();
        assert_eq!(percentile(&v, 95.0), Some(19));
        assert_eq!(percentile(&v, 50.0), Some(10));
        assert_eq!(percentile(&v, 100.0), Some(20));
        assert_eq!(percentile(&[], 50.0), None);
    }

    proptest! {
        #[test]
        fn se_increases_with_power(g in 0.01f64..10.0, p in 0.0f64..100.0, dp in 0.01f64..10.0) {
            let h = CMatrix::from_element(1, 1, one() * g);
            let a = spectral_efficiency(&h, &[one()], &[one()], p, 1.0).unwrap();
            let b = spectral_efficiency(&h, &[one()], &[one()], p + dp, 1.0).unwrap();
            prop_assert!(b > a);
            prop_assert!(a >= 0.0);
        }

        #[test]
        fn cdf_is_monotone_and_bounded(xs in prop::collection::vec(-50.0f64..50.0, 1..60)) {
            let c = empirical_cdf(&xs).unwrap();
            prop_assert!((c.last().unwrap().1 - 1.0).abs() < 1e-15);
            for w in c.windows(2) {
                prop_assert!(w[0].0 < w[1].0 && w[0].1 < w[1].1);
            }
            prop_assert!(c.iter().all(|s| s.1 > 0.0 && s.1 <= 1.0));
        }

        #[test]
        fn aggregate_mean_is_permutation_invariant(ses in prop::collection::vec(0.0f64..20.0, 1..30), seed in any::<u64>()) {
            let recs: Vec<_> = ses.iter().map(|&s| record("gps", 0.0, s, 3)).collect();
            let mut shuffled = recs.clone();
            let k = (seed as usize) % shuffled.len();
            shuffled.rotate_left(k);
            shuffled.reverse();
            let a = aggregate(&recs)[0].mean_spectral_efficiency;
            let b = aggregate(&shuffled)[0].mean_spectral_efficiency;
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }
}
