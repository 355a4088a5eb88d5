//! Rayleigh block-fading realizations and the concentration diagnostics that
//! justify feeding back channel directions only.
//!
//! When the user count and antenna count grow proportionally, every user's
//! normalized channel magnitude `(1/L)·||h_i||²` concentrates at 1, so there
//! is nothing useful to say about magnitudes and quantizing the direction is
//! enough. In the same regime, each user's best alignment with any fixed set
//! of `L` orthonormal beams collapses to zero, which is why random-beam user
//! selection needs far more users than antennas. [`magnitude_extremes`] and
//! [`max_beam_alignment`] expose the per-block statistics behind both
//! observations so they can be checked empirically.

use crate::linalg::{self, CVector};
use num_complex::Complex64;
use rand::Rng;
use std::fmt;

/// Gram residual tolerance for orthonormalized beam sets.
pub const ORTHONORMALITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum ChannelError {
    /// L or m was zero.
    InvalidDimensions { antennas: usize, users: usize },
    /// `gamma` must supply one coefficient per user, each nonnegative.
    InvalidPathLoss(String),
    EmptyInput,
    DimensionMismatch { expected: usize, got: usize },
}

impl fmt::Display for ChannelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChannelError::InvalidDimensions { antennas, users } => {
                write!(f, "invalid dimensions: L={antennas}, m={users} (both must be >= 1)")
            }
            ChannelError::InvalidPathLoss(msg) => write!(f, "invalid path loss: {msg}"),
            ChannelError::EmptyInput => write!(f, "empty input"),
            ChannelError::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
        }
    }
}

impl std::error::Error for ChannelError {}

/// One fading realization: `m` channel vectors of length `L` with i.i.d.
/// CN(0,1) entries, plus the per-user path loss coefficients.
#[derive(Debug, Clone)]
pub struct ChannelBlock {
    antennas: usize,
    h: Vec<CVector>,
    gamma: Vec<f64>,
}

impl ChannelBlock {
    pub fn antennas(&self) -> usize {
        self.antennas
    }

    pub fn users(&self) -> usize {
        self.h.len()
    }

    /// Channel vector of user `i`.
    pub fn h(&self, i: usize) -> &[Complex64] {
        &self.h[i]
    }

    pub fn gamma(&self, i: usize) -> f64 {
        self.gamma[i]
    }

    /// Normalized squared magnitude `(1/L)·||h_i||²`.
    pub fn normalized_magnitude_sqr(&self, i: usize) -> f64 {
        linalg::norm_sqr(&self.h[i]) / self.antennas as f64
    }

    /// Unit-norm channel direction `v_i = h_i / ||h_i||`.
    pub fn direction(&self, i: usize) -> CVector {
        let mut v = self.h[i].clone();
        let n = linalg::norm(&v);
        linalg::scale(&mut v, 1.0 / n);
        v
    }
}

/// Draw one Rayleigh block-fading realization. Entries of each `h_i` are
/// i.i.d. circularly symmetric complex Gaussian with unit total variance
/// (real and imaginary parts each N(0, 1/2)). Identical seed, identical block.
pub fn sample_block<R: Rng + ?Sized>(
    antennas: usize,
    users: usize,
    gamma: &[f64],
    rng: &mut R,
) -> Result<ChannelBlock, ChannelError> {
    if antennas == 0 || users == 0 {
        return Err(ChannelError::InvalidDimensions { antennas, users });
    }
    if gamma.len() != users {
        return Err(ChannelError::InvalidPathLoss(format!(
            "expected {users} coefficients, got {}",
            gamma.len()
        )));
    }
    if let Some(bad) = gamma.iter().find(|g| !g.is_finite() || **g < 0.0) {
        return Err(ChannelError::InvalidPathLoss(format!("gamma = {bad}")));
    }
    let h = (0..users)
        .map(|_| linalg::complex_gaussian(antennas, rng))
        .collect();
    Ok(ChannelBlock {
        antennas,
        h,
        gamma: gamma.to_vec(),
    })
}

/// Per-block extremes of the normalized squared magnitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MagnitudeExtremes {
    pub max: f64,
    pub min: f64,
}

impl MagnitudeExtremes {
    pub fn spread(&self) -> f64 {
        self.max - self.min
    }
}

/// Max and min of `(1/L)·||h_i||²` over the users of each block. As L and m
/// grow proportionally both extremes close in on 1.
pub fn magnitude_extremes(blocks: &[ChannelBlock]) -> Result<Vec<MagnitudeExtremes>, ChannelError> {
    if blocks.is_empty() {
        return Err(ChannelError::EmptyInput);
    }
    Ok(blocks
        .iter()
        .map(|block| {
            let mut max = f64::NEG_INFINITY;
            let mut min = f64::INFINITY;
            for i in 0..block.users() {
                let v = block.normalized_magnitude_sqr(i);
                max = max.max(v);
                min = min.min(v);
            }
            MagnitudeExtremes { max, min }
        })
        .collect())
}

/// `L` orthonormal beams drawn rotation-invariantly (orthonormalized i.i.d.
/// complex Gaussian matrix). Gram residual is within [`ORTHONORMALITY_TOL`].
pub fn random_orthonormal_beams<R: Rng + ?Sized>(antennas: usize, rng: &mut R) -> Vec<CVector> {
    assert!(antennas >= 1, "antennas must be >= 1");
    loop {
        let cols: Vec<CVector> = (0..antennas)
            .map(|_| linalg::complex_gaussian(antennas, rng))
            .collect();
        let basis = linalg::orthonormal_span(&cols, 1e-10);
        // A Gaussian matrix is singular with probability zero; retry on the
        // numerically impossible rank drop rather than returning a short set.
        if basis.len() == antennas && linalg::gram_residual(&basis) <= ORTHONORMALITY_TOL {
            return basis;
        }
    }
}

/// `max_{i,k} (1/L)·|h_i† b_k|²` — the best signal share any user would get
/// from the best of the given beams. Uniformly small when m/L is constant.
pub fn max_beam_alignment(block: &ChannelBlock, beams: &[CVector]) -> Result<f64, ChannelError> {
    if beams.is_empty() {
        return Err(ChannelError::EmptyInput);
    }
    for b in beams {
        if b.len() != block.antennas() {
            return Err(ChannelError::DimensionMismatch {
                expected: block.antennas(),
                got: b.len(),
            });
        }
    }
    let l = block.antennas() as f64;
    let mut best = 0.0f64;
    for i in 0..block.users() {
        for b in beams {
            let a = linalg::inner(block.h(i), b).norm_sqr() / l;
            best = best.max(a);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::derive_rng;
    use crate::stats::{mean, sample_variance, standard_error};
    use num_complex::Complex64;

    #[test]
    fn rejects_invalid_dimensions() {
        let mut rng = derive_rng(1, 0, 0);
        assert!(matches!(
            sample_block(0, 4, &[1.0; 4], &mut rng),
            Err(ChannelError::InvalidDimensions { .. })
        ));
        assert!(matches!(
            sample_block(4, 0, &[], &mut rng),
            Err(ChannelError::InvalidDimensions { .. })
        ));
        assert!(matches!(
            sample_block(4, 2, &[1.0], &mut rng),
            Err(ChannelError::InvalidPathLoss(_))
        ));
        assert!(matches!(
            sample_block(4, 2, &[1.0, -0.5], &mut rng),
            Err(ChannelError::InvalidPathLoss(_))
        ));
    }

    #[test]
    fn identical_seed_gives_identical_block() {
        let gamma = [1.0; 4];
        let mut a = derive_rng(99, 0, 0);
        let mut b = derive_rng(99, 0, 0);
        let x = sample_block(4, 4, &gamma, &mut a).unwrap();
        let y = sample_block(4, 4, &gamma, &mut b).unwrap();
        for i in 0..4 {
            assert_eq!(x.h(i), y.h(i)); // bitwise
        }
    }

    #[test]
    fn entries_have_unit_variance() {
        // |h_{i,l}|² and (1/L)||h_i||² both have mean 1.
        let mut rng = derive_rng(5, 0, 0);
        let l = 8;
        let n = 100_000;
        let mut entry_sq = Vec::with_capacity(n * l);
        let mut vec_mag = Vec::with_capacity(n);
        for _ in 0..n {
            let block = sample_block(l, 1, &[1.0], &mut rng).unwrap();
            for z in block.h(0) {
                entry_sq.push(z.norm_sqr());
            }
            vec_mag.push(block.normalized_magnitude_sqr(0));
        }
        let dev_entry = (mean(&entry_sq) - 1.0).abs();
        assert!(dev_entry <= 3.0 * standard_error(&entry_sq), "dev {dev_entry}");
        let dev_mag = (mean(&vec_mag) - 1.0).abs();
        assert!(dev_mag <= 3.0 * standard_error(&vec_mag), "dev {dev_mag}");
        // variance of (1/L)||h||² is 1/L
        let var = sample_variance(&vec_mag);
        assert!(
            (var - 1.0 / l as f64).abs() < 0.2 / l as f64,
            "variance {var} vs {}",
            1.0 / l as f64
        );
    }

    #[test]
    fn single_user_extremes_coincide() {
        let mut rng = derive_rng(2, 0, 0);
        let block = sample_block(1, 1, &[1.0], &mut rng).unwrap();
        let ext = magnitude_extremes(std::slice::from_ref(&block)).unwrap();
        assert_eq!(ext[0].max, ext[0].min);
        assert_eq!(ext[0].max, block.normalized_magnitude_sqr(0));
        assert!(matches!(magnitude_extremes(&[]), Err(ChannelError::EmptyInput)));
    }

    #[test]
    fn magnitude_extremes_concentrate_with_size() {
        // Frozen from the Monte Carlo oracle: at L=m=256 the per-block max/min
        // of (1/L)||h_i||² sit near 1.18 / 0.835 and the exceedance rates of
        // the 1±0.2 thresholds are ≈0.28 / ≈0.08; at L=m=16 the spread is far
        // wider. The trend (spread shrinking, extremes closing in on 1) is the
        // content of the concentration claim.
        let run = |l: usize, blocks: usize, seed: u64| {
            let gamma = vec![1.0; l];
            let blocks: Vec<ChannelBlock> = (0..blocks)
                .map(|b| sample_block(l, l, &gamma, &mut derive_rng(seed, 1, b as u64)).unwrap())
                .collect();
            magnitude_extremes(&blocks).unwrap()
        };
        let small = run(16, 200, 11);
        let big = run(256, 200, 12);

        let med = |v: &[f64]| crate::stats::median(v);
        let spread_small = med(&small.iter().map(|e| e.spread()).collect::<Vec<_>>());
        let spread_big = med(&big.iter().map(|e| e.spread()).collect::<Vec<_>>());
        assert!(
            spread_big < spread_small,
            "median spread did not shrink: {spread_big} vs {spread_small}"
        );

        let p_max = big.iter().filter(|e| e.max >= 1.2).count() as f64 / big.len() as f64;
        let p_min = big.iter().filter(|e| e.min <= 0.8).count() as f64 / big.len() as f64;
        // Oracle values ≈0.28 and ≈0.08; allow generous Monte Carlo slack.
        assert!((0.13..=0.45).contains(&p_max), "Pr(max>=1.2) = {p_max}");
        assert!((0.015..=0.20).contains(&p_min), "Pr(min<=0.8) = {p_min}");
    }

    #[test]
    fn beams_are_orthonormal_and_seed_dependent() {
        let mut rng = derive_rng(3, 0, 0);
        let single = random_orthonormal_beams(1, &mut rng);
        assert_eq!(single.len(), 1);
        assert!((linalg::norm(&single[0]) - 1.0).abs() < 1e-12);

        let beams = random_orthonormal_beams(4, &mut rng);
        assert_eq!(beams.len(), 4);
        assert!(linalg::gram_residual(&beams) <= ORTHONORMALITY_TOL);

        let other = random_orthonormal_beams(4, &mut derive_rng(4, 0, 0));
        let dist: f64 = beams
            .iter()
            .zip(&other)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>())
            .sum();
        assert!(dist > 0.0);
    }

    #[test]
    fn aligned_user_scores_one() {
        // h = sqrt(L) * b_1 for the first beam: statistic is exactly 1.
        let mut rng = derive_rng(8, 0, 0);
        let beams = random_orthonormal_beams(4, &mut rng);
        let h: CVector = beams[0].iter().map(|z| z * 2.0).collect(); // sqrt(4)
        let block = ChannelBlock {
            antennas: 4,
            h: vec![h],
            gamma: vec![1.0],
        };
        let stat = max_beam_alignment(&block, &beams).unwrap();
        assert!((stat - 1.0).abs() < 1e-12, "stat {stat}");
    }

    #[test]
    fn beam_alignment_statistic_shrinks_with_size() {
        let run = |l: usize, blocks: usize, seed: u64| -> Vec<f64> {
            let gamma = vec![1.0; l];
            (0..blocks)
                .map(|b| {
                    let mut rng = derive_rng(seed, 2, b as u64);
                    let block = sample_block(l, l, &gamma, &mut rng).unwrap();
                    let beams = random_orthonormal_beams(l, &mut rng);
                    max_beam_alignment(&block, &beams).unwrap()
                })
                .collect()
        };
        let small = run(16, 100, 21);
        let big = run(256, 100, 22);
        assert!(crate::stats::median(&big) < crate::stats::median(&small));
        let p = big.iter().filter(|&&x| x > 0.15).count() as f64 / big.len() as f64;
        assert!(p < 0.05, "Pr(alignment > 0.15) = {p}");
    }

    #[test]
    fn alignment_with_fixed_beam_is_unit_mean_exponential() {
        let mut rng = derive_rng(6, 0, 0);
        let beams = random_orthonormal_beams(8, &mut rng);
        let mut samples = Vec::with_capacity(20_000);
        for _ in 0..20_000 {
            let block = sample_block(8, 1, &[1.0], &mut rng).unwrap();
            samples.push(linalg::inner(block.h(0), &beams[3]).norm_sqr());
        }
        let dev = (mean(&samples) - 1.0).abs();
        assert!(dev <= 3.0 * standard_error(&samples), "dev {dev}");
    }

    #[test]
    fn alignment_rejects_mismatched_beams() {
        let mut rng = derive_rng(7, 0, 0);
        let block = sample_block(4, 2, &[1.0, 1.0], &mut rng).unwrap();
        let bad = vec![vec![Complex64::new(1.0, 0.0); 3]];
        assert!(matches!(
            max_beam_alignment(&block, &bad),
            Err(ChannelError::DimensionMismatch { .. })
        ));
    }
}
