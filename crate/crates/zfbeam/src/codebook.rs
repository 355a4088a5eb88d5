//! Random direction codebooks, the direction-quantization function, and
//! distortion measurement and estimation.
//!
//! A codebook for one user is `2^R` unit vectors in `C^L`; quantization picks
//! the entry best aligned with the channel direction. The figure of merit is
//! the chordal distortion `D(B) = 1 − E[max_p |v†p|²]`, bounded for the best
//! possible codebook by
//!
//! ```text
//! (L−1)/L · 2^(−R/(L−1))  ≤  D*(R)  ≤  Γ(1/(L−1))/(L−1) · 2^(−R/(L−1))
//! ```
//!
//! (main-order terms), and a random codebook already attains the upper bound's
//! main order, which is why everything downstream assumes random codebooks.
//!
//! For a random codebook the per-sample best alignment `max_p |v†p|²` has an
//! exact law: each `|v†p|²` is Beta(1, L−1), independent across entries, so
//! the max is sampled in O(1) by inverse CDF. [`AlignmentSampler`] exposes
//! this, which is what makes rates like `R = 2L` testable at all — explicit
//! storage is capped at [`MAX_RATE_BITS`] bits.

use crate::linalg::{self, CVector};
use num_complex::Complex64;
use rand::Rng;
use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

/// Explicit codebooks are capped at 2^24 entries.
pub const MAX_RATE_BITS: u32 = 24;

/// Rates accepted by the O(1) alignment law sampler.
pub const MAX_LAW_RATE_BITS: u32 = 512;

/// Unit-norm tolerance on stored codewords.
pub const ENTRY_NORM_TOL: f64 = 1e-12;

#[derive(Debug)]
pub enum CodebookError {
    /// L must be at least 2 (the distortion exponent 1/(L−1) is undefined at L=1).
    DimensionTooSmall { dimension: usize },
    /// Rate outside the supported range for the requested representation.
    RateOutOfRange { rate_bits: u32, max: u32 },
    /// Quantization input was the zero vector.
    ZeroVector,
    DimensionMismatch { expected: usize, got: usize },
    Io(std::io::Error),
    Parse { line: usize, message: String },
}

impl fmt::Display for CodebookError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CodebookError::DimensionTooSmall { dimension } => {
                write!(f, "codebook dimension must be >= 2, got {dimension}")
            }
            CodebookError::RateOutOfRange { rate_bits, max } => {
                write!(f, "rate {rate_bits} bits outside supported range 1..={max}")
            }
            CodebookError::ZeroVector => write!(f, "cannot quantize the zero vector"),
            CodebookError::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            CodebookError::Io(e) => write!(f, "codebook i/o error: {e}"),
            CodebookError::Parse { line, message } => {
                write!(f, "codebook parse error at line {line}: {message}")
            }
        }
    }
}

impl std::error::Error for CodebookError {}

impl From<std::io::Error> for CodebookError {
    fn from(e: std::io::Error) -> Self {
        CodebookError::Io(e)
    }
}

/// A direction codebook: `2^R` unit-norm vectors in `C^L`, stored as one
/// contiguous row-major buffer (quantization is a linear scan over it).
#[derive(Debug, Clone)]
pub struct Codebook {
    dimension: usize,
    rate_bits: u32,
    data: Vec<Complex64>,
}

/// Result of quantizing one channel vector.
#[derive(Debug, Clone, Copy)]
pub struct Quantized {
    /// Index of the winning codeword (lowest index on ties).
    pub index: usize,
    /// Squared alignment `|v†p|²` between the normalized input and the winner.
    pub alignment_sqr: f64,
}

impl Codebook {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn rate_bits(&self) -> u32 {
        self.rate_bits
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dimension
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn entry(&self, index: usize) -> &[Complex64] {
        &self.data[index * self.dimension..(index + 1) * self.dimension]
    }

    /// Iterate over codewords.
    pub fn entries(&self) -> impl Iterator<Item = &[Complex64]> {
        self.data.chunks_exact(self.dimension)
    }

    /// Build a codebook from explicit entries. Entry count must be exactly
    /// `2^rate_bits` and every entry unit-norm within [`ENTRY_NORM_TOL`].
    pub fn from_entries(
        dimension: usize,
        rate_bits: u32,
        entries: Vec<CVector>,
    ) -> Result<Self, CodebookError> {
        if dimension < 2 {
            return Err(CodebookError::DimensionTooSmall { dimension });
        }
        if rate_bits == 0 || rate_bits > MAX_RATE_BITS {
            return Err(CodebookError::RateOutOfRange {
                rate_bits,
                max: MAX_RATE_BITS,
            });
        }
        let expected = 1usize << rate_bits;
        if entries.len() != expected {
            return Err(CodebookError::Parse {
                line: 0,
                message: format!("expected {expected} entries, got {}", entries.len()),
            });
        }
        for (i, e) in entries.iter().enumerate() {
            if e.len() != dimension {
                return Err(CodebookError::DimensionMismatch {
                    expected: dimension,
                    got: e.len(),
                });
            }
            if (linalg::norm(e) - 1.0).abs() > ENTRY_NORM_TOL {
                return Err(CodebookError::Parse {
                    line: 0,
                    message: format!("entry {i} is not unit-norm"),
                });
            }
        }
        Ok(Codebook {
            dimension,
            rate_bits,
            data: entries.into_iter().flatten().collect(),
        })
    }

    /// Quantize a channel vector: `argmax_p |v†p|` over the codebook, with
    /// `v = h/||h||`. Ties break toward the lowest index. The result is
    /// invariant under scaling `h` by any nonzero complex number.
    pub fn quantize(&self, h: &[Complex64]) -> Result<Quantized, CodebookError> {
        if h.len() != self.dimension {
            return Err(CodebookError::DimensionMismatch {
                expected: self.dimension,
                got: h.len(),
            });
        }
        let h_norm_sqr = linalg::norm_sqr(h);
        if h_norm_sqr <= 0.0 {
            return Err(CodebookError::ZeroVector);
        }
        let mut best_index = 0usize;
        let mut best = f64::NEG_INFINITY;
        for (i, p) in self.entries().enumerate() {
            let a = linalg::inner(h, p).norm_sqr();
            if a > best {
                best = a;
                best_index = i;
            }
        }
        Ok(Quantized {
            index: best_index,
            alignment_sqr: best / h_norm_sqr,
        })
    }

    /// Monte Carlo estimate of the chordal distortion of *this* codebook:
    /// `1 − mean over isotropic v of max_p |v†p|²`.
    pub fn empirical_distortion<R: Rng + ?Sized>(&self, n_samples: usize, rng: &mut R) -> f64 {
        assert!(n_samples >= 1, "n_samples must be >= 1");
        let mut acc = 0.0;
        for _ in 0..n_samples {
            let v = linalg::isotropic_unit(self.dimension, rng);
            let q = self.quantize(&v).expect("isotropic vector is nonzero");
            acc += q.alignment_sqr;
        }
        1.0 - acc / n_samples as f64
    }

    /// Write as text: header `L R`, then `2^R` rows of `2L` reals
    /// (interleaved re/im). Values round-trip exactly.
    pub fn save(&self, path: &Path) -> Result<(), CodebookError> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "{} {}", self.dimension, self.rate_bits)?;
        for e in self.entries() {
            let row: Vec<String> = e.iter().flat_map(|z| [z.re.to_string(), z.im.to_string()]).collect();
            writeln!(out, "{}", row.join(" "))?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, CodebookError> {
        let reader = BufReader::new(std::fs::File::open(path)?);
        let mut lines = reader.lines().enumerate();
        let (_, header) = lines.next().ok_or(CodebookError::Parse {
            line: 1,
            message: "missing header".into(),
        })?;
        let header = header?;
        let mut parts = header.split_whitespace();
        let dimension: usize = parts
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or(CodebookError::Parse {
                line: 1,
                message: "bad header field: L".into(),
            })?;
        let rate_bits: u32 = parts
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or(CodebookError::Parse {
                line: 1,
                message: "bad header field: R".into(),
            })?;

        let mut entries = Vec::new();
        for (idx, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let vals: Result<Vec<f64>, _> = line.split_whitespace().map(str::parse::<f64>).collect();
            let vals = vals.map_err(|e| CodebookError::Parse {
                line: idx + 1,
                message: e.to_string(),
            })?;
            if vals.len() != 2 * dimension {
                return Err(CodebookError::Parse {
                    line: idx + 1,
                    message: format!("expected {} reals, got {}", 2 * dimension, vals.len()),
                });
            }
            entries.push(
                vals.chunks_exact(2)
                    .map(|c| Complex64::new(c[0], c[1]))
                    .collect(),
            );
        }
        Codebook::from_entries(dimension, rate_bits, entries)
    }
}

/// Draw a random codebook: `2^R` i.i.d. isotropic unit vectors. Deterministic
/// per seed. Explicit storage is guarded at [`MAX_RATE_BITS`] bits.
pub fn generate_random_codebook<R: Rng + ?Sized>(
    dimension: usize,
    rate_bits: u32,
    rng: &mut R,
) -> Result<Codebook, CodebookError> {
    if dimension < 2 {
        return Err(CodebookError::DimensionTooSmall { dimension });
    }
    if rate_bits == 0 || rate_bits > MAX_RATE_BITS {
        return Err(CodebookError::RateOutOfRange {
            rate_bits,
            max: MAX_RATE_BITS,
        });
    }
    let n = 1usize << rate_bits;
    let mut data = vec![Complex64::new(0.0, 0.0); n * dimension];
    for entry in data.chunks_exact_mut(dimension) {
        linalg::fill_isotropic_unit(entry, rng);
    }
    Ok(Codebook {
        dimension,
        rate_bits,
        data,
    })
}

/// Main-order lower and upper bounds on the minimum achievable distortion at
/// rate `R` in dimension `L` (the `o(1)` factors are dropped):
/// `lower = (L−1)/L · 2^(−R/(L−1))`, `upper = Γ(1/(L−1))/(L−1) · 2^(−R/(L−1))`.
pub fn distortion_bounds(dimension: usize, rate_bits: u32) -> Result<(f64, f64), CodebookError> {
    if dimension < 2 {
        return Err(CodebookError::DimensionTooSmall { dimension });
    }
    let lm1 = (dimension - 1) as f64;
    let decay = (-(rate_bits as f64) / lm1).exp2();
    let lower = lm1 / dimension as f64 * decay;
    let upper = libm::tgamma(1.0 / lm1) / lm1 * decay;
    Ok((lower, upper))
}

/// Main-order estimate of the expected distortion of a random codebook,
/// `Γ(1/(L−1))/(L−1) · 2^(−R/(L−1))`, clamped to [0, 1]. This is the value
/// the finite-dimensional selection scheme plugs into the expected-power
/// formulas.
pub fn distortion_estimate(dimension: usize, rate_bits: u32) -> Result<f64, CodebookError> {
    let (_, upper) = distortion_bounds(dimension, rate_bits)?;
    Ok(upper.clamp(0.0, 1.0))
}

/// Limiting distortion `2^(−r̄)` when L and R grow proportionally with
/// `R/L → r̄ > 0`.
pub fn asymptotic_distortion(rbar: f64) -> f64 {
    debug_assert!(rbar > 0.0);
    (-rbar).exp2()
}

/// Exact finite-size expected distortion of a random codebook:
/// `E[D] = Γ(a)/(L−1) · Γ(N+1)/Γ(N+1+a)` with `a = 1/(L−1)`, `N = 2^R`.
/// Agrees with [`distortion_estimate`] up to `O(1/N)`.
pub fn expected_random_distortion(dimension: usize, rate_bits: u32) -> Result<f64, CodebookError> {
    if dimension < 2 {
        return Err(CodebookError::DimensionTooSmall { dimension });
    }
    if rate_bits == 0 || rate_bits > MAX_LAW_RATE_BITS {
        return Err(CodebookError::RateOutOfRange {
            rate_bits,
            max: MAX_LAW_RATE_BITS,
        });
    }
    let a = 1.0 / (dimension - 1) as f64;
    // ln Γ(N+1+a) − ln Γ(N+1): exact lgamma difference while it is free of
    // cancellation, Stirling main term beyond (relative error < a/N there).
    let ln_ratio = if rate_bits <= MAX_RATE_BITS {
        let z = (1u64 << rate_bits) as f64 + 1.0;
        libm::lgamma(z + a) - libm::lgamma(z)
    } else {
        a * (rate_bits as f64) * std::f64::consts::LN_2
    };
    Ok(libm::tgamma(a) / (dimension - 1) as f64 * (-ln_ratio).exp())
}

/// Exact sampler for the best-alignment statistic `X = max_p |v†p|²` of a
/// random codebook with `2^R` i.i.d. isotropic entries: the max of `2^R`
/// i.i.d. Beta(1, L−1) variables, drawn by inverse CDF. Works for any rate up
/// to [`MAX_LAW_RATE_BITS`] bits, far beyond what explicit storage allows.
#[derive(Debug, Clone, Copy)]
pub struct AlignmentSampler {
    dimension: usize,
    rate_bits: u32,
}

impl AlignmentSampler {
    pub fn new(dimension: usize, rate_bits: u32) -> Result<Self, CodebookError> {
        if dimension < 2 {
            return Err(CodebookError::DimensionTooSmall { dimension });
        }
        if rate_bits == 0 || rate_bits > MAX_LAW_RATE_BITS {
            return Err(CodebookError::RateOutOfRange {
                rate_bits,
                max: MAX_LAW_RATE_BITS,
            });
        }
        Ok(AlignmentSampler {
            dimension,
            rate_bits,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn rate_bits(&self) -> u32 {
        self.rate_bits
    }

    /// One draw of `X = max_p |v†p|²`.
    ///
    /// With `U` uniform, `X = 1 − (1 − U^(1/N))^(1/(L−1))`; evaluated in log
    /// space so that `N = 2^R` never has to be materialized.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = loop {
            let u: f64 = rng.random();
            if u > 0.0 {
                break u;
            }
        };
        // q = 1 − U^(1/N) = −expm1(ln U / 2^R)
        let q = -f64::exp_m1(u.ln() * (-(self.rate_bits as f64)).exp2());
        // X = 1 − q^(1/(L−1))
        -f64::exp_m1(q.ln() / (self.dimension - 1) as f64)
    }

    /// Expected distortion `E[1 − X]` under this law.
    pub fn expected_distortion(&self) -> f64 {
        expected_random_distortion(self.dimension, self.rate_bits).expect("validated on construction")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::derive_rng;
    use crate::stats::{mean, standard_error};
    use num_complex::Complex64;

    fn e_k(dim: usize, k: usize) -> CVector {
        let mut v = vec![Complex64::new(0.0, 0.0); dim];
        v[k] = Complex64::new(1.0, 0.0);
        v
    }

    #[test]
    fn generation_contract() {
        let mut rng = derive_rng(1, 0, 0);
        let book = generate_random_codebook(2, 1, &mut rng).unwrap();
        assert_eq!(book.len(), 2);
        for i in 0..book.len() {
            assert!((linalg::norm(book.entry(i)) - 1.0).abs() <= ENTRY_NORM_TOL);
        }
        assert!(matches!(
            generate_random_codebook(1, 4, &mut rng),
            Err(CodebookError::DimensionTooSmall { .. })
        ));
        assert!(matches!(
            generate_random_codebook(4, 25, &mut rng),
            Err(CodebookError::RateOutOfRange { .. })
        ));
    }

    #[test]
    fn entries_are_isotropic() {
        // mean |e†u|² over entries for a fixed unit u is 1/L
        let mut rng = derive_rng(2, 0, 0);
        let book = generate_random_codebook(4, 12, &mut rng).unwrap();
        let u = crate::linalg::isotropic_unit(4, &mut rng);
        let samples: Vec<f64> = (0..book.len())
            .map(|i| linalg::inner(book.entry(i), &u).norm_sqr())
            .collect();
        let dev = (mean(&samples) - 0.25).abs();
        assert!(dev <= 3.0 * standard_error(&samples), "dev {dev}");
    }

    #[test]
    fn quantize_exact_match_and_dominant_coordinate() {
        let mut rng = derive_rng(3, 0, 0);
        let mut book = generate_random_codebook(4, 3, &mut rng).unwrap();
        let v = crate::linalg::isotropic_unit(4, &mut rng);
        book.data[5 * 4..6 * 4].copy_from_slice(&v);
        let q = book.quantize(&v).unwrap();
        assert_eq!(q.index, 5);
        assert!((q.alignment_sqr - 1.0).abs() < 1e-12);

        let basis = Codebook::from_entries(2, 1, vec![e_k(2, 0), e_k(2, 1)]).unwrap();
        let h = vec![Complex64::new(1.0, 0.0), Complex64::new(0.1, 0.0)];
        assert_eq!(basis.quantize(&h).unwrap().index, 0);
    }

    #[test]
    fn quantize_breaks_ties_toward_lowest_index() {
        // identical codewords tie exactly; the scan keeps the first
        let mut rng = derive_rng(14, 0, 0);
        let p = crate::linalg::isotropic_unit(3, &mut rng);
        let filler = crate::linalg::isotropic_unit(3, &mut rng);
        let entries = vec![filler, p.clone(), p.clone(), p.clone()];
        let book = Codebook::from_entries(3, 2, entries).unwrap();
        let h: CVector = p.iter().map(|z| z * Complex64::new(0.3, -1.1)).collect();
        assert_eq!(book.quantize(&h).unwrap().index, 1);
    }

    #[test]
    fn quantize_rejects_zero_and_mismatch() {
        let mut rng = derive_rng(4, 0, 0);
        let book = generate_random_codebook(3, 2, &mut rng).unwrap();
        let zero = vec![Complex64::new(0.0, 0.0); 3];
        assert!(matches!(book.quantize(&zero), Err(CodebookError::ZeroVector)));
        let short = vec![Complex64::new(1.0, 0.0); 2];
        assert!(matches!(
            book.quantize(&short),
            Err(CodebookError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn quantize_is_scale_invariant() {
        let mut rng = derive_rng(5, 0, 0);
        let book = generate_random_codebook(4, 8, &mut rng).unwrap();
        for trial in 0..50 {
            let mut rng = derive_rng(6, trial, 0);
            let h = crate::linalg::complex_gaussian(4, &mut rng);
            let c = Complex64::new(-2.4, 0.7) * (trial as f64 + 0.5);
            let scaled: CVector = h.iter().map(|z| z * c).collect();
            let a = book.quantize(&h).unwrap();
            let b = book.quantize(&scaled).unwrap();
            assert_eq!(a.index, b.index);
            assert!((a.alignment_sqr - b.alignment_sqr).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_codebook_distortion_is_half_at_l2() {
        // every entry identical: E|v†p|² = 1/L, so D = 1 − 1/2
        let mut rng = derive_rng(7, 0, 0);
        let p = crate::linalg::isotropic_unit(2, &mut rng);
        let book = Codebook::from_entries(2, 2, vec![p.clone(), p.clone(), p.clone(), p]).unwrap();
        let d = book.empirical_distortion(40_000, &mut rng);
        assert!((d - 0.5).abs() < 0.01, "D = {d}");
    }

    #[test]
    fn standard_basis_distortion_matches_beta_oracle() {
        // L=2, book={e1,e2}: D = 1 − E[max(Z, 1−Z)] with Z=|v_1|² ~ Beta(1,1).
        // Oracle by quadrature: E[max(z,1−z)] = ∫₀¹ max(z,1−z) dz.
        let n = 1_000_000;
        let oracle: f64 = (0..n)
            .map(|i| {
                let z = (i as f64 + 0.5) / n as f64;
                z.max(1.0 - z)
            })
            .sum::<f64>()
            / n as f64;
        let expected = 1.0 - oracle;
        assert!((expected - 0.25).abs() < 1e-6);

        let book = Codebook::from_entries(2, 1, vec![e_k(2, 0), e_k(2, 1)]).unwrap();
        let mut rng = derive_rng(8, 0, 0);
        let d = book.empirical_distortion(60_000, &mut rng);
        assert!((d - expected).abs() < 0.008, "D = {d} vs oracle {expected}");
    }

    #[test]
    fn distortion_bounds_reference_values() {
        let (lo, hi) = distortion_bounds(2, 4).unwrap();
        assert!((lo - 0.03125).abs() < 1e-15);
        assert!((hi - 0.0625).abs() < 1e-12); // Γ(1) = 1

        let (lo, hi) = distortion_bounds(3, 8).unwrap();
        assert!((lo - 2.0 / 3.0 * 0.0625).abs() < 1e-15);
        // Γ(1/2) = sqrt(pi), independently of libm
        let upper_ref = std::f64::consts::PI.sqrt() / 2.0 * 0.0625;
        assert!((hi - upper_ref).abs() < 1e-12 * upper_ref);
        assert!((hi - 0.055389188).abs() < 1e-8);

        assert!(matches!(
            distortion_bounds(1, 4),
            Err(CodebookError::DimensionTooSmall { .. })
        ));
    }

    #[test]
    fn bounds_decrease_in_rate_and_order_correctly() {
        for l in [2usize, 3, 4, 8, 16, 64] {
            let mut prev = (f64::INFINITY, f64::INFINITY);
            for r in 1..=24u32 {
                let (lo, hi) = distortion_bounds(l, r).unwrap();
                assert!(lo <= hi, "lower above upper at L={l}, R={r}");
                assert!(lo < prev.0 && hi < prev.1, "not decreasing at L={l}, R={r}");
                assert!(distortion_estimate(l, r).unwrap() >= lo);
                prev = (lo, hi);
            }
        }
    }

    #[test]
    fn distortion_estimate_reference_values() {
        assert!((distortion_estimate(2, 4).unwrap() - 0.0625).abs() < 1e-12);
        // Γ(1/3)/3 · 2^−4 with Γ(1/3) = 2.678938534707748
        let expected: f64 = 2.678938534707748 / 3.0 / 16.0;
        assert!((expected - 0.055811219).abs() < 1e-8);
        assert!((distortion_estimate(4, 12).unwrap() - expected).abs() < 1e-10 * expected);
    }

    #[test]
    fn asymptotic_distortion_powers_of_two() {
        assert_eq!(asymptotic_distortion(1.0), 0.5);
        assert_eq!(asymptotic_distortion(2.0), 0.25);
        assert_eq!(asymptotic_distortion(3.0), 0.125);
    }

    #[test]
    fn gamma_accuracy_against_references() {
        // the platform gamma must be good to 1e-10 relative at the values the
        // distortion estimate uses
        let sqrt_pi = std::f64::consts::PI.sqrt();
        assert!((libm::tgamma(0.5) - sqrt_pi).abs() < 1e-10 * sqrt_pi);
        let gamma_third = 2.678938534707747633; // Γ(1/3)
        assert!((libm::tgamma(1.0 / 3.0) - gamma_third).abs() < 1e-10 * gamma_third);
    }

    #[test]
    fn alignment_sampler_matches_enumerated_codebooks() {
        // dual route: O(1) law sampler vs real codebooks, resampled per draw
        for (l, r, seed) in [(4usize, 8u32, 10u64), (16, 8, 11), (2, 4, 12)] {
            let n = 4000;
            let mut rng = derive_rng(seed, 0, 0);
            let sampler = AlignmentSampler::new(l, r).unwrap();
            let law: Vec<f64> = (0..n).map(|_| 1.0 - sampler.sample(&mut rng)).collect();

            let mut enumerated = Vec::with_capacity(n / 8);
            for b in 0..n / 8 {
                let mut rng = derive_rng(seed, 1, b as u64);
                let book = generate_random_codebook(l, r, &mut rng).unwrap();
                let v = crate::linalg::isotropic_unit(l, &mut rng);
                enumerated.push(1.0 - book.quantize(&v).unwrap().alignment_sqr);
            }

            let se = (standard_error(&law).powi(2) + standard_error(&enumerated).powi(2)).sqrt();
            let gap = (mean(&law) - mean(&enumerated)).abs();
            assert!(gap <= 3.5 * se, "L={l} R={r}: gap {gap} vs se {se}");

            let exact = expected_random_distortion(l, r).unwrap();
            assert!(
                (mean(&law) - exact).abs() <= 3.5 * standard_error(&law),
                "law mean {} vs exact {exact}",
                mean(&law)
            );
        }
    }

    #[test]
    fn expected_random_distortion_approaches_estimate() {
        // finite-size mean converges to the main-order estimate as R grows;
        // the gap is a(a+1)/(2N) + O(1/N²) with N = 2^R, a = 1/(L−1)
        for l in [4usize, 16, 32] {
            let r = 2 * l as u32;
            let exact = expected_random_distortion(l, r).unwrap();
            let est = distortion_estimate_unclamped(l, r);
            let rel = (exact - est).abs() / est;
            let a = 1.0 / (l - 1) as f64;
            let gap = a * (a + 1.0) / (r as f64).exp2();
            assert!(rel < gap.max(1e-12), "L={l}: rel {rel} vs gap {gap}");
        }
        // huge-rate path stays finite and decays
        let d64 = expected_random_distortion(32, 64).unwrap();
        let d128 = expected_random_distortion(32, 128).unwrap();
        assert!(d64 > d128 && d128 > 0.0);
    }

    fn distortion_estimate_unclamped(l: usize, r: u32) -> f64 {
        let lm1 = (l - 1) as f64;
        libm::tgamma(1.0 / lm1) / lm1 * (-(r as f64) / lm1).exp2()
    }

    #[test]
    fn save_load_round_trip() {
        let mut rng = derive_rng(13, 0, 0);
        let book = generate_random_codebook(3, 4, &mut rng).unwrap();
        let dir = std::env::temp_dir().join("zfbeam-codebook-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("book.txt");
        book.save(&path).unwrap();
        let loaded = Codebook::load(&path).unwrap();
        assert_eq!(loaded.dimension(), 3);
        assert_eq!(loaded.rate_bits(), 4);
        for i in 0..book.len() {
            assert_eq!(book.entry(i), loaded.entry(i));
        }
        std::fs::remove_file(&path).ok();
    }
}
