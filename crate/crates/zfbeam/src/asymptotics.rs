//! The proportional-growth limit: spatial efficiency as a function of the
//! on-user fraction `s̄ = s/L`, and its unique interior maximizer.
//!
//! Users enter only through the limiting distribution `μ_η` of their
//! effective SNR coefficients `η_i` (an atomic measure here — finite
//! populations induce atoms) together with the user density `m̄ = lim m/L`.
//! For `s̄ ∈ (0,1)` the efficiency in bits per antenna is
//!
//! ```text
//! Ī(s̄) = m̄·∫_{η_s̄+} log2(1 + η(1−s̄)/s̄) dμ
//!        + (s̄ − m̄·∫_{η_s̄+} dμ)·log2(1 + η_s̄(1−s̄)/s̄)
//! ```
//!
//! with `η_s̄ = sup{η : m̄·∫_η^∞ dμ > s̄}` the admission threshold; outside
//! `(0,1)` the efficiency is 0. The `x+` integrals exclude the atom at the
//! threshold itself, which is what the strict/non-strict [`tail_mass`] pair
//! implements exactly for atomic measures.

use std::fmt;
use std::io::{BufRead, BufReader};
use std::path::Path;

/// Grid used to bracket the maximizer and diagnose unimodality.
pub const SCAN_GRID_POINTS: usize = 1024;

/// Default golden-section tolerance on s̄.
pub const DEFAULT_SBAR_TOL: f64 = 1e-5;

#[derive(Debug)]
pub enum AsymptoticsError {
    EmptyDistribution,
    InvalidAtom { eta: f64, weight: f64 },
    InvalidParameter(String),
    /// The scan profile had more than one local maximum (up to plateaus),
    /// which would contradict the uniqueness of the maximizer; the grid is
    /// attached for inspection.
    NonUnimodal { grid: Vec<(f64, f64)> },
    QuadratureFailure { detail: String },
    Io(std::io::Error),
    Parse { line: usize, message: String },
}

impl fmt::Display for AsymptoticsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AsymptoticsError::EmptyDistribution => write!(f, "distribution has no atoms"),
            AsymptoticsError::InvalidAtom { eta, weight } => {
                write!(f, "invalid atom: eta={eta}, weight={weight}")
            }
            AsymptoticsError::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            AsymptoticsError::NonUnimodal { grid } => {
                write!(f, "efficiency profile is not unimodal over {} grid points", grid.len())
            }
            AsymptoticsError::QuadratureFailure { detail } => {
                write!(f, "quadrature failed to converge: {detail}")
            }
            AsymptoticsError::Io(e) => write!(f, "i/o error: {e}"),
            AsymptoticsError::Parse { line, message } => {
                write!(f, "parse error at line {line}: {message}")
            }
        }
    }
}

impl std::error::Error for AsymptoticsError {}

impl From<std::io::Error> for AsymptoticsError {
    fn from(e: std::io::Error) -> Self {
        AsymptoticsError::Io(e)
    }
}

/// Weighted-atom measure over effective SNR values, with the user density
/// `m̄`. Atoms are kept sorted by η; duplicate η values merge; weights are
/// normalized to sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct EtaDistribution {
    atoms: Vec<(f64, f64)>,
    mbar: f64,
}

impl EtaDistribution {
    pub fn new(atoms: Vec<(f64, f64)>, mbar: f64) -> Result<Self, AsymptoticsError> {
        if atoms.is_empty() {
            return Err(AsymptoticsError::EmptyDistribution);
        }
        if !(mbar > 0.0) || !mbar.is_finite() {
            return Err(AsymptoticsError::InvalidParameter(format!(
                "mbar must be positive and finite, got {mbar}"
            )));
        }
        for &(eta, weight) in &atoms {
            if !eta.is_finite() || eta < 0.0 || !(weight > 0.0) || !weight.is_finite() {
                return Err(AsymptoticsError::InvalidAtom { eta, weight });
            }
        }
        let mut sorted = atoms;
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(sorted.len());
        for (eta, w) in sorted {
            match merged.last_mut() {
                Some(last) if last.0 == eta => last.1 += w,
                _ => merged.push((eta, w)),
            }
        }
        let total: f64 = merged.iter().map(|&(_, w)| w).sum();
        for atom in merged.iter_mut() {
            atom.1 /= total;
        }
        Ok(EtaDistribution { atoms: merged, mbar })
    }

    /// Single atom of full mass at `eta`.
    pub fn single_atom(eta: f64, mbar: f64) -> Result<Self, AsymptoticsError> {
        EtaDistribution::new(vec![(eta, 1.0)], mbar)
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn mbar(&self) -> f64 {
        self.mbar
    }

    pub fn min_eta(&self) -> f64 {
        self.atoms[0].0
    }

    /// Load from text: a header line `mbar <value>`, then one `eta weight`
    /// pair per line. `#` starts a comment.
    pub fn from_file(path: &Path) -> Result<Self, AsymptoticsError> {
        let reader = BufReader::new(std::fs::File::open(path)?);
        let mut mbar: Option<f64> = None;
        let mut atoms = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let fields: Vec<&str> = content.split_whitespace().collect();
            if fields[0].eq_ignore_ascii_case("mbar") {
                if fields.len() != 2 {
                    return Err(AsymptoticsError::Parse {
                        line: idx + 1,
                        message: "expected: mbar <value>".into(),
                    });
                }
                mbar = Some(fields[1].parse().map_err(|e| AsymptoticsError::Parse {
                    line: idx + 1,
                    message: format!("{e}"),
                })?);
            } else {
                if fields.len() != 2 {
                    return Err(AsymptoticsError::Parse {
                        line: idx + 1,
                        message: "expected: <eta> <weight>".into(),
                    });
                }
                let eta: f64 = fields[0].parse().map_err(|e| AsymptoticsError::Parse {
                    line: idx + 1,
                    message: format!("{e}"),
                })?;
                let weight: f64 = fields[1].parse().map_err(|e| AsymptoticsError::Parse {
                    line: idx + 1,
                    message: format!("{e}"),
                })?;
                atoms.push((eta, weight));
            }
        }
        let mbar = mbar.ok_or(AsymptoticsError::Parse {
            line: 0,
            message: "missing 'mbar <value>' header".into(),
        })?;
        EtaDistribution::new(atoms, mbar)
    }
}

/// `m̄·∫ dμ` over `(x, ∞)` (strict — the measure's `x+` limit) or `[x, ∞)`
/// (non-strict).
pub fn tail_mass(dist: &EtaDistribution, x: f64, strict: bool) -> f64 {
    let sum: f64 = dist
        .atoms
        .iter()
        .filter(|&&(eta, _)| if strict { eta > x } else { eta >= x })
        .map(|&(_, w)| w)
        .sum();
    dist.mbar * sum
}

/// Admission threshold `η_s̄`, with a flag for the degenerate case where even
/// admitting everyone cannot fill the on-fraction (`m̄ ≤ s̄`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaThreshold {
    pub eta: f64,
    /// True when the tail never exceeds s̄; `eta` is then just below the
    /// smallest atom so that every user counts as admitted.
    pub all_users_admitted: bool,
}

/// `η_s̄ = sup{η : m̄·∫_η^∞ dμ > s̄}` for `s̄ ∈ (0,1)`. For an atomic measure
/// the supremum is the largest atom whose closed tail exceeds `s̄`; if no atom
/// qualifies (i.e. `m̄ ≤ s̄`), the result is flagged and sits just below the
/// smallest atom.
pub fn eta_threshold(dist: &EtaDistribution, sbar: f64) -> Result<EtaThreshold, AsymptoticsError> {
    if !(sbar > 0.0 && sbar < 1.0) {
        return Err(AsymptoticsError::InvalidParameter(format!(
            "sbar must lie in (0,1), got {sbar}"
        )));
    }
    let mut tail = 0.0;
    for &(eta, w) in dist.atoms.iter().rev() {
        tail += dist.mbar * w;
        if tail > sbar {
            return Ok(EtaThreshold {
                eta,
                all_users_admitted: false,
            });
        }
    }
    let min = dist.min_eta();
    let tol = 1e-9 * min.abs().max(1.0);
    Ok(EtaThreshold {
        eta: min - tol,
        all_users_admitted: true,
    })
}

fn rate_term(eta: f64, sbar: f64) -> f64 {
    // log2(1 + η(1−s̄)/s̄); η is clamped at 0 so the all-admitted sentinel
    // just below a zero atom cannot push the argument negative
    (eta.max(0.0) * (1.0 - sbar) / sbar).ln_1p() / std::f64::consts::LN_2
}

/// Spatial efficiency `Ī(s̄)` in bits per antenna; zero outside `(0,1)`.
pub fn spatial_efficiency(dist: &EtaDistribution, sbar: f64) -> f64 {
    if !(sbar > 0.0 && sbar < 1.0) {
        return 0.0;
    }
    let threshold = eta_threshold(dist, sbar).expect("sbar checked");
    let mut tail_integral = 0.0; // m̄·∫_{η_s̄+} log2(...) dμ
    let mut tail_weight = 0.0; // m̄·∫_{η_s̄+} dμ
    for &(eta, w) in dist.atoms.iter().rev() {
        if eta > threshold.eta {
            tail_integral += dist.mbar * w * rate_term(eta, sbar);
            tail_weight += dist.mbar * w;
        } else {
            break;
        }
    }
    tail_integral + (sbar - tail_weight) * rate_term(threshold.eta, sbar)
}

/// Count local maxima of a sampled profile, merging consecutive values equal
/// within a relative tolerance into plateaus.
pub(crate) fn local_maxima_up_to_plateaus(values: &[f64]) -> usize {
    if values.is_empty() {
        return 0;
    }
    let scale = values.iter().fold(0.0f64, |a, &b| a.max(b.abs())).max(1e-300);
    let tol = 1e-9 * scale;
    let mut segments: Vec<f64> = Vec::new();
    for &v in values {
        match segments.last() {
            Some(&last) if (v - last).abs() <= tol => {}
            _ => segments.push(v),
        }
    }
    let n = segments.len();
    if n == 1 {
        return 1;
    }
    let mut count = 0;
    for i in 0..n {
        let left_ok = i == 0 || segments[i - 1] < segments[i];
        let right_ok = i == n - 1 || segments[i + 1] < segments[i];
        if left_ok && right_ok {
            count += 1;
        }
    }
    count
}

/// Locate the unique interior maximizer of `Ī` by a [`SCAN_GRID_POINTS`]-point
/// scan followed by golden-section refinement; returns `(s̄*, Ī(s̄*))` with
/// `s̄*` accurate to `tolerance`. A profile with more than one local maximum
/// (up to plateaus) is reported as [`AsymptoticsError::NonUnimodal`] since the
/// maximizer is provably unique.
pub fn optimal_sbar(
    dist: &EtaDistribution,
    tolerance: f64,
) -> Result<(f64, f64), AsymptoticsError> {
    if !(tolerance > 0.0) {
        return Err(AsymptoticsError::InvalidParameter(format!(
            "tolerance must be > 0, got {tolerance}"
        )));
    }
    let n = SCAN_GRID_POINTS;
    let grid: Vec<(f64, f64)> = (1..=n)
        .map(|k| {
            let s = k as f64 / (n + 1) as f64;
            (s, spatial_efficiency(dist, s))
        })
        .collect();
    let values: Vec<f64> = grid.iter().map(|&(_, v)| v).collect();
    if local_maxima_up_to_plateaus(&values) > 1 {
        return Err(AsymptoticsError::NonUnimodal { grid });
    }
    let best = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("grid non-empty");
    let lo = if best == 0 { tolerance.min(grid[0].0 / 2.0) } else { grid[best - 1].0 };
    let hi = if best == n - 1 {
        1.0 - tolerance.min((1.0 - grid[n - 1].0) / 2.0)
    } else {
        grid[best + 1].0
    };

    // golden-section maximization on [lo, hi]
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = spatial_efficiency(dist, c);
    let mut fd = spatial_efficiency(dist, d);
    while b - a > tolerance {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = spatial_efficiency(dist, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = spatial_efficiency(dist, d);
        }
    }
    let s_star = 0.5 * (a + b);
    let mut best_pair = (s_star, spatial_efficiency(dist, s_star));
    // never return less than the best sampled point
    if values[best] > best_pair.1 {
        best_pair = grid[best];
    }
    Ok(best_pair)
}

/// Positivity certificate used by the uniqueness argument:
/// `g(x) = 2x/(1+x) + ln²(1+x) − 2·ln(1+x) > 0` for all `x > 0`.
/// Evaluated with `ln_1p`; near zero the three terms cancel to `x³/3`.
pub fn uniqueness_gap(x: f64) -> f64 {
    let ln1p = x.ln_1p();
    2.0 * x / (1.0 + x) + ln1p * ln1p - 2.0 * ln1p
}

/// Derivative `y'(s) = f(t, s) + ∫_t^∞ (∂f/∂s)(η, s) dμ` of the atomless-
/// measure efficiency `y(s) = ∫_t^∞ f(η, s) dμ`, with
/// `f(η, s) = ln(1 + η(1−s)/s)` (natural log) and `t = t(s)` supplied by the
/// caller as `inf{t : ∫_t^∞ dμ < s}`. The integral is evaluated by adaptive
/// Simpson quadrature over the density's support.
pub fn derivative_atomless<F: Fn(f64) -> f64>(
    density: F,
    support: (f64, f64),
    t: f64,
    s: f64,
) -> Result<f64, AsymptoticsError> {
    if !(s > 0.0 && s < 1.0) {
        return Err(AsymptoticsError::InvalidParameter(format!(
            "s must lie in (0,1), got {s}"
        )));
    }
    let (lo, hi) = support;
    if !(lo <= hi) {
        return Err(AsymptoticsError::InvalidParameter(format!(
            "invalid support [{lo}, {hi}]"
        )));
    }
    let f_boundary = (t.max(0.0) * (1.0 - s) / s).ln_1p();
    // ∂f/∂s = −η / (s² + ηs(1−s))
    let integrand = |eta: f64| -> f64 { -eta / (s * s + eta * s * (1.0 - s)) * density(eta) };
    let a = t.max(lo);
    if a >= hi {
        return Ok(f_boundary);
    }
    let integral = adaptive_simpson(&integrand, a, hi, 1e-10, 48)?;
    Ok(f_boundary + integral)
}

fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
    max_depth: u32,
) -> Result<f64, AsymptoticsError> {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, m: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b))
    }
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        m: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64, AsymptoticsError> {
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let left = simpson(f, a, lm, m);
        let right = simpson(f, m, rm, b);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol {
            return Ok(left + right + delta / 15.0);
        }
        if depth == 0 {
            return Err(AsymptoticsError::QuadratureFailure {
                detail: format!("interval [{a}, {b}] did not converge"),
            });
        }
        Ok(recurse(f, a, lm, m, left, tol / 2.0, depth - 1)?
            + recurse(f, m, rm, b, right, tol / 2.0, depth - 1)?)
    }
    let m = 0.5 * (a + b);
    recurse(f, a, m, b, simpson(f, a, m, b), tol, max_depth)
}
