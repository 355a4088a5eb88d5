//! Zero-forcing beam construction by unitary projection, and the
//! instantaneous per-user signal/interference powers it produces.
//!
//! For each on-user `i`, the beam is the unit projection of the user's
//! quantized direction onto the orthogonal complement of the other on-users'
//! quantized directions:
//!
//! ```text
//! q_i = T_i T_i† p_i / ||T_i T_i† p_i||
//! ```
//!
//! where the columns of `T_i` span the complement. The projector `T_i T_i†`
//! does not depend on which orthonormal basis spans the complement, so the
//! beam itself is deterministic given the directions; the randomized-basis
//! construction (used in distributional arguments and exposed as
//! [`orthonormal_complement_basis`]) consumes randomness only for the basis,
//! never for the beam.

use crate::channel::ChannelBlock;
use crate::linalg::{self, CVector};
use num_complex::Complex64;
use rand::Rng;
use std::fmt;

/// Relative rank threshold for deciding the dimension of spanned subspaces.
pub const RANK_TOL: f64 = 1e-10;

/// Tolerance on `|p_j† q_i|` for the zero-forcing property.
pub const ZERO_FORCING_TOL: f64 = 1e-8;

/// A projected direction with norm below this is treated as degenerate.
pub const DEGENERATE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum BeamformError {
    DimensionMismatch { expected: usize, got: usize },
    /// The input vectors span all of C^L: the complement is empty.
    EmptyComplement,
    /// A user's quantized direction lies (numerically) in the span of the
    /// other users' directions, so its zero-forcing beam is undefined.
    DegenerateBeam { user: usize },
    EmptyInput,
    /// Signal or interference power was negative or non-finite.
    InvalidPower { signal: f64, interference: f64 },
}

impl fmt::Display for BeamformError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BeamformError::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            BeamformError::EmptyComplement => write!(f, "input vectors span the whole space"),
            BeamformError::DegenerateBeam { user } => {
                write!(f, "degenerate beam: direction of user {user} lies in the others' span")
            }
            BeamformError::EmptyInput => write!(f, "empty input"),
            BeamformError::InvalidPower { signal, interference } => {
                write!(f, "invalid powers: signal={signal}, interference={interference}")
            }
        }
    }
}

impl std::error::Error for BeamformError {}

/// On-user set with quantized directions and the zero-forcing beams built
/// from them.
#[derive(Debug, Clone)]
pub struct BeamformingSolution {
    on_users: Vec<usize>,
    quantized_dirs: Vec<CVector>,
    beams: Vec<CVector>,
    complement_dims: Vec<usize>,
}

impl BeamformingSolution {
    pub fn on_users(&self) -> &[usize] {
        &self.on_users
    }

    pub fn num_on(&self) -> usize {
        self.on_users.len()
    }

    /// Beam for the k-th on-user (positional, aligned with `on_users`).
    pub fn beam(&self, k: usize) -> &[Complex64] {
        &self.beams[k]
    }

    pub fn quantized_dir(&self, k: usize) -> &[Complex64] {
        &self.quantized_dirs[k]
    }

    /// Dimension `t` of the complement each beam was projected into.
    pub fn complement_dim(&self, k: usize) -> usize {
        self.complement_dims[k]
    }

    /// Worst cross-alignment `max_{j≠i} |p_j† q_i|` over the solution.
    pub fn max_zero_forcing_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, q) in self.beams.iter().enumerate() {
            for (j, p) in self.quantized_dirs.iter().enumerate() {
                if i != j {
                    worst = worst.max(linalg::inner(p, q).norm());
                }
            }
        }
        worst
    }
}

/// Orthonormal basis `T` (as columns) of the orthogonal complement of
/// `span(vectors)` in `C^L`, randomized by drawing i.i.d. Gaussian columns,
/// projecting them off the span, and orthonormalizing. The span of `T` is the
/// complement; its basis is uniformly rotated within it, which is the
/// isotropy property the distributional identities rely on. With empty input
/// the result is a full random `L×L` unitary basis.
pub fn orthonormal_complement_basis<R: Rng + ?Sized>(
    vectors: &[CVector],
    antennas: usize,
    rng: &mut R,
) -> Result<Vec<CVector>, BeamformError> {
    for v in vectors {
        if v.len() != antennas {
            return Err(BeamformError::DimensionMismatch {
                expected: antennas,
                got: v.len(),
            });
        }
    }
    let span = linalg::orthonormal_span(vectors, RANK_TOL);
    let t = antennas - span.len();
    if t == 0 {
        return Err(BeamformError::EmptyComplement);
    }
    let mut basis: Vec<CVector> = Vec::with_capacity(t);
    while basis.len() < t {
        let mut col = linalg::complex_gaussian(antennas, rng);
        linalg::project_off(&mut col, &span);
        linalg::project_off(&mut col, &basis);
        // second pass keeps the Gram residual at working precision
        linalg::project_off(&mut col, &span);
        linalg::project_off(&mut col, &basis);
        let n = linalg::norm(&col);
        if n < RANK_TOL {
            continue; // measure-zero collision with the span; resample
        }
        linalg::scale(&mut col, 1.0 / n);
        basis.push(col);
    }
    Ok(basis)
}

/// Build the zero-forcing beams for `s` on-users from their quantized
/// directions: each direction is unit-projected onto the complement of the
/// others' span. With `s = 1` the beam equals the direction exactly.
pub fn zero_forcing_beams(
    on_users: &[usize],
    quantized_dirs: &[CVector],
    antennas: usize,
) -> Result<BeamformingSolution, BeamformError> {
    if quantized_dirs.is_empty() {
        return Err(BeamformError::EmptyInput);
    }
    if on_users.len() != quantized_dirs.len() {
        return Err(BeamformError::DimensionMismatch {
            expected: on_users.len(),
            got: quantized_dirs.len(),
        });
    }
    for p in quantized_dirs {
        if p.len() != antennas {
            return Err(BeamformError::DimensionMismatch {
                expected: antennas,
                got: p.len(),
            });
        }
    }
    let s = quantized_dirs.len();
    let mut beams = Vec::with_capacity(s);
    let mut complement_dims = Vec::with_capacity(s);

    if s == 1 {
        beams.push(quantized_dirs[0].clone());
        complement_dims.push(antennas);
    } else {
        let mut others: Vec<CVector> = Vec::with_capacity(s - 1);
        for i in 0..s {
            others.clear();
            others.extend(
                quantized_dirs
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, p)| p.clone()),
            );
            let span = linalg::orthonormal_span(&others, RANK_TOL);
            let t = antennas - span.len();
            if t == 0 {
                return Err(BeamformError::DegenerateBeam { user: on_users[i] });
            }
            // q_i = (I − B B†) p_i, normalized; identical to T_i T_i† p_i.
            let mut q = quantized_dirs[i].clone();
            linalg::project_off(&mut q, &span);
            linalg::project_off(&mut q, &span);
            let n = linalg::norm(&q);
            if n < DEGENERATE_TOL {
                return Err(BeamformError::DegenerateBeam { user: on_users[i] });
            }
            linalg::scale(&mut q, 1.0 / n);
            beams.push(q);
            complement_dims.push(t);
        }
    }

    Ok(BeamformingSolution {
        on_users: on_users.to_vec(),
        quantized_dirs: quantized_dirs.to_vec(),
        beams,
        complement_dims,
    })
}

/// Instantaneous signal and interference power for one on-user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserPowers {
    pub signal: f64,
    pub interference: f64,
}

/// Evaluate `P_sig,i = (ρ/s)·γ_i·|h_i† q_i|²` and
/// `P_int,i = (ρ/s)·γ_i·Σ_{j≠i} |h_i† q_j|²` for every on-user of the
/// solution, in `on_users` order.
pub fn instantaneous_powers(
    block: &ChannelBlock,
    solution: &BeamformingSolution,
    rho: f64,
) -> Result<Vec<UserPowers>, BeamformError> {
    let s = solution.num_on();
    let l = block.antennas();
    if solution.beams.iter().any(|q| q.len() != l) {
        return Err(BeamformError::DimensionMismatch {
            expected: l,
            got: solution.beams[0].len(),
        });
    }
    let power_per_user = rho / s as f64;
    let mut out = Vec::with_capacity(s);
    for (k, &user) in solution.on_users.iter().enumerate() {
        if user >= block.users() {
            return Err(BeamformError::DimensionMismatch {
                expected: block.users(),
                got: user,
            });
        }
        let h = block.h(user);
        let gamma = block.gamma(user);
        let mut signal = 0.0;
        let mut interference = 0.0;
        for (j, q) in solution.beams.iter().enumerate() {
            let a = linalg::inner(h, q).norm_sqr();
            if j == k {
                signal = power_per_user * gamma * a;
            } else {
                interference += power_per_user * gamma * a;
            }
        }
        out.push(UserPowers {
            signal,
            interference,
        });
    }
    Ok(out)
}

/// Per-user throughput in bits per channel use:
/// `log2(1 + P_sig / (1 + P_int))`.
pub fn per_user_throughput(p_sig: f64, p_int: f64) -> Result<f64, BeamformError> {
    if !(p_sig >= 0.0 && p_int >= 0.0) {
        return Err(BeamformError::InvalidPower {
            signal: p_sig,
            interference: p_int,
        });
    }
    Ok((p_sig / (1.0 + p_int)).ln_1p() / std::f64::consts::LN_2)
}
