//! End-to-end Monte Carlo: per-block pipeline (sample → quantize → beamform →
//! measure), sweeps over (ρ, s), and verification of the closed-form expected
//! powers and asymptotic limits.
//!
//! Every block draws its generator from `(seed, point index, block index)`,
//! so sweep results are reproducible bit-for-bit and independent of
//! evaluation order. Blocks whose zero-forcing construction degenerates
//! (a quantized direction falling into the span of the others — measure zero
//! for continuous codebooks) are excluded from averages and counted.

use crate::beamform::{self, BeamformError, BeamformingSolution};
use crate::channel::{self, ChannelError};
use crate::codebook::{self, AlignmentSampler, Codebook, CodebookError};
use crate::derive_rng;
use crate::linalg::{self, CVector};
use crate::scheme::{self, SchemeError, SystemConfig, UserProfile};
use crate::stats;
use rand::Rng;
use rand_distr::{Distribution, Exp1};
use std::fmt;

/// Explicit codebooks larger than this many stored complex entries switch the
/// convergence study to the exact alignment law.
const MAX_MATERIALIZED_ENTRIES: u64 = 1 << 22;

#[derive(Debug)]
pub enum MonteCarloError {
    Channel(ChannelError),
    Codebook(CodebookError),
    Beamform(BeamformError),
    Scheme(SchemeError),
    InvalidConfig(String),
    /// The zero-forcing construction failed for this block.
    DegenerateBlock { user: usize },
    /// The rate implied by (r̄, L) exceeds the explicit-codebook guard.
    GuardViolation { rate_bits: u32, max: u32 },
    NoUsableBlocks,
}

impl fmt::Display for MonteCarloError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MonteCarloError::Channel(e) => write!(f, "channel: {e}"),
            MonteCarloError::Codebook(e) => write!(f, "codebook: {e}"),
            MonteCarloError::Beamform(e) => write!(f, "beamform: {e}"),
            MonteCarloError::Scheme(e) => write!(f, "scheme: {e}"),
            MonteCarloError::InvalidConfig(msg) => write!(f, "invalid config: {msg}"),
            MonteCarloError::DegenerateBlock { user } => {
                write!(f, "degenerate zero-forcing block (user {user})")
            }
            MonteCarloError::GuardViolation { rate_bits, max } => {
                write!(f, "rate {rate_bits} bits exceeds the {max}-bit codebook guard")
            }
            MonteCarloError::NoUsableBlocks => write!(f, "every block was degenerate"),
        }
    }
}

impl std::error::Error for MonteCarloError {}

impl From<ChannelError> for MonteCarloError {
    fn from(e: ChannelError) -> Self {
        MonteCarloError::Channel(e)
    }
}
impl From<CodebookError> for MonteCarloError {
    fn from(e: CodebookError) -> Self {
        MonteCarloError::Codebook(e)
    }
}
impl From<SchemeError> for MonteCarloError {
    fn from(e: SchemeError) -> Self {
        MonteCarloError::Scheme(e)
    }
}
impl From<BeamformError> for MonteCarloError {
    fn from(e: BeamformError) -> Self {
        match e {
            BeamformError::DegenerateBeam { user } => MonteCarloError::DegenerateBlock { user },
            other => MonteCarloError::Beamform(other),
        }
    }
}

/// Whether each block draws fresh codebooks (matching the expectation over
/// random codebooks in the closed forms) or one fixed set serves the run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodebookPolicy {
    ResampledPerBlock,
    FixedPerRun,
}

/// Full sweep description.
#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub system: SystemConfig,
    pub s_values: Vec<usize>,
    pub rho_grid_db: Vec<f64>,
    pub n_blocks: usize,
    pub seed: u64,
    pub codebook_policy: CodebookPolicy,
}

impl SimulationConfig {
    fn validate(&self) -> Result<(), MonteCarloError> {
        if self.n_blocks == 0 {
            return Err(MonteCarloError::InvalidConfig("n_blocks must be >= 1".into()));
        }
        if self.s_values.is_empty() {
            return Err(MonteCarloError::InvalidConfig("s_values must be nonempty".into()));
        }
        if let Some(&bad) = self
            .s_values
            .iter()
            .find(|&&s| s == 0 || s > self.system.antennas)
        {
            return Err(MonteCarloError::InvalidConfig(format!(
                "s = {bad} outside [1, L={}]",
                self.system.antennas
            )));
        }
        if self.rho_grid_db.is_empty() || self.rho_grid_db.iter().any(|r| !r.is_finite()) {
            return Err(MonteCarloError::InvalidConfig("bad rho grid".into()));
        }
        Ok(())
    }
}

/// One (ρ, s) measurement row.
#[derive(Debug, Clone, PartialEq)]
pub struct SimRecord {
    pub rho_db: f64,
    pub s: usize,
    pub mean_total_throughput_bits: f64,
    pub stderr: f64,
    pub mean_p_sig: f64,
    pub mean_p_int: f64,
    pub i_main_total_predicted: f64,
    pub n_degenerate_blocks: usize,
}

/// Per-user measurement from one block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserOutcome {
    pub user: usize,
    pub p_sig: f64,
    pub p_int: f64,
    pub throughput_bits: f64,
    /// `|v†p|²` between the user's direction and its chosen codeword.
    pub alignment_sqr: f64,
}

/// Run one fading block: sample the channel, quantize each on-user's
/// direction against its codebook, build the zero-forcing beams, and evaluate
/// per-user powers and throughput. Degenerate blocks surface as
/// [`MonteCarloError::DegenerateBlock`].
pub fn run_block<R: Rng + ?Sized>(
    system: &SystemConfig,
    on_users: &[usize],
    codebooks: &[Codebook],
    rng: &mut R,
) -> Result<Vec<UserOutcome>, MonteCarloError> {
    if on_users.is_empty() || on_users.len() != codebooks.len() {
        return Err(MonteCarloError::InvalidConfig(format!(
            "need one codebook per on-user ({} users, {} codebooks)",
            on_users.len(),
            codebooks.len()
        )));
    }
    let l = system.antennas;
    let m = system.num_users();
    let gammas: Vec<f64> = system.users.iter().map(|u| u.gamma).collect();
    let block = channel::sample_block(l, m, &gammas, rng)?;

    let mut dirs: Vec<CVector> = Vec::with_capacity(on_users.len());
    let mut alignments = Vec::with_capacity(on_users.len());
    for (&user, book) in on_users.iter().zip(codebooks) {
        if user >= m {
            return Err(MonteCarloError::InvalidConfig(format!(
                "on-user {user} out of range ({m} users)"
            )));
        }
        let q = book.quantize(block.h(user))?;
        dirs.push(book.entry(q.index).to_vec());
        alignments.push(q.alignment_sqr);
    }
    let solution = beamform::zero_forcing_beams(on_users, &dirs, l)?;
    let powers = beamform::instantaneous_powers(&block, &solution, system.rho)?;

    Ok(on_users
        .iter()
        .zip(powers)
        .zip(alignments)
        .map(|((&user, p), alignment_sqr)| UserOutcome {
            user,
            p_sig: p.signal,
            p_int: p.interference,
            throughput_bits: beamform::per_user_throughput(p.signal, p.interference)
                .expect("powers are nonnegative"),
            alignment_sqr,
        })
        .collect())
}

/// Pad a system with γ = 0 users up to L so on-sets of any size `s ≤ L` are
/// well defined; a silent user carries a beam but no throughput, which is an
/// equivalent system.
fn padded_system(system: &SystemConfig) -> SystemConfig {
    let mut system = system.clone();
    while system.users.len() < system.antennas {
        system.users.push(UserProfile {
            gamma: 0.0,
            rate_bits: system.users[0].rate_bits,
        });
    }
    system
}

/// Sweep every (ρ, s) pair: average the on-set's total throughput over
/// `n_blocks` fading blocks and report it next to the main-order prediction.
/// The on-set for each point is chosen once from system parameters (never
/// from realizations). Records arrive in ρ-major, s-minor order.
pub fn sweep(config: &SimulationConfig) -> Result<Vec<SimRecord>, MonteCarloError> {
    config.validate()?;
    let system = padded_system(&config.system);
    let d_per_user: Vec<f64> = system
        .users
        .iter()
        .map(|u| codebook::distortion_estimate(system.antennas, u.rate_bits))
        .collect::<Result<_, _>>()?;

    let mut records = Vec::with_capacity(config.rho_grid_db.len() * config.s_values.len());
    let mut point_idx: u64 = 0;
    for &rho_db in &config.rho_grid_db {
        let rho = scheme::db_to_linear(rho_db);
        let mut point_system = system.clone();
        point_system.rho = rho;
        for &s in &config.s_values {
            let mut select_rng = derive_rng(config.seed, point_idx, u64::MAX);
            let chosen =
                scheme::on_users_for_s(&point_system, &d_per_user, s, &mut select_rng)?;
            let on_users: Vec<usize> = chosen.iter().map(|&(i, _)| i).collect();
            let i_main_total_predicted: f64 = chosen.iter().map(|&(_, im)| im).sum();

            let fixed_books: Option<Vec<Codebook>> = match config.codebook_policy {
                CodebookPolicy::FixedPerRun => {
                    let mut book_rng = derive_rng(config.seed, point_idx, u64::MAX - 1);
                    Some(
                        on_users
                            .iter()
                            .map(|&u| {
                                codebook::generate_random_codebook(
                                    point_system.antennas,
                                    point_system.users[u].rate_bits,
                                    &mut book_rng,
                                )
                            })
                            .collect::<Result<_, _>>()?,
                    )
                }
                CodebookPolicy::ResampledPerBlock => None,
            };

            let mut totals = Vec::with_capacity(config.n_blocks);
            let mut sig_sum = 0.0;
            let mut int_sum = 0.0;
            let mut n_user_samples = 0usize;
            let mut n_degenerate = 0usize;
            for b in 0..config.n_blocks {
                let mut rng = derive_rng(config.seed, point_idx, b as u64);
                let outcome = match &fixed_books {
                    Some(books) => run_block(&point_system, &on_users, books, &mut rng),
                    None => {
                        let books: Vec<Codebook> = on_users
                            .iter()
                            .map(|&u| {
                                codebook::generate_random_codebook(
                                    point_system.antennas,
                                    point_system.users[u].rate_bits,
                                    &mut rng,
                                )
                            })
                            .collect::<Result<_, _>>()?;
                        run_block(&point_system, &on_users, &books, &mut rng)
                    }
                };
                match outcome {
                    Ok(users) => {
                        totals.push(users.iter().map(|u| u.throughput_bits).sum::<f64>());
                        for u in &users {
                            sig_sum += u.p_sig;
                            int_sum += u.p_int;
                            n_user_samples += 1;
                        }
                    }
                    Err(MonteCarloError::DegenerateBlock { .. }) => n_degenerate += 1,
                    Err(other) => return Err(other),
                }
            }
            if totals.is_empty() {
                return Err(MonteCarloError::NoUsableBlocks);
            }
            records.push(SimRecord {
                rho_db,
                s,
                mean_total_throughput_bits: stats::mean(&totals),
                stderr: stats::standard_error(&totals),
                mean_p_sig: sig_sum / n_user_samples as f64,
                mean_p_int: int_sum / n_user_samples as f64,
                i_main_total_predicted,
                n_degenerate_blocks: n_degenerate,
            });
            point_idx += 1;
        }
    }
    Ok(records)
}

/// Fixed CSV header for [`SimRecord`] rows.
pub const CSV_HEADER: &str = "rho_db,s,mean_total_throughput_bits,stderr,mean_P_sig,mean_P_int,i_main_total_predicted,n_degenerate_blocks";

fn format_sig(value: f64) -> String {
    if value == 0.0 {
        "0".to_string()
    } else {
        format!("{value:.5e}")
    }
}

/// Render records as CSV (header included). With `raw`, floats are printed at
/// full round-trip precision instead of 6 significant digits.
pub fn to_csv(records: &[SimRecord], raw: bool) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        let fields: Vec<String> = if raw {
            vec![
                r.rho_db.to_string(),
                r.s.to_string(),
                r.mean_total_throughput_bits.to_string(),
                r.stderr.to_string(),
                r.mean_p_sig.to_string(),
                r.mean_p_int.to_string(),
                r.i_main_total_predicted.to_string(),
                r.n_degenerate_blocks.to_string(),
            ]
        } else {
            vec![
                format_sig(r.rho_db),
                r.s.to_string(),
                format_sig(r.mean_total_throughput_bits),
                format_sig(r.stderr),
                format_sig(r.mean_p_sig),
                format_sig(r.mean_p_int),
                format_sig(r.i_main_total_predicted),
                r.n_degenerate_blocks.to_string(),
            ]
        };
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Comparison of empirical mean powers against the closed-form expectations
/// at the distortion measured in the same run.
#[derive(Debug, Clone)]
pub struct PowerCheck {
    pub antennas: usize,
    pub s: usize,
    pub rate_bits: u32,
    pub gamma: f64,
    pub rho: f64,
    pub n_blocks_used: usize,
    pub n_degenerate: usize,
    /// `D̂ = 1 − mean(|v†p|²)` over all quantizations of the run.
    pub measured_distortion: f64,
    pub predicted_signal: f64,
    pub predicted_interference: f64,
    pub empirical_signal: f64,
    pub empirical_interference: f64,
    /// z-scores of (empirical − predicted), with the measured-D̂ noise and its
    /// correlation with the powers propagated through the delta method.
    pub z_signal: f64,
    pub z_interference: f64,
}

/// Exact-identity oracle for the expected-power formulas: run `n_blocks`
/// blocks with fresh random codebooks, measure D̂ from the run's own
/// quantizations, plug it into the closed forms, and report z-scores of the
/// empirical means against them.
pub fn verify_expected_powers<R: Rng + ?Sized>(
    antennas: usize,
    s: usize,
    rate_bits: u32,
    gamma: f64,
    rho: f64,
    n_blocks: usize,
    rng: &mut R,
) -> Result<PowerCheck, MonteCarloError> {
    if s == 0 || s > antennas {
        return Err(MonteCarloError::InvalidConfig(format!(
            "s = {s} outside [1, L = {antennas}]"
        )));
    }
    let system = SystemConfig::new(
        antennas,
        vec![UserProfile { gamma, rate_bits }; s],
        rho,
    )?;
    let on_users: Vec<usize> = (0..s).collect();

    // per-block means of (P_sig, P_int, alignment) over the on-users
    let mut sig = Vec::with_capacity(n_blocks);
    let mut int = Vec::with_capacity(n_blocks);
    let mut align = Vec::with_capacity(n_blocks);
    let mut n_degenerate = 0usize;
    for _ in 0..n_blocks {
        let books: Vec<Codebook> = (0..s)
            .map(|_| codebook::generate_random_codebook(antennas, rate_bits, rng))
            .collect::<Result<_, _>>()?;
        match run_block(&system, &on_users, &books, rng) {
            Ok(users) => {
                let inv = 1.0 / s as f64;
                sig.push(users.iter().map(|u| u.p_sig).sum::<f64>() * inv);
                int.push(users.iter().map(|u| u.p_int).sum::<f64>() * inv);
                align.push(users.iter().map(|u| u.alignment_sqr).sum::<f64>() * inv);
            }
            Err(MonteCarloError::DegenerateBlock { .. }) => n_degenerate += 1,
            Err(other) => return Err(other),
        }
    }
    if sig.is_empty() {
        return Err(MonteCarloError::NoUsableBlocks);
    }

    let n = sig.len() as f64;
    let d_hat = 1.0 - stats::mean(&align);
    let predicted_signal = scheme::expected_signal_power(antennas, s, d_hat, gamma, rho)?;
    let predicted_interference = scheme::expected_interference_power(antennas, s, d_hat, gamma, rho)?;

    // d/dD of Eqs. for the delta method (prediction shifts when D̂ moves)
    let l = antennas as f64;
    let s_f = s as f64;
    let dsig_dd = gamma * rho * (l / s_f)
        * (-(1.0 - (s_f - 1.0) / l)
            + if antennas > 1 { (s_f - 1.0) / (l * (l - 1.0)) } else { 0.0 });
    let dint_dd = if s > 1 {
        gamma * rho * (l / s_f) * (s_f - 1.0) / (l - 1.0)
    } else {
        0.0
    };

    let z = |samples: &[f64], predicted: f64, dpred_dd: f64| -> f64 {
        // statistic: mean(samples) − pred(1 − mean(align));
        // gradient (1, dpred_dd) over the joint (sample, align) block means
        let var = stats::sample_variance(samples)
            + 2.0 * dpred_dd * stats::sample_covariance(samples, &align)
            + dpred_dd * dpred_dd * stats::sample_variance(&align);
        let se = (var / n).sqrt();
        if se == 0.0 {
            0.0
        } else {
            (stats::mean(samples) - predicted) / se
        }
    };

    Ok(PowerCheck {
        antennas,
        s,
        rate_bits,
        gamma,
        rho,
        n_blocks_used: sig.len(),
        n_degenerate,
        measured_distortion: d_hat,
        predicted_signal,
        predicted_interference,
        empirical_signal: stats::mean(&sig),
        empirical_interference: stats::mean(&int),
        z_signal: z(&sig, predicted_signal, dsig_dd),
        z_interference: z(&int, predicted_interference, dint_dd),
    })
}

/// One size point of a convergence study toward the proportional-growth
/// limits.
#[derive(Debug, Clone)]
pub struct ConvergencePoint {
    pub antennas: usize,
    pub s: usize,
    pub rate_bits: u32,
    pub n_blocks_used: usize,
    pub n_degenerate: usize,
    pub measured_distortion: f64,
    /// mean `P_sig/(γρ)` and its standard error
    pub normalized_signal: f64,
    pub signal_stderr: f64,
    /// mean `P_int/(γρ)` and its standard error
    pub normalized_interference: f64,
    pub interference_stderr: f64,
    /// limits `(1/s̄)(1−2^{−r̄})(1−s̄)` and `2^{−r̄}`
    pub asymptotic_signal: f64,
    pub asymptotic_interference: f64,
}

impl ConvergencePoint {
    /// Relative gaps to the asymptotic limits.
    pub fn signal_error(&self) -> f64 {
        (self.normalized_signal - self.asymptotic_signal).abs() / self.asymptotic_signal
    }

    pub fn interference_error(&self) -> f64 {
        if self.asymptotic_interference == 0.0 {
            self.normalized_interference.abs()
        } else {
            (self.normalized_interference - self.asymptotic_interference).abs()
                / self.asymptotic_interference
        }
    }
}

/// How the measured user's codeword alignment is produced.
enum AlignmentMode {
    /// Real codebook, real exhaustive quantization.
    Explicit(Box<Codebook>),
    /// Exact law of the best alignment for a fresh random codebook; the
    /// winning codeword itself is isotropic.
    Law(AlignmentSampler),
}

/// One measured-user trial of the zero-forcing pipeline at size `l` with `s`
/// on-users: returns `(P_sig/(γρ), P_int/(γρ), alignment)` for user 0, whose
/// direction is genuinely quantized; the other users' quantized directions
/// are drawn from their exact (isotropic) law.
fn zf_power_trial<R: Rng + ?Sized>(
    l: usize,
    s: usize,
    mode: &AlignmentMode,
    rng: &mut R,
) -> Result<(f64, f64, f64), MonteCarloError> {
    let (h0, p0, alignment) = match mode {
        AlignmentMode::Explicit(book) => {
            let h = linalg::complex_gaussian(l, rng);
            let q = book.quantize(&h)?;
            (h, book.entry(q.index).to_vec(), q.alignment_sqr)
        }
        AlignmentMode::Law(sampler) => {
            let p0 = linalg::isotropic_unit(l, rng);
            let x = sampler.sample(rng);
            // v = √x·p0 + √(1−x)·w with w isotropic in p0's complement
            let mut w = linalg::complex_gaussian(l, rng);
            let c = linalg::inner(&p0, &w);
            linalg::sub_scaled(&mut w, c, &p0);
            let nw = linalg::norm(&w);
            linalg::scale(&mut w, 1.0 / nw);
            let mut v: CVector = p0.iter().map(|z| z * x.sqrt()).collect();
            let res = (1.0 - x).sqrt();
            for (vi, wi) in v.iter_mut().zip(&w) {
                *vi += wi * res;
            }
            // ||h||² is a sum of L unit-mean exponentials, independent of v
            let r_sqr: f64 = (0..l).map(|_| -> f64 { Exp1.sample(rng) }).sum();
            let r = r_sqr.sqrt();
            let h: CVector = v.iter().map(|z| z * r).collect();
            (h, p0, x)
        }
    };

    let mut dirs: Vec<CVector> = Vec::with_capacity(s);
    dirs.push(p0);
    for _ in 1..s {
        dirs.push(linalg::isotropic_unit(l, rng));
    }
    let users: Vec<usize> = (0..s).collect();
    let solution: BeamformingSolution =
        beamform::zero_forcing_beams(&users, &dirs, l).map_err(MonteCarloError::from)?;

    let inv_s = 1.0 / s as f64;
    let mut p_sig = 0.0;
    let mut p_int = 0.0;
    for (j, _) in users.iter().enumerate() {
        let a = linalg::inner(&h0, solution.beam(j)).norm_sqr();
        if j == 0 {
            p_sig = inv_s * a;
        } else {
            p_int += inv_s * a;
        }
    }
    Ok((p_sig, p_int, alignment))
}

/// Measure normalized per-user powers at a fixed rate `rate_bits` for one
/// system size, against the asymptotic limits implied by `sbar` and `rbar`.
pub fn power_convergence_point<R: Rng + ?Sized>(
    l: usize,
    sbar: f64,
    rbar: f64,
    rate_bits: u32,
    n_blocks: usize,
    rng: &mut R,
) -> Result<ConvergencePoint, MonteCarloError> {
    if !(sbar > 0.0 && sbar < 1.0) {
        return Err(MonteCarloError::InvalidConfig(format!(
            "sbar must lie in (0,1), got {sbar}"
        )));
    }
    let s = ((sbar * l as f64).round() as usize).clamp(1, l);
    let mode = if rate_bits <= codebook::MAX_RATE_BITS
        && (1u64 << rate_bits) * l as u64 <= MAX_MATERIALIZED_ENTRIES
    {
        AlignmentMode::Explicit(Box::new(codebook::generate_random_codebook(
            l, rate_bits, rng,
        )?))
    } else {
        AlignmentMode::Law(AlignmentSampler::new(l, rate_bits)?)
    };

    let mut sig = Vec::with_capacity(n_blocks);
    let mut int = Vec::with_capacity(n_blocks);
    let mut align = Vec::with_capacity(n_blocks);
    let mut n_degenerate = 0usize;
    for _ in 0..n_blocks {
        match zf_power_trial(l, s, &mode, rng) {
            Ok((ps, pi, x)) => {
                sig.push(ps);
                int.push(pi);
                align.push(x);
            }
            Err(MonteCarloError::DegenerateBlock { .. }) => n_degenerate += 1,
            Err(other) => return Err(other),
        }
    }
    if sig.is_empty() {
        return Err(MonteCarloError::NoUsableBlocks);
    }
    let d_asym = codebook::asymptotic_distortion(rbar);
    Ok(ConvergencePoint {
        antennas: l,
        s,
        rate_bits,
        n_blocks_used: sig.len(),
        n_degenerate,
        measured_distortion: 1.0 - stats::mean(&align),
        normalized_signal: stats::mean(&sig),
        signal_stderr: stats::standard_error(&sig),
        normalized_interference: stats::mean(&int),
        interference_stderr: stats::standard_error(&int),
        asymptotic_signal: (1.0 / sbar) * (1.0 - d_asym) * (1.0 - sbar),
        asymptotic_interference: d_asym,
    })
}

/// Show the empirical normalized powers approaching the proportional-growth
/// limits as the system grows along `L_list` with `R = r̄L` and `s = s̄L`.
/// Rates above the explicit-codebook guard are rejected.
pub fn convergence_study<R: Rng + ?Sized>(
    sbar: f64,
    rbar: f64,
    l_list: &[usize],
    n_blocks: usize,
    rng: &mut R,
) -> Result<Vec<ConvergencePoint>, MonteCarloError> {
    if l_list.is_empty() {
        return Err(MonteCarloError::InvalidConfig("empty L list".into()));
    }
    let mut points = Vec::with_capacity(l_list.len());
    for &l in l_list {
        let rate_bits = (rbar * l as f64).round() as u32;
        if rate_bits == 0 {
            return Err(MonteCarloError::InvalidConfig(format!(
                "rbar·L rounds to zero bits at L = {l}"
            )));
        }
        if rate_bits > codebook::MAX_RATE_BITS {
            return Err(MonteCarloError::GuardViolation {
                rate_bits,
                max: codebook::MAX_RATE_BITS,
            });
        }
        points.push(power_convergence_point(l, sbar, rbar, rate_bits, n_blocks, rng)?);
    }
    Ok(points)
}
