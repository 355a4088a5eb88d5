//! Small complex linear-algebra helpers shared by the channel and beamforming
//! modules. Everything works on plain `Vec<Complex64>` columns; the dimensions
//! involved (tens to a few hundred) do not justify a matrix library.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

/// A complex column vector.
pub type CVector = Vec<Complex64>;

/// Hermitian inner product `a† b`.
pub(crate) fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = Complex64::new(0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        acc += x.conj() * y;
    }
    acc
}

pub(crate) fn norm_sqr(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

pub(crate) fn norm(a: &[Complex64]) -> f64 {
    norm_sqr(a).sqrt()
}

/// `y -= alpha * x`
pub(crate) fn sub_scaled(y: &mut [Complex64], alpha: Complex64, x: &[Complex64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi -= alpha * xi;
    }
}

pub(crate) fn scale(a: &mut [Complex64], factor: f64) {
    for z in a.iter_mut() {
        *z *= factor;
    }
}

/// Vector of i.i.d. CN(0,1) entries (real and imaginary parts N(0, 1/2)).
pub(crate) fn complex_gaussian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVector {
    const SCALE: f64 = std::f64::consts::FRAC_1_SQRT_2;
    (0..dim)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re * SCALE, im * SCALE)
        })
        .collect()
}

/// Uniformly random unit vector (normalized complex Gaussian).
pub(crate) fn isotropic_unit<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVector {
    let mut v = vec![Complex64::new(0.0, 0.0); dim];
    fill_isotropic_unit(&mut v, rng);
    v
}

/// Fill `out` with a uniformly random unit vector, allocation-free.
pub(crate) fn fill_isotropic_unit<R: Rng + ?Sized>(out: &mut [Complex64], rng: &mut R) {
    const SCALE: f64 = std::f64::consts::FRAC_1_SQRT_2;
    loop {
        let mut nrm_sqr = 0.0;
        for z in out.iter_mut() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *z = Complex64::new(re * SCALE, im * SCALE);
            nrm_sqr += z.norm_sqr();
        }
        if nrm_sqr > 1e-300 {
            scale(out, 1.0 / nrm_sqr.sqrt());
            return;
        }
    }
}

/// Remove from `v` its projection onto each (orthonormal) `basis` vector.
pub(crate) fn project_off(v: &mut [Complex64], basis: &[CVector]) {
    for b in basis {
        let c = inner(b, v);
        sub_scaled(v, c, b);
    }
}

/// Orthonormal basis of `span(vectors)` by column-pivoted modified
/// Gram–Schmidt with one re-orthogonalization pass. Columns whose residual
/// drops below `rel_tol` times the largest input norm are treated as linearly
/// dependent and dropped, so the returned basis length is the numerical rank.
pub(crate) fn orthonormal_span(vectors: &[CVector], rel_tol: f64) -> Vec<CVector> {
    let mut work: Vec<CVector> = vectors.to_vec();
    let max_norm = work.iter().map(|v| norm(v)).fold(0.0f64, f64::max);
    if max_norm == 0.0 {
        return Vec::new();
    }
    let threshold = rel_tol * max_norm;

    let mut basis: Vec<CVector> = Vec::new();
    while !work.is_empty() {
        // pivot: largest remaining residual
        let (pivot, best) = work
            .iter()
            .enumerate()
            .map(|(i, v)| (i, norm(v)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty");
        if best < threshold {
            break;
        }
        let mut v = work.swap_remove(pivot);
        project_off(&mut v, &basis); // re-orthogonalize the pivot column
        let n = norm(&v);
        if n < threshold {
            continue;
        }
        scale(&mut v, 1.0 / n);
        for w in work.iter_mut() {
            let c = inner(&v, w);
            sub_scaled(w, c, &v);
        }
        basis.push(v);
    }
    basis
}

/// Max deviation of the Gram matrix of `vectors` from the identity.
pub(crate) fn gram_residual(vectors: &[CVector]) -> f64 {
    let mut worst = 0.0f64;
    for (i, a) in vectors.iter().enumerate() {
        for (j, b) in vectors.iter().enumerate() {
            let g = inner(a, b);
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g - target).norm());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn span_of_duplicates_has_rank_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v = isotropic_unit(4, &mut rng);
        let basis = orthonormal_span(&[v.clone(), v.clone(), v], 1e-10);
        assert_eq!(basis.len(), 1);
    }

    #[test]
    fn span_is_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let cols: Vec<CVector> = (0..6).map(|_| complex_gaussian(8, &mut rng)).collect();
        let basis = orthonormal_span(&cols, 1e-10);
        assert_eq!(basis.len(), 6);
        assert!(gram_residual(&basis) < 1e-12);
    }

    #[test]
    fn project_off_annihilates_span() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cols: Vec<CVector> = (0..3).map(|_| complex_gaussian(5, &mut rng)).collect();
        let basis = orthonormal_span(&cols, 1e-10);
        let mut v = cols[1].clone();
        project_off(&mut v, &basis);
        assert!(norm(&v) < 1e-12);
    }
}
