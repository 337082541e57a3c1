//! Complex polynomial roots through companion-matrix eigenvalues.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// `Σ coeffs[i] zⁱ` by Horner's rule, with the derivative.
pub fn horner(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// All roots of `Σ coeffs[i] zⁱ` (ascending powers), each polished by one
/// Newton step. Leading and trailing zero coefficients are handled: trailing
/// zeros become exact roots at the origin.
pub fn roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Vec::new();
    }
    let negligible = |c: &Complex64| c.norm() <= 1e-14 * scale;
    let hi = coeffs.iter().rposition(|c| !negligible(c)).unwrap();
    let lo = coeffs.iter().position(|c| !negligible(c)).unwrap();
    let mut out = vec![Complex64::new(0.0, 0.0); lo];
    let trimmed = &coeffs[lo..=hi];
    let n = trimmed.len() - 1;
    if n == 0 {
        return out;
    }
    let lead = trimmed[n];
    let mut companion = DMatrix::<Complex64>::zeros(n, n);
    for i in 1..n {
        companion[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..n {
        companion[(i, n - 1)] = -trimmed[i] / lead;
    }
    let eig = companion_eigenvalues(&companion, trimmed);
    for z in eig.iter() {
        let (p, dp) = horner(trimmed, *z);
        let polished = if dp.norm() > 0.0 { z - p / dp } else { *z };
        // keep the polish only when it does not make things worse
        let keep = if horner(trimmed, polished).0.norm() <= p.norm() { polished } else { *z };
        out.push(keep);
    }
    out
}

/// Eigenvalues of a companion matrix. Rotationally symmetric root sets give
/// cyclic companions on which unshifted QR stalls, so a failed attempt is
/// retried on `C + σI` with σ off every symmetry axis.
fn companion_eigenvalues(companion: &DMatrix<Complex64>, coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = companion.nrows();
    let lead = coeffs[n].norm();
    let bound = 1.0 + coeffs[..n].iter().map(|c| c.norm() / lead).fold(0.0, f64::max);
    let shifts = [0.0, 0.37, 1.13, 2.9];
    for s in shifts {
        let sigma = Complex64::new(0.61, 0.29) * (s * bound);
        let m = companion + DMatrix::<Complex64>::identity(n, n) * sigma;
        if let Some(schur) = nalgebra::Schur::try_new(m, 1e-15, 200 * n.max(4)) {
            if let Some(eig) = schur.eigenvalues() {
                return eig.iter().map(|z| z - sigma).collect();
            }
        }
    }
    panic!("companion eigenvalue iteration failed for every shift");
}

/// Groups roots closer than `tol` (single linkage), returning the cluster
/// mean and its size.
pub fn cluster_roots(roots: &[Complex64], tol: f64) -> Vec<(Complex64, usize)> {
    let mut uf = crate::unionfind::UnionFind::new(roots.len());
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            if (roots[i] - roots[j]).norm() <= tol {
                uf.union(i, j);
            }
        }
    }
    let (labels, n) = uf.labels(0..roots.len());
    let mut sums = vec![(Complex64::new(0.0, 0.0), 0usize); n];
    for (i, l) in labels {
        sums[l].0 += roots[i];
        sums[l].1 += 1;
    }
    sums.into_iter().map(|(s, k)| (s / k as f64, k)).collect()
}
