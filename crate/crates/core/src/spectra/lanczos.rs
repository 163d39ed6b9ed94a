//! Lanczos iteration with full reorthogonalization for the largest
//! eigenvalue of an operator that is self-adjoint in an `M` inner product.

use crate::assembly::SparseSymmetric;

pub(crate) struct Ritz {
    pub theta: f64,
    /// Residual estimate `β_k |s_k|` at exit.
    pub estimate: f64,
    pub vector: Vec<f64>,
    pub converged: bool,
    pub steps: usize,
}

/// Deterministic start vector with entries in `(-1, 1)`.
pub(crate) fn start_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut state = seed ^ 0x9E37_79B9_7F4A_7C15;
    (0..n)
        .map(|_| {
            // splitmix64
            state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            z ^= z >> 31;
            (z >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        })
        .collect()
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Number of eigenvalues of the tridiagonal `(alpha, beta)` below `x`.
fn sturm_count(alpha: &[f64], beta: &[f64], x: f64) -> usize {
    let tiny = f64::MIN_POSITIVE.sqrt();
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..alpha.len() {
        let b2 = if i == 0 {
            0.0
        } else {
            beta[i - 1] * beta[i - 1]
        };
        q = alpha[i] - x - b2 / q;
        if q.abs() < tiny {
            q = -tiny;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Largest eigenvalue of the tridiagonal and its unit eigenvector.
pub(crate) fn tridiag_top(alpha: &[f64], beta: &[f64]) -> (f64, Vec<f64>) {
    let k = alpha.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..k {
        let r = if i > 0 { beta[i - 1].abs() } else { 0.0 }
            + if i + 1 < k { beta[i].abs() } else { 0.0 };
        lo = lo.min(alpha[i] - r);
        hi = hi.max(alpha[i] + r);
    }
    let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(alpha, beta, mid) == k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let theta = hi;

    // Inverse iteration on θ'I - T, which is positive definite for θ' above
    // the spectrum, so an unpivoted LDLᵀ is stable.
    let shift = theta + 8.0 * f64::EPSILON * scale;
    let mut d = vec![0.0; k];
    let mut l = vec![0.0; k.saturating_sub(1)];
    d[0] = shift - alpha[0];
    for i in 1..k {
        l[i - 1] = -beta[i - 1] / d[i - 1];
        d[i] = shift - alpha[i] - l[i - 1] * (-beta[i - 1]);
        if d[i] <= 0.0 {
            d[i] = f64::EPSILON * scale;
        }
    }
    let mut s = vec![1.0; k];
    for _ in 0..3 {
        for i in 1..k {
            s[i] -= l[i - 1] * s[i - 1];
        }
        for i in 0..k {
            s[i] /= d[i];
        }
        for i in (0..k.saturating_sub(1)).rev() {
            s[i] -= l[i] * s[i + 1];
        }
        let nrm = dot(&s, &s).sqrt();
        s.iter_mut().for_each(|v| *v /= nrm);
    }
    (theta, s)
}

/// Runs Lanczos on `op` from `start` for at most `cap` steps, stopping once
/// the Ritz residual estimate `β_k |s_k|` falls below `tol·θ`. With `m`
/// given, the iteration uses the `M` inner product and the returned vector
/// is `M`-normalized.
pub(crate) fn largest<F>(
    mut op: F,
    m: Option<&SparseSymmetric>,
    start: &[f64],
    tol: f64,
    cap: usize,
) -> Ritz
where
    F: FnMut(&[f64], &mut [f64]),
{
    let n = start.len();
    let cap = cap.clamp(1, n);
    let apply_m = |x: &[f64], out: &mut Vec<f64>| match m {
        Some(mm) => {
            out.resize(n, 0.0);
            mm.mul_vec(x, out);
        }
        None => {
            out.clear();
            out.extend_from_slice(x);
        }
    };

    let mut q = start.to_vec();
    let mut mq = Vec::new();
    apply_m(&q, &mut mq);
    let nrm = dot(&q, &mq).sqrt();
    q.iter_mut().for_each(|v| *v /= nrm);
    mq.iter_mut().for_each(|v| *v /= nrm);

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(cap);
    let mut mbasis: Vec<Vec<f64>> = Vec::with_capacity(cap);
    let mut alpha = Vec::with_capacity(cap);
    let mut beta: Vec<f64> = Vec::with_capacity(cap);
    let mut w = vec![0.0; n];
    let mut mw = Vec::new();
    let mut best = (f64::NAN, vec![1.0]);
    let mut converged = false;
    let mut estimate = f64::INFINITY;

    for step in 0..cap {
        op(&q, &mut w);
        let a = dot(&w, &mq);
        basis.push(std::mem::take(&mut q));
        mbasis.push(std::mem::take(&mut mq));
        alpha.push(a);
        // Two passes of classical Gram-Schmidt against the whole basis.
        for _ in 0..2 {
            for (qj, mqj) in basis.iter().zip(&mbasis) {
                let c = dot(&w, mqj);
                axpy(-c, qj, &mut w);
            }
        }
        apply_m(&w, &mut mw);
        let b = dot(&w, &mw).max(0.0).sqrt();

        best = tridiag_top(&alpha, &beta);
        let (theta, ref s) = best;
        estimate = b * s[step].abs();
        if estimate <= tol * theta.abs() || b <= f64::EPSILON * theta.abs() {
            converged = true;
            break;
        }
        if step + 1 == cap {
            break;
        }
        beta.push(b);
        q = w.iter().map(|v| v / b).collect();
        mq = mw.iter().map(|v| v / b).collect();
    }

    let (theta, s) = best;
    let mut y = vec![0.0; n];
    for (sj, qj) in s.iter().zip(&basis) {
        axpy(*sj, qj, &mut y);
    }
    Ritz {
        theta,
        estimate,
        vector: y,
        converged,
        steps: alpha.len(),
    }
}
