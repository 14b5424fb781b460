//! Damped least-squares pseudo-inverse.

use nalgebra::DMatrix;

/// Default damping applied to every singular value.
pub const BASE_DAMPING: f64 = 1e-6;
/// Singular values below this trigger the ramped damping.
pub const SINGULAR_THRESHOLD: f64 = 1e-4;

/// Pseudo-inverse together with conditioning diagnostics.
#[derive(Debug, Clone)]
pub struct PseudoInverse {
    pub matrix: DMatrix<f64>,
    pub sigma_min: f64,
    pub sigma_max: f64,
    /// True when the smallest singular value fell below [`SINGULAR_THRESHOLD`].
    pub ill_conditioned: bool,
}

/// `A† = V diag(σ/(σ²+μ²)) Uᵀ`, where `μ` is [`BASE_DAMPING`] while the matrix is
/// well conditioned and grows smoothly to `SINGULAR_THRESHOLD` as `σ_min → 0`.
///
/// `sigma_min` is the smallest of the `min(rows, cols)` singular values, so it
/// measures rank deficiency along the short side.
pub fn damped_pinv(a: &DMatrix<f64>) -> PseudoInverse {
    let (r, c) = a.shape();
    if r == 0 || c == 0 {
        return PseudoInverse {
            matrix: DMatrix::zeros(c, r),
            sigma_min: 0.0,
            sigma_max: 0.0,
            ill_conditioned: true,
        };
    }
    let svd = a.clone().svd(true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => unreachable!("SVD requested with both factors"),
    };
    let s = svd.singular_values;
    let sigma_min = s.min();
    let sigma_max = s.max();
    let ill_conditioned = sigma_min < SINGULAR_THRESHOLD;
    let mu = if ill_conditioned {
        let ratio = sigma_min / SINGULAR_THRESHOLD;
        BASE_DAMPING + (SINGULAR_THRESHOLD - BASE_DAMPING) * (1.0 - ratio * ratio)
    } else {
        BASE_DAMPING
    };
    let mu2 = mu * mu;
    let mut inv_s = DMatrix::zeros(s.len(), s.len());
    for (i, &si) in s.iter().enumerate() {
        inv_s[(i, i)] = si / (si * si + mu2);
    }
    PseudoInverse {
        matrix: v_t.transpose() * inv_s * u.transpose(),
        sigma_min,
        sigma_max,
        ill_conditioned,
    }
}

/// Numerical rank with a relative tolerance on the singular values.
pub fn rank(a: &DMatrix<f64>, rel_tol: f64) -> usize {
    if a.is_empty() {
        return 0;
    }
    let s = a.clone().singular_values();
    let top = s.max();
    s.iter().filter(|&&x| x > rel_tol * top).count()
}
