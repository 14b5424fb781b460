use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

/// Gaussian radial-basis network `Δ̂ = Wᵀ φ(x)`.
///
/// Inputs are clipped to `[-clip, clip]` before evaluating the basis, and the
/// weights are kept inside the Frobenius ball of radius `bound`.
#[derive(Debug, Clone, PartialEq)]
pub struct RbfNet {
    /// One center per column, `input_dim × m`.
    pub centers: DMatrix<f64>,
    pub sigma: f64,
    /// `m × output_dim`.
    pub weights: DMatrix<f64>,
    pub bound: f64,
    pub clip: f64,
}

impl RbfNet {
    /// `m` centers evenly spaced along the diagonal of `[-1, 1]^input_dim`.
    pub fn diagonal_grid(
        input_dim: usize,
        output_dim: usize,
        m: usize,
        sigma: f64,
        bound: f64,
    ) -> Self {
        let mut centers = DMatrix::zeros(input_dim, m);
        for j in 0..m {
            let t = if m == 1 {
                0.0
            } else {
                -1.0 + 2.0 * j as f64 / (m - 1) as f64
            };
            centers.column_mut(j).fill(t);
        }
        Self {
            centers,
            sigma,
            weights: DMatrix::zeros(m, output_dim),
            bound,
            clip: 1.0,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.centers.nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.weights.ncols()
    }

    /// Basis vector `φ_j = exp(−‖x − c_j‖² / 2σ²)`.
    pub fn basis(&self, input: &DVector<f64>) -> DVector<f64> {
        let x: Vec<f64> = input
            .iter()
            .map(|v| v.clamp(-self.clip, self.clip))
            .collect();
        let inv = 1.0 / (2.0 * self.sigma * self.sigma);
        DVector::from_iterator(
            self.centers.ncols(),
            self.centers.column_iter().map(|c| {
                let d2: f64 = c.iter().zip(&x).map(|(ci, xi)| (xi - ci) * (xi - ci)).sum();
                libm::exp(-d2 * inv)
            }),
        )
    }

    pub fn eval(&self, input: &DVector<f64>) -> DVector<f64> {
        self.weights.transpose() * self.basis(input)
    }

    /// Euler step `W ← W + dt·Ẇ`, then projection onto the weight ball.
    pub fn integrate(&mut self, w_dot: &DMatrix<f64>, dt: f64) {
        self.weights += w_dot * dt;
        let n = self.weights.norm();
        if n > self.bound {
            self.weights *= self.bound / n;
        }
    }

    pub fn weight_norm(&self) -> f64 {
        self.weights.norm()
    }
}
