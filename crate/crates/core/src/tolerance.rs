/// Numerical thresholds, all relative to the scale of the matrix they apply to.
///
/// `scaled` multiplies every threshold by a common factor, which is how the
/// CLI honors `QUADHAM_TOL_SCALE`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Eigenvalue reality and ±λ pairing, times `1 + ‖R‖`.
    pub pairing: f64,
    /// Zero-frequency threshold, times `1 + ‖R‖`.
    pub zero_frequency: f64,
    /// Singular values below `rank * σ_max` count as zero.
    pub rank: f64,
    /// Definiteness of the symmetric coefficient matrix, times `1 + ‖γ‖`.
    pub definiteness: f64,
    /// Ladder residual, times `‖H‖ ‖c‖`.
    pub ladder_residual: f64,
    /// Energy merge tolerance for lattices and oracle clusters, times `1 + max|E|`.
    pub energy_merge: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            pairing: 1e-9,
            zero_frequency: 1e-10,
            rank: 1e-10,
            definiteness: 1e-10,
            ladder_residual: 1e-9,
            energy_merge: 1e-8,
        }
    }
}

impl Tolerances {
    pub fn scaled(self, factor: f64) -> Self {
        Self {
            pairing: self.pairing * factor,
            zero_frequency: self.zero_frequency * factor,
            rank: self.rank * factor,
            definiteness: self.definiteness * factor,
            ladder_residual: self.ladder_residual * factor,
            energy_merge: self.energy_merge * factor,
        }
    }
}
