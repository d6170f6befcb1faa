//! Eigen-decomposition of adjoint matrices, ladder-operator extraction and
//! spectrum classification.
//!
//! The eigensolve runs on the real matrix `R = (γ + γᵀ) J`; the adjoint
//! matrix is `𝐇 = i R`, so its eigenvalues are `i` times those of `R`.
//! Eigenvectors and geometric multiplicities come from singular value
//! decompositions of `𝐇 − λ I` at each distinct eigenvalue.

use std::cmp::Ordering;
use std::fmt;

use nalgebra::linalg::{Schur, SymmetricEigen, SVD};
use nalgebra::{DMatrix, DVector};
use num::complex::Complex64;

use crate::error::{Error, Result};
use crate::phase_space::{
    adjoint_representation, linear_commutator, AdjointMatrix, LinearForm, PhaseSpaceBasis, QuadraticForm,
};
use crate::tolerance::Tolerances;

const MAX_ITER: usize = 10_000;
/// Krein norms below this (for unit-norm eigenvectors) mark an ill-posed pair.
const KREIN_TOL: f64 = 1e-8;

/// One distinct eigenvalue of an adjoint matrix.
#[derive(Debug, Clone)]
pub struct EigenCluster {
    pub value: Complex64,
    pub algebraic: usize,
    pub geometric: usize,
    /// Orthonormal basis of the eigenspace, `geometric` vectors.
    pub vectors: Vec<DVector<Complex64>>,
}

impl EigenCluster {
    pub fn is_defective(&self) -> bool {
        self.geometric < self.algebraic
    }
}

#[derive(Debug, Clone)]
pub struct EigenData {
    basis: PhaseSpaceBasis,
    eigenvalues: Vec<Complex64>,
    clusters: Vec<EigenCluster>,
    /// Frobenius norm of `R`.
    scale: f64,
}

impl EigenData {
    /// All `2K` eigenvalues of `𝐇`, sorted by real then imaginary part.
    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    pub fn clusters(&self) -> &[EigenCluster] {
        &self.clusters
    }

    /// Eigenvector columns, cluster by cluster.
    pub fn eigenvectors(&self) -> DMatrix<Complex64> {
        let cols: Vec<_> = self.clusters.iter().flat_map(|c| c.vectors.iter().cloned()).collect();
        if cols.is_empty() {
            return DMatrix::zeros(self.basis.len(), 0);
        }
        DMatrix::from_columns(&cols)
    }

    pub fn defective(&self) -> bool {
        self.clusters.iter().any(EigenCluster::is_defective)
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn basis(&self) -> PhaseSpaceBasis {
        self.basis
    }

    /// Geometric multiplicity of the cluster nearest `value`.
    pub fn geometric_multiplicity(&self, value: Complex64) -> Option<usize> {
        self.clusters
            .iter()
            .min_by(|a, b| cmp_f64((a.value - value).norm(), (b.value - value).norm()))
            .map(|c| c.geometric)
    }

    pub fn max_imaginary(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |m, l| m.max(l.im.abs()))
    }
}

fn cmp_f64(a: f64, b: f64) -> Ordering {
    a.partial_cmp(&b).unwrap_or(Ordering::Equal)
}

fn cmp_complex(a: &Complex64, b: &Complex64) -> Ordering {
    cmp_f64(a.re, b.re).then(cmp_f64(a.im, b.im))
}

pub fn eigen_decompose(m: &AdjointMatrix, tol: &Tolerances) -> Result<EigenData> {
    let r = m.generator();
    let n = r.nrows();
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(f64::NAN));
    }
    let scale = r.norm();
    let schur =
        Schur::try_new(r.clone(), f64::EPSILON, MAX_ITER).ok_or(Error::NoConvergence("real Schur decomposition"))?;
    let mut eigenvalues: Vec<Complex64> = schur.complex_eigenvalues().iter().map(|mu| Complex64::i() * mu).collect();
    eigenvalues.sort_by(cmp_complex);

    let merge = tol.pairing * (1.0 + scale);
    let mut groups: Vec<Vec<Complex64>> = Vec::new();
    for &lambda in &eigenvalues {
        let hit = groups.iter_mut().find(|g| (mean(g) - lambda).norm() <= merge);
        match hit {
            Some(g) => g.push(lambda),
            None => groups.push(vec![lambda]),
        }
    }

    let h = m.entries();
    let identity = DMatrix::<Complex64>::identity(n, n);
    let mut clusters = Vec::with_capacity(groups.len());
    for g in groups {
        let value = mean(&g);
        let shifted = &h - &identity * value;
        let svd = SVD::try_new(shifted, false, true, f64::EPSILON, MAX_ITER)
            .ok_or(Error::NoConvergence("singular value decomposition"))?;
        let v_t = svd.v_t.as_ref().expect("requested right singular vectors");
        let sigma_max = svd.singular_values.max();
        let threshold = tol.rank * sigma_max;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| cmp_f64(svd.singular_values[a], svd.singular_values[b]));
        let null = order.iter().filter(|&&i| svd.singular_values[i] <= threshold).count();
        let geometric = null.min(g.len());
        let vectors = order[..geometric].iter().map(|&i| v_t.row(i).adjoint().into_owned()).collect();
        clusters.push(EigenCluster { value, algebraic: g.len(), geometric, vectors });
    }
    clusters.sort_by(|a, b| cmp_complex(&a.value, &b.value));
    Ok(EigenData { basis: m.basis(), eigenvalues, clusters, scale })
}

fn mean(values: &[Complex64]) -> Complex64 {
    values.iter().sum::<Complex64>() / values.len() as f64
}

/// A creation/annihilation pair `(Z, Z†)` attached to one natural frequency.
///
/// `raising` is the member with `[lowering, raising] = 1`, i.e. the creation
/// operator of a Gaussian vacuum annihilated by `lowering`. Its eigenvalue,
/// `shift`, is `+lambda_plus` when the pair has positive Krein signature and
/// `−lambda_plus` otherwise.
#[derive(Debug, Clone)]
pub struct FrequencyPair {
    pub lambda_plus: f64,
    pub shift: f64,
    pub raising: LinearForm,
    pub lowering: LinearForm,
    pub norm_constant: f64,
}

/// Rotates `v` so its first significant coefficient is real and positive.
fn fix_phase(v: &mut DVector<Complex64>) {
    let max = v.iter().fold(0.0_f64, |m, c| m.max(c.norm()));
    if let Some(lead) = v.iter().find(|c| c.norm() > 1e-9 * max).copied() {
        let phase = lead.conj() / lead.norm();
        *v *= phase;
    }
}

/// Krein Gram matrix `G_ab = [Z_a†, Z_b] = i c_a^H J c_b`.
fn krein_gram(vectors: &[DVector<Complex64>], j: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let c = DMatrix::from_columns(vectors);
    (c.adjoint() * j * &c) * Complex64::i()
}

pub fn pair_frequencies(e: &EigenData, basis: PhaseSpaceBasis, tol: &Tolerances) -> Result<Vec<FrequencyPair>> {
    if e.basis != basis {
        return Err(Error::BasisMismatch(e.basis.modes(), basis.modes()));
    }
    let reality = tol.pairing * (1.0 + e.scale);
    let zero = tol.zero_frequency * (1.0 + e.scale);
    if let Some(l) = e.eigenvalues.iter().find(|l| l.im.abs() > reality) {
        return Err(Error::NonRealFrequency(l.im));
    }
    let j = basis.symplectic().map(|v| Complex64::new(v, 0.0));
    let mut pairs = Vec::new();
    for cluster in &e.clusters {
        let lambda = cluster.value.re;
        if cluster.is_defective() {
            return Err(Error::IllPosedPair(lambda));
        }
        if lambda < -zero {
            // handled through its positive partner
            continue;
        }
        let is_zero = lambda.abs() <= zero;
        if !is_zero {
            let partner =
                e.clusters.iter().find(|c| (c.value.re + lambda).abs() <= reality && c.algebraic == cluster.algebraic);
            if partner.is_none() {
                return Err(Error::Unpaired(lambda));
            }
        } else if cluster.algebraic % 2 != 0 {
            return Err(Error::Unpaired(lambda));
        }

        let gram = krein_gram(&cluster.vectors, &j);
        let eig =
            SymmetricEigen::try_new(gram, f64::EPSILON, MAX_ITER).ok_or(Error::NoConvergence("Krein Gram matrix"))?;
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| cmp_f64(eig.eigenvalues[b], eig.eigenvalues[a]));
        let c = DMatrix::from_columns(&cluster.vectors);
        let mut found = 0;
        for idx in order {
            let g = eig.eigenvalues[idx];
            if g.abs() <= KREIN_TOL {
                return Err(Error::IllPosedPair(lambda));
            }
            if is_zero && g < 0.0 {
                continue;
            }
            let mut v = (&c * eig.eigenvectors.column(idx)) * Complex64::new(1.0 / g.abs().sqrt(), 0.0);
            let (shift, lambda_plus) = if is_zero { (0.0, 0.0) } else { (g.signum() * lambda, lambda) };
            if g < 0.0 {
                v = v.map(|z| z.conj());
            }
            fix_phase(&mut v);
            let raising = LinearForm::new(basis, v)?;
            let lowering = raising.adjoint();
            let norm_constant = linear_commutator(&lowering, &raising)?.re;
            pairs.push(FrequencyPair { lambda_plus, shift, raising, lowering, norm_constant });
            found += 1;
        }
        if is_zero && 2 * found != cluster.vectors.len() {
            return Err(Error::IllPosedPair(0.0));
        }
    }
    pairs.sort_by(|a, b| cmp_f64(b.lambda_plus, a.lambda_plus));
    Ok(pairs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Classification {
    BoundedBelowDiscrete,
    UnboundedLattice,
    CriticalInfiniteMultiplicity,
    DefectiveExceptional,
    NonRealFrequencies,
}

impl Classification {
    pub fn name(self) -> &'static str {
        match self {
            Classification::BoundedBelowDiscrete => "BoundedBelowDiscrete",
            Classification::UnboundedLattice => "UnboundedLattice",
            Classification::CriticalInfiniteMultiplicity => "CriticalInfiniteMultiplicity",
            Classification::DefectiveExceptional => "DefectiveExceptional",
            Classification::NonRealFrequencies => "NonRealFrequencies",
        }
    }

    pub fn admits_lattice(self) -> bool {
        !matches!(self, Classification::DefectiveExceptional | Classification::NonRealFrequencies)
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone)]
pub struct SpectrumReport {
    pub classification: Classification,
    pub pairs: Vec<FrequencyPair>,
    /// Lowest eigenvalue, present only when the spectrum is bounded below.
    pub ground_energy: Option<f64>,
    /// Energy of the Gaussian vacuum annihilated by every lowering operator.
    pub vacuum_energy: Option<f64>,
    /// Signed energy increments, one per pair, in pair order.
    pub lattice_generators: Vec<f64>,
    pub multiplicity_note: String,
    pub eigen: EigenData,
    /// Smallest eigenvalue of the symmetric coefficient matrix.
    pub min_gamma_eigenvalue: f64,
    pub zero_threshold: f64,
}

/// Smallest eigenvalue of the (symmetric) coefficient matrix of `q`.
pub fn min_gamma_eigenvalue(q: &QuadraticForm) -> Result<f64> {
    let eig = SymmetricEigen::try_new(q.gamma().clone(), f64::EPSILON, MAX_ITER)
        .ok_or(Error::NoConvergence("symmetric eigensolve of gamma"))?;
    Ok(eig.eigenvalues.min())
}

pub fn classify_spectrum(q: &QuadraticForm, tol: &Tolerances) -> Result<SpectrumReport> {
    let adjoint = adjoint_representation(q);
    let eigen = eigen_decompose(&adjoint, tol)?;
    let min_gamma = min_gamma_eigenvalue(q)?;
    let reality = tol.pairing * (1.0 + eigen.scale);
    let zero_threshold = tol.zero_frequency * (1.0 + eigen.scale);
    let mut report = SpectrumReport {
        classification: Classification::NonRealFrequencies,
        pairs: Vec::new(),
        ground_energy: None,
        vacuum_energy: None,
        lattice_generators: Vec::new(),
        multiplicity_note: String::new(),
        eigen,
        min_gamma_eigenvalue: min_gamma,
        zero_threshold,
    };
    if report.eigen.max_imaginary() > reality {
        report.multiplicity_note = "complex natural frequencies; no ladder lattice".into();
        return Ok(report);
    }
    if report.eigen.defective() {
        report.classification = Classification::DefectiveExceptional;
        report.multiplicity_note = "defective adjoint matrix; ladder operators are missing".into();
        return Ok(report);
    }

    let pairs = pair_frequencies(&report.eigen, q.basis(), tol)?;
    let definiteness = tol.definiteness * (1.0 + q.gamma().norm());
    let has_zero = pairs.iter().any(|p| p.lambda_plus <= zero_threshold);
    let all_raise = pairs.iter().all(|p| p.shift > 0.0);
    let classification = if min_gamma > definiteness || (min_gamma >= -definiteness && !has_zero && all_raise) {
        Classification::BoundedBelowDiscrete
    } else if min_gamma >= -definiteness && has_zero {
        Classification::CriticalInfiniteMultiplicity
    } else {
        Classification::UnboundedLattice
    };
    if classification == Classification::BoundedBelowDiscrete && !all_raise {
        // a positive definite form always has positive Krein signatures
        return Err(Error::IllPosedPair(pairs.iter().map(|p| p.lambda_plus).fold(0.0, f64::max)));
    }

    let half_sum: f64 = 0.5 * pairs.iter().map(|p| p.shift).sum::<f64>();
    let vacuum = q.offset() + half_sum;
    report.classification = classification;
    report.lattice_generators = pairs.iter().map(|p| p.shift).collect();
    report.vacuum_energy = Some(vacuum);
    report.ground_energy = match classification {
        Classification::BoundedBelowDiscrete | Classification::CriticalInfiniteMultiplicity => Some(vacuum),
        _ => None,
    };
    report.multiplicity_note = match classification {
        Classification::BoundedBelowDiscrete => "discrete spectrum with finite multiplicities".into(),
        Classification::CriticalInfiniteMultiplicity => {
            let zeros = pairs.iter().filter(|p| p.lambda_plus <= zero_threshold).count();
            format!("{zeros} zero-frequency ladder pair(s): every level has infinite multiplicity")
        }
        _ => "ladder lattice unbounded below; vacuum energy is not a ground energy".into(),
    };
    report.pairs = pairs;
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Degeneracy {
    Finite(usize),
    Infinite,
}

impl fmt::Display for Degeneracy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Degeneracy::Finite(n) => write!(f, "{n}"),
            Degeneracy::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeLevel {
    pub energy: f64,
    pub quanta: Vec<usize>,
    pub degeneracy: Degeneracy,
}

/// All multi-indices of length `len` with total at most `max`, in lexicographic order.
pub fn multi_indices(len: usize, max: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, len: usize, budget: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == len {
            out.push(prefix.clone());
            return;
        }
        for n in 0..=budget {
            prefix.push(n);
            rec(prefix, len, budget - n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(len), len, max, &mut out);
    out
}

/// Enumerates `E = E_vac + Σ n_i g_i` for `Σ n_i ≤ max_quanta`.
///
/// Bounded spectra are sorted by energy, unbounded ones by total quanta then
/// energy; ties go to the lexicographically smaller multi-index. A critical
/// spectrum yields one row per distinct energy, flagged as infinitely
/// degenerate.
pub fn spectrum_lattice(r: &SpectrumReport, max_quanta: usize, tol: &Tolerances) -> Result<Vec<LatticeLevel>> {
    if !r.classification.admits_lattice() {
        return Err(Error::LatticeUnavailable(r.classification.name()));
    }
    let base = r.vacuum_energy.ok_or(Error::LatticeUnavailable(r.classification.name()))?;
    let gens = &r.lattice_generators;
    let mut rows: Vec<(f64, Vec<usize>)> = multi_indices(gens.len(), max_quanta)
        .into_iter()
        .map(|q| (base + q.iter().zip(gens).map(|(&n, g)| n as f64 * g).sum::<f64>(), q))
        .collect();
    let max_abs = rows.iter().fold(0.0_f64, |m, (e, _)| m.max(e.abs()));
    let merge = tol.energy_merge * (1.0 + max_abs);

    // cluster ids by energy
    let mut by_energy: Vec<usize> = (0..rows.len()).collect();
    by_energy.sort_by(|&a, &b| cmp_f64(rows[a].0, rows[b].0).then_with(|| rows[a].1.cmp(&rows[b].1)));
    let mut cluster_of = vec![0usize; rows.len()];
    let mut sizes = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for &i in &by_energy {
        if sizes.is_empty() || rows[i].0 - last > merge {
            sizes.push(0usize);
        }
        last = rows[i].0;
        cluster_of[i] = sizes.len() - 1;
        *sizes.last_mut().unwrap() += 1;
    }

    if r.classification == Classification::CriticalInfiniteMultiplicity {
        let mut seen = vec![false; sizes.len()];
        let mut out = Vec::new();
        for &i in &by_energy {
            let c = cluster_of[i];
            if !seen[c] {
                seen[c] = true;
                out.push(LatticeLevel {
                    energy: rows[i].0,
                    quanta: rows[i].1.clone(),
                    degeneracy: Degeneracy::Infinite,
                });
            }
        }
        return Ok(out);
    }

    let mut order = by_energy;
    if r.classification == Classification::UnboundedLattice {
        let total = |q: &Vec<usize>| q.iter().sum::<usize>();
        order.sort_by(|&a, &b| {
            total(&rows[a].1)
                .cmp(&total(&rows[b].1))
                .then(cmp_f64(rows[a].0, rows[b].0))
                .then_with(|| rows[a].1.cmp(&rows[b].1))
        });
    }
    Ok(order
        .into_iter()
        .map(|i| {
            let (energy, quanta) = std::mem::take(&mut rows[i]);
            LatticeLevel { energy, quanta, degeneracy: Degeneracy::Finite(sizes[cluster_of[i]]) }
        })
        .collect())
}

/// Returns `λ` when the coefficient vector of `z` is an eigenvector of `𝐇`.
pub fn ladder_check(q: &QuadraticForm, z: &LinearForm, tol: &Tolerances) -> Result<f64> {
    if z.basis() != q.basis() {
        return Err(Error::BasisMismatch(q.basis().modes(), z.basis().modes()));
    }
    if z.is_zero() {
        return Err(Error::ZeroVector);
    }
    let h = adjoint_representation(q).entries();
    let c = z.coeffs();
    let hc = &h * c;
    let lambda = c.dotc(&hc) / c.norm_squared();
    let residual = (&hc - c * lambda).norm();
    let tolerance = tol.ladder_residual * h.norm() * c.norm();
    if residual > tolerance {
        return Err(Error::NotEigenoperator { residual, tolerance });
    }
    if lambda.im.abs() * c.norm() > tolerance {
        return Err(Error::NonRealFrequency(lambda.im));
    }
    Ok(lambda.re)
}
