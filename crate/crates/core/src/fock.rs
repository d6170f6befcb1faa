//! Truncated number-basis diagonalization, used as an independent check of
//! the ladder-operator spectra.
//!
//! Each mode keeps the states `|0⟩ … |n_max⟩`, with
//! `x = (a + a†)/√2` and `p = i(a† − a)/√2`. Matrix elements of `O_i O_j` are
//! computed by acting on basis states without truncating the intermediate
//! state, so every element between retained states is exact. Forms that
//! conserve the total number of quanta are detected and diagonalized shell by
//! shell; shells with at most `n_max` quanta are then complete and their
//! eigenvalues carry no truncation error.

use std::cmp::Ordering;

use nalgebra::linalg::SymmetricEigen;
use nalgebra::{DMatrix, DVector};
use num::complex::Complex64;

use crate::error::{Error, Result};
use crate::phase_space::{LinearForm, PhaseSpaceBasis, QuadraticForm};
use crate::spectral::{Degeneracy, LatticeLevel};
use crate::tolerance::Tolerances;

pub const DEFAULT_DIM_CAP: usize = 20_000;
const MAX_ITER: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockTruncation {
    n_max: usize,
    modes: usize,
    dim: usize,
}

impl FockTruncation {
    pub fn new(modes: usize, n_max: usize) -> Result<Self> {
        Self::with_cap(modes, n_max, DEFAULT_DIM_CAP)
    }

    pub fn with_cap(modes: usize, n_max: usize, cap: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::EmptyBasis);
        }
        let dim = u32::try_from(modes).ok().and_then(|k| (n_max + 1).checked_pow(k)).unwrap_or(usize::MAX);
        if dim > cap {
            return Err(Error::TruncationCap { dim, cap });
        }
        Ok(Self { n_max, modes, dim })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Occupation numbers of basis state `index`; mode 0 is the most significant digit.
    pub fn occupations(&self, mut index: usize) -> Vec<usize> {
        let base = self.n_max + 1;
        let mut occ = vec![0; self.modes];
        for slot in occ.iter_mut().rev() {
            *slot = index % base;
            index /= base;
        }
        occ
    }

    pub fn index(&self, occ: &[usize]) -> Option<usize> {
        let base = self.n_max + 1;
        occ.iter().try_fold(0usize, |acc, &n| (n <= self.n_max).then_some(acc * base + n))
    }

    fn check(&self, basis: PhaseSpaceBasis) -> Result<()> {
        if basis.modes() != self.modes {
            return Err(Error::BasisMismatch(basis.modes(), self.modes));
        }
        Ok(())
    }
}

type Term = (Vec<usize>, Complex64);

fn max_norm(m: &DMatrix<Complex64>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// `O_index |occ⟩` as at most two terms, untruncated.
fn apply_basis_op(basis: PhaseSpaceBasis, index: usize, (occ, amp): &Term) -> Vec<Term> {
    let (mode, momentum) = basis.split(index);
    let n = occ[mode];
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(2);
    // a|n⟩ = √n |n−1⟩
    if n > 0 {
        let mut down = occ.clone();
        down[mode] -= 1;
        let c = if momentum { Complex64::new(0.0, -s) } else { Complex64::new(s, 0.0) };
        out.push((down, amp * c * (n as f64).sqrt()));
    }
    // a†|n⟩ = √(n+1) |n+1⟩
    let mut up = occ.clone();
    up[mode] += 1;
    let c = if momentum { Complex64::new(0.0, s) } else { Complex64::new(s, 0.0) };
    out.push((up, amp * c * ((n + 1) as f64).sqrt()));
    out
}

/// Number-basis matrix of `Σ γ_ij O_i O_j + offset`.
pub fn build_fock_matrix(q: &QuadraticForm, t: &FockTruncation) -> Result<DMatrix<Complex64>> {
    let basis = q.basis();
    t.check(basis)?;
    let n = basis.len();
    let gamma = q.gamma();
    let mut h = DMatrix::<Complex64>::zeros(t.dim, t.dim);
    for col in 0..t.dim {
        let start: Term = (t.occupations(col), Complex64::new(1.0, 0.0));
        h[(col, col)] += q.offset();
        for jdx in 0..n {
            let after_j = apply_basis_op(basis, jdx, &start);
            for idx in 0..n {
                let g = gamma[(idx, jdx)];
                if g == 0.0 {
                    continue;
                }
                for term in &after_j {
                    for (occ, amp) in apply_basis_op(basis, idx, term) {
                        if let Some(row) = t.index(&occ) {
                            h[(row, col)] += amp * g;
                        }
                    }
                }
            }
        }
    }
    let residual = max_norm(&(&h - h.adjoint()));
    if residual > 1e-12 * (1.0 + max_norm(&h)) {
        return Err(Error::NotHermitian(residual));
    }
    Ok(h)
}

/// Number-basis matrix of `Σ c_i O_i`; exact on states below the cutoff.
pub fn linear_fock_matrix(z: &LinearForm, t: &FockTruncation) -> Result<DMatrix<Complex64>> {
    let basis = z.basis();
    t.check(basis)?;
    let mut m = DMatrix::<Complex64>::zeros(t.dim, t.dim);
    for col in 0..t.dim {
        let start: Term = (t.occupations(col), Complex64::new(1.0, 0.0));
        for (idx, c) in z.coeffs().iter().enumerate() {
            if c.norm() == 0.0 {
                continue;
            }
            for (occ, amp) in apply_basis_op(basis, idx, &start) {
                if let Some(row) = t.index(&occ) {
                    m[(row, col)] += amp * c;
                }
            }
        }
    }
    Ok(m)
}

/// Whether every nonzero element joins states with equal total quanta.
pub fn is_shell_preserving(h: &DMatrix<Complex64>, t: &FockTruncation) -> bool {
    let zero = 64.0 * f64::EPSILON * (1.0 + max_norm(h));
    let shells: Vec<usize> = (0..t.dim).map(|i| t.occupations(i).iter().sum()).collect();
    (0..t.dim).all(|c| (0..t.dim).all(|r| shells[r] == shells[c] || h[(r, c)].norm() <= zero))
}

#[derive(Debug, Clone)]
pub struct OracleSpectrum {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Eigenvector columns aligned with `eigenvalues`.
    pub vectors: DMatrix<Complex64>,
    /// Total-quanta shell of each eigenvalue, when the form is shell preserving.
    pub shells: Option<Vec<usize>>,
    /// Largest complete shell (`n_max`) for shell-preserving forms, else 0.
    pub shell_exact_upto: usize,
    /// `(energy, count)` with counts summing to the dimension.
    pub clusters: Vec<(f64, usize)>,
    pub merge_tolerance: f64,
    pub truncation: FockTruncation,
}

impl OracleSpectrum {
    pub fn is_shell_exact(&self) -> bool {
        self.shells.is_some()
    }

    /// Number of eigenvalues within the merge tolerance of `energy`.
    pub fn multiplicity_of(&self, energy: f64) -> usize {
        self.eigenvalues.iter().filter(|e| (*e - energy).abs() <= self.merge_tolerance).count()
    }

    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Eigenvalues from complete shells (all of them when not shell exact).
    pub fn complete_shell_eigenvalues(&self) -> Vec<f64> {
        match &self.shells {
            Some(shells) => self
                .eigenvalues
                .iter()
                .zip(shells)
                .filter(|(_, &s)| s <= self.shell_exact_upto)
                .map(|(&e, _)| e)
                .collect(),
            None => self.eigenvalues.clone(),
        }
    }
}

fn cmp_f64(a: &f64, b: &f64) -> Ordering {
    a.partial_cmp(b).unwrap_or(Ordering::Equal)
}

fn hermitian_eigen(m: DMatrix<Complex64>) -> Result<(DVector<f64>, DMatrix<Complex64>)> {
    let eig = SymmetricEigen::try_new(m, f64::EPSILON, MAX_ITER).ok_or(Error::NoConvergence("Hermitian eigensolve"))?;
    Ok((eig.eigenvalues, eig.eigenvectors))
}

/// Groups sorted values into `(representative, count)` runs within `tol`.
pub fn cluster_sorted(values: &[f64], tol: f64) -> Vec<(f64, usize)> {
    let mut out: Vec<(f64, usize, f64)> = Vec::new();
    for &v in values {
        match out.last_mut() {
            Some((_, count, last)) if v - *last <= tol => {
                *count += 1;
                *last = v;
            }
            _ => out.push((v, 1, v)),
        }
    }
    out.into_iter().map(|(first, count, _)| (first, count)).collect()
}

pub fn oracle_spectrum(q: &QuadraticForm, t: &FockTruncation, tol: &Tolerances) -> Result<OracleSpectrum> {
    let h = build_fock_matrix(q, t)?;
    let dim = t.dim;
    let mut entries: Vec<(f64, Option<usize>, DVector<Complex64>)> = Vec::with_capacity(dim);
    let shell_exact = is_shell_preserving(&h, t);
    if shell_exact {
        let totals: Vec<usize> = (0..dim).map(|i| t.occupations(i).iter().sum()).collect();
        let max_shell = t.modes * t.n_max;
        for s in 0..=max_shell {
            let members: Vec<usize> = (0..dim).filter(|&i| totals[i] == s).collect();
            let block = DMatrix::from_fn(members.len(), members.len(), |r, c| h[(members[r], members[c])]);
            let (vals, vecs) = hermitian_eigen(block)?;
            for (k, &e) in vals.iter().enumerate() {
                let mut full = DVector::zeros(dim);
                for (r, &m) in members.iter().enumerate() {
                    full[m] = vecs[(r, k)];
                }
                entries.push((e, Some(s), full));
            }
        }
    } else {
        let (vals, vecs) = hermitian_eigen(h)?;
        for (k, &e) in vals.iter().enumerate() {
            entries.push((e, None, vecs.column(k).into_owned()));
        }
    }
    entries.sort_by(|a, b| cmp_f64(&a.0, &b.0).then(a.1.cmp(&b.1)));

    let eigenvalues: Vec<f64> = entries.iter().map(|e| e.0).collect();
    let max_abs = eigenvalues.iter().fold(0.0_f64, |m, e| m.max(e.abs()));
    let merge_tolerance = tol.energy_merge * (1.0 + max_abs);
    let clusters = cluster_sorted(&eigenvalues, merge_tolerance);
    let shells = shell_exact.then(|| entries.iter().map(|e| e.1.unwrap_or(0)).collect());
    let columns: Vec<_> = entries.into_iter().map(|e| e.2).collect();
    Ok(OracleSpectrum {
        eigenvalues,
        vectors: DMatrix::from_columns(&columns),
        shells,
        shell_exact_upto: if shell_exact { t.n_max } else { 0 },
        clusters,
        merge_tolerance,
        truncation: *t,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComparisonWindow {
    /// Levels from shells with at most this many quanta.
    CompleteShells(usize),
    /// The lowest `n` oracle eigenvalues.
    Lowest(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelDiff {
    pub oracle: f64,
    pub lattice: f64,
    pub abs_diff: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegeneracyRow {
    pub energy: f64,
    pub oracle_count: usize,
    pub lattice: Degeneracy,
    pub agrees: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub window: ComparisonWindow,
    pub per_level: Vec<LevelDiff>,
    pub max_abs_diff: f64,
    /// Oracle and lattice disagree on how many levels fall in the window.
    pub level_count_mismatch: bool,
    pub degeneracies: Vec<DegeneracyRow>,
    pub degeneracies_agree: bool,
    /// Set when the lattice has infinitely degenerate levels; oracle counts
    /// then grow with the truncation instead of matching.
    pub grows_with_truncation: bool,
}

impl ComparisonReport {
    pub fn max_abs_diff_lowest(&self, n: usize) -> f64 {
        self.per_level.iter().take(n).fold(0.0, |m, d| m.max(d.abs_diff))
    }
}

/// Lines up oracle eigenvalues with lattice energies.
///
/// Shell-exact spectra are compared over complete shells, everything else
/// over the lowest quarter of the oracle spectrum. Infinitely degenerate
/// lattices are compared level by level on distinct energies.
pub fn compare_with_lattice(o: &OracleSpectrum, lattice: &[LatticeLevel]) -> ComparisonReport {
    let window = if o.is_shell_exact() {
        ComparisonWindow::CompleteShells(o.shell_exact_upto)
    } else {
        ComparisonWindow::Lowest((o.eigenvalues.len() / 4).max(1))
    };
    compare_in_window(o, lattice, window)
}

pub fn compare_in_window(o: &OracleSpectrum, lattice: &[LatticeLevel], window: ComparisonWindow) -> ComparisonReport {
    let tol = o.merge_tolerance;
    let infinite = lattice.iter().any(|l| l.degeneracy == Degeneracy::Infinite);
    let mut oracle: Vec<f64> = match window {
        ComparisonWindow::CompleteShells(_) => o.complete_shell_eigenvalues(),
        ComparisonWindow::Lowest(n) => o.eigenvalues.iter().take(n).copied().collect(),
    };
    oracle.sort_by(cmp_f64);
    let in_window = |l: &LatticeLevel| match window {
        ComparisonWindow::CompleteShells(s) => l.quanta.iter().sum::<usize>() <= s,
        ComparisonWindow::Lowest(_) => true,
    };
    let mut lattice_energies: Vec<f64> = lattice.iter().filter(|l| in_window(l)).map(|l| l.energy).collect();
    lattice_energies.sort_by(cmp_f64);

    let oracle_clusters = cluster_sorted(&oracle, tol);
    let (per_level, degeneracies) = if infinite {
        // distinct energies against distinct energies
        let mut distinct = cluster_sorted(&lattice_energies, tol);
        if let ComparisonWindow::Lowest(_) = window {
            distinct.truncate(oracle_clusters.len());
        }
        let per_level: Vec<LevelDiff> = oracle_clusters
            .iter()
            .zip(&distinct)
            .map(|(&(oe, _), &(le, _))| LevelDiff { oracle: oe, lattice: le, abs_diff: (oe - le).abs() })
            .collect();
        let degeneracies = oracle_clusters
            .iter()
            .zip(&distinct)
            .map(|(&(oe, count), _)| DegeneracyRow {
                energy: oe,
                oracle_count: count,
                lattice: Degeneracy::Infinite,
                agrees: true,
            })
            .collect();
        (per_level, degeneracies)
    } else {
        if let ComparisonWindow::Lowest(n) = window {
            lattice_energies.truncate(n);
        }
        let per_level: Vec<LevelDiff> = oracle
            .iter()
            .zip(&lattice_energies)
            .map(|(&oe, &le)| LevelDiff { oracle: oe, lattice: le, abs_diff: (oe - le).abs() })
            .collect();
        let lattice_clusters = cluster_sorted(&lattice_energies, tol);
        let mut degeneracies = Vec::new();
        let mut li = lattice_clusters.iter().peekable();
        for &(oe, count) in &oracle_clusters {
            let matching = li.peek().filter(|(le, _)| (le - oe).abs() <= tol).copied();
            match matching {
                Some(&(_, lc)) => {
                    li.next();
                    degeneracies.push(DegeneracyRow {
                        energy: oe,
                        oracle_count: count,
                        lattice: Degeneracy::Finite(lc),
                        agrees: lc == count,
                    });
                }
                None => degeneracies.push(DegeneracyRow {
                    energy: oe,
                    oracle_count: count,
                    lattice: Degeneracy::Finite(0),
                    agrees: false,
                }),
            }
        }
        (per_level, degeneracies)
    };
    let level_count_mismatch = !infinite && oracle.len() != lattice_energies.len();
    let max_abs_diff = per_level.iter().fold(0.0_f64, |m, d| m.max(d.abs_diff));
    let degeneracies_agree = !level_count_mismatch && degeneracies.iter().all(|d| d.agrees);
    ComparisonReport {
        window,
        per_level,
        max_abs_diff,
        level_count_mismatch,
        degeneracies,
        degeneracies_agree,
        grows_with_truncation: infinite,
    }
}
