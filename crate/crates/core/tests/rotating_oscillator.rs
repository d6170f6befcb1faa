//! Known closed-form results for p_x² + p_y² + x² + y² + b(x p_y − y p_x).

use nalgebra::DMatrix;
use num::complex::Complex64;
use quadham::model::{
    angular_momentum, build_model, isotropic_h0, symmetric_ladder, symmetric_ladder_eigenvalue, DimensionlessModel,
};
use quadham::spectral::spectrum_lattice;
use quadham::{
    adjoint_representation, classify_spectrum, eigen_decompose, ladder_check, linear_commutator, pair_frequencies,
    quadratic_commutator, Classification, Degeneracy, QuadraticForm, Tolerances,
};

fn model(b: f64) -> QuadraticForm {
    build_model(&DimensionlessModel::symmetric(b).unwrap())
}

fn tol() -> Tolerances {
    Tolerances::default()
}

fn sorted_real(values: &[Complex64]) -> Vec<f64> {
    let mut v: Vec<f64> = values.iter().map(|z| z.re).collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

fn printed_matrix(b: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(4, 4, &[0.0, -b, 2.0, 0.0, b, 0.0, 0.0, 2.0, -2.0, 0.0, 0.0, -b, 0.0, -2.0, b, 0.0])
}

#[test]
fn adjoint_matches_printed_matrix() {
    for b in [-3.0, -0.5, 0.0, 1.0, 2.0, 7.25] {
        let adj = adjoint_representation(&model(b));
        assert_eq!(adj.generator(), &printed_matrix(b), "b = {b}");
        assert!(adj.entries().iter().all(|z| z.re == 0.0));
    }
}

#[test]
fn eigenvalues_at_generic_b() {
    for b in [0.3, 1.0, 2.7, -1.4] {
        let e = eigen_decompose(&adjoint_representation(&model(b)), &tol()).unwrap();
        let mut want = vec![-2.0 - b, 2.0 - b, b - 2.0, 2.0 + b];
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (got, w) in sorted_real(e.eigenvalues()).iter().zip(&want) {
            assert!((got - w).abs() < 1e-12, "b = {b}: {got} vs {w}");
        }
        assert!(e.max_imaginary() < 1e-12);
    }
}

#[test]
fn coalescence_at_two_is_not_defective() {
    let e = eigen_decompose(&adjoint_representation(&model(2.0)), &tol()).unwrap();
    let values = sorted_real(e.eigenvalues());
    for (got, w) in values.iter().zip([-4.0, 0.0, 0.0, 4.0]) {
        assert!((got - w).abs() < 1e-12);
    }
    let zero = e.clusters().iter().find(|c| c.value.norm() < 1e-9).unwrap();
    assert_eq!(zero.algebraic, 2);
    assert_eq!(zero.geometric, 2);
    assert!(!e.defective());
}

#[test]
fn ladder_operators_are_b_independent_eigenoperators() {
    for b in [-3.0, -1.0, 0.0, 0.5, 2.0, 4.0] {
        for i in 1..=4 {
            let z = symmetric_ladder(i).unwrap();
            let lambda = ladder_check(&model(b), &z, &tol()).unwrap();
            assert!((lambda - symmetric_ladder_eigenvalue(i, b)).abs() < 1e-12, "Z{i} at b = {b}");
        }
    }
}

#[test]
fn ladder_commutators() {
    let z: Vec<_> = (1..=4).map(|i| symmetric_ladder(i).unwrap()).collect();
    assert_eq!(linear_commutator(&z[2], &z[1]).unwrap(), Complex64::new(4.0, 0.0));
    assert_eq!(linear_commutator(&z[0], &z[3]).unwrap(), Complex64::new(4.0, 0.0));
    for (a, b) in [(0, 1), (0, 2), (3, 1), (3, 2)] {
        assert_eq!(linear_commutator(&z[a], &z[b]).unwrap(), Complex64::new(0.0, 0.0));
    }
    // Z1† = Z4, Z2† = Z3
    assert_eq!(z[0].adjoint(), z[3]);
    assert_eq!(z[1].adjoint(), z[2]);
}

#[test]
fn frequency_pairs() {
    let cases: [(f64, [f64; 2]); 3] = [(1.0, [3.0, 1.0]), (0.0, [2.0, 2.0]), (3.0, [5.0, 1.0])];
    for (b, want) in cases {
        let q = model(b);
        let e = eigen_decompose(&adjoint_representation(&q), &tol()).unwrap();
        let pairs = pair_frequencies(&e, q.basis(), &tol()).unwrap();
        assert_eq!(pairs.len(), 2);
        for (p, w) in pairs.iter().zip(want) {
            assert!((p.lambda_plus - w).abs() < 1e-12, "b = {b}");
            assert!((p.norm_constant - 1.0).abs() < 1e-10);
            assert_eq!(p.lowering, p.raising.adjoint());
            let shift = ladder_check(&q, &p.raising, &tol()).unwrap();
            assert!((shift - p.shift).abs() < 1e-10);
        }
    }
}

#[test]
fn bounded_classification() {
    let r = classify_spectrum(&model(1.0), &tol()).unwrap();
    assert_eq!(r.classification, Classification::BoundedBelowDiscrete);
    assert!((r.ground_energy.unwrap() - 2.0).abs() < 1e-12);
    assert!((r.lattice_generators[0] - 3.0).abs() < 1e-12);
    assert!((r.lattice_generators[1] - 1.0).abs() < 1e-12);
}

#[test]
fn critical_classification() {
    let r = classify_spectrum(&model(2.0), &tol()).unwrap();
    assert_eq!(r.classification, Classification::CriticalInfiniteMultiplicity);
    assert!((r.ground_energy.unwrap() - 2.0).abs() < 1e-12);
    assert!(r.lattice_generators.iter().any(|g| g.abs() < 1e-10));
    assert!(r.min_gamma_eigenvalue.abs() < 1e-12);
}

#[test]
fn unbounded_classification_has_signed_generators() {
    let r = classify_spectrum(&model(3.0), &tol()).unwrap();
    assert_eq!(r.classification, Classification::UnboundedLattice);
    assert!(r.ground_energy.is_none());
    assert!((r.vacuum_energy.unwrap() - 2.0).abs() < 1e-12);
    assert!((r.lattice_generators[0] - 5.0).abs() < 1e-12);
    assert!((r.lattice_generators[1] + 1.0).abs() < 1e-12);
}

#[test]
fn raising_operators_match_z2_and_z4() {
    // at b = 3 the creation operators are Z4 (+5) and Z2 (−1), up to normalization
    let q = model(3.0);
    let r = classify_spectrum(&q, &tol()).unwrap();
    for (pair, z) in r.pairs.iter().zip([4, 2]) {
        let zc = symmetric_ladder(z).unwrap();
        let overlap = pair.raising.coeffs().dotc(zc.coeffs()).norm();
        assert!((overlap - pair.raising.coeffs().norm() * zc.coeffs().norm()).abs() < 1e-10);
    }
}

#[test]
fn bounded_lattice_enumeration() {
    let r = classify_spectrum(&model(1.0), &tol()).unwrap();
    let lattice = spectrum_lattice(&r, 3, &tol()).unwrap();
    let energies: Vec<f64> = lattice.iter().map(|l| l.energy).collect();
    // brute force E = 2 + 3m + n, m + n ≤ 3
    let mut brute: Vec<(f64, Vec<usize>)> = Vec::new();
    for m in 0..=3usize {
        for n in 0..=(3 - m) {
            brute.push((2.0 + 3.0 * m as f64 + n as f64, vec![m, n]));
        }
    }
    brute.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    assert_eq!(lattice.len(), brute.len());
    for (level, (e, q)) in lattice.iter().zip(&brute) {
        assert!((level.energy - e).abs() < 1e-12);
        assert_eq!(&level.quanta, q);
    }
    assert_eq!(&energies[..6].iter().map(|e| e.round() as i64).collect::<Vec<_>>(), &[2, 3, 4, 5, 5, 6]);
    let at_five: Vec<_> = lattice.iter().filter(|l| (l.energy - 5.0).abs() < 1e-9).collect();
    assert_eq!(at_five.len(), 2);
    assert!(at_five.iter().all(|l| l.degeneracy == Degeneracy::Finite(2)));
    assert_eq!(at_five[0].quanta, vec![0, 3]);
    assert_eq!(at_five[1].quanta, vec![1, 0]);
}

#[test]
fn isotropic_lattice_degeneracies() {
    let r = classify_spectrum(&model(0.0), &tol()).unwrap();
    let lattice = spectrum_lattice(&r, 2, &tol()).unwrap();
    let summary: Vec<(i64, Degeneracy)> = lattice.iter().map(|l| (l.energy.round() as i64, l.degeneracy)).collect();
    use Degeneracy::Finite;
    assert_eq!(
        summary,
        vec![(2, Finite(1)), (4, Finite(2)), (4, Finite(2)), (6, Finite(3)), (6, Finite(3)), (6, Finite(3))]
    );
}

#[test]
fn critical_lattice_is_infinitely_degenerate() {
    let r = classify_spectrum(&model(2.0), &tol()).unwrap();
    let lattice = spectrum_lattice(&r, 3, &tol()).unwrap();
    let energies: Vec<f64> = lattice.iter().map(|l| l.energy).collect();
    assert_eq!(energies.len(), 4);
    for (e, w) in energies.iter().zip([2.0, 6.0, 10.0, 14.0]) {
        assert!((e - w).abs() < 1e-12);
    }
    assert!(lattice.iter().all(|l| l.degeneracy == Degeneracy::Infinite));
}

#[test]
fn unbounded_lattice_is_ordered_by_total_quanta() {
    let r = classify_spectrum(&model(3.0), &tol()).unwrap();
    let lattice = spectrum_lattice(&r, 2, &tol()).unwrap();
    let rows: Vec<(Vec<usize>, i64)> = lattice.iter().map(|l| (l.quanta.clone(), l.energy.round() as i64)).collect();
    assert_eq!(
        rows,
        vec![(vec![0, 0], 2), (vec![0, 1], 1), (vec![1, 0], 7), (vec![0, 2], 0), (vec![1, 1], 6), (vec![2, 0], 12)]
    );
}

#[test]
fn classification_boundary() {
    for b in [0.0, 1.0, 1.9, 1.999, -1.999] {
        assert_eq!(classify_spectrum(&model(b), &tol()).unwrap().classification, Classification::BoundedBelowDiscrete);
    }
    for b in [2.001, 3.0, 10.0, -3.0] {
        assert_eq!(classify_spectrum(&model(b), &tol()).unwrap().classification, Classification::UnboundedLattice);
    }
    for b in [2.0, -2.0] {
        assert_eq!(
            classify_spectrum(&model(b), &tol()).unwrap().classification,
            Classification::CriticalInfiniteMultiplicity
        );
    }
}

#[test]
fn conserved_quantities() {
    let h = model(1.0);
    assert!(quadratic_commutator(&h, &isotropic_h0()).unwrap().is_zero());
    assert!(quadratic_commutator(&h, &angular_momentum()).unwrap().is_zero());
    assert!(quadratic_commutator(&isotropic_h0(), &angular_momentum()).unwrap().is_zero());
    let adj: Vec<_> = [h, isotropic_h0(), angular_momentum()].iter().map(adjoint_representation).collect();
    for a in &adj {
        for b in &adj {
            assert!(a.generator_commutator(b).unwrap().iter().all(|&v| v == 0.0));
        }
    }
}

#[test]
fn h0_and_lz_act_diagonally_on_ladders() {
    let h0 = isotropic_h0();
    let lz = angular_momentum();
    let expected_h0 = [-2.0, 2.0, -2.0, 2.0];
    let expected_lz = [-1.0, -1.0, 1.0, 1.0];
    for i in 1..=4 {
        let z = symmetric_ladder(i).unwrap();
        assert_eq!(ladder_check(&h0, &z, &tol()).unwrap(), expected_h0[i - 1]);
        assert_eq!(ladder_check(&lz, &z, &tol()).unwrap(), expected_lz[i - 1]);
    }
}
