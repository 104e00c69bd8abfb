//! Decomposition checks against an independent Jacobi oracle plus the
//! spectral invariants of the matrix layer.

mod common;

use cmvc::linalg::{svd, sym_eig_topk, sym_eigendecomposition, DenseMatrix};
use common::*;

#[test]
fn svd_singular_values_square_to_gram_eigenvalues() {
    // sigma_i^2 of A must equal the eigenvalues of A^T A computed by the
    // independent Jacobi eigensolver.
    let mut rng = seeded(101);
    for _ in 0..20 {
        let a = standard_normal_matrix(5, 3, &mut rng);
        let d = svd(&a).unwrap();
        let gram = a.transpose().matmul(&a);
        let (eigs, _) = jacobi_symmetric_eigen(&gram);
        for (s, e) in d.singular_values.iter().zip(&eigs) {
            assert!(
                (s * s - e).abs() < 1e-8,
                "sigma^2 {} vs eigenvalue {}",
                s * s,
                e
            );
        }
    }
}

#[test]
fn svd_values_are_sorted_and_factors_orthonormal() {
    let mut rng = seeded(102);
    for _ in 0..10 {
        let a = standard_normal_matrix(6, 4, &mut rng);
        let d = svd(&a).unwrap();
        for w in d.singular_values.windows(2) {
            assert!(w[0] >= w[1]);
        }
        for s in &d.singular_values {
            assert!(*s >= 0.0);
        }
        let utu = d.u.transpose().matmul(&d.u);
        let vvt = d.vt.matmul(&d.vt.transpose());
        assert!(max_abs_diff(&utu, &DenseMatrix::identity(4)) < 1e-8);
        assert!(max_abs_diff(&vvt, &DenseMatrix::identity(4)) < 1e-8);
    }
}

#[test]
fn svd_reconstruction_roundtrips() {
    let mut rng = seeded(103);
    for _ in 0..10 {
        let a = standard_normal_matrix(7, 5, &mut rng);
        let d = svd(&a).unwrap();
        let back = d.reconstruct();
        let err = a.sub(&back).frobenius_norm();
        assert!(err <= 1e-6 * a.frobenius_norm().max(1.0));
    }
}

#[test]
fn nuclear_norm_dominates_trace_against_sampled_orthogonal_matrices() {
    // max over orthogonal Q of Tr(Q^T A) is the nuclear norm, so every
    // sample must come in at or below it.
    let mut rng = seeded(104);
    for _ in 0..5 {
        let a = standard_normal_matrix(4, 4, &mut rng);
        let nuclear: f64 = svd(&a).unwrap().singular_values.iter().sum();
        for _ in 0..100 {
            let q = random_orthogonal(4, &mut rng);
            let trace = q.transpose().matmul(&a).trace();
            assert!(trace <= nuclear + 1e-9, "{trace} > {nuclear}");
        }
    }
}

#[test]
fn topk_eigenvectors_match_rayleigh_quotients_of_full_oracle() {
    // Rayleigh quotients of the returned basis must equal the 3 largest
    // eigenvalues from the independent full-spectrum oracle.
    let mut rng = seeded(105);
    for _ in 0..10 {
        let a = random_psd(6, &mut rng);
        let m = sym_eig_topk(&a, 3).unwrap();
        let quad = m.transpose().matmul(&a).matmul(&m);
        let (oracle_eigs, _) = jacobi_symmetric_eigen(&a);
        // The basis diagonalizes A restricted to the top subspace.
        for i in 0..3 {
            assert!(
                (quad.get(i, i) - oracle_eigs[i]).abs() < 1e-8,
                "Rayleigh quotient {} vs oracle eigenvalue {}",
                quad.get(i, i),
                oracle_eigs[i]
            );
            for j in 0..3 {
                if i != j {
                    assert!(quad.get(i, j).abs() < 1e-7);
                }
            }
        }
    }
}

#[test]
fn topk_output_is_orthonormal() {
    let mut rng = seeded(106);
    for _ in 0..10 {
        let a = random_psd(8, &mut rng);
        let m = sym_eig_topk(&a, 4).unwrap();
        let mtm = m.transpose().matmul(&m);
        assert!(max_abs_diff(&mtm, &DenseMatrix::identity(4)) < 1e-8);
    }
}

#[test]
fn full_eigendecomposition_agrees_with_jacobi_oracle() {
    let mut rng = seeded(107);
    for _ in 0..10 {
        let a = random_psd(7, &mut rng);
        let (values, vectors) = sym_eigendecomposition(&a).unwrap();
        let (oracle, _) = jacobi_symmetric_eigen(&a);
        for (v, o) in values.iter().zip(&oracle) {
            assert!((v - o).abs() < 1e-9, "{v} vs {o}");
        }
        // Residual ||A v - lambda v|| per eigenpair.
        for j in 0..7 {
            let v = DenseMatrix::from_fn(7, 1, |i, _| vectors.get(i, j));
            let av = a.matmul(&v);
            let lv = v.scale(values[j]);
            assert!(av.sub(&lv).frobenius_norm() < 1e-8);
        }
    }
}

#[test]
fn degenerate_spectrum_still_spans_the_right_subspace() {
    // Repeated eigenvalue: compare projectors, not eigenvectors.
    let mut rng = seeded(108);
    let q = random_orthogonal(5, &mut rng);
    // Eigenvalues (4, 4, 4, 1, 0.5): the top-3 subspace is well separated
    // even though individual vectors are not identifiable.
    let diag = DenseMatrix::diagonal(&[4.0, 4.0, 4.0, 1.0, 0.5]);
    let a = q.matmul(&diag).matmul(&q.transpose());
    let a = a.add(&a.transpose()).scale(0.5);
    let m = sym_eig_topk(&a, 3).unwrap();
    let projector = m.matmul(&m.transpose());
    let expected_basis = DenseMatrix::from_fn(5, 3, |i, j| q.get(i, j));
    let expected = expected_basis.matmul(&expected_basis.transpose());
    assert!(max_abs_diff(&projector, &expected) < 1e-8);
}
