mod common;

use magframe::graph::{
    decompose_adjacency, hermitian_residual, symmetric_normalized_laplacian, Digraph,
    MagneticLaplacian,
};
use magframe::spectral::{dilation_base, eig_hermitian, eig_hermitian_matrix};
use magframe::{max_abs, to_complex, CMatrix, Complex64};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn digraph_strategy(max_n: usize) -> impl Strategy<Value = Digraph> {
    (2..=max_n).prop_flat_map(|n| {
        proptest::collection::vec((0..n, 0..n), 0..(n * 3)).prop_map(move |pairs| {
            let mut seen = std::collections::HashSet::new();
            let edges: Vec<_> = pairs
                .into_iter()
                .filter(|&(u, v)| u != v && seen.insert((u, v)))
                .collect();
            Digraph::new(n, edges).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn laplacian_is_hermitian_psd_and_bounded(g in digraph_strategy(30), qi in 0usize..6) {
        let q = common::CHARGES[qi];
        let l = MagneticLaplacian::new(&g, q).unwrap();
        prop_assert_eq!(hermitian_residual(l.matrix()), 0.0);
        let eig = eig_hermitian(&l).unwrap();
        prop_assert!(eig.lambda_min() >= -1e-10, "min eigenvalue {}", eig.lambda_min());
        prop_assert!(eig.lambda_max() <= 2.0 + 1e-10, "max eigenvalue {}", eig.lambda_max());
        prop_assert_eq!(dilation_base(eig.lambda_max()), 0);
    }

    #[test]
    fn zero_charge_is_symmetric_normalized_laplacian(g in digraph_strategy(30)) {
        let l = MagneticLaplacian::new(&g, 0.0).unwrap();
        let sym = to_complex(&symmetric_normalized_laplacian(&g));
        prop_assert!(max_abs(&(l.matrix() - sym)) <= 1e-14);
    }

    #[test]
    fn reversal_conjugates(g in digraph_strategy(30), qi in 0usize..6) {
        let q = common::CHARGES[qi];
        let l = MagneticLaplacian::new(&g, q).unwrap();
        let lr = MagneticLaplacian::new(&g.reversed(), q).unwrap();
        prop_assert!(max_abs(&(lr.matrix() - l.matrix().conjugate())) <= 1e-14);
    }

    #[test]
    fn decomposition_invariants(g in digraph_strategy(20)) {
        let dec = decompose_adjacency(&g);
        let n = g.n_nodes();
        for i in 0..n {
            prop_assert_eq!(dec.a_skew[(i, i)], 0.0);
            for j in 0..n {
                prop_assert_eq!(dec.a_sym[(i, j)], dec.a_sym[(j, i)]);
                prop_assert_eq!(dec.a_skew[(i, j)], -dec.a_skew[(j, i)]);
                prop_assert!([0.0, 0.5, 1.0].contains(&dec.a_sym[(i, j)]));
                prop_assert!([-1.0, 0.0, 1.0].contains(&dec.a_skew[(i, j)]));
            }
        }
    }

    #[test]
    fn eigensolver_contract_on_random_hermitian(n in 1usize..25, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut gauss = || -> f64 { StandardNormal.sample(&mut rng) };
        let z = CMatrix::from_fn(n, n, |_, _| Complex64::new(gauss(), gauss()));
        let v = z.qr().q();
        let d: Vec<f64> = (0..n).map(|_| 3.0 * gauss()).collect();
        let mut scaled = v.clone();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            col *= Complex64::new(d[k], 0.0);
        }
        let mut h = &scaled * v.adjoint();
        // exact Hermitian symmetry before handing to the solver
        h = (&h + h.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = eig_hermitian_matrix(&h).unwrap();
        prop_assert!(eig.unitarity_residual() < 1e-10);
        prop_assert!(eig.reconstruction_residual(&h) < 1e-8);
        prop_assert!(eig.eigenvalues.as_slice().windows(2).all(|w| w[0] <= w[1]));
        let mut sorted = d.clone();
        sorted.sort_by(f64::total_cmp);
        for (a, b) in sorted.iter().zip(eig.eigenvalues.iter()) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }
}

#[test]
fn three_cycle_spectrum_depends_on_charge() {
    let g = Digraph::new(3, [(0, 1), (1, 2), (2, 0)]).unwrap();
    // circulant with off-diagonal -e^{±2πiq}/2: λ_k = 1 - cos(2π(q + k/3))
    for q in common::CHARGES {
        let eig = eig_hermitian(&MagneticLaplacian::new(&g, q).unwrap()).unwrap();
        let mut want: Vec<f64> = (0..3)
            .map(|k| 1.0 - (2.0 * std::f64::consts::PI * (q + k as f64 / 3.0)).cos())
            .collect();
        want.sort_by(f64::total_cmp);
        for (a, b) in want.iter().zip(eig.eigenvalues.iter()) {
            assert!((a - b).abs() < 1e-12, "q={q}: {want:?} vs {:?}", eig.eigenvalues);
        }
    }
}
