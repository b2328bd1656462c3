mod common;

use common::{random_digraph, random_real_signal, random_signal, CHARGES};
use magframe::filterbank::{BankName, FilterBank};
use magframe::framelet::{self, block_labels, FrameletSystem};
use magframe::graph::MagneticLaplacian;
use magframe::spectral::{eig_hermitian, EigenSystem};
use magframe::{max_abs, CMatrix, Complex64};

fn exact_system(n: usize, q: f64, bank: BankName, levels: usize, seed: u64) -> (EigenSystem, FrameletSystem) {
    let g = random_digraph(n, 0.3, seed);
    let l = MagneticLaplacian::new(&g, q).unwrap();
    let eig = eig_hermitian(&l).unwrap();
    let sys = FrameletSystem::exact(&eig, FilterBank::new(bank), levels, q).unwrap();
    (eig, sys)
}

/// `U diag(f(λ)) U*` built column by column, independent of the library's
/// spectral helpers.
fn spectral_oracle(eig: &EigenSystem, f: impl Fn(f64) -> f64) -> CMatrix {
    let n = eig.n();
    let u = &eig.eigenvectors;
    CMatrix::from_fn(n, n, |i, j| {
        (0..n)
            .map(|k| u[(i, k)] * Complex64::new(f(eig.eigenvalues[k]), 0.0) * u[(j, k)].conj())
            .sum()
    })
}

#[test]
fn single_level_identity_transported_by_unitarity() {
    for bank in BankName::ALL {
        let (_, sys) = exact_system(12, 0.1, bank, 1, 3);
        assert!(sys.tightness_residual() < 1e-10, "{bank}");
    }
}

#[test]
fn two_level_haar_matches_composed_single_level_filters() {
    let (eig, sys) = exact_system(9, 0.2, BankName::Haar, 2, 11);
    let bank = FilterBank::new(BankName::Haar);
    let z = |r: usize, scale: f64| spectral_oracle(&eig, move |lam| bank.eval(r, lam / scale));
    let ops = sys.dense_operators().unwrap();
    // low-pass at the coarsest level: z_0(Λ/2) z_0(Λ); high-pass s=1: z_1(Λ); s=2: z_1(Λ/2) z_0(Λ)
    let low = z(0, 2.0) * z(0, 1.0);
    let high1 = z(1, 1.0);
    let high2 = z(1, 2.0) * z(0, 1.0);
    assert!(max_abs(&(&ops[0] - low)) < 1e-12);
    assert!(max_abs(&(&ops[1] - high1)) < 1e-12);
    assert!(max_abs(&(&ops[2] - high2)) < 1e-12);
}

#[test]
fn tightness_grid() {
    for bank in BankName::ALL {
        for levels in 1..=3 {
            for q in CHARGES {
                for n in [3, 10, 30] {
                    let (_, sys) = exact_system(n, q, bank, levels, n as u64 * 7 + levels as u64);
                    assert!(sys.tightness_residual() < 1e-8, "{bank} S={levels} q={q} n={n}");
                    let x = random_real_signal(n, 2, 5);
                    let c = framelet::mgft(&sys, &x).unwrap();
                    assert_eq!(c.blocks.len(), bank_size(bank) * levels + 1);
                    let back = framelet::reconstruct(&sys, &c).unwrap();
                    assert!(max_abs(&(back - &x)) < 1e-8);
                }
            }
        }
    }
}

fn bank_size(bank: BankName) -> usize {
    FilterBank::new(bank).n_high()
}

#[test]
fn parseval_energy() {
    for bank in BankName::ALL {
        let (_, sys) = exact_system(15, 0.15, bank, 3, 2);
        let x = random_signal(15, 3, 9);
        let c = sys.analyze(&x).unwrap();
        let rel = (c.energy() - x.norm_squared()).abs() / x.norm_squared();
        assert!(rel < 1e-8, "{bank}: {rel}");
    }
}

#[test]
fn linearity() {
    let (_, sys) = exact_system(10, 0.25, BankName::Quadratic, 2, 4);
    let x = random_signal(10, 2, 1);
    let y = random_signal(10, 2, 2);
    let (a, b) = (Complex64::new(0.7, -1.2), Complex64::new(-2.0, 0.5));
    let lhs = sys.analyze(&(&x * a + &y * b)).unwrap();
    let cx = sys.analyze(&x).unwrap();
    let cy = sys.analyze(&y).unwrap();
    for j in 0..lhs.blocks.len() {
        let rhs = &cx.blocks[j] * a + &cy.blocks[j] * b;
        assert!(max_abs(&(&lhs.blocks[j] - rhs)) < 1e-10);
    }
}

#[test]
fn mgft_matches_dense_products() {
    let (_, sys) = exact_system(5, 0.05, BankName::Linear, 2, 8);
    let x = random_signal(5, 1, 3);
    let c = sys.analyze(&x).unwrap();
    for (op, block) in sys.dense_operators().unwrap().iter().zip(&c.blocks) {
        let mut want = CMatrix::zeros(5, 1);
        for i in 0..5 {
            for k in 0..5 {
                want[i] += op[(i, k)] * x[k];
            }
        }
        assert!(max_abs(&(block - want)) < 1e-12);
    }
}

const ROUND_OFF_FLOOR: f64 = 1e-12;

fn fast_exact_error(n: usize, bank: BankName, levels: usize, degree: usize, seed: u64) -> f64 {
    let g = random_digraph(n, 0.2, seed);
    let q = 0.15;
    let l = MagneticLaplacian::new(&g, q).unwrap();
    let eig = eig_hermitian(&l).unwrap();
    let exact = FrameletSystem::exact(&eig, FilterBank::new(bank), levels, q).unwrap();
    let fast = FrameletSystem::fast(&l, FilterBank::new(bank), levels, degree).unwrap();
    let x = random_real_signal(n, 2, seed + 1);
    exact.analyze(&x).unwrap().max_abs_diff(&fast.analyze(&x).unwrap())
}

#[test]
fn fast_agrees_with_exact() {
    for bank in BankName::ALL {
        let e16 = fast_exact_error(20, bank, 2, 16, 17);
        let e32 = fast_exact_error(20, bank, 2, 32, 17);
        let e64 = fast_exact_error(20, bank, 2, 64, 17);
        eprintln!("{bank}: K=16 {e16:.3e} K=32 {e32:.3e} K=64 {e64:.3e}");
        assert!(e32 < 1e-4, "{bank} K=32: {e32}");
        assert!(e64 < 1e-6, "{bank} K=64: {e64}");
        // entire banks are already at round-off by K=16
        assert!(e64 < e16 || e16.max(e64) < ROUND_OFF_FLOOR, "{bank}");
    }
    let coarse = fast_exact_error(20, BankName::Haar, 2, 2, 5);
    let fine = fast_exact_error(20, BankName::Haar, 2, 64, 5);
    assert!(fine < coarse);
}

#[test]
fn fast_round_trip_is_nearly_tight() {
    for bank in BankName::ALL {
        let g = random_digraph(20, 0.2, 23);
        let l = MagneticLaplacian::new(&g, 0.25).unwrap();
        let fast = FrameletSystem::fast(&l, FilterBank::new(bank), 2, 64).unwrap();
        let x = random_real_signal(20, 1, 4);
        let back = fast.synthesize(&fast.analyze(&x).unwrap()).unwrap();
        assert!(max_abs(&(back - &x)) < 1e-5, "{bank}");
    }
}

#[test]
fn fast_synthesis_is_the_adjoint_of_fast_analysis() {
    // <F x, c> = <x, F* c> for arbitrary coefficients
    let g = random_digraph(12, 0.3, 31);
    let l = MagneticLaplacian::new(&g, 0.2).unwrap();
    let fast = FrameletSystem::fast(&l, FilterBank::new(BankName::Linear), 3, 12).unwrap();
    let x = random_signal(12, 1, 1);
    let fx = fast.analyze(&x).unwrap();
    let mut c = fx.zeros_like();
    for (j, b) in c.blocks.iter_mut().enumerate() {
        *b = random_signal(12, 1, 100 + j as u64);
    }
    let lhs: Complex64 = fx.blocks.iter().zip(&c.blocks).map(|(a, b)| a.dotc(b)).sum();
    let rhs = x.dotc(&fast.synthesize(&c).unwrap());
    assert!((lhs - rhs).norm() < 1e-10);
}

#[test]
fn atoms_align_with_first_level_operator() {
    // framelet atoms use λ/2^s; the first-level operator with dilation
    // base M = s uses the same scaling, so row n of F_{r,1} is conj(atom)
    let (eig, _) = exact_system(8, 0.25, BankName::Linear, 1, 6);
    let bank = FilterBank::new(BankName::Linear);
    for s in [1usize, 2] {
        let sys = FrameletSystem::exact_with_dilation(&eig, bank, 1, 0.25, s as u32).unwrap();
        for r in 0..=bank.n_high() {
            let op = &sys.dense_operators().unwrap()[sys.block_index(r, 1).unwrap_or(0)];
            for node in [0, 5] {
                let atom = framelet::framelet_atom(&eig, &bank, node, s, r).unwrap();
                let row = op.row(node).transpose().conjugate();
                assert!(max_abs(&(row - &atom)) < 1e-12);
            }
        }
    }
}

#[test]
fn two_node_atom_matches_dense_oracle() {
    let g = magframe::graph::Digraph::new(2, [(0, 1)]).unwrap();
    let eig = eig_hermitian(&MagneticLaplacian::new(&g, 0.25).unwrap()).unwrap();
    let bank = FilterBank::new(BankName::Haar);
    for r in 0..2 {
        let dense = spectral_oracle(&eig, |lam| bank.eval(r, lam / 2.0));
        let atom = framelet::framelet_atom(&eig, &bank, 0, 1, r).unwrap();
        assert!(max_abs(&(dense.column(0) - atom)) < 1e-14);
    }
}

#[test]
fn stack_ordering_is_shared_by_both_modes() {
    let g = random_digraph(6, 0.4, 1);
    let l = MagneticLaplacian::new(&g, 0.1).unwrap();
    let eig = eig_hermitian(&l).unwrap();
    let bank = FilterBank::new(BankName::Quadratic);
    let exact = FrameletSystem::exact(&eig, bank, 2, 0.1).unwrap();
    let fast = FrameletSystem::fast(&l, bank, 2, 8).unwrap();
    assert_eq!(exact.labels(), fast.labels());
    assert_eq!(exact.labels(), block_labels(3, 2).as_slice());
}
