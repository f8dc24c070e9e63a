//! Randomized invariants of the lattice builders and spectra.

use num_complex::Complex64;
use omlat::model::{
    build_regime_a, build_regime_b, build_regime_d_nnn, CouplingProfile, LatticeSpec,
    QuadraticHamiltonian, RegimeAKappas, RegimeBKappas,
};
use omlat::special::bessel_j;
use omlat::spectral::eig_hermitian;
use proptest::prelude::*;

fn sorted_energies(h: &QuadraticHamiltonian) -> Vec<f64> {
    eig_hermitian(h.hopping())
        .unwrap()
        .eigenvalues
        .iter()
        .map(|e| e.re)
        .collect()
}

fn coupling_vecs(cells: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    let amp = -1.0..1.0f64;
    (
        prop::collection::vec(amp.clone(), cells),
        prop::collection::vec(amp, cells),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// On a bipartite chain the hopping signs are gauge: only bond
    /// magnitudes enter the spectrum.
    #[test]
    fn bipartite_gauge_invariance(
        (gl, gr) in (2usize..=6).prop_flat_map(coupling_vecs),
    ) {
        let cells = gl.len();
        let spec = LatticeSpec::new(cells + 1, cells).unwrap();
        let kappas = RegimeBKappas::uniform(&spec, 0.0, 0.0);
        let signed = CouplingProfile::new(gl.to_vec(), gr.to_vec(), 0.0).unwrap();
        let unsigned = CouplingProfile::new(
            gl.iter().map(|g| g.abs()).collect(),
            gr.iter().map(|g| g.abs()).collect(),
            0.0,
        )
        .unwrap();
        let ha = build_regime_b(&spec, &signed, &kappas, false).unwrap();
        let hb = build_regime_b(&spec, &unsigned, &kappas, false).unwrap();
        let (ea, eb) = (sorted_energies(&ha), sorted_energies(&hb));
        for (a, b) in ea.iter().zip(&eb) {
            prop_assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    /// Regime A and B chains are chiral: the spectrum is symmetric under
    /// E -> -E.
    #[test]
    fn chiral_symmetry_regimes_a_b(
        total in 4usize..=13,
        gl in -1.0..1.0f64,
        gr in -1.0..1.0f64,
        k1 in 0.0..3.0f64,
        k3 in 0.0..3.0f64,
    ) {
        let spec = LatticeSpec::with_total_sites(total).unwrap();
        let couplings = CouplingProfile::uniform(&spec, gl, gr, 0.0).unwrap();
        let ha = build_regime_a(
            &spec,
            &couplings,
            &RegimeAKappas::uniform(&spec, k1, 0.0, k3, 0.0),
            false,
        )
        .unwrap();
        let hb = build_regime_b(
            &spec,
            &couplings,
            &RegimeBKappas::uniform(&spec, 0.0, 0.0),
            false,
        )
        .unwrap();
        for h in [ha, hb] {
            let e = sorted_energies(&h);
            let n = e.len();
            for i in 0..n {
                prop_assert!((e[i] + e[n - 1 - i]).abs() < 1e-10);
            }
        }
    }

    /// Partial NNN hopping breaks the sublattice symmetry: regime D with
    /// t_eff != 0 has an asymmetric spectrum.
    #[test]
    fn regime_d_breaks_chiral_symmetry(
        cells in 2usize..=6,
        gl in 0.1..1.0f64,
        gr in 0.1..1.0f64,
        t_eff in 0.1..1.0f64,
    ) {
        let spec = LatticeSpec::new(cells + 1, cells).unwrap();
        let couplings = CouplingProfile::uniform(&spec, -gl, gr, 0.0).unwrap();
        let h = build_regime_d_nnn(&spec, &couplings, t_eff).unwrap();
        let e = sorted_energies(&h);
        let n = e.len();
        let defect = (0..n)
            .map(|i| (e[i] + e[n - 1 - i]).abs())
            .fold(0.0f64, f64::max);
        prop_assert!(defect > 1e-8, "spectrum stayed symmetric, defect {defect}");
    }

    /// The Jacobi-Anger sum rule J0 + 2 sum J_{2k} = 1 and the reflection
    /// identity hold across the argument range.
    #[test]
    fn bessel_sum_rule_and_reflection(x in 0.01..24.0f64) {
        let mut total = bessel_j(0, x).unwrap();
        for k in 1..=32 {
            total += 2.0 * bessel_j(2 * k, x).unwrap();
        }
        prop_assert!((total - 1.0).abs() < 1e-10, "sum rule off: {total}");
        for m in 1..=5 {
            let jm = bessel_j(m, x).unwrap();
            let jneg = bessel_j(-m, x).unwrap();
            let expect = if m % 2 == 0 { jm } else { -jm };
            prop_assert!((jneg - expect).abs() < 1e-12);
        }
    }

    /// Builders always emit Hermitian hopping and symmetric pairing blocks.
    #[test]
    fn builder_block_structure(
        total in 4usize..=12,
        gl in -1.0..1.0f64,
        gr in -1.0..1.0f64,
        k in 0.1..6.0f64,
    ) {
        let spec = LatticeSpec::with_total_sites(total).unwrap();
        let couplings = CouplingProfile::uniform(&spec, gl, gr, 0.0).unwrap();
        let h = build_regime_b(
            &spec,
            &couplings,
            &RegimeBKappas::uniform(&spec, k, k),
            true,
        )
        .unwrap();
        let m = h.dim();
        for i in 0..m {
            for j in 0..m {
                let dh = h.hopping()[[i, j]] - h.hopping()[[j, i]].conj();
                let dp = h.pairing()[[i, j]] - h.pairing()[[j, i]];
                prop_assert!(dh.norm() < 1e-12 && dp.norm() < 1e-12);
            }
        }
        let _ = Complex64::new(0.0, 0.0);
    }
}
