//! Property tests for the invariants of the verification harness.

use carnot_lw::group::CorankGroup;
use carnot_lw::harness::{
    corank_constants, duality_bridge, h1_entropy_constant, inputs, product_combine, product_combine_line,
    verify_lw, verify_nonlinear_lw, Rational, Report,
};
use carnot_lw::radon::{radon_ratio, radon_transform, TestFunction};
use proptest::prelude::*;

fn arb_group(max_d: usize, max_n: usize) -> impl Strategy<Value = CorankGroup> {
    (0..=max_d, prop::collection::vec(0.2f64..5.0, 1..=max_n)).prop_map(|(d, mut alpha)| {
        alpha.sort_by(f64::total_cmp);
        CorankGroup::new(d, alpha).unwrap()
    })
}

proptest! {
    #[test]
    fn pass_iff_deficit_within_tolerance(lhs in -10.0f64..10.0, rhs in -10.0f64..10.0, tol in 0.0f64..1.0) {
        let r = Report::new("p", lhs, rhs, tol);
        prop_assert_eq!(r.deficit, rhs - lhs);
        prop_assert_eq!(r.pass, r.deficit >= -tol);
    }

    #[test]
    fn weights_sum_to_the_dilation_ratio(g in arb_group(4, 4)) {
        let sd = corank_constants(&g);
        let q = g.homogeneous_dim() as i64;
        prop_assert_eq!(sd.sum_c(), Rational::new(q, q - 1));
        prop_assert_eq!(sd.q(), Some(g.homogeneous_dim()));
    }

    #[test]
    fn line_products_build_the_commuting_directions(g in arb_group(0, 3), d in 1usize..5) {
        let mut sd = corank_constants(&g);
        for _ in 0..d {
            sd = product_combine_line(&sd).unwrap();
        }
        let direct = corank_constants(&CorankGroup::new(d, g.alpha().to_vec()).unwrap());
        prop_assert_eq!(sd.c(), direct.c());
        prop_assert_eq!(&sd.d().r_coeff, &direct.d().r_coeff);
        for r in [0.5, 2.0, 7.0] {
            prop_assert!((sd.d().value(r) - direct.d().value(r)).abs() < 1e-12);
        }
    }

    #[test]
    fn product_is_symmetric(a in arb_group(2, 2), b in arb_group(2, 2), r in 0.5f64..5.0) {
        let (ca, cb) = (corank_constants(&a), corank_constants(&b));
        let ab = product_combine(&ca, &cb).unwrap();
        let ba = product_combine(&cb, &ca).unwrap();
        let m = ca.c().len();
        prop_assert_eq!(&ab.c()[..m], &ba.c()[ba.c().len() - m..]);
        prop_assert_eq!(&ab.c()[m..], &ba.c()[..ba.c().len() - m]);
        prop_assert!((ab.d().value(r) - ba.d().value(r)).abs() < 1e-12);
    }

    #[test]
    fn heisenberg_entropy_constant_is_consistent(alpha in 0.1f64..10.0, r in 0.5f64..5.0) {
        let direct = corank_constants(&CorankGroup::new(0, vec![alpha]).unwrap());
        let h1 = h1_entropy_constant(alpha).unwrap();
        prop_assert_eq!(h1.c(), direct.c());
        prop_assert!((h1.d().value(r) - direct.d().value(r)).abs() < 1e-12);
        prop_assert!((h1.d().value(r) - (r.ln() - alpha.ln() / 3.0)).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    /// Replacing `f_j` by `f_j∘δ_{1/r}^{(j)}` rescales both sides by the same power.
    #[test]
    fn nonlinear_lw_ratio_is_dilation_invariant(seed in 0u64..1000, r in 0.5f64..2.0) {
        let g = CorankGroup::heisenberg(1).unwrap();
        let fs = inputs::nonlinear_inputs(&g, 48, seed).unwrap();
        let scaled: Vec<_> = fs
            .iter()
            .enumerate()
            .map(|(j, f)| inputs::dilate_input(&g, j + 1, f, r).unwrap())
            .collect();
        let a = verify_nonlinear_lw(&g, &fs).unwrap();
        let b = verify_nonlinear_lw(&g, &scaled).unwrap();
        prop_assert!(a.pass && b.pass);
        prop_assert!((a.ratio() / b.ratio() - 1.0).abs() < 1e-2, "{} vs {}", a.ratio(), b.ratio());
    }

    #[test]
    fn lw_ratio_is_dilation_invariant(seed in 0u64..1000, r in 0.5f64..2.0) {
        let g = CorankGroup::new(1, vec![1.0]).unwrap();
        let fs = inputs::lw_inputs(&g, 24, seed).unwrap();
        let scaled: Vec<_> = fs
            .iter()
            .enumerate()
            .map(|(j, f)| inputs::dilate_input(&g, j + 1, f, r).unwrap())
            .collect();
        let a = verify_lw(&g, &fs, 2.0).unwrap();
        let b = verify_lw(&g, &scaled, 2.0).unwrap();
        prop_assert!((a.ratio() / b.ratio() - 1.0).abs() < 2e-2, "{} vs {}", a.ratio(), b.ratio());
    }

    /// The entropy form and the multilinear form are two sides of one identity:
    /// a pass of the first at `τ` is a pass of the second at `τ + transfer`.
    #[test]
    fn entropy_and_multilinear_forms_agree(seed in 0u64..1000) {
        let g = CorankGroup::heisenberg(1).unwrap();
        let gs = inputs::lw_inputs(&g, 32, seed).unwrap();
        let b = duality_bridge(&g, &gs, 2.0).unwrap();
        prop_assert!(b.residual.abs() < 1e-8, "{b:?}");
        prop_assert!(b.lw_gap <= b.entropy_gap + b.transfer + 1e-9);
        prop_assert!(b.transfer < 0.05, "{b:?}");
        // the multilinear report sees the same gap
        let r = verify_lw(&g, &gs, 2.0).unwrap();
        prop_assert!((r.ratio().ln() - b.lw_gap).abs() < 1e-9, "{} vs {}", r.ratio().ln(), b.lw_gap);
    }

    #[test]
    fn radon_ratio_is_scale_and_rotation_invariant(a in 0.4f64..1.0, b in 0.2f64..0.4, theta in 0.0f64..std::f64::consts::PI, s in 0.6f64..1.0) {
        let base = TestFunction::AnisotropicGaussian { a, b, theta: 0.0 }.rasterize(160).unwrap();
        let turned = TestFunction::AnisotropicGaussian { a, b, theta }.rasterize(160).unwrap();
        let shrunk = TestFunction::AnisotropicGaussian { a: a * s, b: b * s, theta }.rasterize(160).unwrap();
        let r0 = radon_ratio(&base, 64, 160).unwrap();
        let r1 = radon_ratio(&turned, 64, 160).unwrap();
        let r2 = radon_ratio(&shrunk, 64, 160).unwrap();
        prop_assert!((r1 / r0 - 1.0).abs() < 1e-2, "{r0} vs {r1}");
        prop_assert!((r2 / r0 - 1.0).abs() < 1e-2, "{r0} vs {r2}");
    }

    #[test]
    fn every_angle_carries_the_mass(seed in 0u64..1000) {
        let f = TestFunction::RandomBumps { seed, count: 3 }.rasterize(128).unwrap();
        let sino = radon_transform(&f, 24, 128).unwrap();
        let mass = f.total_mass();
        for i in 0..sino.n_angles {
            prop_assert!((sino.slice_mass(i) / mass - 1.0).abs() < 1e-3);
        }
    }
}

#[test]
fn disk_ratio_is_scale_invariant() {
    let ratio = |radius| {
        let f = TestFunction::Disk { radius }.rasterize(384).unwrap();
        radon_ratio(&f, 96, 384).unwrap()
    };
    let (a, b) = (ratio(1.0), ratio(0.5));
    assert!((a / b - 1.0).abs() < 1e-2, "{a} vs {b}");
    assert!((a / 6f64.powf(1.0 / 3.0) - 1.0).abs() < 2e-2);
}
