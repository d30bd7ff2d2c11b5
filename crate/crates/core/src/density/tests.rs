use super::presets::{gaussian, product, triangle, uniform_box};
use super::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn h1() -> CorankGroup {
    CorankGroup::heisenberg(1).unwrap()
}

fn random_grid(axes: Vec<Axis>, seed: u64) -> GridDensity {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n: usize = axes.iter().map(|a| a.res).product();
    let values = (0..n).map(|_| rng.random::<f64>()).collect();
    GridDensity::new(axes, values).unwrap().normalize().unwrap()
}

fn axes(k: usize, lo: f64, hi: f64, res: usize) -> Vec<Axis> {
    vec![Axis::new(lo, hi, res).unwrap(); k]
}

#[test]
fn mass_and_normalize_examples() {
    let u = GridDensity::from_fn(axes(2, 0.0, 1.0, 8), |_| 1.0).unwrap();
    assert!((u.total_mass() - 1.0).abs() < 1e-15);
    let c = GridDensity::from_fn(axes(3, 0.0, 1.0, 5), |_| 2.0).unwrap();
    assert!((c.total_mass() - 2.0).abs() < 1e-14);
    let n = c.normalize().unwrap();
    assert!(n.values().iter().all(|v| (v - 1.0).abs() < 1e-14));
    let r = random_grid(axes(3, -1.0, 2.0, 7), 3);
    assert!((r.total_mass() - 1.0).abs() < 1e-12);
    assert_eq!(GridDensity::zeros(axes(2, 0.0, 1.0, 3)).normalize(), Err(Error::ZeroMass));
}

#[test]
fn invalid_grids_are_rejected() {
    assert!(Axis::new(1.0, 1.0, 4).is_err());
    assert!(Axis::new(0.0, 1.0, 0).is_err());
    assert!(GridDensity::new(axes(1, 0.0, 1.0, 2), vec![1.0, -1.0]).is_err());
    assert!(GridDensity::new(axes(1, 0.0, 1.0, 2), vec![1.0]).is_err());
    assert!(GridDensity::new(axes(1, 0.0, 1.0, 2), vec![1.0, f64::NAN]).is_err());
}

#[test]
fn entropy_examples() {
    let u = GridDensity::from_fn(axes(2, 0.0, 1.0, 16), |_| 1.0).unwrap();
    assert!(u.entropy().unwrap().abs() < 1e-14);
    let u2 = GridDensity::from_fn(axes(1, 0.0, 2.0, 16), |_| 0.5).unwrap();
    assert!((u2.entropy().unwrap() + 2f64.ln()).abs() < 1e-14);
    let box3 = uniform_box(&axes(3, 0.0, 2.0, 10), &[0.0; 3], &[2.0; 3]).unwrap();
    assert!((box3.entropy().unwrap() + 8f64.ln()).abs() < 1e-12);

    let g = gaussian(&[Axis::centered(6.0, 4096).unwrap()], &[0.0], &[1.0]).unwrap();
    let exact = -0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln();
    assert!((g.entropy().unwrap() - exact).abs() < 1e-3);

    let un = GridDensity::from_fn(axes(1, 0.0, 1.0, 4), |_| 2.0).unwrap();
    assert!(matches!(un.entropy(), Err(Error::NotNormalized { .. })));
}

#[test]
fn marginal_examples() {
    let a = Axis::centered(3.0, 40).unwrap();
    let b = Axis::new(0.0, 2.0, 30).unwrap();
    let g1 = gaussian(&[a], &[0.3], &[0.7]).unwrap();
    let h = uniform_box(&[b], &[0.5], &[1.5]).unwrap();
    let gh = product(&[g1.clone(), h.clone()]).unwrap();
    let m = gh.marginal(&[0]).unwrap();
    assert!(m.values().iter().zip(g1.values()).all(|(x, y)| (x - y).abs() < 1e-13));
    let m = gh.marginal(&[1]).unwrap();
    assert!(m.values().iter().zip(h.values()).all(|(x, y)| (x - y).abs() < 1e-13));

    let u = GridDensity::from_fn(axes(2, 0.0, 1.0, 10), |_| 1.0).unwrap();
    let m = u.marginal(&[0]).unwrap();
    assert!(m.values().iter().all(|v| (v - 1.0).abs() < 1e-14));

    let r = random_grid(vec![a, b, Axis::new(-1.0, 1.0, 9).unwrap()], 11);
    for kept in [&[0usize][..], &[1, 2], &[0, 2], &[2]] {
        let m = r.marginal(kept).unwrap();
        assert!((m.total_mass() - r.total_mass()).abs() < 1e-12);
    }
    assert!(r.marginal(&[]).is_err());
    assert!(r.marginal(&[3]).is_err());
    assert!(r.marginal(&[1, 1]).is_err());
}

#[test]
fn coordinate_pushforward_examples() {
    let u = GridDensity::from_fn(axes(3, 0.0, 1.0, 6), |_| 1.0).unwrap();
    let p = u.coordinate_pushforward(&[2]).unwrap();
    assert_eq!(p.k(), 2);
    assert!(p.values().iter().all(|v| (v - 1.0).abs() < 1e-14));

    // delete the pair {1,2} of a product density on ℝ^4
    let a = Axis::centered(3.0, 12).unwrap();
    let f1 = gaussian(&[a], &[0.0], &[1.0]).unwrap();
    let f2 = gaussian(&[a], &[0.5], &[0.6]).unwrap();
    let f3 = uniform_box(&[a], &[-1.0], &[1.0]).unwrap();
    let f4 = gaussian(&[a], &[-0.4], &[0.9]).unwrap();
    let f = product(&[f1.clone(), f2, f3, f4.clone()]).unwrap();
    let p = f.coordinate_pushforward(&[1, 2]).unwrap();
    let expect = product(&[f1, f4]).unwrap();
    assert!(p.values().iter().zip(expect.values()).all(|(x, y)| (x - y).abs() < 1e-13));

    let r = random_grid(axes(3, 0.0, 1.0, 5), 5);
    assert_eq!(r.coordinate_pushforward(&[1]).unwrap(), r.marginal(&[0, 2]).unwrap());
}

#[test]
fn center_projection_is_coordinate_deletion() {
    let g = h1();
    let r = random_grid(axes(3, -1.0, 1.0, 9), 21);
    let a = r.corank_pushforward(&g, 3).unwrap();
    let b = r.coordinate_pushforward(&[2]).unwrap();
    assert_eq!(a.axes(), b.axes());
    assert!(a.values().iter().zip(b.values()).all(|(x, y)| (x - y).abs() < 1e-14));
}

/// `f_{(π_1)}(y, s) = ∫ f(x, y, s − xy/2) dx` for the uniform cube, in closed form.
fn cube_pi1(y: f64, s: f64) -> f64 {
    if !(0.0..=1.0).contains(&y) {
        return 0.0;
    }
    if y == 0.0 {
        return if (0.0..=1.0).contains(&s) { 1.0 } else { 0.0 };
    }
    // 0 ≤ s − xy/2 ≤ 1  ⇔  2(s−1)/y ≤ x ≤ 2s/y
    let lo = (2.0 * (s - 1.0) / y).max(0.0);
    let hi = (2.0 * s / y).min(1.0);
    (hi - lo).max(0.0)
}

#[test]
fn shear_pushforward_of_uniform_cube() {
    let g = h1();
    let res = 128;
    let f = uniform_box(&axes(3, -0.25, 1.25, res), &[0.0; 3], &[1.0; 3]).unwrap();
    let p = f.corank_pushforward(&g, 1).unwrap();
    assert!((p.total_mass() - f.total_mass()).abs() < 1e-3);
    // near y = 0 the shear vanishes (y = 0 itself is the edge of the cube)
    assert!((cube_pi1(0.0, 0.5) - 1.0).abs() < 1e-15);
    assert!((p.evaluate(&[0.05, 0.5]) - 1.0).abs() < 0.02);
    // L1 distance to the closed form is first order in the cell size
    let vol = p.cell_volume();
    let err: f64 = (0..p.len())
        .map(|i| {
            let m = p.midpoint(i);
            (p.values()[i] - cube_pi1(m[0], m[1])).abs() * vol
        })
        .sum();
    assert!(err < 0.05, "L1 error {err}");
}

#[test]
fn shear_pushforward_matches_fiber_quadrature() {
    // smooth density: compare with a fine independent quadrature of the fiber integral
    let g = CorankGroup::new(0, vec![1.5]).unwrap();
    let dens = |x: f64, y: f64, t: f64| (-(x * x + 0.8 * y * y + 2.0 * (t - 0.2 * x).powi(2))).exp();
    let f = GridDensity::from_fn(axes(3, -5.0, 5.0, 96), |p| dens(p[0], p[1], p[2])).unwrap();
    for (j, sign) in [(1usize, 1.0), (2, -1.0)] {
        let p = f.corank_pushforward(&g, j).unwrap();
        let mut worst: f64 = 0.0;
        for &(u, s) in &[(0.3, 0.1), (-0.8, 0.7), (1.1, -0.4), (0.0, 0.0)] {
            let n = 4000;
            let h = 10.0 / n as f64;
            let exact: f64 = (0..n)
                .map(|i| {
                    let v = -5.0 + (i as f64 + 0.5) * h;
                    // π_1 keeps y, integrates x; π_2 keeps x, integrates y
                    let (x, y) = if j == 1 { (v, u) } else { (u, v) };
                    dens(x, y, s - sign * 0.75 * x * y) * h
                })
                .sum();
            let got = p.evaluate(&[u, s]);
            worst = worst.max((got - exact).abs() / exact.max(1e-3));
        }
        assert!(worst < 2e-2, "j = {j}: relative error {worst}");
    }
}

#[test]
fn pushforward_identity_for_polynomial_tests() {
    let g = CorankGroup::new(1, vec![2.0]).unwrap();
    let f = random_grid(axes(4, -1.0, 1.0, 10), 8);
    for j in 1..=g.num_projections() {
        let p = f.corank_pushforward(&g, j).unwrap();
        let phi = |y: &[f64]| 1.0 + y[0] - 0.5 * y[1] + 0.3 * y[y.len() - 1];
        let lhs: f64 = (0..f.len())
            .map(|i| {
                let m = f.midpoint(i);
                let q = crate::group::GroupPoint::from_coords(&m).unwrap();
                phi(&g.project(j, &q).unwrap()) * f.values()[i]
            })
            .sum::<f64>()
            * f.cell_volume();
        let rhs: f64 = (0..p.len())
            .map(|i| phi(&p.midpoint(i)) * p.values()[i])
            .sum::<f64>()
            * p.cell_volume();
        assert!((lhs - rhs).abs() < 1e-12, "j = {j}: {lhs} vs {rhs}");

        // quadratic test functions pick up the interpolation variance, O(h²)
        let phi2 = |y: &[f64]| y[y.len() - 1].powi(2);
        let lhs: f64 = (0..f.len())
            .map(|i| {
                let q = crate::group::GroupPoint::from_coords(&f.midpoint(i)).unwrap();
                phi2(&g.project(j, &q).unwrap()) * f.values()[i]
            })
            .sum::<f64>()
            * f.cell_volume();
        let rhs: f64 = (0..p.len())
            .map(|i| phi2(&p.midpoint(i)) * p.values()[i])
            .sum::<f64>()
            * p.cell_volume();
        let h = f.max_h();
        assert!((lhs - rhs).abs() <= 0.25 * h * h, "j = {j}: {lhs} vs {rhs}");
    }
}

#[test]
fn streaming_matches_materialized() {
    let g = CorankGroup::new(1, vec![1.0]).unwrap();
    let f = random_grid(axes(4, -1.0, 1.5, 8), 2);
    let (m, s) = mass_entropy(&f).unwrap();
    assert!((m - 1.0).abs() < 1e-12);
    assert!((s - f.entropy().unwrap()).abs() < 1e-12);
    let proc = ProceduralDensity::pointwise(f.axes().to_vec(), |p| f.evaluate(p)).unwrap();
    for j in 1..=4 {
        let (pm, ps) = pushforward_entropy(&g, j, &proc).unwrap();
        let mat = f.corank_pushforward(&g, j).unwrap();
        assert!((pm - mat.total_mass()).abs() < 1e-12);
        assert!((ps - mat.normalize().unwrap().entropy().unwrap()).abs() < 1e-10);
    }
}

#[test]
fn conditional_profile_examples() {
    let a = Axis::centered(4.0, 32).unwrap();
    let g1 = gaussian(&[a], &[0.0], &[0.8]).unwrap();
    let h = gaussian(&[a], &[0.5], &[1.1]).unwrap();
    let f = product(&[g1.clone(), h]).unwrap();
    let cp = f.conditional_entropy_profile(&[0]).unwrap();
    let sg = g1.entropy().unwrap();
    assert!(cp.profile.iter().flatten().all(|s| (s - sg).abs() < 1e-10));

    let n = 256;
    let t = triangle(n).unwrap();
    let cp = t.conditional_entropy_profile(&[0]).unwrap();
    for (jdx, s) in cp.profile.iter().enumerate() {
        let y = (jdx as f64 + 0.5) / n as f64;
        let s = s.expect("every row of the triangle has mass");
        // the discrete conditional is uniform on jdx+1 cells
        let discrete = -((jdx + 1) as f64 / n as f64).ln();
        assert!((s - discrete).abs() < 1e-10);
        // uniform on [0, y] has ∫ f ln f = −ln y
        if y > 0.2 {
            assert!((s + y.ln()).abs() < 0.02);
        }
    }
}

#[test]
fn chain_rule_examples() {
    let a = Axis::centered(3.0, 20).unwrap();
    let f = product(&[
        gaussian(&[a], &[0.0], &[1.0]).unwrap(),
        gaussian(&[a], &[0.2], &[0.5]).unwrap(),
    ])
    .unwrap();
    assert!(f.chain_rule_residual(&[0]).unwrap() < 1e-12);
    assert!(triangle(512).unwrap().chain_rule_residual(&[0]).unwrap() < 1e-3);
    let smooth = GridDensity::from_fn(axes(2, -3.0, 3.0, 256), |p| {
        (-(p[0] * p[0] + p[0] * p[1] + p[1] * p[1])).exp() * (1.0 + 0.5 * (2.0 * p[0]).sin().powi(2))
    })
    .unwrap()
    .normalize()
    .unwrap();
    assert!(smooth.chain_rule_residual(&[1]).unwrap() < 5e-3);
}

#[test]
fn gibbs_examples() {
    let f = random_grid(axes(2, 0.0, 2.0, 12), 4);
    let lnf: Vec<f64> = f.values().iter().map(|v| v.ln()).collect();
    assert!(f.gibbs_gap(&lnf).unwrap().abs() < 1e-12);
    // constant potential: the gap is KL(f ‖ uniform) = S(f) + ln V
    let gap = f.gibbs_gap(&vec![0.7; f.len()]).unwrap();
    let kl: f64 = f
        .values()
        .iter()
        .map(|v| v * (v / 0.25).ln())
        .sum::<f64>()
        * f.cell_volume();
    assert!((gap - kl).abs() < 1e-12);
    assert!(gap >= 0.0);
    assert!(f.gibbs_gap(&[0.0]).is_err());
}

#[test]
fn gibbs_accepts_log_of_density_with_zeros() {
    let t = triangle(16).unwrap();
    let phi: Vec<f64> = t.values().iter().map(|v| v.ln()).collect();
    assert!(t.gibbs_gap(&phi).unwrap().abs() < 1e-12);
}

#[test]
fn dilation_shifts_entropy_by_homogeneous_dimension() {
    let g = CorankGroup::new(1, vec![1.0]).unwrap();
    let f = random_grid(axes(4, -1.0, 1.0, 6), 9);
    for r in [0.5, 2.0, 3.7] {
        let d = f.dilate(&g, r).unwrap();
        assert!((d.total_mass() - 1.0).abs() < 1e-12);
        let shift = d.entropy().unwrap() - f.entropy().unwrap();
        let q = g.homogeneous_dim() as f64;
        assert!((shift + q * r.ln()).abs() < 1e-12, "r = {r}: shift {shift}");
    }
    assert!(f.dilate(&g, 0.0).is_err());
}

#[test]
fn consistency_of_conditionals_and_pushforwards() {
    // H(1,(1)) with Y = x_1: conditioning on x_1 commutes with π_2, which
    // acts as the H¹ projection π_1 on (x_2, x_3, t)
    let g = CorankGroup::new(1, vec![1.0]).unwrap();
    let f = random_grid(axes(4, -1.0, 1.0, 8), 17);
    let pf = f.corank_pushforward(&g, 2).unwrap(); // axes (x_1, x_3, s)
    let fy = f.marginal(&[0]).unwrap();
    let h1g = h1();
    let inner: Vec<Axis> = f.axes()[1..].to_vec();
    let block = inner.iter().map(|a| a.res).product::<usize>();
    let out_block = pf.len() / f.axes()[0].res;
    for y in 0..f.axes()[0].res {
        let fyv = fy.values()[y];
        let cond = GridDensity::new(
            inner.clone(),
            f.values()[y * block..(y + 1) * block].iter().map(|v| v / fyv).collect(),
        )
        .unwrap();
        let pushed = cond.corank_pushforward(&h1g, 1).unwrap();
        let direct = &pf.values()[y * out_block..(y + 1) * out_block];
        assert_eq!(pushed.len(), direct.len());
        for (a, b) in pushed.values().iter().zip(direct) {
            assert!((a - b / fyv).abs() < 1e-12);
        }
    }
}

#[test]
fn evaluate_interpolates_and_vanishes_outside() {
    let f = GridDensity::from_fn(axes(2, 0.0, 1.0, 4), |p| 1.0 + p[0] + 2.0 * p[1]).unwrap();
    assert!((f.evaluate(&[0.375, 0.625]) - (1.0 + 0.375 + 1.25)).abs() < 1e-14);
    assert!((f.evaluate(&[0.5, 0.5]) - 2.5).abs() < 1e-14);
    assert_eq!(f.evaluate(&[-0.2, 0.5]), 0.0);
    assert_eq!(f.evaluate(&[0.5, 1.13]), 0.0);
    // halfway into the ghost layer
    assert!((f.evaluate(&[0.125, 0.0]) - 0.5 * (1.0 + 0.125 + 0.25)).abs() < 1e-14);
}

#[test]
fn text_and_binary_round_trip() {
    let f = random_grid(vec![Axis::new(-1.0, 2.0, 3).unwrap(), Axis::new(0.5, 0.75, 4).unwrap()], 1);
    assert_eq!(GridDensity::from_text(&f.to_text()).unwrap(), f);
    assert_eq!(GridDensity::from_bytes(&f.to_bytes()).unwrap(), f);
    assert!(GridDensity::from_text("2 0 0 1 1 2").is_err());
    assert!(GridDensity::from_text("1 0 1 2\n1 2 3").is_err());
    assert!(GridDensity::from_bytes(b"XXXX").is_err());
    let mut bytes = f.to_bytes();
    bytes.pop();
    assert!(GridDensity::from_bytes(&bytes).is_err());
}

#[test]
fn presets_build_normalized_densities() {
    for (p, k) in [
        (presets::Preset::UniformBox, 3),
        (presets::Preset::Gaussian, 3),
        (presets::Preset::Product, 3),
        (presets::Preset::Triangle, 2),
    ] {
        let f = p.build(k, 24).unwrap();
        assert!((f.total_mass() - 1.0).abs() < 1e-12);
    }
    assert!(presets::Preset::Triangle.build(3, 8).is_err());
    assert!("nope".parse::<presets::Preset>().is_err());
    let tri = triangle(64).unwrap();
    let cells = tri.values().iter().filter(|v| **v > 0.0).count();
    assert_eq!(cells, 64 * 65 / 2);
}

fn arb_block_density() -> impl Strategy<Value = GridDensity> {
    (2usize..7, 2usize..7, any::<u64>()).prop_map(|(a, b, seed)| {
        random_grid(
            vec![Axis::new(0.0, 1.0, a).unwrap(), Axis::new(-1.0, 3.0, b).unwrap()],
            seed,
        )
    })
}

proptest! {
    #[test]
    fn subadditivity_of_entropy(f in arb_block_density()) {
        let sx = f.marginal(&[0]).unwrap().entropy().unwrap();
        let sy = f.marginal(&[1]).unwrap().entropy().unwrap();
        prop_assert!(f.entropy().unwrap() >= sx + sy - 1e-12);
    }

    #[test]
    fn subadditivity_is_equality_for_products(f in arb_block_density()) {
        let p = product(&[f.marginal(&[0]).unwrap(), f.marginal(&[1]).unwrap()]).unwrap();
        let sx = p.marginal(&[0]).unwrap().entropy().unwrap();
        let sy = p.marginal(&[1]).unwrap().entropy().unwrap();
        prop_assert!((p.entropy().unwrap() - sx - sy).abs() < 1e-12);
    }

    #[test]
    fn gibbs_gap_is_nonnegative(f in arb_block_density(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phi: Vec<f64> = (0..f.len()).map(|_| rng.random_range(-5.0..5.0)).collect();
        prop_assert!(f.gibbs_gap(&phi).unwrap() >= -1e-9);
    }

    #[test]
    fn chain_rule_is_exact_on_grids(f in arb_block_density()) {
        prop_assert!(f.chain_rule_residual(&[0]).unwrap() < 1e-12);
        prop_assert!(f.chain_rule_residual(&[1]).unwrap() < 1e-12);
    }

    #[test]
    fn pushforwards_preserve_mass(seed in any::<u64>(), a in 0.2f64..3.0, jj in 0usize..3) {
        let g = CorankGroup::new(0, vec![a]).unwrap();
        let f = random_grid(axes(3, -1.5, 0.5, 6), seed);
        let p = f.corank_pushforward(&g, jj + 1).unwrap();
        prop_assert!((p.total_mass() - 1.0).abs() < 1e-12);
    }
}
