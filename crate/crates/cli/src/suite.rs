//! Pinned bundles of checks. Seeds are offsets from `--seed`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use carnot_lw::brascamp_lieb::{corank_linearized_datum, lw_datum, pair_deletion_datum, BLOptions};
use carnot_lw::density::presets::{triangle, Preset};
use carnot_lw::density::{Axis, GridDensity};
use carnot_lw::group::CorankGroup;
use carnot_lw::harness::{
    corank_constants, inputs, isoperimetric_check, level_set_check, mcc2_residual, product_combine,
    product_combine_line, proof_chain_checks, proof_chain_source, sobolev_check, subadditivity_check, verify_lw,
    verify_nonlinear_lw, verify_set_lw, Geometry, LevelSetOptions, PullbackProduct, Quadrature, Rational, Raster,
    Report, ScaledData,
};
use carnot_lw::radon::{estimate_radon_norm_lb, TestFunction};

use crate::{Failure, Outcome, SuiteName};

pub fn run(name: SuiteName, seed: u64, r_norm: f64) -> Result<Outcome, Failure> {
    let reports = match name {
        SuiteName::PaperCore => paper_core(seed, r_norm)?,
        SuiteName::Entropy => entropy(seed)?,
        SuiteName::Products => products()?,
        SuiteName::Sobolev => sobolev(r_norm)?,
    };
    Ok(Outcome {
        reports,
        lines: Vec::new(),
    })
}

fn group(d: usize, alpha: &[f64]) -> CorankGroup {
    CorankGroup::new(d, alpha.to_vec()).expect("valid group")
}

fn label(g: &CorankGroup) -> String {
    let alpha: Vec<String> = g.alpha().iter().map(|a| a.to_string()).collect();
    format!("H({},({}))", g.d(), alpha.join(","))
}

/// A report that passes iff `got == want`.
fn exact<T: PartialEq + std::fmt::Debug>(name: String, got: &T, want: &T) -> Report {
    let miss = if got == want { 0.0 } else { 1.0 };
    Report::new(name, miss, 0.0, 0.0)
        .with("got", format!("{got:?}"))
        .with("want", format!("{want:?}"))
}

fn r(a: i64, b: i64) -> Rational {
    Rational::new(a, b)
}

fn paper_core(seed: u64, r_norm: f64) -> Result<Vec<Report>, Failure> {
    let mut out = Vec::new();
    let h1 = group(0, &[1.0]);
    for (name, datum) in [
        ("lw:3", lw_datum(3)?),
        ("pair:2", pair_deletion_datum(2)?),
        ("corank:h1", corank_linearized_datum(&h1)?),
    ] {
        let est = datum.bl_constant(&BLOptions::default()).estimate();
        // geometric data: the estimate must sit at 1 from both sides
        out.push(Report::new(format!("bl-constant {name}"), (est - 1.0).abs(), 0.0, 1e-6).with("estimate", est));
    }
    for (g, want) in [
        (group(0, &[1.0]), vec![r(3, 2); 2]),
        (group(1, &[1.0]), vec![r(4, 1), r(2, 1), r(2, 1)]),
        (group(0, &[1.0, 2.0]), vec![r(10, 3); 4]),
    ] {
        out.push(exact(format!("exponents {}", label(&g)), &corank_constants(&g).exponents(), &want));
    }
    let plan = [(group(0, &[1.0]), 64, 4), (group(1, &[1.0]), 32, 3), (group(0, &[1.0, 2.0]), 16, 2)];
    for (g, res, count) in &plan {
        for s in seed..seed + count {
            let tag = |what: &str| format!("{what} {} seed {s}", label(g));
            out.push(verify_lw(g, &inputs::lw_inputs(g, *res, s)?, r_norm)?.renamed(tag("lw")));
            out.push(verify_nonlinear_lw(g, &inputs::nonlinear_inputs(g, *res, s)?)?.renamed(tag("nonlinear-lw")));
            out.push(verify_set_lw(g, &inputs::random_set(g, *res, s)?, r_norm)?.renamed(tag("set-lw")));
        }
    }
    let sd = corank_constants(&h1);
    for s in seed..seed + 4 {
        let f = inputs::random_density(&h1, 64, s)?;
        out.push(subadditivity_check(&h1, &f, &sd, r_norm)?.renamed(format!("subadditivity H1 seed {s}")));
    }
    let est = estimate_radon_norm_lb(&TestFunction::family(&["disks", "gauss"], seed)?, 256)?;
    out.push(Report::new("radon-norm-lb", est.lb, r_norm, 0.0).with("argmax", est.best.describe()));
    let g = group(0, &[1.0, 2.0]);
    let chain = proof_chain_checks(&g, &proof_chain_source(&g, 24, 4.5, 1.0, 1.0)?, r_norm)?;
    out.extend(chain.reports.into_iter().map(|r| {
        let name = format!("proof-chain {}", r.name);
        r.renamed(name)
    }));
    Ok(out)
}

fn entropy(seed: u64) -> Result<Vec<Report>, Failure> {
    let gauss = -0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln();
    let mut out = Vec::new();
    let s1 = Preset::Gaussian.build(1, 4096)?.entropy()?;
    out.push(Report::new("gaussian 1-D res 4096", (s1 - gauss).abs(), 0.0, 1e-3).with("entropy", s1));
    let s3 = Preset::Gaussian.build(3, 128)?.entropy()?;
    out.push(Report::new("gaussian 3-D res 128", (s3 - 3.0 * gauss).abs(), 0.0, 5e-3).with("entropy", s3));
    let chain = triangle(256)?.chain_rule_residual(&[0])?;
    out.push(Report::new("chain-rule triangle res 256", chain, 0.0, 5e-3));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    for _ in 0..200 {
        let axes = vec![Axis::new(-1.0, rng.random_range(0.0..2.0), 6)?; 2];
        let vals: Vec<f64> = (0..36).map(|_| rng.random_range(0.01..5.0)).collect();
        let f = GridDensity::new(axes, vals)?.normalize()?;
        let phi: Vec<f64> = (0..36).map(|_| rng.random_range(-10.0..10.0)).collect();
        worst = worst.min(f.gibbs_gap(&phi)?);
    }
    out.push(Report::new("gibbs-gap 200 cases", -worst, 0.0, 1e-9).with("min_gap", worst));

    let h1 = group(0, &[1.0]);
    let geom = Geometry::corank(&h1);
    let mut resid = 0.0f64;
    for s in seed..seed + 10 {
        let fs = inputs::lw_inputs(&h1, 24, s)?;
        let quad = Quadrature::covering(&geom, &[1, 2], &fs)?;
        let big_f = GridDensity::from_source(&PullbackProduct::new(&geom, &[1, 2], &fs, &quad)?)?;
        resid = resid.max(mcc2_residual(&big_f)?.abs());
    }
    out.push(Report::new("duality identity 10 cases", resid, 0.0, 1e-10));
    Ok(out)
}

fn products() -> Result<Vec<Report>, Failure> {
    let mut out = Vec::new();
    let h1 = corank_constants(&group(0, &[1.0]));
    let p = product_combine(&h1, &h1)?;
    out.push(exact("H1xH1 weights".into(), &p.c().to_vec(), &vec![r(2, 7); 4]));
    out.push(exact("H1xH1 R exponent".into(), &p.d().r_coeff, &r(6, 7)));
    out.push(exact("H1xH1 Q".into(), &p.q(), &Some(8)));
    let line = product_combine_line(&h1)?;
    out.push(exact("H1xR weights".into(), &line.c().to_vec(), &vec![r(1, 4), r(1, 2), r(1, 2)]));

    // the line combinator applied d times reproduces H(d, α)
    for alpha in [vec![1.0], vec![1.0, 3.0]] {
        let mut sd: ScaledData = corank_constants(&group(0, &alpha));
        for d in 1..=3 {
            sd = product_combine_line(&sd)?;
            let direct = corank_constants(&group(d, &alpha));
            let name = format!("line^{d} {}", label(&group(0, &alpha)));
            out.push(exact(format!("{name} weights"), &sd.c().to_vec(), &direct.c().to_vec()));
            out.push(exact(format!("{name} R exponent"), &sd.d().r_coeff, &direct.d().r_coeff));
        }
    }

    let gs = [group(0, &[1.0]), group(1, &[1.0]), group(0, &[1.0, 2.0])];
    for a in &gs {
        for b in &gs {
            let (ca, cb) = (corank_constants(a), corank_constants(b));
            let ab = product_combine(&ca, &cb)?;
            let ba = product_combine(&cb, &ca)?;
            let m = (a.horizontal_dim() + b.horizontal_dim() + 3) as i64;
            let name = format!("{} x {}", label(a), label(b));
            out.push(exact(format!("{name} R exponent"), &ab.d().r_coeff, &r(6, m)));
            let mut swapped = ba.c()[cb.c().len()..].to_vec();
            swapped.extend_from_slice(&ba.c()[..cb.c().len()]);
            out.push(exact(format!("{name} symmetry"), &ab.c().to_vec(), &swapped));
        }
    }
    Ok(out)
}

fn sobolev(r_norm: f64) -> Result<Vec<Report>, Failure> {
    let g = group(0, &[1.0]);
    let f = inputs::gaussian_bump(&g, 96, 3.2, 0.5, 1.2, 1.0)?;
    let mut out = level_set_check(&g, &f, LevelSetOptions::default())?;
    let base = sobolev_check(&g, &f, r_norm)?;
    let fr = inputs::gaussian_bump(&g, 96, 3.2, 0.375, 0.675, 1.0)?;
    let dil = sobolev_check(&g, &fr, r_norm)?;
    out.push(
        Report::new("sobolev dilation drift", (dil.ratio() / base.ratio() - 1.0).abs(), 0.0, 0.02)
            .with("ratio", base.ratio())
            .with("dilated_ratio", dil.ratio()),
    );
    out.push(base);
    out.push(dil.renamed("sobolev dilated"));
    let e = Raster::from_fn(vec![Axis::centered(1.0, 64)?; 3], |p| p.iter().map(|x| x * x).sum::<f64>() <= 0.25)?;
    for width in [0.12, 0.08] {
        out.push(isoperimetric_check(&g, &e, width, r_norm)?.renamed(format!("isoperimetric width {width}")));
    }
    Ok(out)
}
