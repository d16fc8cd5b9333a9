use std::sync::Arc;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rieopt::geometry::{principal_angles, Grassmann, Hypersphere, SpdAffineInvariant};
use rieopt::ops::{clip_tangent, frechet_mean, tangent_mean, ClosureCost};
use rieopt::optim::{
    dp_rsgd, fit, rasa, rsgd, rsrg, rsvrg, zo_rgd, BatchMode, FitConfig, FrechetObjective,
    GradientOracle, GradientTransformation, Gradients, Problem, ScaleByRasa, StepContext,
    ZerothOrder,
};
use rieopt::pca::{rows_as_samples, synthetic, PcaCost};
use rieopt::{Array, Manifold, ManifoldPoint};

fn sphere(d: usize) -> Arc<dyn Manifold> {
    Arc::new(Hypersphere::new(d).unwrap())
}

fn col(v: &[f64]) -> Array {
    DMatrix::from_column_slice(v.len(), 1, v)
}

/// `f(x) = −aᵀx` on the sphere; the minimizer is `a`.
fn linear_problem(a: Array) -> Problem<ClosureCost<Array>> {
    let cost = ClosureCost::new(|x: &Array, a: &Array| -x.dot(a)).with_grad(|_, a: &Array| -a);
    Problem::new(cost, vec![a]).unwrap()
}

fn sphere_cluster(n: usize, d: usize, seed: u64) -> Vec<ManifoldPoint> {
    let m = sphere(d);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let center = ManifoldPoint::random(m, &mut rng);
    (0..n)
        .map(|_| {
            let v = center.random_tangent(&mut rng).unwrap().scale(0.3);
            center.exp(&v).unwrap()
        })
        .collect()
}

struct PcaSetup {
    problem: Problem<PcaCost>,
    start: ManifoldPoint,
}

fn pca_setup(n: usize, d: usize, r: usize, seed: u64) -> PcaSetup {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = synthetic(n, d, 0.5, 200.0, &mut rng).unwrap();
    let g: Arc<dyn Manifold> = Arc::new(Grassmann::new(d, r).unwrap());
    PcaSetup {
        problem: Problem::new(PcaCost, rows_as_samples(&s.data)).unwrap(),
        start: ManifoldPoint::random(g, &mut rng),
    }
}

fn recorded(epochs: usize) -> FitConfig {
    FitConfig {
        record_iterates: true,
        ..FitConfig::full_batch(epochs)
    }
}

fn max_step_gap(a: &[ManifoldPoint], b: &[ManifoldPoint]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x.value() - y.value()).amax())
        .fold(0.0, f64::max)
}

#[test]
fn zero_gradient_leaves_params_unchanged() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let w = ManifoldPoint::random(sphere(4), &mut rng);
    let cost = ClosureCost::new(|_: &Array, _: &()| 2.5).with_grad(|x, _| Array::zeros(x.nrows(), 1));
    let p = Problem::new(cost, vec![()]).unwrap();
    let out = fit(&p, w.clone(), &rsgd(0.1), &FitConfig::full_batch(5)).unwrap();
    assert_eq!(out.params.value(), w.value());
}

#[test]
fn rsgd_converges_on_linear_cost() {
    let a = col(&[0.0, 0.6, 0.0, 0.8]);
    let p = linear_problem(a.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let w = ManifoldPoint::random(sphere(4), &mut rng);
    let out = fit(&p, w, &rsgd(0.5), &FitConfig::full_batch(200)).unwrap();
    let target = ManifoldPoint::new(sphere(4), a).unwrap();
    assert!(out.params.dist(&target).unwrap() < 1e-6);
}

#[test]
fn one_rsgd_step_is_one_exponential_step() {
    let setup = pca_setup(60, 8, 2, 3);
    let out = fit(&setup.problem, setup.start.clone(), &rsgd(3e-3), &FitConfig::full_batch(1)).unwrap();
    let g = setup.problem.full_grad(&setup.start).unwrap();
    let expected = setup.start.exp(&g.scale(-3e-3)).unwrap();
    assert_eq!(out.params.value(), expected.value());
}

#[test]
fn variance_reduction_with_unit_epochs_matches_rsgd() {
    let setup = pca_setup(60, 8, 2, 4);
    let base = fit(&setup.problem, setup.start.clone(), &rsgd(3e-3), &recorded(30)).unwrap();
    let svrg = fit(&setup.problem, setup.start.clone(), &rsvrg(3e-3, 1).unwrap(), &recorded(30)).unwrap();
    let srg = fit(&setup.problem, setup.start.clone(), &rsrg(3e-3, 1).unwrap(), &recorded(30)).unwrap();
    assert!(max_step_gap(&base.iterates, &svrg.iterates) <= 1e-12);
    assert!(max_step_gap(&base.iterates, &srg.iterates) <= 1e-12);

    let obj = FrechetObjective::new(sphere_cluster(20, 5, 5)).unwrap();
    let start = obj.points()[0].clone();
    let base = fit(&obj, start.clone(), &rsgd(0.2), &recorded(20)).unwrap();
    let svrg = fit(&obj, start.clone(), &rsvrg(0.2, 1).unwrap(), &recorded(20)).unwrap();
    let srg = fit(&obj, start, &rsrg(0.2, 1).unwrap(), &recorded(20)).unwrap();
    assert!(max_step_gap(&base.iterates, &svrg.iterates) <= 1e-12);
    assert!(max_step_gap(&base.iterates, &srg.iterates) <= 1e-12);
}

#[test]
fn stochastic_variance_reduction_reaches_the_full_gradient_optimum() {
    let obj = FrechetObjective::new(sphere_cluster(20, 5, 6)).unwrap();
    let start = obj.points()[0].clone();
    let reference = fit(&obj, start.clone(), &rsgd(0.25), &FitConfig::full_batch(400))
        .unwrap()
        .params;
    let cfg = FitConfig {
        epochs: 600,
        batch: BatchMode::MiniBatch(4),
        seed: 7,
        record_iterates: false,
    };
    let svrg = fit(&obj, start.clone(), &rsvrg(0.1, 10).unwrap(), &cfg).unwrap();
    let srg = fit(&obj, start, &rsrg(0.1, 10).unwrap(), &cfg).unwrap();
    assert!(svrg.params.dist(&reference).unwrap() < 1e-6);
    assert!(srg.params.dist(&reference).unwrap() < 1e-6);
}

#[test]
fn svrg_direction_has_lower_variance_near_the_optimum() {
    let obj = FrechetObjective::new(sphere_cluster(20, 5, 8)).unwrap();
    let opt = frechet_mean(obj.points(), 1.0, 200).unwrap().point;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let anchor = opt.exp(&opt.random_tangent(&mut rng).unwrap().scale(0.02)).unwrap();
    let w = anchor.exp(&anchor.random_tangent(&mut rng).unwrap().scale(0.01)).unwrap();
    let mu = obj.full_grad(&anchor).unwrap();
    let full = obj.full_grad(&w).unwrap();
    let (mut plain, mut reduced) = (0.0, 0.0);
    for i in 0..obj.num_examples() {
        let gi = obj.example_grad(&w, i).unwrap();
        let corr = obj.example_grad(&anchor, i).unwrap().sub(&mu).unwrap().transport_to(&w).unwrap();
        plain += gi.sub(&full).unwrap().norm().unwrap().powi(2);
        reduced += gi.sub(&corr).unwrap().sub(&full).unwrap().norm().unwrap().powi(2);
    }
    assert!(reduced <= plain, "{reduced} > {plain}");
}

#[test]
fn recursive_estimator_is_stationary_when_iterates_are() {
    let obj = FrechetObjective::new(sphere_cluster(10, 4, 10)).unwrap();
    let w = obj.points()[0].clone();
    let t = rieopt::optim::RecursiveGradient::new(5).unwrap();
    let batch = [3usize];
    let ctx = StepContext { oracle: &obj, batch: &batch };
    let s0 = t.init(&w).unwrap();
    let g = obj.batch_grad(&w, &batch).unwrap();
    let (v0, s1) = t.update(Gradients::Mean(g.clone()), s0, &w, ctx).unwrap();
    let (v1, _) = t.update(Gradients::Mean(g), s1, &w, ctx).unwrap();
    let (v0, v1) = (v0.into_mean("t").unwrap(), v1.into_mean("t").unwrap());
    assert!((v0.value() - v1.value()).amax() < 1e-15);
}

#[test]
fn rasa_with_neutral_scaling_matches_rsgd() {
    let setup = pca_setup(60, 8, 2, 11);
    let eps = 1e-8;
    let neutral = ScaleByRasa::new(eps).unwrap().with_fixed_accumulators(1.0).then(rsgd(3e-3));
    let a = fit(&setup.problem, setup.start.clone(), &neutral, &recorded(30)).unwrap();
    let b = fit(&setup.problem, setup.start.clone(), &rsgd(3e-3 / (1.0 + eps)), &recorded(30)).unwrap();
    let gap = max_step_gap(&a.iterates, &b.iterates);
    assert!(gap <= 1e-12, "{gap}");
}

#[test]
fn rasa_scaling_is_nonincreasing() {
    let setup = pca_setup(60, 8, 2, 12);
    let t = ScaleByRasa::new(1e-8).unwrap();
    let all: Vec<usize> = (0..60).collect();
    let mut w = setup.start.clone();
    let mut state = t.init(&w).unwrap();
    let mut prev: Option<DMatrix<f64>> = None;
    for _ in 0..20 {
        let g = setup.problem.batch_grad(&w, &all[..10]).unwrap();
        let ctx = StepContext { oracle: &setup.problem, batch: &all };
        let (out, next) = t.update(Gradients::Mean(g), state, &w, ctx).unwrap();
        state = next;
        let scale = t.scaling(&state, 8, 2);
        if let Some(p) = &prev {
            assert!(scale.iter().zip(p.iter()).all(|(s, q)| s <= q));
        }
        prev = Some(scale);
        w = w.exp(&out.into_mean("rasa").unwrap().scale(-0.01)).unwrap();
    }
}

#[test]
fn rasa_final_cost_is_close_to_rsgd() {
    let setup = pca_setup(200, 20, 3, 13);
    let base = fit(&setup.problem, setup.start.clone(), &rsgd(3e-3), &FitConfig::full_batch(400)).unwrap();
    let adaptive = fit(&setup.problem, setup.start.clone(), &rasa(0.02, 1e-8).unwrap(), &FitConfig::full_batch(400))
        .unwrap();
    let (fb, fa) = (base.trace.last().unwrap().loss, adaptive.trace.last().unwrap().loss);
    assert!((fa - fb).abs() <= 0.01 * fb, "rasa {fa} vs rsgd {fb}");
}

#[test]
fn zeroth_order_estimates() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let w = ManifoldPoint::random(sphere(5), &mut rng);
    let constant = Problem::new(ClosureCost::new(|_: &Array, _: &()| 1.0), vec![()]).unwrap();
    let zo = ZerothOrder::new(1e-4, 8, 0).unwrap();
    let ctx = StepContext { oracle: &constant, batch: &[0] };
    let (g, _) = zo.update(Gradients::None, zo.init(&w).unwrap(), &w, ctx).unwrap();
    assert_eq!(g.into_mean("zo").unwrap().norm().unwrap(), 0.0);

    let a = col(&[0.2, -0.4, 0.1, 0.8, 0.4]).normalize();
    let p = linear_problem(a.clone());
    let truth = p.full_grad(&w).unwrap();
    let mut mean = DMatrix::zeros(5, 1);
    for seed in 0..200 {
        let zo = ZerothOrder::new(1e-4, 64, seed).unwrap();
        let ctx = StepContext { oracle: &p, batch: &[0] };
        let (g, _) = zo.update(Gradients::None, zo.init(&w).unwrap(), &w, ctx).unwrap();
        mean += g.into_mean("zo").unwrap().value() / 200.0;
    }
    let rel = (&mean - truth.value()).norm() / truth.value().norm();
    assert!(rel < 0.1, "relative error {rel}");

    let out = fit(&p, w, &zo_rgd(0.1, 1e-4, 16, 3).unwrap(), &FitConfig::full_batch(300)).unwrap();
    let target = ManifoldPoint::new(sphere(5), a).unwrap();
    assert!(out.params.dist(&target).unwrap() < 1e-2);
}

#[test]
fn private_step_without_noise() {
    let setup = pca_setup(40, 6, 2, 15);
    let exact = fit(&setup.problem, setup.start.clone(), &rsgd(3e-3), &recorded(10)).unwrap();
    let dp = fit(
        &setup.problem,
        setup.start.clone(),
        &dp_rsgd(3e-3, 0.0, f64::INFINITY, 1).unwrap(),
        &recorded(10),
    )
    .unwrap();
    for (a, b) in exact.iterates.iter().zip(&dp.iterates) {
        assert_eq!(a.value(), b.value());
    }

    let w = setup.start.clone();
    let all: Vec<usize> = (0..40).collect();
    let grads = setup.problem.example_grads(&w, &all).unwrap();
    let big = grads.iter().map(|g| g.norm().unwrap()).fold(0.0, f64::max) * 2.0;
    let t = dp_rsgd(1.0, 0.0, big, 0).unwrap();
    let ctx = StepContext { oracle: &setup.problem, batch: &all };
    let (u, _) = t.update(Gradients::PerExample(grads.clone()), t.init(&w).unwrap(), &w, ctx).unwrap();
    let mean = tangent_mean(&grads).unwrap();
    assert_eq!(u.into_mean("dp").unwrap().value(), &(mean.value() * -1.0));
}

#[test]
fn clipping_happens_per_example_before_averaging() {
    let w = ManifoldPoint::new(sphere(3), col(&[0.0, 0.0, 1.0])).unwrap();
    let g1 = w.tangent(col(&[3.0, 0.0, 0.0])).unwrap();
    let g2 = w.tangent(col(&[0.0, 1.0, 0.0])).unwrap();
    let t = dp_rsgd(1.0, 0.0, 1.0, 0).unwrap();
    let p = linear_problem(col(&[1.0, 0.0, 0.0]));
    let ctx = StepContext { oracle: &p, batch: &[0, 0] };
    let (u, _) = t
        .update(Gradients::PerExample(vec![g1.clone(), g2.clone()]), t.init(&w).unwrap(), &w, ctx)
        .unwrap();
    let mean_of_clipped = col(&[0.5, 0.5, 0.0]);
    let clip_of_mean = clip_tangent(&tangent_mean(&[g1, g2]).unwrap(), 1.0).unwrap();
    let u = u.into_mean("dp").unwrap().scale(-1.0);
    assert!((u.value() - &mean_of_clipped).norm() < 1e-15);
    assert!((clip_of_mean.value() - &mean_of_clipped).norm() > 0.1);
}

#[test]
fn private_noise_has_the_calibrated_energy() {
    let spd: Arc<dyn Manifold> = Arc::new(SpdAffineInvariant::new(3).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let w = ManifoldPoint::random(spd, &mut rng);
    let zero = w.zero_tangent();
    let (sigma, clip) = (1.5, 0.4);
    let t = dp_rsgd(1.0, sigma, clip, 17).unwrap();
    let p = Problem::new(ClosureCost::new(|_: &Array, _: &()| 0.0), vec![()]).unwrap();
    let ctx = StepContext { oracle: &p, batch: &[0] };
    let mut state = t.init(&w).unwrap();
    let draws = 1000;
    let mut energy = 0.0;
    for _ in 0..draws {
        let (u, next) = t.update(Gradients::PerExample(vec![zero.clone()]), state, &w, ctx).unwrap();
        state = next;
        energy += u.into_mean("dp").unwrap().norm().unwrap().powi(2) / draws as f64;
    }
    let target = 6.0 * (sigma * clip).powi(2);
    assert!((energy / target - 1.0).abs() < 0.05, "{energy} vs {target}");
}

#[test]
fn fit_with_zero_learning_rate_is_a_no_op() {
    let setup = pca_setup(30, 5, 2, 18);
    let out = fit(&setup.problem, setup.start.clone(), &rsgd(0.0), &FitConfig::full_batch(7)).unwrap();
    assert_eq!(out.params.value(), setup.start.value());
    assert_eq!(out.trace.len(), 7);
    let l0 = setup.problem.full_loss(&setup.start).unwrap();
    assert!(out.trace.iter().all(|s| s.loss == l0));
    assert!(fit(&setup.problem, setup.start, &rsgd(0.1), &FitConfig::full_batch(0)).is_err());
}

#[test]
fn pca_trace_decreases_and_iterates_stay_feasible() {
    let setup = pca_setup(200, 50, 5, 19);
    let out = fit(&setup.problem, setup.start.clone(), &rsgd(3e-3), &recorded(100)).unwrap();
    assert_eq!(out.trace.len(), 100);
    for w in out.trace.windows(2).skip(5) {
        assert!(w[1].loss <= w[0].loss + 1e-12);
    }
    assert!(out.trace.last().unwrap().loss < setup.problem.full_loss(&setup.start).unwrap());
    for w in &out.iterates {
        ManifoldPoint::new(w.manifold().clone(), w.value().clone()).unwrap();
    }
    let gap = principal_angles(out.params.value(), setup.start.value());
    assert!(gap.iter().all(|a| a.is_finite()));
}

#[test]
fn updates_are_invariant_to_example_order() {
    let setup = pca_setup(30, 6, 2, 20);
    let w = setup.start.clone();
    let fwd: Vec<usize> = (0..30).collect();
    let rev: Vec<usize> = (0..30).rev().collect();
    let t = dp_rsgd(0.5, 0.0, 1.0, 0).unwrap();
    let run = |batch: &[usize]| {
        let grads = setup.problem.example_grads(&w, batch).unwrap();
        let ctx = StepContext { oracle: &setup.problem, batch };
        let (u, _) = t.update(Gradients::PerExample(grads), t.init(&w).unwrap(), &w, ctx).unwrap();
        u.into_mean("dp").unwrap().into_value()
    };
    assert!((run(&fwd) - run(&rev)).amax() <= 1e-12);
}
