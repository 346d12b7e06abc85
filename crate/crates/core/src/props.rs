//! Seeded randomized checks of the symbol algebra and the homological solver.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::approximation::ApproximationFunction;
use crate::error::Result;
use crate::gevrey::{check_gamma_beta_lemmas, MultiIndex};
use crate::homological::{solve_homological, DivisorFrequency};
use crate::nonresonance::{enumerate_ball, Mode};
use crate::pipeline::{PropertyOutcome, PropsReport};
use crate::symbol::{AngleConvention, SymbolShape, TorusSymbol};

const ALGEBRA_TOL: f64 = 1e-12;

pub(crate) fn run(seed: u64, cases: usize) -> Result<PropsReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut suites = vec![
        outcome("composition_associativity", ALGEBRA_TOL),
        outcome("composition_bilinearity", ALGEBRA_TOL),
        outcome("composition_unit", 0.0),
        outcome("homological_residual", 1e-12),
        outcome("gamma_beta_lemma", 1e-12),
    ];
    for _ in 0..cases {
        let n = rng.gen_range(1..=2);
        let shape = SymbolShape::new(
            rng.gen_range(1..=3),
            rng.gen_range(1..=2),
            rng.gen_range(0..=2),
        );
        let p = random_symbol(&mut rng, n, shape)?;
        let q = random_symbol(&mut rng, n, shape)?;
        let r = random_symbol(&mut rng, n, shape)?;

        let wide = SymbolShape::new(
            shape.h_order,
            3 * shape.fourier_radius,
            3 * shape.taylor_degree,
        );
        let (pq, _) = p.compose_with(&q, wide, AngleConvention::D)?;
        let (pq_r, _) = pq.compose_with(&r, wide, AngleConvention::D)?;
        let (qr, _) = q.compose_with(&r, wide, AngleConvention::D)?;
        let (p_qr, _) = p.compose_with(&qr, wide, AngleConvention::D)?;
        record(&mut suites[0], relative(&pq_r.sub(&p_qr)?, &pq_r));

        let alpha = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let lhs = p
            .add(&q.scale(alpha))?
            .compose_with(&r, wide, AngleConvention::D)?
            .0;
        let (pr, _) = p.compose_with(&r, wide, AngleConvention::D)?;
        let (qr2, _) = q.compose_with(&r, wide, AngleConvention::D)?;
        let rhs = pr.add(&qr2.scale(alpha))?;
        record(&mut suites[1], relative(&lhs.sub(&rhs)?, &lhs));

        let one = TorusSymbol::one(shape, p.base_action().to_vec(), 0.0)?;
        let (left, _) = one.compose(&p)?;
        let (right, _) = p.compose(&one)?;
        let defect = left
            .sub(&p)?
            .norms()
            .total
            .max(right.sub(&p)?.norms().total);
        record(&mut suites[2], defect);

        record(&mut suites[3], homological_case(&mut rng, n)?);

        let x = rng.gen_range(1.0..30.0);
        let y = rng.gen_range(0.05..30.0);
        let rep = check_gamma_beta_lemmas(&[(x, y)])?;
        let lemma_err = if rep.inequality_violations > 0 {
            f64::INFINITY
        } else {
            rep.max_identity_rel_err
        };
        record(&mut suites[4], lemma_err);
    }
    let success = suites.iter().all(|s| s.failures == 0);
    Ok(PropsReport {
        seed,
        suites,
        success,
    })
}

fn outcome(name: &str, tolerance: f64) -> PropertyOutcome {
    PropertyOutcome {
        name: name.into(),
        cases: 0,
        failures: 0,
        worst: 0.0,
        tolerance,
    }
}

fn record(s: &mut PropertyOutcome, err: f64) {
    s.cases += 1;
    if !(err <= s.tolerance) {
        s.failures += 1;
    }
    if err.is_nan() || err > s.worst {
        s.worst = err;
    }
}

fn relative(diff: &TorusSymbol, reference: &TorusSymbol) -> f64 {
    diff.norms().total / reference.norms().total.max(1.0)
}

fn random_symbol(rng: &mut ChaCha8Rng, n: usize, shape: SymbolShape) -> Result<TorusSymbol> {
    let mut s = TorusSymbol::zero(shape, vec![0.0; n], 0.0)?;
    let modes = enumerate_ball(n, shape.fourier_radius)?;
    let gammas = MultiIndex::all_up_to(n, shape.taylor_degree);
    for j in 0..=shape.h_order {
        for _ in 0..rng.gen_range(1..=4) {
            let k = if rng.gen_bool(0.3) {
                Mode::zero(n)
            } else {
                modes[rng.gen_range(0..modes.len())].clone()
            };
            let g = gammas[rng.gen_range(0..gammas.len())].clone();
            let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            s.add_term(j, k, g, c)?;
        }
    }
    Ok(s)
}

fn homological_case(rng: &mut ChaCha8Rng, n: usize) -> Result<f64> {
    let omega: Vec<f64> = if n == 1 {
        vec![1.0]
    } else {
        vec![1.0, (5f64.sqrt() - 1.0) / 2.0]
    };
    let delta = ApproximationFunction::polynomial(2.0, 2.0)?;
    let modes = enumerate_ball(n, 3)?;
    let mut f = crate::symbol::SymbolSlice::zero(n);
    for _ in 0..6 {
        let k = modes[rng.gen_range(0..modes.len())].clone();
        let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        f.add_term(k, MultiIndex::zero(n), c);
    }
    let scale = f.l1_norm().max(1.0);
    let sol = solve_homological(&f, &DivisorFrequency::Constant(omega), &delta, 1e-3, 0)?;
    Ok(sol.residual_sup / scale)
}
