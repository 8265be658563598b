//! Randomized cross-checks of the operator identities, driven by a seeded
//! generator so every run exercises the same cases.

use std::collections::BTreeMap;
use std::sync::Arc;

use proptest::prelude::*;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use bernoulli_calculus::chaos::{
    chaos_truncate, factorial, kernel_of_order, krawtchouk_check, multiple_integral,
    walsh_decompose, walsh_reconstruct, SymmetricKernel,
};
use bernoulli_calculus::finance::change_of_variable_check;
use bernoulli_calculus::identities::{
    clark, covariance_clark, covariance_direct, covariance_iterated, covariance_semigroup,
    variance_sandwich,
};
use bernoulli_calculus::inequalities::{
    deviation_bound_gaussian, deviation_bound_poisson_type, entropy, exact_tail, lsi_report,
};
use bernoulli_calculus::malliavin::{
    divergence, divergence_pointwise, gradient, gradient_all, ou_operator, product_rule_residual,
    semigroup, semigroup_kernel, semigroup_process_contraction_check, skorohod_isometry_sides,
    SkorohodProcess,
};
use bernoulli_calculus::{
    integral, integral_partial, new_space, s_rv, y_rv, BernoulliSpace, Measurability,
    OutcomeIndex, ProcessRV, RandomVariable,
};

fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x5eed_cafe)
}

fn random_space(rng: &mut ChaCha8Rng, max_horizon: usize) -> Arc<BernoulliSpace> {
    let n = rng.gen_range(0..=max_horizon);
    let p: Vec<f64> = (0..=n).map(|_| rng.gen_range(0.05..0.95)).collect();
    new_space(n, &p).unwrap()
}

fn random_rv(rng: &mut ChaCha8Rng, space: &Arc<BernoulliSpace>) -> RandomVariable {
    let values = (0..space.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    RandomVariable::from_values(space, values).unwrap()
}

fn random_predictable(rng: &mut ChaCha8Rng, space: &Arc<BernoulliSpace>) -> ProcessRV {
    let entries: Vec<RandomVariable> = (0..=space.horizon())
        .map(|k| {
            let base = random_rv(rng, space);
            base.conditional_expectation(k as i32 - 1).unwrap()
        })
        .collect();
    ProcessRV::new(space, entries, Measurability::Predictable).unwrap()
}

fn random_process(rng: &mut ChaCha8Rng, space: &Arc<BernoulliSpace>) -> SkorohodProcess {
    let entries = (0..=space.horizon()).map(|_| random_rv(rng, space)).collect();
    SkorohodProcess::new(space, entries).unwrap()
}

#[test]
fn measure_and_noise_moments() {
    let mut rng = rng();
    for _ in 0..20 {
        let s = random_space(&mut rng, 6);
        let total: f64 = s.probabilities().iter().sum();
        assert!((total - 1.0).abs() <= 1e-14);
        for k in 0..=s.horizon() {
            let yk = y_rv(&s, k).unwrap();
            assert!(yk.expectation().abs() <= 1e-12);
            assert!((yk.mul(&yk).unwrap().expectation() - 1.0).abs() <= 1e-12);
            for l in 0..k {
                let yl = y_rv(&s, l).unwrap();
                assert!(yk.mul(&yl).unwrap().expectation().abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn conditional_expectation_is_a_projection() {
    let mut rng = rng();
    for _ in 0..30 {
        let s = random_space(&mut rng, 6);
        let f = random_rv(&mut rng, &s);
        let n1 = rng.gen_range(-1..=s.horizon() as i32);
        let n2 = rng.gen_range(-1..=n1);
        let once = f.conditional_expectation(n2).unwrap();
        let twice = f
            .conditional_expectation(n1)
            .unwrap()
            .conditional_expectation(n2)
            .unwrap();
        for (a, b) in once.values().iter().zip(twice.values()) {
            assert!((a - b).abs() <= 1e-12);
        }
        // tower down to the mean
        assert!(
            (f.conditional_expectation(-1).unwrap().values()[0] - f.expectation()).abs() <= 1e-13
        );
    }
}

#[test]
fn ito_isometry_plain_and_conditional() {
    let mut rng = rng();
    for _ in 0..100 {
        let s = random_space(&mut rng, 8);
        let u = random_predictable(&mut rng, &s);
        let v = random_predictable(&mut rng, &s);
        let ju = integral(&u).unwrap();
        let jv = integral(&v).unwrap();
        let mut inner = RandomVariable::constant(&s, 0.0);
        for k in 0..=s.horizon() {
            inner = inner.add(&u.entry(k).mul(v.entry(k)).unwrap()).unwrap();
        }
        let scale = inner.norm_inf().max(1.0);
        assert!((ju.mul(&jv).unwrap().expectation() - inner.expectation()).abs() <= 1e-12 * scale);
        // conditional version at a random time n
        let n = rng.gen_range(-1..=s.horizon() as i32);
        let head_u = integral_partial(&u, n).unwrap();
        let head_v = integral_partial(&v, n).unwrap();
        let mut tail_inner = RandomVariable::constant(&s, 0.0);
        for k in 0..=s.horizon() {
            if k as i32 > n {
                tail_inner = tail_inner.add(&u.entry(k).mul(v.entry(k)).unwrap()).unwrap();
            }
        }
        let lhs = ju.mul(&jv).unwrap().conditional_expectation(n).unwrap();
        let rhs = head_u
            .mul(&head_v)
            .unwrap()
            .add(&tail_inner.conditional_expectation(n).unwrap())
            .unwrap();
        assert!(lhs.sub(&rhs).unwrap().norm_inf() <= 1e-12 * scale);
    }
}

#[test]
fn walsh_basis_orthonormal_and_complete() {
    let mut rng = rng();
    let s = random_space(&mut rng, 6);
    let basis: Vec<RandomVariable> = (0..s.dim())
        .map(|mask| {
            let mut acc = RandomVariable::constant(&s, 1.0);
            for k in 0..=s.horizon() {
                if mask & (1 << k) != 0 {
                    acc = acc.mul(&y_rv(&s, k).unwrap()).unwrap();
                }
            }
            acc
        })
        .collect();
    for (i, a) in basis.iter().enumerate() {
        for (j, b) in basis.iter().enumerate() {
            let e = a.mul(b).unwrap().expectation();
            let target = if i == j { 1.0 } else { 0.0 };
            assert!((e - target).abs() <= 1e-12, "{i} {j} {e}");
        }
    }
    for _ in 0..100 {
        let s = random_space(&mut rng, 8);
        let f = random_rv(&mut rng, &s);
        let back = walsh_reconstruct(&walsh_decompose(&f));
        assert!(back.sub(&f).unwrap().norm_inf() <= 1e-12);
    }
}

fn random_kernel(rng: &mut ChaCha8Rng, space: &Arc<BernoulliSpace>, order: usize) -> SymmetricKernel {
    if order == 0 {
        return SymmetricKernel::scalar(rng.gen_range(-1.0..1.0));
    }
    let mut entries = BTreeMap::new();
    for mask in 0..space.dim() {
        if (mask as usize).count_ones() as usize == order {
            let key: Vec<usize> = (0..=space.horizon()).filter(|k| mask & (1 << k) != 0).collect();
            entries.insert(key, rng.gen_range(-1.0..1.0));
        }
    }
    SymmetricKernel::from_increasing(order, entries).unwrap()
}

#[test]
fn multiple_integral_isometry() {
    let mut rng = rng();
    for _ in 0..40 {
        let s = random_space(&mut rng, 5);
        let n = rng.gen_range(0..=s.horizon() + 1);
        let m = rng.gen_range(0..=s.horizon() + 1);
        let f = random_kernel(&mut rng, &s, n);
        let g = random_kernel(&mut rng, &s, m);
        let jf = multiple_integral(&s, &f).unwrap();
        let jg = multiple_integral(&s, &g).unwrap();
        let lhs = jf.mul(&jg).unwrap().expectation();
        let rhs = if n == m {
            // n! <f, g> over distinct tuples = (n!)^2 * sum over increasing
            let mut dot = 0.0;
            for (key, &v) in f.entries() {
                dot += v * g.get(key);
            }
            factorial(n) * factorial(n) * dot
        } else {
            0.0
        };
        assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0), "{lhs} vs {rhs}");
        if n >= 1 {
            assert!(jf.expectation().abs() <= 1e-12);
        }
    }
}

#[test]
fn multiple_integral_recurrence() {
    // J_n(f) = n sum_k Y_k J_{n-1}(f(*,k) restricted below k)
    let mut rng = rng();
    for _ in 0..20 {
        let s = random_space(&mut rng, 5);
        let max_order = (s.horizon() + 1).min(3);
        let n = rng.gen_range(1..=max_order);
        let f = random_kernel(&mut rng, &s, n);
        let jf = multiple_integral(&s, &f).unwrap();
        let mut acc = RandomVariable::constant(&s, 0.0);
        for k in 0..=s.horizon() {
            let mut entries = BTreeMap::new();
            for (key, &v) in f.entries() {
                if key.last() == Some(&k) {
                    let head: Vec<usize> = key[..n - 1].to_vec();
                    if head.iter().all(|&i| i < k) {
                        entries.insert(head, v);
                    }
                }
            }
            let gk = if n == 1 {
                SymmetricKernel::scalar(entries.get(&Vec::new()).copied().unwrap_or(0.0))
            } else {
                SymmetricKernel::from_increasing(n - 1, entries).unwrap()
            };
            let jk = multiple_integral(&s, &gk).unwrap();
            let yk = y_rv(&s, k).unwrap();
            acc = acc.add(&jk.mul(&yk).unwrap().scale(n as f64)).unwrap();
        }
        // J_{n-1} of the section carries (n-1)!; the n! of J_n appears as
        // n * (n-1)!
        assert!(jf.sub(&acc).unwrap().norm_inf() <= 1e-12 * jf.norm_inf().max(1.0));
    }
}

#[test]
fn chaos_truncation_matches_conditioning_and_dimension_count() {
    let mut rng = rng();
    let s = random_space(&mut rng, 5);
    let f = random_rv(&mut rng, &s);
    let e = walsh_decompose(&f);
    for n in -1..=s.horizon() as i32 {
        let t = chaos_truncate(&e, n).unwrap();
        let direct = walsh_decompose(&f.conditional_expectation(n).unwrap());
        for (mask, v) in t.coeffs() {
            assert!((v - direct.coeff(*mask)).abs() <= 1e-12);
        }
        for (mask, v) in direct.coeffs() {
            assert!((v - t.coeff(*mask)).abs() <= 1e-12);
        }
        // subsets of size l inside {0..n} number C(n+1, l)
        if n >= 0 {
            for l in 0..=(n as usize + 1) {
                let count = (0usize..s.dim())
                    .filter(|m| {
                        m.count_ones() as usize == l && *m < (1usize << (n as usize + 1))
                    })
                    .count();
                let choose = (0..l).fold(1usize, |acc, i| acc * (n as usize + 1 - i) / (i + 1));
                assert_eq!(count, choose);
            }
        }
    }
}

#[test]
fn krawtchouk_measurable_in_the_walk_with_exact_degree() {
    for horizon in 0..=6usize {
        for n in 1..=horizon + 1 {
            let s = new_space(horizon, &vec![0.3; horizon + 1]).unwrap();
            let (rv, table) = krawtchouk_check(&s, n).unwrap();
            let walk = s_rv(&s, horizon).unwrap();
            for i in 0..s.dim() {
                let w = OutcomeIndex(i);
                let sv = walk.value(w) as usize;
                assert!((rv.value(w) - table[sv]).abs() <= 1e-12);
            }
            // finite differences: degree exactly n
            let mut diffs = table.clone();
            for d in 1..=n {
                diffs = diffs.windows(2).map(|w| w[1] - w[0]).collect();
                if d == n {
                    assert!(diffs.iter().any(|v| v.abs() > 1e-10));
                }
            }
            if !diffs.is_empty() {
                diffs = diffs.windows(2).map(|w| w[1] - w[0]).collect();
                for v in diffs {
                    assert!(v.abs() <= 1e-9, "degree above {n}");
                }
            }
        }
    }
}

#[test]
fn gradient_columns_are_flip_invariant() {
    let mut rng = rng();
    for _ in 0..20 {
        let s = random_space(&mut rng, 6);
        let f = random_rv(&mut rng, &s);
        for (k, col) in gradient_all(&f).columns().iter().enumerate() {
            for i in 0..s.dim() {
                let w = OutcomeIndex(i);
                assert_eq!(col.value(w.with_plus(k)), col.value(w.with_minus(k)));
            }
        }
    }
}

#[test]
fn adjointness_of_gradient_and_divergence() {
    let mut rng = rng();
    for _ in 0..200 {
        let s = random_space(&mut rng, 7);
        let f = random_rv(&mut rng, &s);
        let u = random_process(&mut rng, &s);
        let mut pairing = 0.0;
        for k in 0..=s.horizon() {
            pairing += gradient(&f, k).unwrap().mul(u.entry(k)).unwrap().expectation();
        }
        let dual = f.mul(&divergence(&u).unwrap()).unwrap().expectation();
        let scale = pairing.abs().max(1.0);
        assert!((pairing - dual).abs() <= 1e-12 * scale);
    }
}

#[test]
fn divergence_routes_and_isometry() {
    let mut rng = rng();
    for _ in 0..100 {
        let s = random_space(&mut rng, 6);
        let u = random_process(&mut rng, &s);
        let a = divergence(&u).unwrap();
        let b = divergence_pointwise(&u).unwrap();
        assert!(a.sub(&b).unwrap().norm_inf() <= 1e-12);
        let (lhs, rhs) = skorohod_isometry_sides(&u).unwrap();
        assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
    }
}

#[test]
fn clark_compatible_with_conditioning() {
    let mut rng = rng();
    for _ in 0..30 {
        let s = random_space(&mut rng, 6);
        let f = random_rv(&mut rng, &s);
        for k in 0..=s.horizon() {
            let lhs = gradient(&f, k)
                .unwrap()
                .conditional_expectation(k as i32 - 1)
                .unwrap();
            let rhs = gradient(&f.conditional_expectation(k as i32).unwrap(), k).unwrap();
            assert!(lhs.sub(&rhs).unwrap().norm_inf() <= 1e-12);
        }
    }
}

#[test]
fn semigroup_law_positivity_and_kernel_agreement() {
    let mut rng = rng();
    for _ in 0..20 {
        let s = random_space(&mut rng, 6);
        let f = random_rv(&mut rng, &s);
        let (t1, t2) = (rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0));
        let chained = semigroup(&semigroup(&f, t1).unwrap(), t2).unwrap();
        let joint = semigroup(&f, t1 + t2).unwrap();
        assert!(chained.sub(&joint).unwrap().norm_inf() <= 1e-12);
        let pos = f.map(|v| v.abs());
        assert!(semigroup(&pos, t1).unwrap().min() >= -1e-12);
        for &t in &[0.1, 1.0, 10.0] {
            let spectral = semigroup(&f, t).unwrap();
            let kernel = semigroup_kernel(&f, t).unwrap();
            assert!(spectral.sub(&kernel).unwrap().norm_inf() <= 1e-10);
        }
        // kernel rows integrate to one: P_t of the constant is the constant
        let one = RandomVariable::constant(&s, 1.0);
        let row = semigroup_kernel(&one, t1).unwrap();
        assert!(row.shift(-1.0).norm_inf() <= 1e-12);
    }
}

#[test]
fn ou_operator_is_divergence_of_gradient() {
    let mut rng = rng();
    for _ in 0..20 {
        let s = random_space(&mut rng, 6);
        let f = random_rv(&mut rng, &s);
        let spectral = ou_operator(&f);
        let composed = divergence(&SkorohodProcess::new(
            &s,
            gradient_all(&f).columns().to_vec(),
        )
        .unwrap())
        .unwrap();
        assert!(spectral.sub(&composed).unwrap().norm_inf() <= 1e-12);
    }
}

#[test]
fn semigroup_contracts_process_sup_norms() {
    let mut rng = rng();
    for _ in 0..100 {
        let s = random_space(&mut rng, 5);
        let u = random_process(&mut rng, &s);
        let t = rng.gen_range(0.0..3.0);
        let (lhs, rhs) = semigroup_process_contraction_check(&u, t).unwrap();
        assert!(lhs <= rhs + 1e-12);
    }
}

#[test]
fn gradient_of_exponential_identity() {
    let mut rng = rng();
    for _ in 0..30 {
        let s = random_space(&mut rng, 5);
        let f = random_rv(&mut rng, &s);
        let ef = f.map(f64::exp);
        for k in 0..=s.horizon() {
            let lhs = gradient(&ef, k).unwrap();
            let df = gradient(&f, k).unwrap();
            let sq = s.sqrt_pq(k);
            let rhs = RandomVariable::from_fn(&s, |w| {
                let x = w.x(k) as f64;
                x * sq * ef.value(w) * (1.0 - (-x * df.value(w) / sq).exp())
            });
            let scale = lhs.norm_inf().max(1.0);
            assert!(lhs.sub(&rhs).unwrap().norm_inf() <= 1e-10 * scale);
        }
    }
}

#[test]
fn clark_reconstruction_and_operator_bound() {
    let mut rng = rng();
    for _ in 0..200 {
        let s = random_space(&mut rng, 8);
        let f = random_rv(&mut rng, &s);
        let d = clark(&f);
        let residual = d.reconstruct().sub(&f).unwrap().norm_inf();
        assert!(residual <= 1e-12 * f.norm_inf().max(1.0));
        let u_sq: f64 = d
            .integrand
            .entries()
            .iter()
            .map(|u| u.map(|v| v * v).expectation())
            .sum();
        assert!(u_sq.sqrt() <= f.norm_l2() + 1e-12);
    }
}

#[test]
fn covariance_quadrilateral_and_sandwich() {
    let mut rng = rng();
    for _ in 0..60 {
        let s = random_space(&mut rng, 6);
        let f = random_rv(&mut rng, &s);
        let g = random_rv(&mut rng, &s);
        let base = covariance_direct(&f, &g).unwrap();
        let scale = base.abs().max(1.0);
        assert!((covariance_clark(&f, &g).unwrap() - base).abs() <= 1e-12 * scale);
        assert!((covariance_semigroup(&f, &g).unwrap() - base).abs() <= 1e-12 * scale);
        for n in 0..=3 {
            assert!((covariance_iterated(&f, &g, n).unwrap() - base).abs() <= 1e-12 * scale);
        }
        let var = covariance_direct(&f, &f).unwrap();
        for n in 1..=3 {
            let (lo, hi) = variance_sandwich(&f, n);
            assert!(lo - 1e-12 <= var && var <= hi + 1e-12);
        }
    }
}

#[test]
fn lsi_chain_on_random_positive_functionals() {
    let mut rng = rng();
    for _ in 0..200 {
        let s = random_space(&mut rng, 5);
        let f = random_rv(&mut rng, &s).map(|v| 0.2 + (v + 1.2).abs());
        let r = lsi_report(&f).unwrap();
        assert!(r.entropy >= -1e-12);
        for rhs in [r.rhs_modified, r.rhs_l1, r.rhs_optimal, r.rhs_sharp] {
            assert!(r.entropy <= rhs + 1e-12);
        }
        assert!(r.rhs_sharp <= r.rhs_optimal + 1e-12);
        assert!(r.rhs_sharp <= r.rhs_modified + 1e-12);
    }
}

#[test]
fn deviation_bounds_dominate_random_monotone_functionals() {
    let mut rng = rng();
    for _ in 0..20 {
        let n = rng.gen_range(2..=10usize);
        let p: Vec<f64> = (0..=n).map(|_| rng.gen_range(0.2..0.8)).collect();
        let s = new_space(n, &p).unwrap();
        let weights: Vec<f64> = (0..=n).map(|_| rng.gen_range(0.0..1.0)).collect();
        let f = RandomVariable::from_fn(&s, |w| {
            (0..=n).map(|k| weights[k] * w.z(k) as f64).sum()
        });
        let mean = f.expectation();
        let top = f.values().iter().fold(0.0f64, |m, v| m.max(v - mean));
        for i in 0..20 {
            let x = top * i as f64 / 19.0;
            let tail = exact_tail(&f, x);
            assert!(deviation_bound_poisson_type(&f, x).unwrap() >= tail - 1e-12);
            assert!(deviation_bound_gaussian(&f, x).unwrap() >= tail - 1e-12);
        }
    }
}

#[test]
fn entropy_tensorization_on_random_independent_pairs() {
    let mut rng = rng();
    for _ in 0..30 {
        let s = random_space(&mut rng, 5);
        let n = s.horizon();
        if n == 0 {
            continue;
        }
        let split = rng.gen_range(0..n);
        let base_f = random_rv(&mut rng, &s).map(|v| 0.3 + (v + 1.1).abs());
        let base_g = random_rv(&mut rng, &s).map(|v| 0.3 + (v + 1.1).abs());
        // make f depend on bits <= split and g on bits > split only
        let f = base_f.conditional_expectation(split as i32).unwrap();
        let g = RandomVariable::from_fn(&s, |w| {
            // mirror: average of base_g over low bits, evaluated on high bits
            base_g.value(OutcomeIndex(w.0 & !((1 << (split + 1)) - 1)))
        });
        let prod = f.mul(&g).unwrap();
        let rhs = f.scale(entropy(&g).unwrap()).expectation()
            + g.scale(entropy(&f).unwrap()).expectation();
        assert!((entropy(&prod).unwrap() - rhs).abs() <= 1e-12);
    }
}

#[test]
fn change_of_variable_on_random_martingales() {
    let mut rng = rng();
    for _ in 0..20 {
        let s = random_space(&mut rng, 8);
        let f = random_rv(&mut rng, &s);
        let m: Vec<RandomVariable> = (-1..=s.horizon() as i32)
            .map(|k| f.conditional_expectation(k).unwrap())
            .collect();
        assert!(change_of_variable_check(&m, |x, _| x).unwrap() <= 1e-10);
        assert!(change_of_variable_check(&m, |x, _| x * x).unwrap() <= 1e-10);
        assert!(change_of_variable_check(&m, |x, _| x * x * x).unwrap() <= 1e-10);
        assert!(change_of_variable_check(&m, |x, _| x.abs()).unwrap() <= 1e-10);
    }
}

#[test]
fn kernel_round_trip_through_expansion() {
    let mut rng = rng();
    let s = random_space(&mut rng, 5);
    let f = random_rv(&mut rng, &s);
    let e = walsh_decompose(&f);
    let mut rebuilt = RandomVariable::constant(&s, 0.0);
    for n in 0..=s.horizon() + 1 {
        let kn = kernel_of_order(&e, n);
        rebuilt = rebuilt.add(&multiple_integral(&s, &kn).unwrap()).unwrap();
    }
    assert!(rebuilt.sub(&f).unwrap().norm_inf() <= 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn structure_equation_always_holds(p in 0.01f64..0.99) {
        let s = new_space(0, &[p]).unwrap();
        let y = y_rv(&s, 0).unwrap();
        for i in 0..s.dim() {
            let v = y.value(OutcomeIndex(i));
            prop_assert!((v * v - 1.0 - s.phi(0) * v).abs() <= 1e-13);
        }
    }

    #[test]
    fn product_rule_for_random_tables(
        p in 0.05f64..0.95,
        q in 0.05f64..0.95,
        vals in proptest::collection::vec(-2.0f64..2.0, 8),
    ) {
        let s = new_space(1, &[p, q]).unwrap();
        let f = RandomVariable::from_values(&s, vals[..4].to_vec()).unwrap();
        let g = RandomVariable::from_values(&s, vals[4..].to_vec()).unwrap();
        for k in 0..=1 {
            prop_assert!(product_rule_residual(&f, &g, k).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn divergence_is_dual_to_gradient_for_two_coordinates(
        p in 0.05f64..0.95,
        fv in proptest::collection::vec(-1.0f64..1.0, 4),
        uv in proptest::collection::vec(-1.0f64..1.0, 8),
    ) {
        let s = new_space(1, &[p, 0.5]).unwrap();
        let f = RandomVariable::from_values(&s, fv).unwrap();
        let u = SkorohodProcess::new(&s, vec![
            RandomVariable::from_values(&s, uv[..4].to_vec()).unwrap(),
            RandomVariable::from_values(&s, uv[4..].to_vec()).unwrap(),
        ]).unwrap();
        let mut pairing = 0.0;
        for k in 0..=1 {
            pairing += gradient(&f, k).unwrap().mul(u.entry(k)).unwrap().expectation();
        }
        let dual = f.mul(&divergence(&u).unwrap()).unwrap().expectation();
        prop_assert!((pairing - dual).abs() <= 1e-12 * pairing.abs().max(1.0));
    }
}
