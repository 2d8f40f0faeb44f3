//! Acceptance gate. Each test prints one `criterion N: PASS|FAIL` line and asserts the
//! criterion with its pinned tolerance.

mod common;

use common::{centered_rows, instance, random_space, report, rng, uniform};
use devport::allocation::{allocation_robustness, capital_allocation, deviation_function, solve_cooperative};
use devport::blacklitterman::{bl_pipeline, Posterior};
use devport::envelope::{build_cvar, build_mad, build_mixed_cvar, scale, CvarTerm, EnvelopeSpec, RiskEnvelope};
use devport::forward::{diagnose_uniqueness, portfolio_risk_generators, solve_forward, solve_with_generators};
use devport::geometry::{
    hull_contains, minkowski_sum, same_vertex_set, steiner_point, steiner_point_monte_carlo, SteinerConfig,
    SteinerMethod, VPolytope,
};
use devport::golden::perms3;
use devport::inverse::{inverse_solution_set, is_optimal_for, robust_mu, verify_dichotomy};
use devport::linalg::dot;
use devport::lp::{solve, LinearProgram, LpStatus};
use devport::probspace::{FiniteProbSpace, MarketModel, RandomVariable};
use devport::selector::{law_invariant_selector, level_sets, robust_selector, steiner_selector};
use rand::Rng;
use rand_distr::StandardNormal;
use std::sync::Arc;

const TOL: f64 = 1e-9;

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Collects failed sub-checks so every criterion prints a single verdict.
#[derive(Default)]
struct Failures(Vec<String>);

impl Failures {
    fn check(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.0.push(what.into());
        }
    }

    fn finish(self, criterion: u32, summary: &str) {
        let passed = self.0.is_empty();
        let detail = if passed {
            summary.to_string()
        } else {
            format!("{summary}; failed: {}", self.0.join("; "))
        };
        report(criterion, passed, &detail);
        assert!(passed, "criterion {criterion}: {}", self.0.join("; "));
    }
}

fn two_asset_market(scenarios: &[[f64; 2]], mu: [f64; 2]) -> MarketModel {
    let rows = (0..2).map(|i| scenarios.iter().map(|s| s[i]).collect()).collect();
    MarketModel::from_centered(uniform(scenarios.len()), rows, mu.to_vec(), 0.0).unwrap()
}

#[test]
fn criterion_01_cooperative_golden() {
    let mut f = Failures::default();
    let space = uniform(3);
    let agents = [build_cvar(space.clone(), 2.0 / 3.0).unwrap(), scale(&build_mad(space).unwrap(), 0.5).unwrap()];
    let returns = vec![vec![-1.0, 1.0, 1.0], vec![-1.0, -1.0, 7.0]];
    let s = solve_cooperative(&returns, &agents, None, &SteinerConfig::default()).unwrap();

    f.check((s.individual[0].x[1] - 0.0).abs() <= TOL, "agent 1 t");
    f.check((s.individual[0].utility - 0.0).abs() <= TOL, "u₁*");
    f.check((s.individual[1].x[1] - 0.2).abs() <= TOL, "agent 2 t");
    f.check((s.individual[1].utility - 1.0 / 15.0).abs() <= TOL, "u₂*");
    f.check((s.joint.x[1] - 0.2).abs() <= TOL, "cooperative t");
    f.check((s.joint.value - 2.0 / 15.0).abs() <= TOL, "u*");

    // Grid oracle for the individual problems: uᵢ(t) = min_Q E[Q·((1−t)r₁ + t r₂)].
    for (i, env) in agents.iter().enumerate() {
        let u = |t: f64| {
            let x: Vec<f64> = (0..3).map(|j| (1.0 - t) * returns[0][j] + t * returns[1][j]).collect();
            env.generators()
                .iter()
                .map(|q| dot(q, &x) / 3.0)
                .fold(f64::INFINITY, f64::min)
        };
        let best = (-3000..=3000).map(|k| u(k as f64 * 1e-3)).fold(f64::NEG_INFINITY, f64::max);
        f.check((best - s.individual[i].utility).abs() <= 1e-9, format!("agent {} grid optimum", i + 1));
    }

    let mut q_star = perms3([1.5, 1.0, 0.5]);
    q_star.extend(perms3([4.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0]));
    f.check(same_vertex_set(&q_star, &s.coalition, TOL), "𝒬* vertices");
    for q in &q_star {
        f.check(
            agents.iter().all(|e| hull_contains(e.generators(), q)),
            format!("{q:?} in both envelopes"),
        );
    }
    let sp = &s.side_payments;
    f.check(close(&sp.q_star, &[17.0 / 12.0, 7.0 / 6.0, 5.0 / 12.0], TOL), "Q*");
    f.check((sp.payments[0] + 1.0 / 15.0).abs() <= TOL, "C");
    f.check(close(&sp.final_shares[0], &[1.0 / 15.0; 3], TOL), "final share 1");
    f.check(
        close(&sp.final_shares[1], &[-31.0 / 15.0, 17.0 / 15.0, 13.0 / 3.0], TOL),
        "final share 2",
    );
    let priced: Vec<f64> = sp.final_shares.iter().map(|y| dot(&sp.q_star, y) / 3.0).collect();
    f.check(close(&priced, &[1.0 / 15.0, 1.0 / 15.0], TOL), "equal valuation under Q*");
    f.finish(1, "cooperative binary options: optima, 𝒬*, Q*, C and final shares at 1e-9");
}

#[test]
fn criterion_02_mad_golden() {
    let mut f = Failures::default();
    let m = two_asset_market(&[[-1.0, -2.0], [-1.0, 1.0], [2.0, 1.0]], [0.4, 0.6]);
    let env = build_mad(m.space.clone()).unwrap();
    let (gens, sol) = solve_forward(&m, &env, 0.5).unwrap();
    f.check(close(&sol.x, &[0.5, 0.5], TOL), "x*");
    let xs = m.portfolio(&sol.x).unwrap();
    let mean = xs.iter().sum::<f64>() / 3.0;
    let mad = xs.iter().map(|v| (v - mean).abs()).sum::<f64>() / 3.0;
    f.check((mad - 1.0).abs() <= TOL && (sol.value - 1.0).abs() <= TOL, "MAD(X*) = 1");

    let mu_z = |z: f64| vec![0.5 - z / 6.0, 0.5 + z / 6.0];
    let (_, set) = inverse_solution_set(&m, &env, &[0.5, 0.5], 0.5).unwrap();
    f.check(same_vertex_set(&[mu_z(-1.0), mu_z(1.0)], &set.vertices, TOL), "ℳ endpoints");
    for k in -10..=10 {
        let z = k as f64 / 10.0;
        f.check(is_optimal_for(&gens, &mu_z(z), &[0.5, 0.5], 0.5).unwrap(), format!("μ({z}) optimal"));
    }
    for z in [-1.2, 1.2] {
        f.check(!is_optimal_for(&gens, &mu_z(z), &[0.5, 0.5], 0.5).unwrap(), format!("μ({z}) rejected"));
    }
    let r = robust_mu(&m, &env, &[0.5, 0.5], 0.5, &SteinerConfig::default()).unwrap();
    f.check(close(&r.mu, &[0.5, 0.5], TOL), "robust μ");
    f.finish(2, "MAD two-asset: x*, MAD(X*), ℳ = μ(z), robust μ at 1e-9");
}

#[test]
fn criterion_03_cvar_golden() {
    let mut f = Failures::default();
    let m = two_asset_market(&[[-1.0, 0.0], [0.0, -1.0], [1.0, 1.0]], [1.0 / 3.0, 2.0 / 3.0]);
    let env = build_cvar(m.space.clone(), 0.05).unwrap();
    let (gens, sol) = solve_forward(&m, &env, 0.5).unwrap();
    f.check(close(&sol.x, &[0.5, 0.5], TOL) && sol.unique, "unique x*");
    let xs = m.portfolio(&sol.x).unwrap();
    let ids = env.risk_identifiers(&xs, TOL).unwrap();
    f.check(
        same_vertex_set(&[vec![3.0, 0.0, 0.0], vec![0.0, 3.0, 0.0]], ids.polytope.vertices(), TOL),
        "identifier family endpoints",
    );
    for k in 0..=30 {
        let q = k as f64 / 10.0;
        let qv = [q, 3.0 - q, 0.0];
        f.check(env.is_identifier(&xs, &qv, TOL).unwrap(), format!("(q, 3−q, 0) q = {q}"));
        f.check(
            is_optimal_for(&gens, &[q / 3.0, (3.0 - q) / 3.0], &[0.5, 0.5], 0.5).unwrap(),
            format!("(q/3, (3−q)/3) q = {q}"),
        );
    }
    let (_, set) = inverse_solution_set(&m, &env, &[0.5, 0.5], 0.5).unwrap();
    f.check(same_vertex_set(&[vec![1.0, 0.0], vec![0.0, 1.0]], &set.vertices, TOL), "ℳ endpoints");
    let q = robust_selector(&env, &xs, &SteinerConfig::default()).unwrap();
    f.check(close(&q.q, &[1.5, 1.5, 0.0], TOL), "robust q = 1.5");
    let r = robust_mu(&m, &env, &[0.5, 0.5], 0.5, &SteinerConfig::default()).unwrap();
    f.check(close(&r.mu, &[0.5, 0.5], TOL), "robust μ");
    f.finish(3, "CVaR three-scenario: x*, (q, 3−q, 0), ℳ, robust q = 1.5 at 1e-9");
}

#[test]
fn criterion_04_black_litterman_golden() {
    let mut f = Failures::default();
    let m = two_asset_market(&[[-1.0, 0.0], [0.0, -1.0], [1.0, 1.0]], [0.0, 0.5]);
    let env = build_cvar(m.space.clone(), 0.05).unwrap();
    let gens = portfolio_risk_generators(&m, &env).unwrap();
    f.check(
        same_vertex_set(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, -1.0]], &gens.generators, TOL),
        "D generators",
    );
    let (_, set) = inverse_solution_set(&m, &env, &[0.2, 0.8], 0.4).unwrap();
    f.check(same_vertex_set(&[vec![0.0, 0.5]], &set.vertices, TOL), "unique μ*");
    let post = Posterior::Override {
        posterior_weights: vec![0.25, 0.25, 0.5],
    };
    let spec = EnvelopeSpec::Cvar { alpha: 0.05 };
    let r = bl_pipeline(&m, &spec, &[0.2, 0.8], 0.4, &post, Default::default(), &SteinerConfig::default()).unwrap();
    f.check(
        same_vertex_set(&[vec![-1.6, 0.8], vec![0.8, 0.8]], &r.prior_forward.optimal_set, 1e-8),
        "no-view optimal face",
    );
    f.check(
        r.prior_forward.optimal_set.iter().all(|v| (v[1] - 0.8).abs() <= 1e-8 && v[0] >= -1.6 - 1e-8 && v[0] <= 0.8 + 1e-8),
        "face lies on x₂ = 0.8",
    );
    f.check(close(&r.mu_post, &[0.25, 0.75], TOL), "μ_post");
    f.check(r.posterior_forward.unique && close(&r.posterior_forward.x, &[0.4, 0.4], TOL), "unique x*");
    let post_market = MarketModel::from_centered(
        Arc::new(FiniteProbSpace::new(r.posterior_weights.clone()).unwrap()),
        r.posterior_centered.clone(),
        r.mu_post.clone(),
        0.0,
    )
    .unwrap();
    let post_env = build_cvar(post_market.space.clone(), 0.05).unwrap();
    let post_gens = portfolio_risk_generators(&post_market, &post_env).unwrap();
    let active: Vec<Vec<f64>> = r.posterior_forward.active.iter().map(|&i| post_gens.generators[i].clone()).collect();
    f.check(same_vertex_set(&[vec![1.25, 0.25], vec![0.25, 1.25]], &active, TOL), "active D′₁, D′₂");
    f.finish(4, "Black-Litterman reweighting: D, μ*, no-view face, μ_post, x*, active set");
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

#[test]
fn criterion_05_envelope_cardinalities() {
    let mut f = Failures::default();
    for n in 2..=5 {
        let got = build_mad(uniform(n)).unwrap().len();
        f.check(got == (1 << n) - 2, format!("MAD N={n}: {got}"));
    }
    let mut cvar_cases = 0;
    // α = k/N must lie in (0, 1), so k runs over 1..N.
    for n in 2..=8 {
        for k in 1..n {
            let got = build_cvar(uniform(n), k as f64 / n as f64).unwrap().len();
            f.check(got == binomial(n, k), format!("CVaR N={n} α={k}/{n}: {got}"));
            cvar_cases += 1;
        }
    }
    f.finish(5, &format!("MAD 2ᴺ−2 for N=2..5, CVaR C(N,k) on {cvar_cases} (N,k) pairs, exact"));
}

fn random_points(r: &mut impl Rng, count: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| (0..dim).map(|_| r.sample::<f64, _>(StandardNormal)).collect())
        .collect()
}

fn rotation(r: &mut impl Rng) -> [[f64; 3]; 3] {
    let [a, b, c]: [f64; 3] = std::array::from_fn(|_| r.random_range(0.0..std::f64::consts::TAU));
    let rz = |t: f64| [[t.cos(), -t.sin(), 0.0], [t.sin(), t.cos(), 0.0], [0.0, 0.0, 1.0]];
    let ry = |t: f64| [[t.cos(), 0.0, t.sin()], [0.0, 1.0, 0.0], [-t.sin(), 0.0, t.cos()]];
    let mul = |p: [[f64; 3]; 3], q: [[f64; 3]; 3]| {
        std::array::from_fn(|i| std::array::from_fn(|j| (0..3).map(|k| p[i][k] * q[k][j]).sum()))
    };
    mul(mul(rz(a), ry(b)), rz(c))
}

fn apply(m: &[[f64; 3]; 3], v: &[f64]) -> Vec<f64> {
    (0..3).map(|i| dot(&m[i], v)).collect()
}

/// Largest |a − b| in units of the combined per-coordinate standard error.
fn within(a: &[f64], b: &[f64], se: &[f64]) -> bool {
    a.iter().zip(b).zip(se).all(|((x, y), s)| (x - y).abs() <= 3.0 * s + 1e-12)
}

#[test]
fn criterion_06_steiner_properties() {
    let mut f = Failures::default();
    let cfg = |seed| SteinerConfig { seed, ..Default::default() };
    let mut r = rng(6);
    let mut checked = 0;

    for dim in 1..=4 {
        let p = random_points(&mut r, 1, dim).remove(0);
        let s = steiner_point(&VPolytope::point(p.clone()), &cfg(0));
        f.check(s.point == p && s.method == SteinerMethod::Exact, format!("singleton d={dim}"));
    }

    for i in 0..50u64 {
        let p = VPolytope::new(random_points(&mut r, 3 + (i % 6) as usize, 2)).unwrap();
        let exact = steiner_point(&p, &cfg(i));
        let mc = steiner_point_monte_carlo(&p, &cfg(i));
        f.check(exact.method == SteinerMethod::Exact, format!("polygon {i} exact path"));
        f.check(hull_contains(p.vertices(), &exact.point), format!("polygon {i} membership"));
        if !within(&exact.point, &mc.point, &mc.error) {
            f.check(false, format!("polygon {i}: |exact − MC| = {:.2e}, 3σ = {:?}", max_gap(&exact.point, &mc.point), mc.error));
        }
        checked += 1;
    }

    for i in 0..25u64 {
        let a = VPolytope::new(random_points(&mut r, 4 + (i % 4) as usize, 3)).unwrap();
        let b = VPolytope::new(random_points(&mut r, 4 + ((i + 1) % 4) as usize, 3)).unwrap();
        let ab = minkowski_sum(&a, &b).unwrap();
        let (sa, sb, sab) = (steiner_point(&a, &cfg(i)), steiner_point(&b, &cfg(100 + i)), steiner_point(&ab, &cfg(200 + i)));
        for (name, p, s) in [("A", &a, &sa), ("B", &b, &sb), ("A+B", &ab, &sab)] {
            f.check(hull_contains(p.vertices(), &s.point), format!("pair {i} {name} membership"));
        }
        let sum: Vec<f64> = sa.point.iter().zip(&sb.point).map(|(x, y)| x + y).collect();
        let se: Vec<f64> = (0..3).map(|j| (sa.error[j].powi(2) + sb.error[j].powi(2) + sab.error[j].powi(2)).sqrt()).collect();
        if !within(&sab.point, &sum, &se) {
            f.check(false, format!("pair {i} additivity gap {:.2e}", max_gap(&sab.point, &sum)));
        }

        let rot = rotation(&mut r);
        let ra = VPolytope::new(a.vertices().iter().map(|v| apply(&rot, v)).collect()).unwrap();
        let sra = steiner_point(&ra, &cfg(300 + i));
        let rsa = apply(&rot, &sa.point);
        // Coordinates of one estimate are correlated, so the rotated error is bounded by Σ|Rⱼₖ|σₖ.
        let se: Vec<f64> = (0..3)
            .map(|j| (sra.error[j].powi(2) + (0..3).map(|k| rot[j][k].abs() * sa.error[k]).sum::<f64>().powi(2)).sqrt())
            .collect();
        if !within(&sra.point, &rsa, &se) {
            f.check(false, format!("pair {i} rotation gap {:.2e}", max_gap(&sra.point, &rsa)));
        }
        checked += 1;
    }
    f.finish(6, &format!("membership, singleton, {checked} seeded exact/MC, additivity and rotation comparisons within 3σ"));
}

#[test]
fn criterion_07_dichotomy() {
    let mut fwd_cases = 0;
    let mut inv_cases = 0;
    let mut violations: Vec<String> = Vec::new();
    let mut min_vertices_over_n: Option<i64> = None;
    for seed in 0..50u64 {
        let inst = instance(seed);
        let n = inst.market.assets();
        let x_m = if seed % 2 == 0 {
            solve_with_generators(&inst.gens, &inst.market.mu, 1.0).unwrap().x
        } else {
            let mut r = rng(7_000 + seed);
            (0..n).map(|_| r.random_range(-1.0..1.0)).collect::<Vec<f64>>()
        };
        let report = match verify_dichotomy(&inst.market, &inst.envelope, &x_m, 1.0) {
            Ok(rep) => rep,
            Err(e) => {
                violations.push(format!("seed {seed}: {e}"));
                continue;
            }
        };
        let (_, set) = inverse_solution_set(&inst.market, &inst.envelope, &x_m, 1.0).unwrap();
        let k = set.vertices.len() as f64;
        let centroid: Vec<f64> = (0..n).map(|j| set.vertices.iter().map(|v| v[j]).sum::<f64>() / k).collect();
        let at_centroid = solve_with_generators(&inst.gens, &centroid, 1.0).unwrap();
        if at_centroid.unique && same_vertex_set(&[x_m.clone()], &at_centroid.optimal_set, 1e-7) {
            fwd_cases += 1;
            let gap = set.vertices.len() as i64 - n as i64;
            min_vertices_over_n = Some(min_vertices_over_n.map_or(gap, |g| g.min(gap)));
            if set.vertices.len() < n + 1 {
                violations.push(format!(
                    "seed {seed} ({:?}, n={n}, N={}): unique forward solution but |vert ℳ| = {}",
                    inst.measure,
                    inst.market.scenarios(),
                    set.vertices.len()
                ));
            }
        }
        if inst.gens.active(&x_m, 1e-9).len() == 1 {
            inv_cases += 1;
            let face = solve_with_generators(&inst.gens, &set.vertices[0], 1.0).unwrap().optimal_polytope();
            if !(set.is_singleton() && face.len() >= n && face.affine_dim() == n - 1) {
                violations.push(format!(
                    "seed {seed}: single active generator but |ℳ| = {}, face has {} vertices",
                    set.vertices.len(),
                    face.len()
                ));
            }
            if report.forward_face_vertices != Some(face.len()) {
                violations.push(format!("seed {seed}: dichotomy report disagrees on the forward face"));
            }
        }
    }
    let passed = violations.is_empty();
    let detail = format!(
        "{fwd_cases} unique-forward and {inv_cases} unique-inverse instances; min |vert ℳ| − n = {:?}; {} violation(s){}",
        min_vertices_over_n,
        violations.len(),
        violations.first().map(|v| format!(", first: {v}")).unwrap_or_default()
    );
    report(7, passed, &detail);
    assert!(fwd_cases > 0 && inv_cases > 0, "both branches must be exercised");
    assert!(passed, "{}", violations.join("\n"));
}

#[test]
fn criterion_08_generic_uniqueness() {
    let mut solved = 0;
    let mut redraws = 0;
    let mut failures: Vec<String> = Vec::new();
    for seed in 0..50u64 {
        let inst = instance(seed);
        let n = inst.market.assets();
        let mut r = rng(8_000 + seed);
        let mut got = 0;
        while got < 100 {
            let mu: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
            match solve_with_generators(&inst.gens, &mu, 1.0) {
                Ok(sol) if sol.unique => got += 1,
                Ok(sol) => {
                    let diag = diagnose_uniqueness(&sol, &inst.gens, &mu).unwrap();
                    if diag.mu_residual <= 1e-9 {
                        redraws += 1;
                        continue;
                    }
                    failures.push(format!("seed {seed}: non-unique optimum for μ = {mu:?}"));
                    got += 1;
                }
                Err(e) => {
                    failures.push(format!("seed {seed}: {e}"));
                    got += 1;
                }
            }
        }
        solved += got;
    }
    let passed = failures.is_empty();
    report(
        8,
        passed,
        &format!("{solved} random μ over 50 instances, {} non-unique, {redraws} tie redraws", failures.len()),
    );
    assert!(passed, "{}", failures.join("\n"));
}

#[test]
fn criterion_09_lp_certificates() {
    let mut f = Failures::default();
    let mut forward = 0;
    for seed in 0..50u64 {
        let inst = instance(seed);
        let n = inst.market.assets();
        let mut r = rng(9_000 + seed);
        for _ in 0..10 {
            let mu: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
            let delta = r.random_range(0.1..2.0);
            let sol = solve_with_generators(&inst.gens, &mu, delta).unwrap();
            let c = sol.certificate;
            f.check(c.primal_infeasibility <= 1e-9, format!("seed {seed} primal {:e}", c.primal_infeasibility));
            f.check(c.dual_infeasibility <= 1e-9, format!("seed {seed} dual {:e}", c.dual_infeasibility));
            f.check(c.complementary_slackness <= 1e-9, format!("seed {seed} cs {:e}", c.complementary_slackness));
            f.check(c.duality_gap <= 1e-8 * (1.0 + sol.value.abs()), format!("seed {seed} gap {:e}", c.duality_gap));
            f.check((delta * sol.q - sol.value).abs() <= 1e-9, format!("seed {seed} Δq − A*"));
            f.check((dot(&mu, &sol.x) - delta).abs() <= 1e-9, format!("seed {seed} μᵀx* − Δ"));
            f.check((inst.gens.risk(&sol.x) - sol.value).abs() <= 1e-9, format!("seed {seed} A* = D(R̂ᵀx*)"));
            forward += 1;
        }
    }

    let mut r = rng(9);
    let mut generic = 0;
    for i in 0..200 {
        let n = r.random_range(2..=6);
        let m = r.random_range(2..=10);
        let mut lp = LinearProgram::new((0..n).map(|_| r.random_range(-1.0..1.0)).collect());
        for _ in 0..m {
            lp.le((0..n).map(|_| r.random_range(-1.0..1.0)).collect(), r.random_range(0.0..1.0));
        }
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            lp.le(e, 10.0);
            if i % 2 == 0 {
                lp.set_nonneg(j);
            } else {
                let mut e = vec![0.0; n];
                e[j] = -1.0;
                lp.le(e, 10.0);
            }
        }
        if i % 3 == 0 {
            lp.eq((0..n).map(|_| r.random_range(-1.0..1.0)).collect(), 0.0);
        }
        let sol = solve(&lp).unwrap();
        f.check(sol.status == LpStatus::Optimal, format!("LP {i} status {:?}", sol.status));
        let c = sol.certify(&lp);
        f.check(c.primal_infeasibility <= 1e-9, format!("LP {i} primal"));
        f.check(c.dual_infeasibility <= 1e-9, format!("LP {i} dual"));
        f.check(c.complementary_slackness <= 1e-9, format!("LP {i} cs"));
        f.check(c.duality_gap <= 1e-8 * (1.0 + sol.value.abs()), format!("LP {i} gap"));
        generic += 1;
    }
    f.finish(9, &format!("{forward} forward and {generic} generic LPs certified; Δq = A*, μᵀx* = Δ at 1e-9"));
}

fn tied_vector(r: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| r.random_range(-2..=2) as f64).collect()
}

fn envelopes_for(space: &Arc<FiniteProbSpace>, r: &mut impl Rng) -> Vec<RiskEnvelope> {
    let n = space.len();
    let k = r.random_range(1..n);
    vec![
        build_mad(space.clone()).unwrap(),
        build_cvar(space.clone(), k as f64 / n as f64).unwrap(),
        build_cvar(space.clone(), r.random_range(0.1..0.9)).unwrap(),
        build_mixed_cvar(
            space.clone(),
            &[CvarTerm { alpha: 0.25, lambda: 0.5 }, CvarTerm { alpha: 0.6, lambda: 0.5 }],
        )
        .unwrap(),
    ]
}

#[test]
fn criterion_10_selectors() {
    let mut f = Failures::default();
    let cfg = SteinerConfig::default();
    let mut r = rng(10);
    let mut identifier_checks = 0;
    for case in 0..40 {
        let n = r.random_range(3..=7);
        let space = if case % 2 == 0 { uniform(n) } else { random_space(&mut r, n) };
        let x = if case % 4 < 2 { tied_vector(&mut r, n) } else { centered_rows(&mut r, &space, 1).remove(0) };
        if x.iter().all(|v| *v == x[0]) {
            continue;
        }
        for env in envelopes_for(&space, &mut r) {
            let rob = robust_selector(&env, &x, &cfg).unwrap();
            f.check(env.is_identifier(&x, &rob.q, 1e-8).unwrap(), format!("case {case} robust identifier"));
            let li = law_invariant_selector(&env, &x).unwrap();
            f.check(env.is_identifier(&x, &li.q, 1e-8).unwrap(), format!("case {case} law-invariant identifier"));
            for set in level_sets(&x) {
                f.check(set.iter().all(|&i| li.q[i] == li.q[set[0]]), format!("case {case} constant on level set {set:?}"));
            }
            identifier_checks += 2;
        }
    }

    let mut fallback = 0;
    let mut mc_used = 0;
    for case in 0..24u64 {
        let n = 5 + (case % 4) as usize;
        let space = uniform(n);
        // MAD: `t` scenarios exactly at the mean. CVaR(k/N): a block of `b` ties straddling the cutoff.
        let t = 3 + (case as usize % (n - 4));
        let head: Vec<f64> = loop {
            let h = tied_vector(&mut r, n - t);
            if h.iter().any(|v| *v != h[0]) {
                break h;
            }
        };
        let m = head.iter().sum::<f64>() / head.len() as f64;
        let mut x_mad = head;
        x_mad.extend(std::iter::repeat_n(m, t));
        let a = 1 + (case as usize % 2);
        let b = n - a - 1;
        let k = a + 1 + (case as usize / 4) % (b - 1).max(1);
        let mut x_cvar = vec![-2.0; a];
        x_cvar.extend(std::iter::repeat_n(0.0, b));
        x_cvar.push(1.0);
        let cases = [
            (build_mad(space.clone()).unwrap(), x_mad),
            (build_cvar(space.clone(), k as f64 / n as f64).unwrap(), x_cvar),
        ];
        for (env, x) in cases {
            let closed = robust_selector(&env, &x, &cfg).unwrap();
            let generic = steiner_selector(&env, &x, &SteinerConfig { seed: case, ..cfg }).unwrap();
            if generic.error.iter().any(|e| *e > 0.0) {
                mc_used += 1;
            }
            let se: Vec<f64> = generic.error.iter().map(|e| e.max(TOL / 3.0)).collect();
            if !within(&closed.q, &generic.q, &se) {
                f.check(
                    false,
                    format!("case {case} {:?}: closed form off by {:.2e}", env.provenance(), max_gap(&closed.q, &generic.q)),
                );
            }
            fallback += 1;
        }
    }
    f.finish(
        10,
        &format!("{identifier_checks} identifier checks at 1e-8, level sets exact, {fallback} closed-form/Steiner comparisons ({mc_used} Monte-Carlo) within 3σ"),
    );
}

#[test]
fn criterion_11_capital_allocation() {
    let mut f = Failures::default();
    let cfg = SteinerConfig::default();
    let mut r = rng(11);
    for case in 0..100 {
        let n = r.random_range(3..=6);
        let space = if case % 3 == 0 { random_space(&mut r, n) } else { uniform(n) };
        let env = if case % 2 == 0 {
            build_mad(space.clone()).unwrap()
        } else {
            build_cvar(space.clone(), r.random_range(0.1..0.9)).unwrap()
        };
        let rho = deviation_function(&env).unwrap();
        let parts: Vec<Vec<f64>> = (0..r.random_range(2..=4))
            .map(|_| if case % 4 < 2 { tied_vector(&mut r, n) } else { centered_rows(&mut r, &space, 1).remove(0) })
            .collect();
        let rvs: Vec<RandomVariable> = parts.iter().map(|p| RandomVariable::new(space.clone(), p.clone()).unwrap()).collect();
        let res = capital_allocation(&rho, &rvs, &SteinerConfig { seed: case, ..cfg }).unwrap();
        f.check((res.sum() - res.total_risk).abs() <= 1e-8, format!("case {case}: Σk − ρ(Y) = {:e}", res.sum() - res.total_risk));
        f.check(
            (res.total_risk - env.evaluate(&res.portfolio).unwrap()).abs() <= 1e-8,
            format!("case {case}: ρ(Y) matches the envelope"),
        );
        for (i, p) in parts.iter().enumerate() {
            let alone = rho.eval(p).unwrap();
            f.check(res.contributions[i] <= alone + 1e-8, format!("case {case}: k{i} > ρ(X{i})"));
        }
    }

    let mut robust = 0;
    for case in 0..10u64 {
        let n = 3 + (case % 3) as usize;
        let space = uniform(n);
        let env = if case % 2 == 0 { build_mad(space.clone()).unwrap() } else { build_cvar(space.clone(), 0.5).unwrap() };
        let rho = deviation_function(&env).unwrap();
        let y = tied_vector(&mut r, n);
        let x = tied_vector(&mut r, n);
        let c = SteinerConfig { seed: 50 + case, ..cfg };
        let chk = allocation_robustness(&rho, &x, &y, 1e-4, 1000, &c).unwrap();
        let g = devport::geometry::extended_gradient(&rho, &y, &c).unwrap();
        let ref_se: f64 = x.iter().zip(&g.error).map(|(a, e)| a.abs() * e).sum();
        let se = (chk.standard_error.powi(2) + ref_se.powi(2)).sqrt();
        f.check(
            (chk.mean - chk.reference).abs() <= 3.0 * se + 1e-12,
            format!("case {case}: ball average {} vs Λ* {} (σ {se:.2e})", chk.mean, chk.reference),
        );
        robust += 1;
    }
    f.finish(11, &format!("100 cases: Σk = ρ(Y) and kᵢ ≤ ρ(Xᵢ) at 1e-8; {robust} perturbation checks within 3σ"));
}
