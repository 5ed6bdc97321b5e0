//! End-to-end acceptance suite. Each test covers one numbered
//! criterion, from the parameter algebra through the path-following
//! solvers, and prints a single summary line on success, so a run with
//! `--nocapture` reads as a checklist. The whole suite stays well
//! under the five-minute budget.

use std::sync::Arc;

use nalgebra::{dmatrix, dvector, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use projbar::barriers::{ExpEpigraph, Polyhedral, PowerEpigraph, ProjectiveImage, Spectrahedral};
use projbar::duality::{dual_point, dual_value, DualBarrier};
use projbar::geometry::{
    boundary_query, envelopes_1d, negcurv_certificate, omega_monotonicity_probe, region_radius,
    RegionKind,
};
use projbar::ipm::{
    affine_decrement, analytic_center, affine_newton_step, hyperbolic_distance, lambda_bar_max,
    lambda_under, mu_on_path, optimal_lambda, projective_step, quadratic_model, solve,
    DecrementModel, SolveMethod, SolverTrace,
};
use projbar::verify::{
    estimate_gamma, fd_consistency, lift_equivalence_with_parameter, ode_decrement_oracle,
    ode_envelope_oracle, verify_lift_equivalence,
};
use projbar::{gamma_from_nu, jarre_constants, local_geometry, nu_from_gamma, Barrier, BarrierSet};

/// Optimal affine step size, used both as the step target and as the
/// path-proximity threshold under which the gap bound is trusted.
const AFFINE_STEP: f64 = 0.416647517575512642;

// ---------------------------------------------------------------------
// Shared instance builders.

fn interval(a: f64, b: f64) -> Arc<dyn BarrierSet> {
    Arc::new(Polyhedral::new(dmatrix![-1.0; 1.0], dvector![-a, b]).unwrap())
}

fn unit_box(n: usize) -> Arc<dyn BarrierSet> {
    let mut a = DMatrix::zeros(2 * n, n);
    let mut b = DVector::zeros(2 * n);
    for i in 0..n {
        a[(i, i)] = -1.0;
        a[(n + i, i)] = 1.0;
        b[n + i] = 1.0;
    }
    Arc::new(Polyhedral::new(a, b).unwrap())
}

/// `{x >= 0, y >= 0, x + y <= 1}`.
fn triangle() -> Arc<dyn BarrierSet> {
    Arc::new(Polyhedral::new(dmatrix![-1.0, 0.0; 0.0, -1.0; 1.0, 1.0], dvector![0.0, 0.0, 1.0]).unwrap())
}

/// The standard simplex in `n` variables, `n + 1` facets.
fn simplex(n: usize) -> Arc<dyn BarrierSet> {
    let a = DMatrix::from_fn(n + 1, n, |i, j| {
        if i < n {
            if i == j {
                -1.0
            } else {
                0.0
            }
        } else {
            1.0
        }
    });
    let mut b = DVector::zeros(n + 1);
    b[n] = 1.0;
    Arc::new(Polyhedral::new(a, b).unwrap())
}

/// Unit disk as a 2x2 matrix inequality.
fn disk() -> Arc<dyn BarrierSet> {
    Arc::new(
        Spectrahedral::new(vec![
            DMatrix::identity(2, 2),
            dmatrix![1.0, 0.0; 0.0, -1.0],
            dmatrix![0.0, 1.0; 1.0, 0.0],
        ])
        .unwrap(),
    )
}

/// A bounded planar slice of the 3x3 positive-definite cone: both
/// coordinate matrices are traceless, so every nonzero direction picks
/// up a negative eigenvalue and the ray leaves the set.
fn spectrahedron_3x3() -> Arc<dyn BarrierSet> {
    Arc::new(
        Spectrahedral::new(vec![
            DMatrix::identity(3, 3),
            dmatrix![1.0, 0.0, 0.0; 0.0, -1.0, 0.0; 0.0, 0.0, 0.0],
            dmatrix![0.0, 1.0, 0.0; 1.0, 0.0, 1.0; 0.0, 1.0, 0.0],
        ])
        .unwrap(),
    )
}

fn exp_epigraph() -> Arc<dyn BarrierSet> {
    Arc::new(ExpEpigraph::new())
}

fn power(p: f64) -> Arc<dyn BarrierSet> {
    Arc::new(PowerEpigraph::new(p).unwrap())
}

/// A random interior point at the given boundary-relative depth along
/// a random direction from `start`.
fn random_interior(
    set: &dyn BarrierSet,
    start: &DVector<f64>,
    depth: f64,
    rng: &mut ChaCha8Rng,
) -> (DVector<f64>, DVector<f64>) {
    let n = set.dim();
    let d = DVector::from_fn(n, |_, _| rng.random::<f64>() * 2.0 - 1.0);
    let sigma = set.sigma(start, &d).unwrap();
    let reach = if sigma > 0.0 { 1.0 / sigma } else { 1.0 };
    (start + (depth * reach) * &d, d)
}

// ---------------------------------------------------------------------
// 1. Parameter algebra.

#[test]
fn criterion_01_parameter_algebra() {
    for i in 0..=1000 {
        let gamma = 100.0 * i as f64 / 1000.0;
        let nu = nu_from_gamma(gamma).unwrap();
        let back = gamma_from_nu(nu).unwrap();
        assert!(
            (back - gamma).abs() <= 1e-12,
            "round trip at gamma = {gamma} came back as {back}"
        );
    }
    let at_one = jarre_constants(1.0).unwrap();
    let exact = (343.0 + 119.0 * 7.0f64.sqrt()) / 27.0;
    assert!(
        (at_one.nu_plus - exact).abs() <= 1e-9,
        "nu_plus(1) = {} differs from {exact}",
        at_one.nu_plus
    );
    let large = jarre_constants(1e8).unwrap();
    let limit = 256.0 / 27.0;
    let ratio = large.nu_plus / 1e8;
    assert!(
        ((ratio - limit) / limit).abs() <= 1e-3,
        "nu_plus/nu at 1e8 is {ratio}, limit {limit}"
    );
    println!("criterion 01 parameter algebra: pass");
}

// ---------------------------------------------------------------------
// 2. Cubic-bound certification across the bundled barriers.

#[test]
fn criterion_02_cubic_bound_certification() {
    let suite: Vec<(&str, Arc<dyn BarrierSet>, DVector<f64>)> = vec![
        ("interval", interval(-1.0, 1.0), dvector![0.0]),
        ("box 2d", unit_box(2), dvector![0.5, 0.5]),
        ("triangle", triangle(), dvector![0.25, 0.25]),
        ("simplex m=4", simplex(3), dvector![0.2, 0.2, 0.2]),
        ("simplex m=5", simplex(4), DVector::from_element(4, 0.15)),
        ("spectrahedron 2x2", disk(), dvector![0.0, 0.0]),
        ("spectrahedron 3x3", spectrahedron_3x3(), dvector![0.0, 0.0]),
        ("exp epigraph", exp_epigraph(), dvector![0.0, std::f64::consts::E]),
        ("power p=1.5", power(1.5), dvector![0.0, 1.0]),
        ("power p=2", power(2.0), dvector![0.0, 1.0]),
        ("power p=3", power(3.0), dvector![0.0, 1.0]),
    ];
    for (name, set, start) in suite {
        let declared = set.params().gamma;
        let estimated = estimate_gamma(set.as_ref(), &start, 2000, 7)
            .unwrap_or_else(|e| panic!("{name}: estimator failed with {e}"));
        assert!(
            estimated <= declared + 1e-6,
            "{name}: estimated constant {estimated} exceeds declared {declared}"
        );
    }
    println!("criterion 02 cubic-bound certification: pass");
}

// ---------------------------------------------------------------------
// 3. Exactness of the local model for the interval.

#[test]
fn criterion_03_interval_model_is_exact() {
    let set = interval(-1.0, 1.0);
    let b: &dyn Barrier = set.as_ref();

    // The corrected cubic form vanishes identically.
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for i in 0..100 {
        let x = dvector![-0.99 + 1.98 * i as f64 / 99.0];
        let h = dvector![0.2 + rng.random::<f64>()];
        let lg = local_geometry(b, &x, &h).unwrap();
        assert!(
            lg.c3.abs() <= 1e-9 * lg.g0.powi(3),
            "cubic form {} at x = {}",
            lg.c3,
            x[0]
        );
    }

    // The local quadratic model reproduces the barrier itself.
    for i in 0..10 {
        let anchor = dvector![-0.9 + 1.8 * i as f64 / 9.0];
        for j in 0..10 {
            let x = dvector![-0.9 + 1.8 * j as f64 / 9.0];
            let model = quadratic_model(b, &anchor, &x).unwrap();
            let exact = b.eval(&x).unwrap().value;
            assert!(
                (model - exact).abs() <= 1e-12,
                "model {} vs value {} from anchor {}",
                model,
                exact,
                anchor[0]
            );
        }
    }

    // Inner region, outer region, and the true set coincide.
    for i in 0..50 {
        let x = dvector![-0.95 + 1.9 * i as f64 / 49.0];
        for sign in [1.0, -1.0] {
            let h = dvector![sign];
            let inner = region_radius(b, &x, &h, RegionKind::DikinSet).unwrap();
            let outer = region_radius(b, &x, &h, RegionKind::OuterSet).unwrap();
            let true_r = 1.0 / set.sigma(&x, &h).unwrap();
            assert!((inner - true_r).abs() <= 1e-9 * (1.0 + true_r));
            assert!((outer - true_r).abs() <= 1e-9 * (1.0 + true_r));
        }
    }
    println!("criterion 03 interval model exactness: pass");
}

// ---------------------------------------------------------------------
// 4. Cone-lift equivalence and detection of a corrupted degree.

#[test]
fn criterion_04_conic_lift_equivalence() {
    let cases: Vec<(&str, Arc<dyn BarrierSet>, DVector<f64>)> = vec![
        ("interval", interval(-1.0, 1.0), dvector![0.5]),
        ("triangle", triangle(), dvector![0.25, 0.25]),
        ("exp epigraph", exp_epigraph(), dvector![0.0, std::f64::consts::E]),
    ];
    for (name, set, start) in cases {
        let report = verify_lift_equivalence(&set, &start, 500, 11).unwrap();
        assert!(
            report.pass,
            "{name}: cone ratio {} exceeds the bound at {:?}",
            report.cone_max_ratio, report.worst_point
        );
        let nu = set.params().nu;
        let corrupted =
            lift_equivalence_with_parameter(&set, &start, 500, 11, nu - 0.5).unwrap();
        assert!(
            !corrupted.pass && corrupted.cone_max_ratio > 1.0 + 1e-6,
            "{name}: corrupted degree slipped through with ratio {}",
            corrupted.cone_max_ratio
        );
    }
    println!("criterion 04 cone-lift equivalence: pass");
}

// ---------------------------------------------------------------------
// 5. Region sandwich on the planar instances.

/// Radii beyond this are treated as unbounded; the ray oracle truncates
/// at a finite horizon and the region denominators round near zero.
const RADIUS_HORIZON: f64 = 1e12;

fn effectively_infinite(r: f64) -> bool {
    !(r < RADIUS_HORIZON)
}

/// `a <= b` with a relative slack, infinities compared by convention.
fn radius_le(a: f64, b: f64) -> bool {
    if effectively_infinite(b) {
        return true;
    }
    if effectively_infinite(a) {
        return false;
    }
    a <= b * (1.0 + 1e-9) + 1e-12
}

#[test]
fn criterion_05_region_sandwich() {
    let planar: Vec<(&str, Arc<dyn BarrierSet>, DVector<f64>)> = vec![
        ("box 2d", unit_box(2), dvector![0.3, 0.55]),
        ("triangle", triangle(), dvector![0.2, 0.35]),
        ("spectrahedron 2x2", disk(), dvector![0.1, -0.2]),
        ("spectrahedron 3x3", spectrahedron_3x3(), dvector![0.05, 0.1]),
        ("exp epigraph", exp_epigraph(), dvector![-0.3, 1.4]),
        ("power p=1.5", power(1.5), dvector![0.2, 1.1]),
        ("power p=2", power(2.0), dvector![0.1, 0.8]),
        ("power p=3", power(3.0), dvector![-0.4, 0.9]),
    ];
    for (name, set, x0) in &planar {
        let b: &dyn Barrier = set.as_ref();
        for k in 0..64 {
            let angle = std::f64::consts::TAU * k as f64 / 64.0;
            let h = dvector![angle.cos(), angle.sin()];
            let r_ef = region_radius(b, x0, &h, RegionKind::ClassicEllipsoid).unwrap();
            let r_ep = region_radius(b, x0, &h, RegionKind::DikinSet).unwrap();
            let r_gp = region_radius(b, x0, &h, RegionKind::OuterSet).unwrap();
            let sigma = set.sigma(x0, &h).unwrap();
            let r_x = if sigma > 0.0 { 1.0 / sigma } else { f64::INFINITY };
            assert!(radius_le(r_ef, r_ep), "{name}: ellipsoid radius {r_ef} > inner {r_ep}");
            assert!(radius_le(r_ep, r_x), "{name}: inner radius {r_ep} > set {r_x}");
            assert!(radius_le(r_x, r_gp), "{name}: set radius {r_x} > outer {r_gp}");
        }
    }

    // At the analytic center the inner and ellipsoid radii sit at the
    // fixed ratio sqrt(nu/(nu-1)) in every direction.
    let centered: Vec<(&str, Arc<dyn BarrierSet>, DVector<f64>)> = vec![
        ("box 2d", unit_box(2), dvector![0.4, 0.6]),
        ("triangle", triangle(), dvector![0.3, 0.3]),
        ("spectrahedron 2x2", disk(), dvector![0.1, 0.1]),
        ("spectrahedron 3x3", spectrahedron_3x3(), dvector![0.05, -0.1]),
    ];
    for (name, set, seed_point) in centered {
        let b: &dyn Barrier = set.as_ref();
        let center = analytic_center(b, &seed_point).unwrap();
        let nu = set.params().nu;
        let expected = (nu / (nu - 1.0)).sqrt();
        for k in 0..16 {
            let angle = std::f64::consts::TAU * k as f64 / 16.0;
            let h = dvector![angle.cos(), angle.sin()];
            let r_ep = region_radius(b, &center, &h, RegionKind::DikinSet).unwrap();
            let r_ef = region_radius(b, &center, &h, RegionKind::ClassicEllipsoid).unwrap();
            assert!(
                (r_ep / r_ef - expected).abs() <= 1e-9,
                "{name}: center ratio {} vs {expected}",
                r_ep / r_ef
            );
        }
    }
    println!("criterion 05 region sandwich: pass");
}

// ---------------------------------------------------------------------
// 6. Derivative envelopes under arbitrary controls.

#[test]
fn criterion_06_envelope_band() {
    let (p0, s0, gamma) = (0.4, 1.5, 1.3);
    let t_end = 0.35;
    let slices = 8usize;
    let slice = t_end / slices as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(21);

    // Integrate each constant-control slice separately so the control
    // jumps land exactly on step boundaries; the slope equation is
    // autonomous, so chaining slices continues the same trajectory.
    for trial in 0..200 {
        let mut p = p0;
        let mut w = s0;
        let mut t_base = 0.0;
        for _ in 0..slices {
            let level = rng.random::<f64>() * 2.0 - 1.0;
            let traj = ode_envelope_oracle(p, w, gamma, &|_| level, slice, 500).unwrap();
            assert!(!traj.truncated, "trial {trial} blew up");
            for (t, pt) in traj.ts.iter().zip(traj.ps.iter()) {
                let env = envelopes_1d(p0, s0, gamma, t_base + t).unwrap();
                assert!(
                    pt - env.p_minus >= -1e-7,
                    "trial {trial}: slope {pt} below lower envelope {} at t = {}",
                    env.p_minus,
                    t_base + t
                );
                assert!(
                    env.p_plus - pt >= -1e-7,
                    "trial {trial}: slope {pt} above upper envelope {} at t = {}",
                    env.p_plus,
                    t_base + t
                );
            }
            p = *traj.ps.last().unwrap();
            w = *traj.slopes.last().unwrap();
            t_base += slice;
        }
    }

    // The extremal controls reproduce the closed-form curves.
    for (u, upper) in [(1.0, true), (-1.0, false)] {
        let traj = ode_envelope_oracle(p0, s0, gamma, &|_| u, t_end, 20_000).unwrap();
        assert!(!traj.truncated);
        for (t, pt) in traj.ts.iter().zip(traj.ps.iter()) {
            let env = envelopes_1d(p0, s0, gamma, *t).unwrap();
            let target = if upper { env.p_plus } else { env.p_minus };
            assert!(
                (pt - target).abs() <= 1e-8,
                "control {u}: slope {pt} vs curve {target} at t = {t}"
            );
        }
    }
    println!("criterion 06 envelope band: pass");
}

// ---------------------------------------------------------------------
// 7. Duality: self-duality, transport, round trip.

#[test]
fn criterion_07_duality() {
    // The symmetric interval is self-dual through p = -x.
    let sym = interval(-1.0, 1.0);
    let b: &dyn Barrier = sym.as_ref();
    let origin = dvector![0.0];
    for i in 0..50 {
        let x = dvector![-0.95 + 1.9 * i as f64 / 49.0];
        let p = dual_point(b, &x).unwrap();
        let dual = dual_value(b, &p, &origin).unwrap();
        let direct = b.eval(&p).unwrap().value;
        assert!(
            (dual.value - direct).abs() <= 1e-8,
            "self-duality off by {} at x = {}",
            dual.value - direct,
            x[0]
        );
        assert!(
            (&dual.minimizer - &x).norm() <= 1e-8,
            "round trip drifted to {:?} from {}",
            dual.minimizer,
            x[0]
        );
    }

    // Metric and cubic transport: the dual barrier's analytic
    // derivatives, which are pushed through the inverse-map Jacobian,
    // agree with finite differences of the dual values.
    let transported: Vec<(&str, Arc<dyn BarrierSet>, DVector<f64>)> = vec![
        (
            "shifted triangle",
            Arc::new(
                Polyhedral::new(
                    dmatrix![-1.0, 0.0; 0.0, -1.0; 1.0, 1.0],
                    dvector![1.0, 1.0, 1.0],
                )
                .unwrap(),
            ),
            dvector![0.0, 0.0],
        ),
        ("spectrahedron 2x2", disk(), dvector![0.0, 0.0]),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for (name, set, start) in transported {
        let base: Arc<dyn Barrier> = set.clone();
        let dual = DualBarrier::new(base, &start).unwrap();
        let b: &dyn Barrier = set.as_ref();
        for _ in 0..5 {
            let (x, _) = random_interior(set.as_ref(), &start, 0.6 * rng.random::<f64>(), &mut rng);
            let p = dual_point(b, &x).unwrap();
            let report = fd_consistency(&dual, &p).unwrap();
            assert!(
                report.pass,
                "{name}: dual derivative transport off, grad {} hess {} third {}",
                report.grad_err, report.hess_err, report.third_err
            );
            // The inner minimizer inverts the dual map.
            let back = dual_value(b, &p, &start).unwrap().minimizer;
            assert!(
                (&back - &x).norm() <= 1e-8,
                "{name}: round trip error {}",
                (&back - &x).norm()
            );
        }
    }
    println!("criterion 07 duality: pass");
}

// ---------------------------------------------------------------------
// 8. Decrement laws and their asymptotics.

#[test]
fn criterion_08_decrement_laws() {
    let (step, guaranteed) = optimal_lambda(DecrementModel::Affine).unwrap();
    assert!((step - 0.4166).abs() <= 1e-3, "affine step optimum {step}");
    assert!(
        (guaranteed - 0.1901).abs() <= 1e-3,
        "affine guaranteed decrement {guaranteed}"
    );

    // Closed-form guaranteed decrement against the bang-bang oracle on
    // a 20 x 20 grid; step sizes stay at a fixed fraction of the
    // feasibility cap so the closed form is well conditioned.
    for i in 0..20 {
        let gamma = 0.05 + (5.0 - 0.05) * i as f64 / 19.0;
        let model = DecrementModel::Projective(gamma);
        let cap = lambda_bar_max(gamma).unwrap();
        for j in 0..20 {
            let lambda_bar = cap * (0.05 + 0.80 * j as f64 / 19.0);
            let closed = lambda_under(lambda_bar, model).unwrap();
            let oracle = ode_decrement_oracle(model, lambda_bar).unwrap();
            assert!(
                (closed - oracle).abs() <= 1e-6,
                "gamma {gamma}, step {lambda_bar}: closed {closed} vs oracle {oracle}"
            );
        }
    }

    // Large-constant regime: the scaled optimum approaches the affine
    // one.
    let (large_step, _) = optimal_lambda(DecrementModel::Projective(100.0)).unwrap();
    assert!(
        (large_step * 100.0 / AFFINE_STEP - 1.0).abs() <= 0.02,
        "scaled optimum {} at gamma = 100",
        large_step * 100.0
    );

    // Vanishing-constant regime: the guaranteed decrement approaches
    // its exact-model limit.
    let (_, small_guaranteed) = optimal_lambda(DecrementModel::Projective(1e-3)).unwrap();
    let limit = (2.0f64.sqrt() - 1.0).atanh();
    assert!(
        (small_guaranteed - limit).abs() <= 1e-3,
        "guaranteed decrement {small_guaranteed} vs limit {limit} at gamma = 1e-3"
    );
    println!("criterion 08 decrement laws: pass");
}

// ---------------------------------------------------------------------
// 9. Both solvers on the linear-program suite, with the step-size,
//    short-step, soundness, containment, and equivariance invariants.

struct LpCase {
    name: &'static str,
    set: Arc<dyn BarrierSet>,
    objective: DVector<f64>,
    start: DVector<f64>,
    optimum: f64,
}

/// Exact minimum of `<c, x>` over `{A x <= b}` by enumerating basic
/// points; the suite polytopes are bounded, so the optimum sits at a
/// vertex.
fn polytope_minimum(a: &DMatrix<f64>, b: &DVector<f64>, c: &DVector<f64>) -> f64 {
    let (m, n) = (a.nrows(), a.ncols());
    assert!(m >= n);
    let mut best = f64::INFINITY;
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        let square = DMatrix::from_fn(n, n, |r, col| a[(idx[r], col)]);
        let rhs = DVector::from_fn(n, |r, _| b[idx[r]]);
        if let Some(x) = square.clone().full_piv_lu().solve(&rhs) {
            let residual = (&square * &x - &rhs).norm();
            let slack_min = (b - a * &x).min();
            if residual <= 1e-8 && slack_min >= -1e-8 {
                best = best.min(c.dot(&x));
            }
        }
        let mut i = n;
        while i > 0 && idx[i - 1] == m - n + i - 1 {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        idx[i - 1] += 1;
        for j in i..n {
            idx[j] = idx[j - 1] + 1;
        }
    }
    assert!(best.is_finite(), "no feasible basic point found");
    best
}

/// Bounded random polytope: a centered box plus random cuts through
/// `b = 1`, keeping the origin interior.
fn random_polytope(n: usize, cuts: usize, seed: u64) -> (DMatrix<f64>, DVector<f64>, DVector<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = 2 * n + cuts;
    let mut a = DMatrix::zeros(m, n);
    let b = DVector::from_element(m, 1.0);
    for i in 0..n {
        a[(i, i)] = 1.0;
        a[(n + i, i)] = -1.0;
    }
    for k in 0..cuts {
        for j in 0..n {
            a[(2 * n + k, j)] = rng.random::<f64>() * 2.0 - 1.0;
        }
    }
    let c = DVector::from_fn(n, |_, _| rng.random::<f64>() * 2.0 - 1.0);
    (a, b, c)
}

fn lp_suite() -> Vec<LpCase> {
    let mut cases = vec![
        LpCase {
            name: "interval",
            set: interval(-1.0, 1.0),
            objective: dvector![1.0],
            start: dvector![0.0],
            optimum: -1.0,
        },
        LpCase {
            name: "interval shifted",
            set: interval(0.0, 2.0),
            objective: dvector![-1.0],
            start: dvector![0.5],
            optimum: -2.0,
        },
        LpCase {
            name: "box 2d",
            set: unit_box(2),
            objective: dvector![1.0, 1.0],
            start: dvector![0.3, 0.6],
            optimum: 0.0,
        },
        LpCase {
            name: "box 3d",
            set: unit_box(3),
            objective: dvector![-1.0, -2.0, -3.0],
            start: dvector![0.5, 0.5, 0.5],
            optimum: -6.0,
        },
        LpCase {
            name: "triangle vertex",
            set: triangle(),
            objective: dvector![-1.0, 0.0],
            start: dvector![0.2, 0.3],
            optimum: -1.0,
        },
        LpCase {
            name: "triangle origin",
            set: triangle(),
            objective: dvector![1.0, 2.0],
            start: dvector![0.3, 0.3],
            optimum: 0.0,
        },
        LpCase {
            name: "simplex 3d",
            set: simplex(3),
            objective: dvector![-1.0, -2.0, 1.0],
            start: dvector![0.2, 0.2, 0.2],
            optimum: -2.0,
        },
        LpCase {
            name: "simplex 4d",
            set: simplex(4),
            objective: dvector![1.0, -1.0, 0.5, -0.25],
            start: DVector::from_element(4, 0.15),
            optimum: -1.0,
        },
    ];
    for (n, cuts, seed, name) in [(3usize, 4usize, 101u64, "polytope 3d"), (6, 2, 202, "polytope 6d")]
    {
        let (a, b, c) = random_polytope(n, cuts, seed);
        let optimum = polytope_minimum(&a, &b, &c);
        cases.push(LpCase {
            name,
            set: Arc::new(Polyhedral::new(a, b).unwrap()),
            objective: c,
            start: DVector::zeros(n),
            optimum,
        });
    }
    cases
}

/// Runs the per-iteration invariant checks on one trace.
fn check_trace(case: &LpCase, method: SolveMethod, trace: &SolverTrace) {
    let b: &dyn Barrier = case.set.as_ref();
    let c = &case.objective;
    let gamma = case.set.params().gamma;
    // Exact-model instances use the solver's capped long jump.  The
    // distance of such a jump is recovered through an inverse tanh
    // whose conditioning near the cap amplifies slack rounding, so the
    // check there carries a matching cushion.
    let (step_target, step_tol) = if gamma == 0.0 {
        (2.5, 1e-6)
    } else {
        (
            optimal_lambda(DecrementModel::Projective(gamma)).unwrap().0,
            1e-8,
        )
    };
    let affine_star = optimal_lambda(DecrementModel::Affine).unwrap().0;

    let mut prev = case.start.clone();
    for rec in &trace.records {
        // Containment: accepted iterates stay in the set and in the
        // model chart of their predecessor.
        assert!(
            case.set.contains(&rec.x, 1e-9),
            "{}: iterate {} left the set",
            case.name,
            rec.iter
        );
        let e = b.eval(&prev).unwrap();
        let delta = &rec.x - &prev;
        let fd = e.grad.dot(&delta);
        let hd = (delta.transpose() * &e.hess * &delta)[(0, 0)];
        let gd = hd - fd * fd;
        assert!(
            1.0 - fd > 0.0 && (1.0 - fd) * (1.0 - fd) - gd > 0.0,
            "{}: iterate {} left the model domain of its predecessor",
            case.name,
            rec.iter
        );

        if !rec.centering {
            match method {
                SolveMethod::Affine => {
                    // The penalty update keeps the pre-step decrement at
                    // the optimal step size, and the Newton step then
                    // contracts it by at least the guaranteed law.
                    let pre = affine_decrement(b, c, rec.tau, &prev).unwrap();
                    assert!(
                        pre <= affine_star + 1e-9,
                        "{}: pre-step decrement {pre} at iteration {}",
                        case.name,
                        rec.iter
                    );
                    let law = lambda_under(pre, DecrementModel::Affine).unwrap();
                    assert!(
                        rec.decrement <= law + 1e-6,
                        "{}: post-step decrement {} breaks the law value {law}",
                        case.name,
                        rec.decrement
                    );
                }
                SolveMethod::Projective => {
                    assert!(
                        (rec.step_distance - step_target).abs() <= step_tol,
                        "{}: step distance {} at iteration {}, expected {step_target}",
                        case.name,
                        rec.step_distance,
                        rec.iter
                    );
                    let recomputed = hyperbolic_distance(b, &prev, &rec.x).unwrap();
                    assert!(
                        (recomputed - step_target).abs() <= step_tol,
                        "{}: recomputed distance {recomputed}",
                        case.name
                    );
                }
            }

            // Gap soundness: while the iterate is path-proximal, the
            // reported bound covers the true gap.
            if rec.gap_bound.is_finite() && rec.tau_estimate > 0.0 {
                let rho = affine_decrement(b, c, rec.tau_estimate, &rec.x).unwrap();
                if rho <= affine_star {
                    let true_gap = rec.objective - case.optimum;
                    assert!(
                        true_gap <= rec.gap_bound * (1.0 + 1e-6) + 1e-9,
                        "{}: true gap {true_gap} above bound {} at iteration {}",
                        case.name,
                        rec.gap_bound,
                        rec.iter
                    );
                }
            }
        }
        prev = rec.x.clone();
    }
}

#[test]
fn criterion_09_solver_suite() {
    let mut table: Vec<(&str, usize, usize)> = Vec::new();
    for case in lp_suite() {
        let mut iters = [0usize; 2];
        for (slot, method) in [SolveMethod::Affine, SolveMethod::Projective]
            .into_iter()
            .enumerate()
        {
            let trace = solve(case.set.as_ref(), &case.objective, &case.start, method, 1e-6)
                .unwrap_or_else(|e| panic!("{} ({method:?}): {e}", case.name));
            assert!(
                trace.gap_bound <= 1e-6,
                "{} ({method:?}): gap bound {}",
                case.name,
                trace.gap_bound
            );
            assert!(
                trace.objective >= case.optimum - 1e-7,
                "{} ({method:?}): objective {} beats the true optimum {}",
                case.name,
                trace.objective,
                case.optimum
            );
            assert!(
                trace.objective - case.optimum <= trace.gap_bound * (1.0 + 1e-6) + 1e-9,
                "{} ({method:?}): final gap unsound",
                case.name
            );
            check_trace(&case, method, &trace);
            iters[slot] = trace.iterations;
        }
        table.push((case.name, iters[0], iters[1]));
    }

    // Iteration counts, reported side by side without ranking.
    println!("criterion 09 iteration counts (affine | projective):");
    for (name, a, p) in &table {
        println!("  {name:<18} {a:>5} | {p:>5}");
    }

    // Equivariance: an invertible affine chart map sends steps to
    // steps once the objective rides along as a dual vector. Chart
    // tilts leave the class of linear objectives, so the problem-level
    // check uses translation and a general linear block.
    let tri = triangle();
    // A fixed step radius large enough that the sphere reaches the
    // target locus from every probe point.
    let lambda_bar = 1.2;
    let c = dvector![-1.0, 0.4];
    let block = dmatrix![1.2, 0.3; -0.4, 0.9];
    let shift = dvector![0.15, -0.2];
    let mut chart = DMatrix::zeros(3, 3);
    chart[(0, 0)] = 1.0;
    for i in 0..2 {
        chart[(i + 1, 0)] = shift[i];
        for j in 0..2 {
            chart[(i + 1, j + 1)] = block[(i, j)];
        }
    }
    let image = ProjectiveImage::new(tri.clone(), chart).unwrap();
    let c_image = block.transpose().lu().solve(&c).unwrap();
    let points = [
        dvector![0.2, 0.3],
        dvector![0.25, 0.45],
        dvector![0.4, 0.2],
        dvector![0.33, 0.33],
        dvector![0.3, 0.25],
    ];
    for x in &points {
        let stepped = projective_step(tri.as_ref(), &c, x, lambda_bar).unwrap();
        let direct = projective_step(&image, &c_image, &image.push(x).unwrap(), lambda_bar).unwrap();
        let mapped = image.push(&stepped).unwrap();
        assert!(
            (&direct - &mapped).norm() <= 1e-7,
            "step equivariance off by {}",
            (&direct - &mapped).norm()
        );
    }

    // The hyperbolic distance is invariant under full chart tilts.
    let tilt = dmatrix![1.0, 0.08, -0.05; 0.02, 1.1, 0.2; -0.04, 0.15, 0.95];
    let tilted = ProjectiveImage::new(tri.clone(), tilt).unwrap();
    for pair in points.windows(2) {
        let d_base = hyperbolic_distance(tri.as_ref(), &pair[0], &pair[1]).unwrap();
        let d_image = hyperbolic_distance(
            &tilted,
            &tilted.push(&pair[0]).unwrap(),
            &tilted.push(&pair[1]).unwrap(),
        )
        .unwrap();
        assert!(
            (d_base - d_image).abs() <= 1e-7 * (1.0 + d_base),
            "distance invariance off: {d_base} vs {d_image}"
        );
    }
    println!("criterion 09 solver suite: pass");
}

// ---------------------------------------------------------------------
// 10. Curvature certificate and its consequences.

#[test]
fn criterion_10_negative_curvature() {
    let polyhedral: Vec<(&str, Arc<dyn BarrierSet>, DVector<f64>)> = vec![
        ("triangle", triangle(), dvector![0.25, 0.25]),
        ("box 2d", unit_box(2), dvector![0.5, 0.5]),
        ("simplex 3d", simplex(3), dvector![0.2, 0.2, 0.2]),
        ("polytope 3d", {
            let (a, b, _) = random_polytope(3, 4, 101);
            Arc::new(Polyhedral::new(a, b).unwrap())
        }, DVector::zeros(3)),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for (name, set, start) in &polyhedral {
        let b: &dyn Barrier = set.as_ref();
        let kappa = (set.params().nu - 1.0).sqrt();
        for sample in 0..125 {
            let depth = 0.95 * rng.random::<f64>();
            let (x, _) = random_interior(set.as_ref(), start, depth, &mut rng);
            let h = DVector::from_fn(set.dim(), |_, _| rng.random::<f64>() * 2.0 - 1.0);

            assert!(
                negcurv_certificate(set.as_ref(), &x, &h).unwrap(),
                "{name}: certificate failed at sample {sample}"
            );

            // Consequence: the cubic form is one-sidedly bounded by
            // the normalized boundary slack, which itself stays in the
            // parameter window.
            let lg = local_geometry(b, &x, &h).unwrap();
            let q = boundary_query(set.as_ref(), &x, &h).unwrap();
            assert!(q.sigma > 0.0, "{name}: unbounded ray in a bounded polytope");
            let omega = q.omega;
            let bound = 2.0 * ((omega * omega - 1.0) / omega) * lg.g0.powi(3);
            assert!(
                lg.c3 <= bound + 1e-9 * (1.0 + bound.abs() + lg.c3.abs()),
                "{name}: cubic {} above the slack bound {bound}",
                lg.c3
            );
            assert!(
                omega >= (1.0 - 1e-9) / kappa && omega <= kappa * (1.0 + 1e-9),
                "{name}: slack ratio {omega} outside the parameter window"
            );

            // Three-bullet probe along the sampled ray.
            let reach = 0.9 / q.sigma;
            let grid = [0.0, 0.25 * reach, 0.5 * reach, 0.75 * reach];
            let probe = omega_monotonicity_probe(set.as_ref(), &x, &h, &grid).unwrap();
            assert!(probe.nondecreasing, "{name}: slack ratio decreased along the ray");
            assert!(probe.product_ok, "{name}: product bound {}", probe.product);
            assert!(
                probe.mean_ok,
                "{name}: mean boundary measure {} below metric length {}",
                probe.mean_sigma, probe.metric_length
            );
        }
    }
    println!("criterion 10 negative curvature: pass");
}

// ---------------------------------------------------------------------
// 11. Path speed normalization.

/// Polishes a near-path iterate to the exact path point at penalty
/// `tau` by full Newton steps.
fn path_point(b: &dyn Barrier, c: &DVector<f64>, tau: f64, near: &DVector<f64>) -> DVector<f64> {
    let mut x = near.clone();
    let mut prev = f64::INFINITY;
    for _ in 0..50 {
        let dec = affine_decrement(b, c, tau, &x).unwrap();
        // The decrement bottoms out near sqrt(eps) once the residual
        // is dominated by rounding in the penalty term, so treat a
        // small non-improving value as converged.
        if dec <= 1e-10 || (dec <= 1e-6 && dec > 0.5 * prev) {
            return x;
        }
        prev = dec;
        x = affine_newton_step(b, c, tau, &x).unwrap();
    }
    panic!("path polish did not converge at tau = {tau}");
}

#[test]
fn criterion_11_path_speed() {
    // Hand-derived value on the unit interval.
    let unit = interval(0.0, 1.0);
    let b: &dyn Barrier = unit.as_ref();
    let c = dvector![1.0];
    let mu = mu_on_path(b, &c, 8.0 / 3.0, &dvector![0.25]).unwrap();
    assert!((mu - 0.2).abs() <= 1e-12, "interval speed {mu}");

    // The speed stays in (0, 1] along the paths of three instances.
    let cases: Vec<(Arc<dyn BarrierSet>, DVector<f64>, DVector<f64>)> = vec![
        (interval(-1.0, 1.0), dvector![1.0], dvector![0.0]),
        (unit_box(2), dvector![1.0, 1.0], dvector![0.5, 0.5]),
        (triangle(), dvector![-1.0, 0.0], dvector![0.3, 0.3]),
    ];
    for (set, c, start) in cases {
        let b: &dyn Barrier = set.as_ref();
        let trace = solve(b, &c, &start, SolveMethod::Affine, 1e-6).unwrap();
        for rec in trace.records.iter().filter(|r| !r.centering).step_by(3) {
            if rec.tau <= 0.0 {
                continue;
            }
            let on_path = path_point(b, &c, rec.tau, &rec.x);
            let mu = mu_on_path(b, &c, rec.tau, &on_path).unwrap();
            // Polished points sit within about 1e-8 of the path, so
            // allow the speed a matching cushion above one.
            assert!(
                mu > 0.0 && mu <= 1.0 + 1e-6,
                "path speed {mu} outside (0, 1] at tau = {}",
                rec.tau
            );
        }
    }
    println!("criterion 11 path speed: pass");
}
