use proptest::prelude::*;

use adhyp::flux::registry;
use adhyp::indicator::{si_raw_1d, si_smooth_1d, tau_new, tau_old};
use adhyp::integrate::{rhs_1d, rhs_2d};
use adhyp::limiter::{limited_increment, phi_sbm, LimiterParams};
use adhyp::state::{physical_flux, prim_to_cons};
use adhyp::{
    fill_ghosts, BoundaryConditions, Direction, Field, GasModel, Grid, IndicatorField,
    PrimitiveState, SchemeConfig, Solver, SourceTerm, Strategy as TauStrategy,
};

fn gas() -> GasModel {
    GasModel::new(1.4).unwrap()
}

fn theta_tau() -> impl Strategy<Value = (f64, f64)> {
    (1.0..=2.0f64, -0.25..=0.5f64)
}

fn prim() -> impl Strategy<Value = PrimitiveState> {
    (0.05..10.0f64, -4.0..4.0f64, -4.0..4.0f64, 0.05..10.0f64)
        .prop_map(|(rho, u, v, p)| PrimitiveState::new(rho, u, v, p))
}

fn prim_1d() -> impl Strategy<Value = PrimitiveState> {
    (0.2..5.0f64, -2.0..2.0f64, 0.2..5.0f64)
        .prop_map(|(rho, u, p)| PrimitiveState::new_1d(rho, u, p))
}

fn periodic_1d(cells: &[PrimitiveState]) -> Field {
    let grid = Grid::new_1d(cells.len(), 0.0, 1.0).unwrap();
    let mut f = Field::from_fn(grid, |i, _| {
        prim_to_cons(&cells[i as usize], &gas()).unwrap()
    });
    fill_ghosts(&mut f, &BoundaryConditions::periodic());
    f
}

fn fixed_scheme(tau: f64) -> SchemeConfig {
    SchemeConfig::new(TauStrategy::Fixed(tau), 0.005, gas()).unwrap()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn limiter_is_symmetric(r in 1e-4..1e4f64, (theta, tau) in theta_tau()) {
        let p = LimiterParams::new(theta, tau).unwrap();
        let lhs = phi_sbm(r, &p) / r;
        let rhs = phi_sbm(1.0 / r, &p);
        prop_assert!(close(lhs, rhs, 1e-13), "{lhs} vs {rhs}");
    }

    #[test]
    fn limiter_stays_in_the_tvd_region(r in -10.0..100.0f64, (theta, tau) in theta_tau()) {
        let p = LimiterParams::new(theta, tau).unwrap();
        let phi = phi_sbm(r, &p);
        if r <= 0.0 {
            prop_assert_eq!(phi, 0.0);
        } else {
            prop_assert!(phi >= 0.0 && phi <= theta && phi <= theta * r * (1.0 + 1e-15));
        }
    }

    #[test]
    fn increment_matches_ratio_form(a in -5.0..5.0f64, b in -5.0..5.0f64, c in -5.0..5.0f64, (theta, tau) in theta_tau()) {
        let p = LimiterParams::new(theta, tau).unwrap();
        prop_assume!((b - a).abs() > 1e-6);
        let via_r = phi_sbm((c - b) / (b - a), &p) * (b - a);
        prop_assert!(close(limited_increment(a, b, c, &p), via_r, 1e-12));
    }

    #[test]
    fn indicator_is_bounded_and_zero_on_lines(
        rho in prop::collection::vec(0.01..100.0f64, 5..40),
        a in 0.1..10.0f64,
        slope in -0.1..0.1f64,
    ) {
        for e in si_raw_1d(&rho, 0.2) {
            prop_assert!((0.0..=1.0).contains(&e), "E = {e}");
        }
        let line: Vec<f64> = (0..20).map(|i| a + slope * i as f64).collect();
        prop_assume!(line.iter().all(|&v| v > 0.0));
        for e in si_raw_1d(&line, 0.2) {
            prop_assert!(e.abs() < 1e-12, "E = {e}");
        }
    }

    #[test]
    fn indicator_ignores_power_of_two_scaling(rho in prop::collection::vec(0.01..100.0f64, 5..40), k in -20i32..20) {
        let lambda = 2f64.powi(k);
        let scaled: Vec<f64> = rho.iter().map(|r| r * lambda).collect();
        prop_assert_eq!(si_smooth_1d(&si_raw_1d(&rho, 0.2)), si_smooth_1d(&si_raw_1d(&scaled, 0.2)));
    }

    #[test]
    fn tau_maps_are_monotone_and_bounded(e1 in 0.0..1.0f64, e2 in 0.0..1.0f64, c in 1e-4..0.05f64) {
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        prop_assert!(tau_new(lo, c) >= tau_new(hi, c));
        prop_assert!(tau_old(lo, c) >= tau_old(hi, c));
        for t in [tau_new(lo, c), tau_new(hi, c), tau_old(lo, c)] {
            prop_assert!((-0.25..=0.5).contains(&t));
        }
    }

    #[test]
    fn fluxes_are_consistent(w in prim(), axis in any::<bool>()) {
        let dir = if axis { Direction::X } else { Direction::Y };
        let u = prim_to_cons(&w, &gas()).unwrap();
        let exact = physical_flux(&u, &gas(), dir).unwrap();
        for flux in registry() {
            let f = flux.evaluate(&u, &u, &gas(), dir).unwrap();
            for (a, b) in f.to_array().into_iter().zip(exact.to_array()) {
                prop_assert!(close(a, b, 1e-13), "{}: {a} vs {b}", flux.name());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn periodic_runs_conserve_totals(cells in prop::collection::vec(prim_1d(), 16..40), strategy in 0..3u8) {
        let strategy = [TauStrategy::New, TauStrategy::Old, TauStrategy::Fixed(-0.25)][strategy as usize];
        let field = periodic_1d(&cells);
        let before = field.total();
        let config = SchemeConfig::new(strategy, 0.005, gas()).unwrap();
        let mut solver = Solver::new(field, BoundaryConditions::periodic(), SourceTerm::None, config).unwrap();
        for _ in 0..5 {
            let dt = solver.stable_dt().unwrap();
            solver.step(dt).unwrap();
        }
        let after = solver.field().total();
        for (a, b) in after.to_array().into_iter().zip(before.to_array()) {
            prop_assert!(close(a, b, 1e-12), "{a} vs {b}");
        }
    }

    #[test]
    fn perturbations_stay_within_the_stencil(cells in prop::collection::vec(prim_1d(), 20..30), at in 5usize..15, bump in 0.01..0.5f64) {
        let base = periodic_1d(&cells);
        let mut moved = cells.clone();
        moved[at].rho += bump;
        let moved = periodic_1d(&moved);
        let tau = IndicatorField::uniform(*base.grid(), 0.5);
        let config = fixed_scheme(0.5);
        let a = rhs_1d(&base, &tau, &config, SourceTerm::None).unwrap();
        let b = rhs_1d(&moved, &tau, &config, SourceTerm::None).unwrap();
        for (j, (x, y)) in a.values.iter().zip(&b.values).enumerate() {
            if j.abs_diff(at) > 2 {
                prop_assert_eq!(x, y, "cell {} changed", j);
            }
        }
    }

    #[test]
    fn two_dimensional_rows_match_one_dimensional_lines(cells in prop::collection::vec(prim_1d(), 12..24), ny in 4usize..7) {
        let line = periodic_1d(&cells);
        let grid = Grid::new_2d(cells.len(), ny, (0.0, 1.0), (0.0, 0.5)).unwrap();
        let mut plane = Field::from_fn(grid, |i, _| line.get(i, 0));
        fill_ghosts(&mut plane, &BoundaryConditions::periodic());
        let config = fixed_scheme(0.25);
        let r1 = rhs_1d(&line, &IndicatorField::uniform(*line.grid(), 0.25), &config, SourceTerm::None).unwrap();
        let r2 = rhs_2d(&plane, &IndicatorField::uniform(grid, 0.25), &config, SourceTerm::None).unwrap();
        for row in r2.values.chunks(cells.len()) {
            prop_assert_eq!(row, &r1.values[..]);
        }
    }
}

#[test]
fn repeated_runs_are_bitwise_identical() {
    let run = || {
        let spec = adhyp::problem("ex2").unwrap();
        let config = spec.scheme(TauStrategy::New).unwrap();
        let mut s = spec
            .solver(Some((150, 1)), config, adhyp::Initialization::Midpoint)
            .unwrap();
        s.advance_to(0.1, |_| {}).unwrap();
        (
            s.field().as_slice().to_vec(),
            s.steps(),
            s.total_fallbacks(),
        )
    };
    assert_eq!(run(), run());
}

#[test]
fn uniform_flow_is_preserved() {
    let w = PrimitiveState::new(1.3, 0.4, -0.2, 2.0);
    let grid = Grid::new_2d(10, 8, (0.0, 1.0), (0.0, 1.0)).unwrap();
    let u = prim_to_cons(&w, &gas()).unwrap();
    let field = Field::uniform(grid, u);
    let mut solver = Solver::new(
        field,
        BoundaryConditions::periodic(),
        SourceTerm::None,
        fixed_scheme(0.0),
    )
    .unwrap();
    for _ in 0..3 {
        let dt = solver.stable_dt().unwrap();
        solver.step(dt).unwrap();
    }
    for (_, _, v) in solver.field().interior() {
        for (a, b) in v.to_array().into_iter().zip(u.to_array()) {
            assert!((a - b).abs() < 1e-13 * b.abs().max(1.0));
        }
    }
}

#[test]
fn colliding_blast_waves_survive_with_local_fallbacks() {
    // Two strong shocks squeeze a single cold cell; the overcompressive
    // slopes push its pressure negative unless the stage is redone first
    // order around it.
    let spec = adhyp::problem("ex3").unwrap();
    let config = spec.scheme(TauStrategy::New).unwrap();
    let mut s = spec
        .solver(Some((400, 1)), config, adhyp::Initialization::Midpoint)
        .unwrap();
    s.advance_to(0.03, |_| {}).unwrap();
    let steps = s.history();
    assert!(steps
        .iter()
        .any(|h| h.t > 0.027 && h.t < 0.028 && h.fallback_cells > 0));
    assert!(s.total_fallback_cell_steps() <= s.total_fallbacks());
    for (_, _, u) in s.field().interior() {
        assert!(adhyp::state::cons_to_prim(&u, &spec.gas()).is_ok());
    }
}

#[test]
fn near_vacuum_stage_is_redone_first_order() {
    // The first stage carves an almost empty cell moving fast enough that
    // the step's dt is far too large for the later stages.
    let cells = [
        PrimitiveState::new_1d(1.6403212485836502, -1.6180879185345816, 0.2),
        PrimitiveState::new_1d(4.92526897517892, 0.12900849227924113, 2.7669591634748887),
        PrimitiveState::new_1d(2.3101058746102816, 1.6108621714372668, 3.4611501707926093),
        PrimitiveState::new_1d(4.56404216378502, -1.3065433483474544, 0.6516196785924707),
        PrimitiveState::new_1d(4.680479004697133, -1.539359150606407, 1.4327773973933842),
        PrimitiveState::new_1d(0.3797332563411578, -1.4550260058934672, 4.52674416766305),
        PrimitiveState::new_1d(0.6059929982924211, 1.614135802801023, 4.9663810841569305),
        PrimitiveState::new_1d(3.195019689402559, -1.8978382044409445, 2.180027419505578),
        PrimitiveState::new_1d(4.2378730272247696, -1.3574776019081458, 3.2128528410056125),
        PrimitiveState::new_1d(3.7259295402395427, -1.9127617259852978, 1.6066823668744143),
        PrimitiveState::new_1d(4.052507402521558, -0.4733637550382706, 3.7757714921407612),
        PrimitiveState::new_1d(0.2, 0.0, 1.0321338725078386),
        PrimitiveState::new_1d(0.2, 0.0, 0.2),
        PrimitiveState::new_1d(0.2, 0.0, 0.2),
        PrimitiveState::new_1d(1.7446308792184366, 0.0, 0.2),
        PrimitiveState::new_1d(0.2, 0.0, 0.2),
    ];
    let field = periodic_1d(&cells);
    let before = field.total();
    let config = SchemeConfig::new(TauStrategy::New, 0.005, gas()).unwrap();
    let mut solver = Solver::new(
        field,
        BoundaryConditions::periodic(),
        SourceTerm::None,
        config,
    )
    .unwrap();
    for _ in 0..5 {
        let dt = solver.stable_dt().unwrap();
        solver.step(dt).unwrap();
    }
    assert!(solver.total_fallbacks() > 0);
    for (a, b) in solver
        .field()
        .total()
        .to_array()
        .into_iter()
        .zip(before.to_array())
    {
        assert!(close(a, b, 1e-12), "{a} vs {b}");
    }
}
