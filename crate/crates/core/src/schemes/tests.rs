use super::*;
use crate::problem::{build_mesh, BoundaryCondition, Equation};
use approx::assert_abs_diff_eq;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dirichlet0() -> BoundaryCondition {
    BoundaryCondition::dirichlet(0.0, 0.0)
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn ftcs_heat_quarter_ratio() {
    let mesh = build_mesh(1.0, 0.25).unwrap();
    let s = assemble_ftcs(Equation::Heat, &mesh, 0.015625, &dirichlet0()).unwrap();
    assert_eq!(s.r(), 0.25);
    assert!(s.a().is_identity());
    assert_eq!(s.b().diag(), &[0.5, 0.5, 0.5]);
    assert_eq!(s.b().lower(), &[0.25, 0.25]);
    assert_eq!(s.b().upper(), &[0.25, 0.25]);
    assert_eq!(s.g(), &[0.0, 0.0, 0.0]);
    assert!(s.b().is_symmetric());
}

#[test]
fn vanishing_step_gives_identity() {
    let mesh = build_mesh(1.0, 0.25).unwrap();
    let bc = dirichlet0();
    let tiny = 1e-30;
    let id = nalgebra::DMatrix::identity(3, 3);
    let b = assemble_ftcs(Equation::Heat, &mesh, tiny, &bc).unwrap().b().to_dense();
    assert!((b - &id).amax() < 1e-15);
    let a = assemble_btcs(Equation::Heat, &mesh, tiny, &bc).unwrap().a().to_dense();
    assert!((a - &id).amax() < 1e-15);
    let cn = assemble_crank_nicolson(Equation::Heat, &mesh, tiny, &bc).unwrap();
    let m = crate::spectral::effective_update_matrix(&cn).unwrap();
    assert!((m - nalgebra::DMatrix::identity(3, 3)).amax() < 1e-15);
}

#[test]
fn ftcs_linear_rd_diagonal() {
    // dx = 0.5, dt = 0.0625: r = 0.25 and the reaction removes another Δt.
    let mesh = build_mesh(2.0, 0.5).unwrap();
    let s = assemble_ftcs(Equation::LinearRd, &mesh, 0.0625, &dirichlet0()).unwrap();
    assert_eq!(s.r(), 0.25);
    assert!(s.b().diag().iter().all(|&d| d == 0.4375));
}

#[test]
fn btcs_heat_unit_ratio() {
    let mesh = build_mesh(1.5, 0.5).unwrap();
    let s = assemble_btcs(Equation::Heat, &mesh, 0.25, &dirichlet0()).unwrap();
    assert_eq!(s.dim(), 2);
    assert_eq!(s.a().diag(), &[3.0, 3.0]);
    assert_eq!(s.a().upper(), &[-1.0]);
    assert_eq!(s.a().lower(), &[-1.0]);
    assert!(s.b().is_identity());
}

#[test]
fn btcs_linear_rd_diagonal() {
    let mesh = build_mesh(1.0, 0.1).unwrap();
    let s = assemble_btcs(Equation::LinearRd, &mesh, 0.01, &dirichlet0()).unwrap();
    for &d in s.a().diag() {
        assert_abs_diff_eq!(d, 3.01, epsilon = 1e-12);
    }
}

#[test]
fn crank_nicolson_single_node() {
    let mesh = build_mesh(1.0, 0.5).unwrap();
    let s = assemble_crank_nicolson(Equation::Heat, &mesh, 0.5, &dirichlet0()).unwrap();
    assert_eq!(s.r(), 2.0);
    assert_eq!(s.a().diag(), &[3.0]);
    assert_eq!(s.b().diag(), &[-1.0]);
    let m = crate::spectral::effective_update_matrix(&s).unwrap();
    assert_abs_diff_eq!(m[(0, 0)], -1.0 / 3.0, epsilon = 1e-15);
}

#[test]
fn nonlinear_equations_need_a_linearization() {
    let mesh = build_mesh(1.0, 0.1).unwrap();
    let bc = dirichlet0();
    for eq in [Equation::NonlinearRd, Equation::FisherKpp] {
        assert!(matches!(
            assemble_btcs(eq, &mesh, 0.01, &bc),
            Err(Error::LinearizationRequired(_))
        ));
        assert!(matches!(
            assemble_crank_nicolson(eq, &mesh, 0.01, &bc),
            Err(Error::LinearizationRequired(_))
        ));
    }
    for eq in [Equation::Heat, Equation::LinearRd] {
        assert!(matches!(
            assemble_semi_implicit(eq, &mesh, 0.01, &bc),
            Err(Error::SemiImplicitOnLinear(_))
        ));
    }
    assert!(assemble_ftcs(Equation::Heat, &mesh, 0.0, &bc).is_err());
    assert!(assemble_btcs_frozen(Equation::FisherKpp, &mesh, 0.01, &bc, f64::NAN).is_err());
}

#[test]
fn semi_implicit_fisher_coefficient() {
    let mesh = build_mesh(1.0, 0.1).unwrap();
    let dt = 0.01;
    let mut s = assemble_semi_implicit(Equation::FisherKpp, &mesh, dt, &dirichlet0()).unwrap();
    assert_eq!(s.rebuild(), Rebuild::SplitImplicit);
    s.freeze_at(0.0);
    assert!(s.a().diag().iter().all(|&d| d == 1.0 - dt));
    s.freeze_at(1.0);
    assert!(s.a().diag().iter().all(|&d| d == 1.0));
    assert!(s.a().lower().iter().all(|&v| v == 0.0));
}

#[test]
fn semi_implicit_nonlinear_rd_coefficient() {
    let mesh = build_mesh(1.0, 0.1).unwrap();
    let mut s = assemble_semi_implicit(Equation::NonlinearRd, &mesh, 0.1, &dirichlet0()).unwrap();
    s.freeze_at(0.5);
    for &d in s.a().diag() {
        assert_abs_diff_eq!(d, 1.05, epsilon = 1e-15);
    }
}

#[test]
fn semi_implicit_agrees_with_explicit_to_second_order() {
    // Smooth state; the two treatments differ by Δt·(σ(U)·(U^{n+1} − U^n)) = O(Δt²).
    let mesh = build_mesh(1.0, 0.1).unwrap();
    let bc = dirichlet0();
    let u: Vec<f64> = mesh
        .interior_nodes()
        .iter()
        .map(|&x| 0.5 * (std::f64::consts::PI * x).sin())
        .collect();
    let gap = |dt: f64| {
        let mut semi = assemble_semi_implicit(Equation::NonlinearRd, &mesh, dt, &bc).unwrap();
        let mut expl = assemble_ftcs(Equation::NonlinearRd, &mesh, dt, &bc).unwrap();
        max_abs_diff(&semi.step_values(&u).unwrap(), &expl.step_values(&u).unwrap())
    };
    let (g1, g2) = (gap(1e-3), gap(5e-4));
    assert!(g1 < 1e-5, "gap {g1}");
    let ratio = g1 / g2;
    assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn frozen_coefficients() {
    let mesh = build_mesh(1.0, 0.1).unwrap();
    let bc = dirichlet0();
    let dt = 0.01;
    let s = assemble_btcs_frozen(Equation::FisherKpp, &mesh, dt, &bc, 0.0).unwrap();
    let r = s.r();
    assert_eq!(s.rebuild(), Rebuild::Static);
    assert_eq!(s.frozen_bound(), Some(0.0));
    assert!(s.a().diag().iter().all(|&d| d == (1.0 + 2.0 * r) - dt));
    let s = assemble_btcs_frozen(Equation::FisherKpp, &mesh, dt, &bc, 1.0).unwrap();
    assert!(s.a().diag().iter().all(|&d| d == 1.0 + 2.0 * r));
    // max of sin(πx) on the default grid is 1, giving σ = −1.
    let peak = mesh
        .interior_nodes()
        .iter()
        .map(|&x| (std::f64::consts::PI * x).sin())
        .fold(f64::MIN, f64::max);
    assert_abs_diff_eq!(peak, 1.0, epsilon = 1e-15);
    let s = assemble_btcs_frozen(Equation::NonlinearRd, &mesh, dt, &bc, peak).unwrap();
    assert!(s.a().diag().iter().all(|&d| d == (1.0 + 2.0 * r) + dt));
}

#[test]
fn linapprox_reductions() {
    let mesh = build_mesh(1.0, 0.1).unwrap();
    let bc = dirichlet0();
    let dt = 0.01;
    let n = mesh.n_interior();

    let mut s = assemble_btcs_linapprox(Equation::NonlinearRd, &mesh, dt, &bc).unwrap();
    s.freeze_at(0.0);
    let heat = assemble_btcs(Equation::Heat, &mesh, dt, &bc).unwrap();
    assert_eq!(s.a(), heat.a());
    assert!(s.g().iter().all(|&g| g == 0.0));

    let mut s = assemble_btcs_linapprox(Equation::FisherKpp, &mesh, dt, &bc).unwrap();
    s.freeze_at(0.5);
    assert_eq!(s.a(), heat.a());
    assert_eq!(s.g(), vec![0.25; n].as_slice());
}

#[test]
fn linapprox_is_exact_on_linear_reaction() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mesh = build_mesh(1.0, 0.05).unwrap();
    for bc in [
        BoundaryCondition::dirichlet(0.3, -0.2),
        BoundaryCondition::neumann(0.5, 1.0),
    ] {
        for dt in [1e-3, 0.05, 0.7] {
            let mut lin = assemble_btcs_linapprox(Equation::LinearRd, &mesh, dt, &bc).unwrap();
            let mut plain = assemble_btcs(Equation::LinearRd, &mesh, dt, &bc).unwrap();
            let u: Vec<f64> = (0..plain.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let a = lin.step_values(&u).unwrap();
            let b = plain.step_values(&u).unwrap();
            assert!(max_abs_diff(&a, &b) <= 1e-14);
            assert_eq!(lin.a(), plain.a());
        }
    }
}

#[test]
fn ftcs_step_by_hand() {
    let mesh = build_mesh(1.0, 0.25).unwrap();
    let mut s = assemble_ftcs(Equation::Heat, &mesh, 0.015625, &dirichlet0()).unwrap();
    let next = s.step(&StateVector::new(vec![0.0, 1.0, 0.0])).unwrap();
    assert_eq!(next.values(), &[0.25, 0.5, 0.25]);
    assert_eq!(next.time_index(), 1);
}

#[test]
fn zero_state_is_fixed_for_every_scheme() {
    let mesh = build_mesh(1.0, 0.1).unwrap();
    let bc = dirichlet0();
    for eq in Equation::ALL {
        for kind in SchemeKind::ALL {
            if kind.check_applicable(eq).is_err() {
                continue;
            }
            // Δt = 1 would make the semi-implicit Fisher matrix exactly singular.
            for dt in [1e-3, 0.1, 0.7] {
                let mut s = assemble_scheme(kind, eq, &mesh, dt, &bc, Some(0.7)).unwrap();
                let zero = StateVector::new(vec![0.0; s.dim()]);
                let next = s.step(&zero).unwrap();
                assert!(next.values().iter().all(|&v| v == 0.0), "{eq} {kind} {dt}");
            }
        }
    }
}

#[test]
fn dimension_mismatch_is_reported() {
    let mesh = build_mesh(1.0, 0.1).unwrap();
    let mut s = assemble_btcs(Equation::Heat, &mesh, 0.01, &dirichlet0()).unwrap();
    assert!(matches!(
        s.step(&StateVector::new(vec![1.0; 3])),
        Err(Error::DimensionMismatch { .. })
    ));
}

#[test]
fn crank_nicolson_is_second_order_consistent() {
    // On a mode where the second difference acts as `a = rμ`, CN multiplies by
    // (1 + a/2)/(1 − a/2) and the mean of one FTCS and one BTCS step by
    // 1 + a + a²/2 + a³/2 + ..., so the two differ by a³/4 + O(a⁴).
    let mesh = build_mesh(1.0, 0.1).unwrap();
    let bc = dirichlet0();
    let u: Vec<f64> = mesh
        .interior_nodes()
        .iter()
        .map(|&x| (std::f64::consts::PI * x).sin())
        .collect();
    let gap = |dt: f64| {
        let mut cn = assemble_crank_nicolson(Equation::Heat, &mesh, dt, &bc).unwrap();
        let mut f = assemble_ftcs(Equation::Heat, &mesh, dt, &bc).unwrap();
        let mut b = assemble_btcs(Equation::Heat, &mesh, dt, &bc).unwrap();
        let c = cn.step_values(&u).unwrap();
        let fe = f.step_values(&u).unwrap();
        let be = b.step_values(&u).unwrap();
        let mean: Vec<f64> = fe.iter().zip(&be).map(|(x, y)| 0.5 * (x + y)).collect();
        max_abs_diff(&c, &mean)
    };
    let (g1, g2) = (gap(1e-3), gap(5e-4));
    assert!(g1 < 1e-4, "gap {g1}");
    let ratio = g1 / g2;
    assert!((7.5..8.5).contains(&ratio), "ratio {ratio}");
}

/// Residual of the difference equations written node by node from the
/// stencils, independent of the banded assembly.
fn stencil_residual(
    kind: SchemeKind,
    eq: Equation,
    bc: &BoundaryCondition,
    dx: f64,
    dt: f64,
    old: &[f64],
    new: &[f64],
) -> Vec<f64> {
    let rho = eq.linear_rate().expect("static schemes are linear here");
    let r = dt / (dx * dx);
    let n = old.len();
    // Second difference at node i, using boundary data or ghost nodes.
    let d2 = |u: &[f64], i: usize| -> f64 {
        let left = if i > 0 {
            u[i - 1]
        } else {
            match bc.kind {
                BcKind::Dirichlet => bc.left,
                BcKind::Neumann => u[1] - 2.0 * dx * bc.left,
            }
        };
        let right = if i + 1 < n {
            u[i + 1]
        } else {
            match bc.kind {
                BcKind::Dirichlet => bc.right,
                BcKind::Neumann => u[n - 2] + 2.0 * dx * bc.right,
            }
        };
        left - 2.0 * u[i] + right
    };
    (0..n)
        .map(|i| {
            let lhs = new[i] - old[i];
            let rhs = match kind {
                SchemeKind::Ftcs => r * d2(old, i) + dt * rho * old[i],
                SchemeKind::Btcs => r * d2(new, i) + dt * rho * new[i],
                SchemeKind::CrankNicolson => 0.5 * r * (d2(old, i) + d2(new, i)) + 0.5 * dt * rho * (old[i] + new[i]),
                _ => unreachable!(),
            };
            lhs - rhs
        })
        .collect()
}

#[test]
fn assembly_matches_direct_stencils() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mesh = build_mesh(1.0, 0.1).unwrap();
    let bcs = [
        BoundaryCondition::dirichlet(0.0, 0.0),
        BoundaryCondition::dirichlet(0.7, -0.3),
        BoundaryCondition::neumann(0.0, 0.0),
        BoundaryCondition::neumann(-0.4, 0.9),
    ];
    for trial in 0..100 {
        let bc = &bcs[trial % bcs.len()];
        let eq = if trial % 2 == 0 {
            Equation::Heat
        } else {
            Equation::LinearRd
        };
        let dt = rng.gen_range(1e-3..1.0);
        for kind in [SchemeKind::Ftcs, SchemeKind::Btcs, SchemeKind::CrankNicolson] {
            let s = assemble_scheme(kind, eq, &mesh, dt, bc, None).unwrap();
            let old: Vec<f64> = (0..s.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let new: Vec<f64> = (0..s.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let an = s.a().mul_vec(&new);
            let bo = s.b().mul_vec(&old);
            let assembled: Vec<f64> = (0..s.dim()).map(|i| an[i] - bo[i] - dt * s.g()[i]).collect();
            let direct = stencil_residual(kind, eq, bc, mesh.dx(), dt, &old, &new);
            let err = max_abs_diff(&assembled, &direct);
            assert!(err < 1e-12, "{kind} {eq} {bc:?} dt={dt}: {err}");
        }
    }
}

#[test]
fn ftcs_heat_is_symmetric_under_dirichlet() {
    let mesh = build_mesh(1.0, 0.01).unwrap();
    for dt in [1e-5, 3.3e-5, 1e-4] {
        let s = assemble_ftcs(Equation::Heat, &mesh, dt, &dirichlet0()).unwrap();
        assert_eq!(s.b().to_dense(), s.b().to_dense().transpose());
    }
}

#[test]
fn neumann_edge_rows_double_the_inner_neighbour() {
    let mesh = build_mesh(1.0, 0.25).unwrap();
    let s = assemble_ftcs(Equation::Heat, &mesh, 0.015625, &BoundaryCondition::neumann(0.0, 0.0)).unwrap();
    assert_eq!(s.dim(), 5);
    assert_eq!(s.b().upper()[0], 0.5);
    assert_eq!(s.b().lower()[3], 0.5);
    assert_eq!(s.b().upper()[1], 0.25);
    // Constants are preserved under zero flux.
    let next = s.b().mul_vec(&[1.0; 5]);
    assert!(next.iter().all(|&v| (v - 1.0).abs() < 1e-15));
}

#[test]
fn names_round_trip() {
    for kind in SchemeKind::ALL {
        assert_eq!(kind.name().parse::<SchemeKind>().unwrap(), kind);
    }
    assert!(matches!(
        "leapfrog".parse::<SchemeKind>(),
        Err(Error::UnknownName { .. })
    ));
}
