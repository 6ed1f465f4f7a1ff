mod common;

use num_complex::Complex64 as C64;
use tdras::*;

fn schemes() -> Vec<RasSpec> {
    vec![
        RasSpec::new(4, 1, 2, Scheme::EvenOnly(2)).unwrap(),
        RasSpec::new(5, 2, 2, Scheme::EvenOnly(4)).unwrap(),
        RasSpec::new(4, 1, 2, Scheme::General(2)).unwrap(),
        RasSpec::new(4, 2, 2, Scheme::General(1)).unwrap(),
        RasSpec::new(5, 2, 2, Scheme::General(3)).unwrap(),
    ]
}

#[test]
fn residuals_and_stationarity_on_random_states() {
    let mdl = common::small_model(Interaction::contact(0.4));
    for (s, spec) in schemes().into_iter().enumerate() {
        let eq = RasEquations::new(spec, EomOptions::default()).unwrap();
        let mut rng = common::rng(100 + s as u64);
        for k in 0..100 {
            let st = common::random_state(&mut rng, &mdl, &eq);
            let h = mdl.one_body(&st.orbitals);
            let v = mdl.two_body(&st.orbitals);
            let dens = eq.tables().densities(&st.coefficients).unwrap();
            let sol = eq.eta(&h, &v, &st.coefficients, &dens).unwrap();
            assert!(!sol.regularized, "{spec:?} state {k}");
            assert!(sol.residual < 1e-10, "{spec:?} state {k}: residual {:e}", sol.residual);
            assert!(sol.eta.anti_hermiticity_error() < 1e-12);
            if k % 10 == 0 {
                let cond = common::dense_eta_condition(&spec, &h, &v, &sol.eta.matrix, &st.coefficients);
                assert!(cond < 1e-9, "{spec:?} state {k}: stationarity {cond:e}");
            }
        }
    }
}

#[test]
fn eta_vanishes_inside_blocks() {
    let mdl = common::small_model(Interaction::harmonic(0.2));
    let spec = RasSpec::new(4, 2, 2, Scheme::General(2)).unwrap();
    let eq = RasEquations::new(spec, EomOptions::default()).unwrap();
    let st = common::random_state(&mut common::rng(5), &mdl, &eq);
    let h = mdl.one_body(&st.orbitals);
    let v = mdl.two_body(&st.orbitals);
    let dens = eq.tables().densities(&st.coefficients).unwrap();
    let eta = eq.eta(&h, &v, &st.coefficients, &dens).unwrap().eta.matrix;
    for p in 0..4 {
        for q in 0..4 {
            if (p < 2) == (q < 2) {
                assert_eq!(eta[(p, q)], C64::new(0.0, 0.0));
            }
        }
    }
}

#[test]
fn empty_top_shell_is_flagged_and_finite() {
    let mdl = common::small_model(Interaction::contact(0.4));
    let spec = RasSpec::new(4, 1, 2, Scheme::General(2)).unwrap();
    let eq = RasEquations::new(spec, EomOptions::default()).unwrap();
    let mut st = common::random_state(&mut common::rng(8), &mdl, &eq);
    for (pos, cfg) in eq.tables().space().configs().enumerate() {
        if common::shell(cfg, 1) == 2 {
            st.coefficients[pos] = C64::new(0.0, 0.0);
        }
    }
    st.coefficients.normalize().unwrap();
    let h = mdl.one_body(&st.orbitals);
    let v = mdl.two_body(&st.orbitals);
    let dens = eq.tables().densities(&st.coefficients).unwrap();
    let sol = eq.eta(&h, &v, &st.coefficients, &dens).unwrap();
    assert!(sol.regularized);
    for k in 1..3 {
        let want = -C64::i() * h[(k, 0)];
        assert!((sol.eta.matrix[(k, 0)] - want).norm() < 1e-12);
    }
    let (d, diag) = eq.state_derivative(&st, &mdl, TimeMode::Real).unwrap();
    assert!(diag.regularized_solve);
    assert!(d.c_dot.iter().all(|x| x.re.is_finite() && x.im.is_finite()));
}

#[test]
fn full_limits_have_zero_eta() {
    let mdl = common::small_model(Interaction::contact(0.4));
    for spec in [
        RasSpec::new(3, 1, 2, Scheme::General(3)).unwrap(),
        RasSpec::full(3, 3).unwrap(),
        RasSpec::new(3, 1, 0, Scheme::General(0)).unwrap(),
    ] {
        let eq = RasEquations::new(spec, EomOptions::default()).unwrap();
        let st = common::random_state(&mut common::rng(2), &mdl, &eq);
        let h = mdl.one_body(&st.orbitals);
        let v = mdl.two_body(&st.orbitals);
        let dens = eq.tables().densities(&st.coefficients).unwrap();
        let eta = eq.eta(&h, &v, &st.coefficients, &dens).unwrap().eta.matrix;
        assert_eq!(eta.camax(), 0.0);
    }
}
