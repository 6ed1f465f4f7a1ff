mod common;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use tdras::observables::*;
use tdras::oracle::{dense_expectation, dense_hamiltonian};
use tdras::propagator::initial_guess;
use tdras::*;

#[test]
fn correlation_fractions_of_table_energies() {
    let gp = 68.76816487;
    let reference = 68.73891122;
    let (e_ref, one) = correlation_energies(reference, gp, reference).unwrap();
    assert!((e_ref - 0.02925365).abs() < 1e-8);
    assert!((one - 1.0).abs() < 1e-15);
    for (e, want) in [(68.75335446, 0.51), (68.74538390, 0.78), (68.74152088, 0.91)] {
        let (_, f) = correlation_energies(e, gp, reference).unwrap();
        assert!((f - want).abs() < 5e-3, "{f}");
    }
    let gp = 193.5509587;
    let reference = 192.2138048;
    let (e_ref, _) = correlation_energies(reference, gp, reference).unwrap();
    assert!((e_ref - 1.34).abs() < 5e-3);
    for (e, want) in [(193.0154216, 0.401), (192.6308389, 0.688), (192.3920265, 0.867)] {
        let (_, f) = correlation_energies(e, gp, reference).unwrap();
        assert!((f - want).abs() < 5e-4, "{f}");
    }
}

#[test]
fn energy_matches_dense_expectation() {
    let mdl = common::small_model(Interaction::contact(0.9));
    let spec = RasSpec::full(4, 3).unwrap();
    let eq = RasEquations::new(spec, EomOptions::default()).unwrap();
    let st = common::random_state(&mut common::rng(12), &mdl, &eq);
    let e = energy(&st, &mdl, eq.tables()).unwrap();
    let op = dense_hamiltonian(&mdl.one_body(&st.orbitals), &mdl.two_body(&st.orbitals), 4, 3).unwrap();
    let psi = op.basis.embed(eq.tables().space().configs(), &st.coefficients);
    let v = nalgebra::DVector::from_column_slice(&psi);
    let want = v.dotc(&(&op.matrix * &v));
    assert!((e - want.re).abs() < 1e-10);
    assert!(want.im.abs() < 1e-12);
}

#[test]
fn noninteracting_ground_state_observables() {
    let mdl = common::model(Interaction::contact(0.0));
    let eq = RasEquations::new(RasSpec::full(10, 2).unwrap(), EomOptions::default()).unwrap();
    let st = initial_guess(&eq, &mdl, 0.0, 0).unwrap();
    let rec = record(&st, &mdl, eq.tables()).unwrap();
    assert!((rec.energy - 5.0).abs() < 1e-8);
    assert!((rec.rho0 - 10.0 / std::f64::consts::PI.sqrt()).abs() < 1e-8);
    assert_eq!(rec.natural_occupations, vec![10.0, 0.0]);
    let rho1 = eq.tables().rho1(&st.coefficients).unwrap();
    let total: f64 = density_profile(&st, &rho1).iter().sum::<f64>() * mdl.grid().dx();
    assert!((total - 10.0).abs() < 1e-8);
}

#[test]
fn fragmented_two_mode_state() {
    let spec = RasSpec::full(6, 2).unwrap();
    let tables = OperatorTables::new(spec).unwrap();
    let pos = tables.space().position(&[3, 3]).unwrap();
    let c = CoefficientVector::basis(tables.dim(), pos);
    let occ = natural_occupations(&tables.rho1(&c).unwrap(), 6);
    assert!((occ[0] - 3.0).abs() < 1e-12 && (occ[1] - 3.0).abs() < 1e-12);
}

#[test]
fn occupations_sum_to_particle_number() {
    let mdl = common::small_model(Interaction::contact(0.3));
    let eq = RasEquations::new(RasSpec::new(5, 2, 2, Scheme::General(2)).unwrap(), EomOptions::default()).unwrap();
    let mut rng = common::rng(3);
    for _ in 0..10 {
        let st = common::random_state(&mut rng, &mdl, &eq);
        let rec = record(&st, &mdl, eq.tables()).unwrap();
        assert!((rec.natural_occupations.iter().sum::<f64>() - 5.0).abs() < 1e-10);
        assert!(rec.natural_occupations.windows(2).all(|w| w[0] >= w[1]));
    }
}

#[test]
fn complex_energy_is_rejected() {
    let h = DMatrix::from_element(1, 1, C64::new(1.0, 0.5));
    let dens = DensityMatrices {
        rho1: DMatrix::from_element(1, 1, C64::from(1.0)),
        rho2: Tensor4::zeros(1),
    };
    assert!(matches!(energy_from_parts(&h, &Tensor4::zeros(1), &dens), Err(Error::InconsistentState(_))));
}

#[test]
fn frequency_of_two_tone_signal_and_origin_interpolation() {
    let t: Vec<f64> = (0..1200).map(|k| k as f64 * 0.0125).collect();
    let y: Vec<f64> = t.iter().map(|t| (6.633 * t).cos() + 0.2 * (13.27 * t).cos()).collect();
    assert!((breathing_frequency(&t, &y).unwrap() - 6.633).abs() < 5e-3);
    let grid = build_grid(-1.0, 1.5, 6).unwrap();
    let prof: Vec<f64> = grid.points().iter().map(|x| 2.0 * x + 1.0).collect();
    assert!((rho_at_origin(&prof, &grid) - 1.0).abs() < 1e-12);
    assert_eq!(analytic_breathing_frequency(1, 10, 0.0, 1.0), 2.0);
}

#[test]
fn dense_number_operator() {
    let basis = tdras::oracle::DenseBasis::new(3, 2).unwrap();
    let psi: Vec<C64> = (0..basis.dim()).map(|k| C64::from((k + 1) as f64)).collect();
    let norm: f64 = psi.iter().map(|x| x.norm_sqr()).sum();
    let n0 = dense_expectation(&basis, &psi, &[tdras::oracle::Ladder::Create(0), tdras::oracle::Ladder::Annihilate(0)]);
    let n1 = dense_expectation(&basis, &psi, &[tdras::oracle::Ladder::Create(1), tdras::oracle::Ladder::Annihilate(1)]);
    assert!(((n0 + n1).re - 3.0 * norm).abs() < 1e-12);
}
