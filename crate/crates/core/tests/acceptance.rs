//! Acceptance suite: every criterion at its stated tolerance, one line per check.
//!
//! Run with `cargo test -p tdras --test acceptance`. The process exits non-zero
//! if any check fails.

mod common;

use std::time::Instant;

use tdras::observables::{analytic_breathing_frequency, breathing_frequency};
use tdras::propagator::{initial_guess, propagate, relax};
use tdras::*;

struct Report {
    failures: usize,
    total: usize,
}

impl Report {
    fn check(&mut self, id: &str, what: &str, ok: bool, detail: String) {
        self.total += 1;
        if !ok {
            self.failures += 1;
        }
        println!("{} {id} {what}: {detail}", if ok { "PASS" } else { "FAIL" });
    }

    fn close(&mut self, id: &str, what: &str, got: f64, want: f64, tol: f64) {
        let ok = (got - want).abs() <= tol;
        self.check(id, what, ok, format!("got {got:.10}, want {want} +/- {tol:e}"));
    }
}

fn relax_default(model: &Model, spec: RasSpec) -> Result<propagator::RelaxOutcome> {
    let eq = RasEquations::new(spec, EomOptions::default())?;
    let init = initial_guess(&eq, model, 1e-6, 0)?;
    relax(init, model, &eq, IntegratorSpec::default(), &RelaxOptions::default())
}

fn relax_energy(model: &Model, spec: RasSpec) -> f64 {
    match relax_default(model, spec) {
        Ok(out) if out.converged => out.energy,
        Ok(out) => {
            println!("  note: {spec:?} stopped unconverged at tau = {}", out.state.time);
            out.energy
        }
        Err(e) => {
            println!("  note: {spec:?} failed: {e}");
            f64::NAN
        }
    }
}

fn ground_state_tables(r: &mut Report) {
    let weak = common::model(Interaction::contact(0.01));
    let strong = common::model(Interaction::contact(0.1));
    let sd = |m2| RasSpec::new(100, 1, m2, Scheme::General(2)).unwrap();
    let cells = [
        ("GP, lambda=0.01", &weak, RasSpec::full(100, 1).unwrap(), 68.76816487, 1e-5),
        ("GP, lambda=0.1", &strong, RasSpec::full(100, 1).unwrap(), 193.5509587, 1e-4),
        ("MCTDHB M=2, lambda=0.01", &weak, RasSpec::full(100, 2).unwrap(), 68.75335446, 1e-5),
        ("MCTDHB M=2, lambda=0.1", &strong, RasSpec::full(100, 2).unwrap(), 193.0154216, 1e-4),
        ("-SD M=2, lambda=0.01", &weak, sd(1), 68.75355024, 1e-5),
        ("-SD M=5, lambda=0.01", &weak, sd(4), 68.73926413, 1e-5),
        (
            "-D M=2, lambda=0.01",
            &weak,
            RasSpec::new(100, 1, 1, Scheme::EvenOnly(2)).unwrap(),
            68.75355024,
            1e-5,
        ),
    ];
    let mut mctdhb_strong = f64::NAN;
    for (name, model, spec, want, tol) in cells {
        let t0 = Instant::now();
        let e = relax_energy(model, spec);
        r.close("C1", &format!("{name} ({:.0?})", t0.elapsed()), e, want, tol);
        if name == "MCTDHB M=2, lambda=0.1" {
            mctdhb_strong = e;
        }
    }
    let t0 = Instant::now();
    let e25 = relax_energy(&strong, RasSpec::new(100, 1, 1, Scheme::General(25)).unwrap());
    r.close(
        "C1",
        &format!("-25 M=2, lambda=0.1 equals MCTDHB M=2 ({:.0?})", t0.elapsed()),
        e25,
        mctdhb_strong,
        1e-6,
    );
}

fn configuration_counts(r: &mut Report) {
    let cases = [
        (RasSpec::full(100, 2), 101),
        (RasSpec::full(100, 3), 5151),
        (RasSpec::full(100, 5), 4_598_126),
        (RasSpec::new(100, 1, 1, Scheme::General(2)), 3),
        (RasSpec::new(100, 1, 4, Scheme::General(2)), 15),
        (RasSpec::new(100, 1, 4, Scheme::General(8)), 495),
        (RasSpec::new(100, 1, 1, Scheme::EvenOnly(2)), 2),
        (RasSpec::new(100, 1, 4, Scheme::EvenOnly(8)), 295),
        (RasSpec::full(10, 8), 19448),
    ];
    for (spec, want) in cases {
        let spec = spec.unwrap();
        let got = dim_ras(&spec).unwrap();
        r.check("C2", &format!("dim {spec:?}"), got == want, format!("got {got}, want {want}"));
    }
}

struct Trajectory {
    records: Vec<ObservableRecord>,
    max_orthonormality_error: f64,
}

/// Relaxes under `model`, switches to `to` and propagates to `t_final`, checking orbital
/// orthonormality at the end of every unit time segment.
fn quench(model: &Model, spec: RasSpec, to: Interaction, t_final: f64) -> Result<Trajectory> {
    let eq = RasEquations::new(spec, EomOptions::default())?;
    let init = initial_guess(&eq, model, 1e-6, 0)?;
    let relaxed = relax(init, model, &eq, IntegratorSpec::default(), &RelaxOptions::default())?;
    let quenched = model.with_interaction(to);
    let mut state = relaxed.state;
    state.time = 0.0;
    let mut records = Vec::new();
    let mut worst = state.orbitals.orthonormality_error(model.grid());
    let segments = t_final.round() as usize;
    for k in 0..segments {
        let (next, recs, _) = propagate(state, &quenched, &eq, IntegratorSpec::default(), 1.0, 0.025)?;
        let skip = usize::from(k > 0);
        records.extend(recs.into_iter().skip(skip));
        worst = worst.max(next.orbitals.orthonormality_error(model.grid()));
        state = next;
    }
    Ok(Trajectory {
        records,
        max_orthonormality_error: worst,
    })
}

fn frequency(traj: &Trajectory) -> f64 {
    let t: Vec<f64> = traj.records.iter().map(|r| r.t).collect();
    let y: Vec<f64> = traj.records.iter().map(|r| r.rho0).collect();
    breathing_frequency(&t, &y).unwrap_or(f64::NAN)
}

fn quench_dynamics(r: &mut Report) -> Option<Trajectory> {
    let model = common::model(Interaction::harmonic(0.0));
    let t0 = Instant::now();
    let full = quench(&model, RasSpec::full(10, 4).unwrap(), Interaction::harmonic(0.1), 15.0);
    let gp = quench(&model, RasSpec::full(10, 1).unwrap(), Interaction::harmonic(0.1), 15.0);
    let analytic = analytic_breathing_frequency(1, 10, 0.1, 1.0);
    match (&full, &gp) {
        (Ok(full), Ok(gp)) => {
            let w = frequency(full);
            let w_gp = frequency(gp);
            r.close(
                "C3",
                &format!("breathing frequency, Full M=4 ({:.0?})", t0.elapsed()),
                w,
                3.46,
                0.05,
            );
            r.check(
                "C3",
                "frequency within 1% of 2 sqrt(3)",
                ((w - analytic) / analytic).abs() < 0.01,
                format!("got {w:.5}, analytic {analytic:.5}"),
            );
            r.check("C3", "GP frequency strictly lower", w_gp < w, format!("GP {w_gp:.5}, Full {w:.5}"));
        }
        _ => {
            for e in [full.as_ref().err(), gp.as_ref().err()].into_iter().flatten() {
                println!("  note: quench failed: {e}");
            }
            r.check("C3", "breathing frequency, Full M=4", false, "propagation failed".into());
        }
    }
    r.close(
        "C3",
        "analytic Omega_1 at lambda=0.5",
        analytic_breathing_frequency(1, 10, 0.5, 1.0),
        6.63,
        0.01,
    );
    full.ok()
}

fn exact_model(r: &mut Report) {
    let t0 = Instant::now();
    let model = common::model(Interaction::harmonic(0.5));
    let e = relax_energy(&model, RasSpec::full(10, 6).unwrap());
    let exact = 0.5 + 4.5 * 11f64.sqrt();
    r.close("C4", &format!("harmonic pair N=10, Full M=6 ({:.0?})", t0.elapsed()), e, exact, 1e-3);
    let free = common::model(Interaction::contact(0.0));
    let e = relax_energy(&free, RasSpec::full(10, 4).unwrap());
    r.close("C4", "noninteracting N=10, M=4", e, 5.0, 1e-9);
}

fn property_suites(r: &mut Report, quench: Option<&Trajectory>) {
    let specs = common::all_specs(8, 6);
    let bad: Vec<String> = specs
        .iter()
        .filter_map(|s| common::check_fock_bijection(s).err())
        .collect();
    r.check(
        "C5",
        "Fock bijection, N <= 8, M <= 6",
        bad.is_empty(),
        format!("{} specs, {} failures {:?}", specs.len(), bad.len(), bad.first()),
    );

    let specs = common::oracle_specs(500);
    let worst = specs
        .iter()
        .enumerate()
        .map(|(k, s)| common::density_oracle_error(s, k as u64))
        .fold(0.0, f64::max);
    r.check(
        "C5",
        "rho1/rho2/zeta vs dense oracle, dim <= 500",
        worst < 1e-10,
        format!("{} specs, max error {worst:e}", specs.len()),
    );

    let mdl = common::small_model(Interaction::contact(0.4));
    for spec in [
        RasSpec::new(4, 1, 2, Scheme::EvenOnly(2)).unwrap(),
        RasSpec::new(4, 2, 2, Scheme::General(2)).unwrap(),
    ] {
        let eq = RasEquations::new(spec, EomOptions::default()).unwrap();
        let mut rng = common::rng(1);
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let st = common::random_state(&mut rng, &mdl, &eq);
            let h = mdl.one_body(&st.orbitals);
            let v = mdl.two_body(&st.orbitals);
            let dens = eq.tables().densities(&st.coefficients).unwrap();
            worst = worst.max(eq.eta(&h, &v, &st.coefficients, &dens).unwrap().residual);
        }
        r.check(
            "C5",
            &format!("eta residuals, 100 random states, {:?}", spec.scheme),
            worst < 1e-10,
            format!("max residual {worst:e}"),
        );
    }

    match quench {
        Some(traj) => {
            let e0 = traj.records[0].energy;
            let de = traj.records.iter().map(|x| (x.energy - e0).abs()).fold(0.0, f64::max);
            let dn = traj.records.iter().map(|x| (x.norm - 1.0).abs()).fold(0.0, f64::max);
            let span = traj.records.last().map_or(0.0, |x| x.t);
            r.check(
                "C5",
                "real-time norm and orthonormality drift, t in [0,15]",
                dn < 1e-8 && traj.max_orthonormality_error < 1e-8 && span >= 15.0 - 1e-9,
                format!("norm {dn:e}, orthonormality {:e}", traj.max_orthonormality_error),
            );
            r.check("C5", "real-time energy drift, t in [0,15]", de < 1e-6, format!("{de:e}"));
        }
        None => r.check("C5", "real-time conservation", false, "quench run unavailable".into()),
    }

    let mdl = common::small_model(Interaction::contact(1.0));
    for n in [3, 4] {
        let chain = [
            RasSpec::full(n, 1).unwrap(),
            RasSpec::new(n, 1, 2, Scheme::General(2)).unwrap(),
            RasSpec::full(n, 3).unwrap(),
        ];
        let mut energies = Vec::new();
        let mut non_monotone = 0;
        for spec in chain {
            let (e, flags) = common::relax_energy(&mdl, spec);
            energies.push(e);
            non_monotone += flags.non_monotone_steps;
        }
        let exact = tdras::oracle::exact_ground_state(&mdl, n, 12).unwrap();
        energies.push(exact);
        let ordered = energies.windows(2).all(|w| w[0] >= w[1] - 1e-9);
        r.check(
            "C5",
            &format!("variational ordering and monotone relaxation, N={n}"),
            ordered && non_monotone == 0,
            format!("GP >= RAS >= MCTDHB >= exact: {energies:.8?}, non-monotone steps {non_monotone}"),
        );
    }

    let mdl = common::small_model(Interaction::contact(0.8));
    let (ea, _) = common::relax_energy(&mdl, RasSpec::full(3, 3).unwrap());
    let (eb, _) = common::relax_energy(&mdl, RasSpec::new(3, 1, 2, Scheme::General(3)).unwrap());
    r.close("C5", "General(N) equals MCTDHB, N=3, M=3", eb, ea, 1e-8);
}

fn main() {
    let start = Instant::now();
    let mut r = Report { failures: 0, total: 0 };
    ground_state_tables(&mut r);
    configuration_counts(&mut r);
    let traj = quench_dynamics(&mut r);
    exact_model(&mut r);
    property_suites(&mut r, traj.as_ref());
    println!(
        "N/A C6 cells with >= 1e6 configurations, their occupation numbers, the M=8 reference curves and CPU-hour comparisons: not reproducible at desk scale"
    );
    println!(
        "acceptance: {} passed, {} failed, {:.0?}",
        r.total - r.failures,
        r.failures,
        start.elapsed()
    );
    if r.failures > 0 {
        std::process::exit(1);
    }
}
