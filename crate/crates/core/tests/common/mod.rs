#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tdras::dvr::orthonormalize;
use tdras::fock::{dim_fci, enumerate_space, index_of};
use tdras::oracle::{
    dense_boundary_element, dense_boundary_ket, dense_rho1, dense_rho2, DenseBasis, Ladder,
};
use tdras::propagator::{initial_guess, relax};
use tdras::*;

pub fn model(interaction: Interaction) -> Model {
    Model::new(build_grid(-8.0, 8.0, 101).unwrap(), Trap::default(), interaction)
}

/// Coarse grid for tests that only need a well-posed model.
pub fn small_model(interaction: Interaction) -> Model {
    Model::new(build_grid(-6.0, 6.0, 41).unwrap(), Trap::default(), interaction)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vector(rng: &mut ChaCha8Rng, dim: usize) -> CoefficientVector {
    let mut c = CoefficientVector::new(
        (0..dim)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect(),
    );
    c.normalize().unwrap();
    c
}

/// Orthonormal orbitals made of a random complex combination of trap eigenstates plus noise.
pub fn random_orbitals(rng: &mut ChaCha8Rng, model: &Model, m: usize) -> OrbitalSet {
    let (base, _) = tdras::dvr::trap_eigenstates(model.grid(), model.trap(), m + 2).unwrap();
    let b = base.values();
    let n = model.grid().n_points();
    let mix = DMatrix::from_fn(m + 2, m, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let mut raw = b * mix;
    for a in 0..n {
        for i in 0..m {
            raw[(a, i)] += C64::new(rng.gen_range(-0.01..0.01), rng.gen_range(-0.01..0.01));
        }
    }
    orthonormalize(&OrbitalSet::new(raw), model.grid()).unwrap()
}

pub fn random_state(rng: &mut ChaCha8Rng, model: &Model, eq: &RasEquations) -> WavefunctionState {
    WavefunctionState {
        orbitals: random_orbitals(rng, model, eq.spec().n_orbitals()),
        coefficients: random_vector(rng, eq.tables().dim()),
        time: 0.0,
    }
}

/// Every valid spec with `1 <= N <= n_max_particles` and `1 <= M <= m_max`.
pub fn all_specs(n_max_particles: usize, m_max: usize) -> Vec<RasSpec> {
    let mut out = Vec::new();
    for n in 1..=n_max_particles {
        for m in 1..=m_max {
            out.push(RasSpec::full(n, m).unwrap());
            for m1 in 1..m {
                let m2 = m - m1;
                for k in 0..=n {
                    out.push(RasSpec::new(n, m1, m2, Scheme::General(k)).unwrap());
                    out.push(RasSpec::new(n, m1, m2, Scheme::EvenOnly(k)).unwrap());
                }
            }
        }
    }
    out
}

pub fn shell(cfg: &[u32], m1: usize) -> usize {
    cfg[m1..].iter().map(|&x| x as usize).sum()
}

/// Enumeration, lookup and dimension formula agree for one spec.
pub fn check_fock_bijection(spec: &RasSpec) -> std::result::Result<(), String> {
    let space = FockSpace::new(*spec).map_err(|e| e.to_string())?;
    let listed = enumerate_space(&space);
    let dim = dim_ras(spec).map_err(|e| e.to_string())?;
    if listed.len() as u64 != dim || space.dim() as u64 != dim {
        return Err(format!("{spec:?}: enumerated {} vs dim {dim}", listed.len()));
    }
    let allowed = spec.allowed_shells();
    let mut seen = std::collections::HashSet::new();
    for (pos, cfg) in listed.iter().enumerate() {
        if cfg.iter().map(|&x| x as usize).sum::<usize>() != spec.n_particles {
            return Err(format!("{spec:?}: wrong particle number in {cfg:?}"));
        }
        if !allowed.contains(&shell(cfg, spec.m1)) {
            return Err(format!("{spec:?}: {cfg:?} outside allowed shells"));
        }
        if space.position(cfg) != Some(pos) || space.config(pos) != cfg.as_slice() {
            return Err(format!("{spec:?}: lookup of {cfg:?} is not the inverse of enumeration"));
        }
        if !seen.insert(cfg.clone()) {
            return Err(format!("{spec:?}: duplicate {cfg:?}"));
        }
    }
    if spec.is_full() {
        let m = spec.n_orbitals();
        let full = dim_fci(spec.n_particles, m).map_err(|e| e.to_string())?;
        if full != dim {
            return Err(format!("{spec:?}: full space has {dim}, expected {full}"));
        }
        let mut idx: Vec<u64> = listed
            .iter()
            .map(|c| index_of(c, spec.n_particles).unwrap())
            .collect();
        idx.sort_unstable();
        if idx != (1..=dim).collect::<Vec<_>>() {
            return Err(format!("{spec:?}: index_of is not a bijection onto 1..=dim"));
        }
    }
    Ok(())
}

/// Largest deviation of rho1, rho2, zeta4 and zeta6 from the dense oracle for one random state.
pub fn density_oracle_error(spec: &RasSpec, seed: u64) -> f64 {
    let tables = OperatorTables::new(*spec).unwrap();
    let space = tables.space();
    let (n, m, m1) = (spec.n_particles, spec.n_orbitals(), spec.m1);
    let basis = DenseBasis::new(n, m).unwrap();
    let c = random_vector(&mut rng(seed), space.dim());
    let psi = basis.embed(space.configs(), &c);
    let dens = tables.densities(&c).unwrap();
    let mut err = (dens.rho1.clone() - dense_rho1(&basis, &psi)).camax();
    err = err.max(dens.rho2.max_abs_diff(&dense_rho2(&basis, &psi)));
    if let Scheme::General(n_max) = spec.scheme {
        if spec.m2 > 0 && !spec.is_full() {
            let z4 = tables.zeta4(&c).unwrap();
            let z6 = tables.zeta6(&c).unwrap();
            let in_space = |cfg: &[u32]| space.position(cfg).is_some();
            let top = |cfg: &[u32]| shell(cfg, m1) == n_max;
            for i1 in 0..m1 {
                for j2 in 0..spec.m2 {
                    let ket = dense_boundary_ket(&basis, &psi, i1, m1 + j2, &in_space, &top);
                    for k2 in 0..spec.m2 {
                        for l1 in 0..m1 {
                            let want = dense_boundary_element(
                                &basis,
                                &ket,
                                &[Ladder::Create(m1 + k2), Ladder::Annihilate(l1)],
                                &psi,
                            );
                            err = err.max((z4.get(&[k2, i1, l1, j2]) - want).norm());
                        }
                    }
                    for k in 0..m {
                        for mm in 0..m {
                            for l in 0..m {
                                for nn in 0..m {
                                    let want = dense_boundary_element(
                                        &basis,
                                        &ket,
                                        &[
                                            Ladder::Create(k),
                                            Ladder::Create(mm),
                                            Ladder::Annihilate(nn),
                                            Ladder::Annihilate(l),
                                        ],
                                        &psi,
                                    );
                                    err = err.max((z6.get(&[k, mm, i1, l, nn, j2]) - want).norm());
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    err
}

/// Specs with `N <= 6`, `M <= 4` whose RAS space has at most `max_dim` configurations.
pub fn oracle_specs(max_dim: u64) -> Vec<RasSpec> {
    all_specs(6, 4)
        .into_iter()
        .filter(|s| dim_ras(s).unwrap() <= max_dim && dim_ras(s).unwrap() > 0)
        .collect()
}

/// Largest violation over all cross pairs of the stationarity condition for the rotation
/// `b_{j''}† b_{i'} - b_{i'}† b_{j''}`:
/// `<(1 - Pi) b_{j''}† b_{i'} Psi | H_G Psi> - <H_G Psi | (1 - Pi) b_{i'}† b_{j''} Psi>`,
/// with `G = h - i eta` and everything built densely.
pub fn dense_eta_condition(
    spec: &RasSpec,
    h: &DMatrix<C64>,
    v: &Tensor4,
    eta: &DMatrix<C64>,
    c: &[C64],
) -> f64 {
    let space = FockSpace::new(*spec).unwrap();
    let (n, m, m1) = (spec.n_particles, spec.n_orbitals(), spec.m1);
    let basis = DenseBasis::new(n, m).unwrap();
    let psi = basis.embed(space.configs(), c);
    let g = h - eta * C64::new(0.0, 1.0);
    let op = tdras::oracle::dense_hamiltonian(&g, v, n, m).unwrap();
    let hpsi = &op.matrix * nalgebra::DVector::from_column_slice(&psi);
    let outside: Vec<C64> = basis
        .configs
        .iter()
        .zip(hpsi.iter())
        .map(|(cfg, x)| if space.position(cfg).is_some() { C64::new(0.0, 0.0) } else { *x })
        .collect();
    let in_space = |cfg: &[u32]| space.position(cfg).is_some();
    let all = |_: &[u32]| true;
    let mut worst = 0.0f64;
    for i1 in 0..m1 {
        for j2 in m1..m {
            let up = dense_boundary_ket(&basis, &psi, i1, j2, &in_space, &all);
            let down = dense_boundary_ket(&basis, &psi, j2, i1, &in_space, &all);
            let s: C64 = up.iter().zip(&outside).map(|(a, b)| a.conj() * b).sum::<C64>()
                - outside.iter().zip(&down).map(|(a, b)| a.conj() * b).sum::<C64>();
            worst = worst.max(s.norm());
        }
    }
    worst
}

pub fn relax_energy(model: &Model, spec: RasSpec) -> (f64, RunFlags) {
    let eq = RasEquations::new(spec, EomOptions::default()).unwrap();
    let init = initial_guess(&eq, model, 0.05, 7).unwrap();
    let out = relax(init, model, &eq, IntegratorSpec::default(), &RelaxOptions::default()).unwrap();
    assert!(out.converged, "{spec:?} did not converge");
    (out.energy, out.flags)
}

pub fn max_orthonormality_error(states: &[WavefunctionState], grid: &Grid) -> f64 {
    states
        .iter()
        .map(|s| s.orbitals.orthonormality_error(grid))
        .fold(0.0, f64::max)
}
