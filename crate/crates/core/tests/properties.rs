use helidec::diagnostics::{flux_closure, spectra_and_fluxes};
use helidec::nonlinear::NonlinearForm;
use helidec::transform::Fft3;
use helidec::{
    random_state, read_checkpoint, run, write_checkpoint, Dynamics, ForcingSpec, Grid, NonlinearEvaluator, SimConfig,
    WaveVector,
};
use proptest::prelude::*;

fn config(physical: usize, nu: f64, t_end: f64, seed: u64) -> SimConfig {
    let mut c = SimConfig::new(Grid::from_physical(physical).unwrap());
    c.nu = nu;
    c.t_end = t_end;
    c.dt = 2e-3;
    c.seed = seed;
    c
}

#[test]
fn physical_field_is_real_and_satisfies_parseval() {
    let s = random_state(Grid::new(4).unwrap(), -1.0, [1.0, 4.0], 3).unwrap();
    let fft = Fft3::new(s.grid());
    let v = fft.velocity(&s);
    let m3 = (fft.m() as f64).powi(3);
    let imag = v.iter().flatten().map(|c| c.im.abs()).fold(0.0, f64::max);
    assert!(imag < 1e-14, "imaginary part {imag}");
    let mean_sq: f64 = v.iter().flatten().map(|c| c.re * c.re).sum::<f64>() / m3;
    assert!((0.5 * mean_sq - s.energy()).abs() < 1e-13 * s.energy());
}

#[test]
fn advective_and_rotational_forms_agree() {
    let s = random_state(Grid::new(4).unwrap(), -1.5, [1.0, 4.0], 8).unwrap();
    let rot = NonlinearEvaluator::with_form(s.modes().clone(), NonlinearForm::Rotational).fast_rhs(&s);
    let adv = NonlinearEvaluator::with_form(s.modes().clone(), NonlinearForm::Advective).fast_rhs(&s);
    assert!(rot.l2_distance(&adv) <= 1e-12 * rot.norm_hs(0.0));
}

#[test]
fn unforced_viscous_energy_and_helicity_decay_monotonically() {
    let tr = run(&config(16, 0.05, 0.4, 1)).unwrap();
    for w in tr.records.windows(2) {
        assert!(w[1].energy <= w[0].energy);
        assert!(w[1].helicity <= w[0].helicity);
        assert!(w[1].helicity >= 0.0);
    }
}

#[test]
fn runs_are_bit_reproducible() {
    let mut c = config(16, 0.02, 0.1, 42);
    c.forcing = Some(ForcingSpec { band: [1.0, 2.0], amplitude: 0.5 });
    let a = run(&c).unwrap();
    let b = run(&c).unwrap();
    assert_eq!(a.final_state, b.final_state);
    assert_eq!(a.records, b.records);
}

#[test]
fn checkpoint_restart_matches_uninterrupted_run() {
    let dir = tempfile::tempdir().unwrap();
    let full = run(&config(8, 0.05, 0.2, 5)).unwrap();
    let half = run(&config(8, 0.05, 0.1, 5)).unwrap();
    let path = dir.path().join("half.dnsh");
    write_checkpoint(&half.final_state, 0.05, &path).unwrap();
    let ck = read_checkpoint(&path).unwrap();
    let dynamics = Dynamics::unforced(ck.state.modes().clone(), ck.nu).unwrap();
    let resumed = helidec::integrator::integrate(&dynamics, ck.state, 2e-3, 50, 50, |_, _| {}).unwrap();
    assert_eq!(resumed.final_state.amplitudes(), full.final_state.amplitudes());
}

#[test]
fn fluxes_close_on_random_fields() {
    let s = random_state(Grid::new(5).unwrap(), -1.0, [1.0, 5.0], 12).unwrap();
    let (e, h) = flux_closure(&spectra_and_fluxes(&s));
    assert!(e <= 1e-12 && h <= 1e-12, "{e} {h}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn nonlinear_term_conserves_both_invariants(seed in any::<u64>(), n in 2usize..5, exponent in -3.0f64..0.0) {
        let s = random_state(Grid::new(n).unwrap(), exponent, [1.0, n as f64], seed).unwrap();
        let du = NonlinearEvaluator::new(s.modes().clone()).fast_rhs(&s);
        let scale = du.norm_hs(0.0) * s.norm_hs(1.0) + f64::MIN_POSITIVE;
        prop_assert!(s.weighted_exchange(&du, |_| 1.0).abs() <= 1e-12 * scale);
        prop_assert!(s.weighted_exchange(&du, |k| k).abs() <= 1e-12 * scale);
    }

    #[test]
    fn stored_values_respect_hermitian_symmetry(seed in any::<u64>(), kx in -3i32..=3, ky in -3i32..=3, kz in -3i32..=3) {
        let k = WaveVector::new(kx, ky, kz);
        prop_assume!(!k.is_zero());
        let s = random_state(Grid::new(3).unwrap(), -1.0, [1.0, 6.0], seed).unwrap();
        prop_assert_eq!(s.get(&-k).unwrap(), s.get(&k).unwrap().conj());
    }
}
