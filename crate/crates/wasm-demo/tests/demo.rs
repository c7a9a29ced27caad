use std::f64::consts::{FRAC_PI_2, PI, TAU};

use allen_cahn_demo::{sample_connection, steiner, Relaxation};

#[test]
fn relaxation_lowers_energy_and_renders() {
    let mut r = Relaxation::build(&[0.0, TAU / 3.0, 2.0 * TAU / 3.0], 65, 0.15).unwrap();
    let e0 = r.energy();
    assert_eq!(r.step(200), 200);
    assert!(r.energy() < e0);
    let img = r.render();
    assert_eq!(img.len(), r.size() * r.size() * 4);
    // corner pixel is outside the disk, the centre is opaque
    assert_eq!(img[3], 0);
    let c = (r.size() / 2 * r.size() + r.size() / 2) * 4;
    assert_eq!(img[c + 3], 255);
}

#[test]
fn relaxation_runs_to_a_triod() {
    let mut r = Relaxation::build(&[0.0, FRAC_PI_2, PI], 65, 0.15).unwrap();
    while !r.finished() {
        r.step(500);
    }
    let j = r.junctions();
    assert_eq!(j.len(), 2);
    let reference = r.reference();
    let h = 2.0 / 64.0;
    assert!((j[0] - reference[0]).hypot(j[1] - reference[1]) < 4.0 * h, "{j:?} vs {reference:?}");
}

#[test]
fn bad_input_is_rejected() {
    assert!(Relaxation::build(&[0.0, 1.0], 65, 0.15).is_err());
    assert!(Relaxation::build(&[0.0, 2.0, 4.0], 65, 0.01).is_err());
    assert!(steiner(vec![0.0; 5]).is_empty());
}

#[test]
fn steiner_of_equilateral_is_the_centroid() {
    let s = 3f64.sqrt() / 2.0;
    let out = steiner(vec![1.0, 0.0, -0.5, s, -0.5, -s]);
    assert!(out[0].abs() < 1e-9 && out[1].abs() < 1e-9);
    assert!((out[2] - 3.0).abs() < 1e-9);
}

#[test]
fn double_well_profile_is_tanh() {
    let (m, action, rows) = sample_connection("double-well").unwrap();
    assert_eq!(m, 1);
    assert!((action - 4.0 / 3.0).abs() < 1e-3);
    assert!(sample_connection("quartic").is_err());
    // centred profile: U(t) close to tanh(t) up to a shift
    let mid = rows.chunks(2).min_by(|a, b| a[1].abs().partial_cmp(&b[1].abs()).unwrap()).unwrap()[0];
    for r in rows.chunks(2).step_by(50) {
        assert!((r[1] - (r[0] - mid).tanh()).abs() < 2e-2, "{r:?}");
    }
}
