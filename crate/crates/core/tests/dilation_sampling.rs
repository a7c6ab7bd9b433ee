//! Monte Carlo checks of the dilation and Markov identities.

mod common;

use common::Rng;
use schur_dilation::dilation::{dilate_exact, dilate_mc, group_law_check};
use schur_dilation::gaussian::{sample_path, PathConfig};
use schur_dilation::markov::{verify_reversed, verify_standard, McCheck};
use schur_dilation::mc::sigma_gate;

#[test]
fn dilation_mc_agrees_with_closed_form() {
    let mut rng = Rng::new(7);
    let sg = rng.semigroup(4, 2);
    let f = rng.operator(sg.embedding().space());
    let grid = PathConfig::new(1.0 / 16.0, 2.0, 2, 0).unwrap();
    let exact = dilate_exact(&sg, 0.5, &f).unwrap();
    assert!(exact.max_abs_diff(&sg.apply(0.5, &f).unwrap()) < 1e-12);
    let small = dilate_mc(&sg, 0.5, &f, &grid, 5_000, 1).unwrap();
    let large = dilate_mc(&sg, 0.5, &f, &grid, 20_000, 1).unwrap();
    let gate = sigma_gate(&large, &exact, 4.0);
    assert!(gate.pass_fraction() >= 0.99, "{gate:?}");
    // Standard errors halve when the sample count quadruples.
    for (a, b) in small.stderr.iter().zip(large.stderr.iter()) {
        if *a > 0.0 {
            let r = b / a;
            assert!((r - 0.5).abs() <= 0.1, "{r}");
        }
    }
}

#[test]
fn group_law_on_sign_mixed_times() {
    let mut rng = Rng::new(8);
    let sg = rng.semigroup(5, 3);
    let f = rng.operator(sg.embedding().space());
    let path = sample_path(&PathConfig::new(1.0 / 8.0, 4.0, 3, 21).unwrap()).unwrap();
    for t in [-1.5, -0.25, 0.0, 0.5, 1.75] {
        for tp in [-1.0, 0.0, 0.125, 1.0, 2.0] {
            assert!(group_law_check(&path, sg.embedding(), t, tp, &f).unwrap() <= 1e-12);
        }
    }
}

#[test]
fn markov_identities_with_sampling() {
    let mut rng = Rng::new(9);
    let sg = rng.semigroup(3, 2);
    let f = rng.operator(sg.embedding().space());
    let path = sample_path(&PathConfig::new(0.25, 2.0, 2, 4).unwrap()).unwrap();
    let mc = McCheck {
        n_samples: 20_000,
        root_seed: 6,
        sigma_gate: 4.0,
    };
    let rep = verify_standard(&sg, &path, 0.5, 1.5, &f, Some(mc)).unwrap();
    assert!(rep.exact_deviation <= 1e-12);
    assert!(rep.mc.unwrap().pass_fraction() >= 0.99, "{rep:?}");
    let rep = verify_reversed(&sg, &path, 0.25, 1.25, &f, Some(mc)).unwrap();
    assert!(rep.exact_deviation <= 1e-12);
    assert!(rep.mc.unwrap().pass_fraction() >= 0.99, "{rep:?}");
}
