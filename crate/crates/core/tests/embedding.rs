mod common;

use approx::assert_relative_eq;
use common::{bisect_root, brute_gamma, Draws};
use ordelic::embedding::{build_envelope_loss, build_surrogate, pseudo_identification, SmoothedSurrogate};
use ordelic::fixtures::{example_cost, example_embedding, example_phi};
use ordelic::surrogate::{Surrogate, SurrogateFile};
use ordelic::{Error, LinkedProperty};

fn pieces(s: &SmoothedSurrogate, y: usize) -> Vec<(f64, f64)> {
    s.v_bar[y].pieces().iter().map(|a| (a.slope, a.intercept)).collect()
}

#[test]
fn envelope_losses_match_closed_forms() {
    let input = build_envelope_loss(&example_cost(), &example_phi(), Some(3.0)).unwrap();
    let expected: [&[(f64, f64)]; 3] = [
        &[(-3.0, 0.0), (1.0, 0.0), (3.0, -6.0)],
        &[(-3.0, 3.0), (0.5, -0.5), (3.0, -8.0)],
        &[(-3.0, 5.0), (-2.0, 5.0), (-1.5, 4.5), (3.0, -9.0)],
    ];
    for (y, exp) in expected.iter().enumerate() {
        let got: Vec<(f64, f64)> = input.loss.outcome(y).pieces().iter().map(|a| (a.slope, a.intercept)).collect();
        assert_eq!(&got, exp, "outcome {y}");
    }
    for (r, &u) in example_phi().iter().enumerate() {
        for y in 0..3 {
            assert_eq!(input.loss.eval(u, y), common::COST[r][y]);
        }
    }
}

#[test]
fn outer_slope_must_dominate_chords() {
    assert!(matches!(
        build_envelope_loss(&example_cost(), &example_phi(), Some(2.0)),
        Err(Error::OuterSlope { .. })
    ));
    assert!(build_envelope_loss(&example_cost(), &example_phi(), None).is_ok());
}

#[test]
fn pseudo_identification_cases() {
    let input = build_envelope_loss(&example_cost(), &example_phi(), Some(3.0)).unwrap();
    assert_eq!(pseudo_identification(&input, 0.0)[0], 0.0);
    assert_eq!(pseudo_identification(&input, 3.0)[0], 2.0);
    assert_eq!(pseudo_identification(&input, 3.0)[2], 0.0);
    assert_eq!(pseudo_identification(&input, 1.0)[1], 0.0);
    assert_eq!(pseudo_identification(&input, 0.25)[0], 1.0);
}

#[test]
fn interpolated_identification() {
    let s = example_embedding().unwrap();
    assert_eq!(s.interpolation, vec![0.0, 0.5, 1.0, 2.0, 3.0]);
    // V(u, 1) = u, 2u, 1, u - 1 on the four pieces
    let v1 = &s.v_bar[0];
    for (u, want) in [(-1.0, -1.0), (0.25, 0.5), (0.5, 1.0), (1.5, 1.0), (2.0, 1.0), (4.0, 3.0)] {
        assert_eq!(v1.eval(u), want, "u = {u}");
    }
    assert_eq!(
        pieces(&s, 0).iter().filter(|(a, b)| *a == 0.0 && *b == 1.0).count(),
        2,
        "constant on [1/2, 1] and [1, 2]"
    );
    // y = 2 rises from -3 to 0 on [1/2, 1]
    for u in [0.5, 0.6, 0.75, 0.9, 1.0] {
        assert_relative_eq!(s.v_bar[1].eval(u), 6.0 * u - 6.0, epsilon = 1e-15);
    }
    let input = build_envelope_loss(&example_cost(), &example_phi(), Some(3.0)).unwrap();
    for &u in &s.interpolation {
        let v = pseudo_identification(&input, u);
        for y in 0..3 {
            assert_eq!(s.v_bar[y].eval(u), v[y]);
        }
    }
}

#[test]
fn surrogate_loss_of_first_outcome() {
    let s = example_embedding().unwrap();
    let l = &s.l_bar[0];
    let got: Vec<(f64, f64, f64)> = l.pieces().iter().map(|q| (q.c2, q.c1, q.c0)).collect();
    assert_eq!(
        got,
        vec![
            (0.5, 0.0, 0.0),
            (1.0, 0.0, 0.0),
            (0.0, 1.0, -0.25),
            (0.0, 1.0, -0.25),
            (0.5, -1.0, 1.75),
            (0.5, -1.0, 1.75)
        ]
    );
    assert_eq!(l.breakpoints(), &[0.0, 0.5, 1.0, 2.0, 3.0][..]);
    for u in [2.25, 2.5, 3.0, 4.0] {
        assert_relative_eq!(l.eval(u), u * u / 2.0 - u + 1.75, epsilon = 1e-12);
    }
}

#[test]
fn thresholds_link_and_range() {
    let s = example_embedding().unwrap();
    assert_eq!(s.thresholds, vec![0.5, 2.0]);
    assert_eq!(s.range, (0.0, 3.0));
    assert_eq!(LinkedProperty::link(&s, 0.4), 0);
    assert_eq!(LinkedProperty::link(&s, 0.5), 0);
    assert_eq!(LinkedProperty::link(&s, 2.0), 1);
    assert_eq!(LinkedProperty::link(&s, 2.01), 2);
}

#[test]
fn property_at_vertices() {
    let s = example_embedding().unwrap();
    for (y, want) in [0.0, 1.0, 3.0].into_iter().enumerate() {
        let mut p = vec![0.0; 3];
        p[y] = 1.0;
        assert_relative_eq!(s.gamma(&p).unwrap(), want, epsilon = 1e-12);
        assert!((bisect_root(&s.v_bar, &p) - want).abs() < 1e-9);
    }
}

#[test]
fn closed_form_matches_bisection() {
    let s = example_embedding().unwrap();
    let mut draws = Draws::new(11);
    for _ in 0..10_000 {
        let p = draws.simplex(3);
        let a = s.gamma(&p).unwrap();
        let b = bisect_root(&s.v_bar, &p);
        assert!((a - b).abs() < 1e-9, "p = {p:?}: {a} vs {b}");
    }
}

#[test]
fn refines_the_cost_minimizer() {
    let s = example_embedding().unwrap();
    let spec = ordelic::fixtures::example_spec();
    let mut draws = Draws::new(12);
    let mut checked = 0;
    for _ in 0..100_000 {
        let p = draws.simplex(3);
        if spec.boundary_margin(&p) < 1e-8 {
            continue;
        }
        let r = LinkedProperty::link(&s, s.gamma(&p).unwrap());
        assert!(brute_gamma(&p).contains(&r), "p = {p:?}");
        checked += 1;
    }
    assert!(checked > 99_000);
}

/// Solves `gamma = t` along segments from a point below `t` to one above.
fn level_points(s: &SmoothedSurrogate, t: f64, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut draws = Draws::new(seed);
    let mut out = vec![];
    while out.len() < count {
        let a = draws.simplex(3);
        let b = draws.simplex(3);
        let (ga, gb) = (s.gamma(&a).unwrap() - t, s.gamma(&b).unwrap() - t);
        if ga * gb >= 0.0 {
            continue;
        }
        let at = |x: f64| -> Vec<f64> { a.iter().zip(&b).map(|(p, q)| p + x * (q - p)).collect() };
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..100 {
            let m = 0.5 * (lo + hi);
            if (s.gamma(&at(m)).unwrap() - t) * ga > 0.0 {
                lo = m;
            } else {
                hi = m;
            }
        }
        out.push(at(0.5 * (lo + hi)));
    }
    out
}

#[test]
fn threshold_level_sets_are_cost_boundaries() {
    let s = example_embedding().unwrap();
    for p in level_points(&s, 0.5, 200, 1) {
        assert!((-3.0 * p[0] + p[1] + 2.0).abs() < 1e-6, "p = {p:?}");
    }
    for p in level_points(&s, 2.0, 200, 2) {
        assert!((5.0 * p[0] + 4.0 * p[1] - 3.0).abs() < 1e-6, "p = {p:?}");
    }
}

#[test]
fn lipschitz_bound_dominates_difference_quotients() {
    let s = example_embedding().unwrap();
    let k = s.lipschitz.l2;
    assert!(!s.lipschitz.sampled);
    let mut draws = Draws::new(13);
    for _ in 0..100_000 {
        let p = draws.simplex(3);
        let q = draws.simplex(3);
        let d = p.iter().zip(&q).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let diff = (s.gamma(&p).unwrap() - s.gamma(&q).unwrap()).abs();
        assert!(diff <= k * d + 1e-9);
    }
    // the gradient bound exceeds max |v_bar| on this example, which is 3
    assert_eq!(s.vbar_sup, 3.0);
}

#[test]
fn surrogate_losses_are_convex_and_smooth() {
    let s = example_embedding().unwrap();
    for l in &s.l_bar {
        assert!(l.is_convex(1e-10));
        assert!(l.max_derivative_jump() <= 1e-10);
        assert!(l.max_value_jump() <= 1e-10);
        let grid: Vec<f64> = (0..1000).map(|i| -2.0 + 7.0 * i as f64 / 999.0).collect();
        let d: Vec<f64> = grid.iter().map(|&u| l.pieces()[l.piece_index(u)].derivative(u)).collect();
        assert!(d.windows(2).all(|w| w[1] >= w[0] - 1e-10));
    }
}

#[test]
fn normalization_rescales_to_unit_range() {
    let s = example_embedding().unwrap();
    let z = s.normalized().unwrap();
    assert_relative_eq!(z.thresholds[0], 1.0 / 6.0, epsilon = 1e-15);
    assert_relative_eq!(z.thresholds[1], 2.0 / 3.0, epsilon = 1e-15);
    assert_eq!(z.range, (0.0, 1.0));
    assert_relative_eq!(z.lipschitz.l2, s.lipschitz.l2 / 3.0, epsilon = 1e-12);
    let mut draws = Draws::new(14);
    for _ in 0..2000 {
        let p = draws.simplex(3);
        let (u, uz) = (s.gamma(&p).unwrap(), z.gamma(&p).unwrap());
        assert_relative_eq!(uz, u / 3.0, epsilon = 1e-12);
        assert_eq!(LinkedProperty::link(&z, uz), LinkedProperty::link(&s, u));
    }
    let zz = z.normalized().unwrap();
    assert_eq!(zz.thresholds, z.thresholds);
    assert_eq!(zz.range, z.range);

    let mut flat = s.clone();
    flat.range = (1.0, 1.0);
    assert!(matches!(flat.normalized(), Err(Error::DegenerateRange { .. })));
}

#[test]
fn export_round_trip() {
    let s = example_embedding().unwrap();
    let file = SurrogateFile {
        surrogate: Surrogate::Embedding(s.clone()),
        config: None,
    };
    let text = file.to_json().unwrap();
    assert!(text.contains("\"kind\": \"embedding\""));
    let back: SurrogateFile = serde_json::from_str(&text).unwrap();
    let Surrogate::Embedding(t) = &back.surrogate else {
        panic!("wrong kind")
    };
    assert_eq!(t, &s);
    let mut draws = Draws::new(15);
    for _ in 0..1000 {
        let p = draws.simplex(3);
        assert_eq!(t.gamma(&p).unwrap(), s.gamma(&p).unwrap());
    }
}

#[test]
fn build_from_input_without_cost() {
    let mut input = build_envelope_loss(&example_cost(), &example_phi(), Some(3.0)).unwrap();
    input.cost = None;
    let s = build_surrogate(&input).unwrap();
    assert!(s.gamma_discrete(&[1.0, 0.0, 0.0]).is_none());
    assert_eq!(LinkedProperty::discrete(&s, &[1.0, 0.0, 0.0]), vec![0]);
}
