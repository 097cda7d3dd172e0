mod common;

use approx::assert_relative_eq;
use common::{bisect_root, brute_gamma, dot, o1, o2, Draws, SQRT14};
use ordelic::discrete::{OrderableSpec, OrientedNormal, PropertyFile};
use ordelic::fixtures::{example_boundary_points, example_normals, example_property_file, example_spec};
use ordelic::normals::{full_pipeline, identification_functions, PipelineOptions};
use ordelic::surrogate::{Surrogate, SurrogateFile};
use ordelic::LinkedProperty;

#[test]
fn identification_function_forms() {
    let s = example_normals().unwrap();
    let (a, b) = (o1(), o2());
    for y in 0..3 {
        for u in [-3.0, -0.5, 0.0, 0.25, 0.5, 0.9, 1.0, 1.5, 4.0] {
            let want = if u <= 0.0 {
                u - a[y]
            } else if u <= 1.0 {
                -a[y] - u * (b[y] - a[y])
            } else {
                u - 1.0 - b[y]
            };
            assert_relative_eq!(s.v[y].eval(u), want, epsilon = 1e-14);
        }
    }
}

#[test]
fn single_normal_is_shifted_identity() {
    let o = OrientedNormal::new(o1().to_vec()).unwrap();
    let v = identification_functions(&[o]).unwrap();
    for y in 0..3 {
        for u in [-2.0, 0.0, 0.3, 5.0] {
            assert_relative_eq!(v[y].eval(u), u - o1()[y], epsilon = 1e-15);
        }
    }
    assert!(identification_functions(&[]).is_err());
}

#[test]
fn example_values_and_link() {
    let s = example_normals().unwrap();
    assert_relative_eq!(s.roe_eval(&[1.0, 0.0, 0.0]).unwrap(), -1.0 / SQRT14, epsilon = 1e-14);
    assert_relative_eq!(s.roe_eval(&[0.0, 0.0, 1.0]).unwrap(), 1.0 + 3.0 / SQRT14, epsilon = 1e-14);
    assert_eq!(s.range.0, -1.0 / SQRT14);
    let [[p11, _], _] = example_boundary_points();
    assert!(s.roe_eval(p11.as_slice()).unwrap().abs() < 1e-14);
    assert_eq!(s.thresholds, vec![0.0, 1.0]);
    assert_eq!(s.link(-0.2), 0);
    assert_eq!(s.link(0.0), 0);
    assert_eq!(s.link(0.6), 1);
    assert_eq!(s.link(1.8), 2);
    assert_eq!(s.link(7.0), 2);
}

#[test]
fn boundary_points_take_integer_values() {
    let s = example_normals().unwrap();
    for (i, pts) in example_boundary_points().iter().enumerate() {
        for p in pts {
            assert!((s.roe_eval(p.as_slice()).unwrap() - i as f64).abs() < 1e-12);
        }
    }
    let spec = example_spec();
    for i in 0..2 {
        let o = spec.normals()[i].as_slice().to_vec();
        let pts = ordelic::discrete::sample_boundary(&o, 200, 7 + i as u64).unwrap();
        for p in pts {
            assert!((s.roe_eval(p.as_slice()).unwrap() - i as f64).abs() < 1e-9);
        }
    }
}

#[test]
fn pipeline_from_cost_and_from_boundaries_agree() {
    let opts = PipelineOptions::default();
    let (a, ra) = full_pipeline(&example_property_file(), &opts).unwrap();
    assert!(ra.max_normal_error < 1e-8);
    assert_eq!(ra.refinement.failures, 0);
    for (o, want) in a.normals.iter().zip([o1(), o2()]) {
        for (x, y) in o.as_slice().iter().zip(want) {
            assert!((x - y).abs() < 1e-8);
        }
    }
    let file: PropertyFile = serde_json::from_str(
        r#"{"n": 3, "reports": ["r1","r2","r3"],
            "boundaries": [{"c": [-3, 1, 0], "b": -2}, {"c": [5, 4, 0], "b": 3}],
            "witnesses": [[1,0,0], [0.3,0.5,0.2], [0,0,1]]}"#,
    )
    .unwrap();
    let (b, rb) = full_pipeline(&file, &opts).unwrap();
    assert_eq!(rb.refinement.failures, 0);
    for (x, y) in a.normals.iter().zip(&b.normals) {
        for (s, t) in x.as_slice().iter().zip(y.as_slice()) {
            assert!((s - t).abs() < 1e-8);
        }
    }
    let mut draws = Draws::new(22);
    for _ in 0..1000 {
        let p = draws.simplex(3);
        assert!((a.roe_eval(&p).unwrap() - b.roe_eval(&p).unwrap()).abs() < 1e-6);
    }
}

#[test]
fn crossing_boundaries_fail_the_pipeline() {
    let file: PropertyFile = serde_json::from_str(
        r#"{"n": 3, "reports": ["a","b","c"], "boundaries": [{"c": [1,-1,0], "b": 0}, {"c": [1,0,-1], "b": 0}]}"#,
    )
    .unwrap();
    assert!(full_pipeline(&file, &PipelineOptions::default()).is_err());
}

#[test]
fn refines_cost_and_matches_root_finder() {
    let s = example_normals().unwrap();
    let spec = example_spec();
    let mut draws = Draws::new(23);
    for _ in 0..100_000 {
        let p = draws.simplex(3);
        let u = s.roe_eval(&p).unwrap();
        assert!(s.is_sign_monotone(&p, 1e-12));
        let root = bisect_root(&s.v, &p);
        assert!((u - root).abs() < 1e-9, "p = {p:?}: {u} vs {root}");
        if spec.boundary_margin(&p) > 1e-8 {
            assert!(brute_gamma(&p).contains(&s.link(u)));
        }
    }
}

#[test]
fn value_is_continuous_across_boundaries() {
    let s = example_normals().unwrap();
    let k = s.lipschitz.l2;
    let mut draws = Draws::new(24);
    for _ in 0..20_000 {
        let p = draws.simplex(3);
        let d: Vec<f64> = (0..3).map(|_| draws.uniform() - 0.5).collect();
        let m = d.iter().sum::<f64>() / 3.0;
        let q: Vec<f64> = p.iter().zip(&d).map(|(a, b)| a + 1e-6 * (b - m)).collect();
        if q.iter().any(|&x| x < 0.0) {
            continue;
        }
        let dist = p.iter().zip(&q).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let diff = (s.roe_eval(&p).unwrap() - s.roe_eval(&q).unwrap()).abs();
        assert!(diff <= k * dist + 1e-12);
    }
}

#[test]
fn discrete_view_follows_orientation() {
    let s = example_normals().unwrap();
    let mut draws = Draws::new(25);
    for _ in 0..10_000 {
        let p = draws.simplex(3);
        let (a, b) = (dot(&o1(), &p), dot(&o2(), &p));
        let region = if a < 0.0 { 0 } else if b < 0.0 { 1 } else { 2 };
        if a.abs() > 1e-9 && b.abs() > 1e-9 {
            assert_eq!(LinkedProperty::discrete(&s, &p), vec![region]);
        }
    }
    let spec = OrderableSpec::new(vec!["a".into(), "b".into(), "c".into()], example_spec().normals().to_vec(), None).unwrap();
    let bare = ordelic::normals::build_from_spec(&spec).unwrap();
    assert_eq!(bare.gamma_discrete(&[0.0, 0.0, 1.0]), vec![2]);
}

#[test]
fn export_round_trip() {
    let s = example_normals().unwrap();
    let text = SurrogateFile {
        surrogate: Surrogate::Normals(s.clone()),
        config: None,
    }
    .to_json()
    .unwrap();
    let back: SurrogateFile = serde_json::from_str(&text).unwrap();
    let Surrogate::Normals(t) = back.surrogate else {
        panic!("wrong kind")
    };
    let mut draws = Draws::new(26);
    for _ in 0..1000 {
        let p = draws.simplex(3);
        assert_eq!(t.roe_eval(&p).unwrap(), s.roe_eval(&p).unwrap());
    }
}
