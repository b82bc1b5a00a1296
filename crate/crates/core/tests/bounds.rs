mod common;

use common::*;
use wavedim::bounds::{
    c_tilde, closed_form_bound, dimension_bound, epsilon_family_bound, minimal_d,
    minimal_d_for_ratio, nu_alpha, rescaled_samples, BoundInputs,
};
use wavedim::semiflow::{sample_invariant_set, IntegratorConfig};

#[test]
fn nu_alpha_sweep() {
    let prods: Vec<f64> = [1.0, 10.0, 100.0, 1000.0]
        .iter()
        .map(|&a| nu_alpha(1.0, a).unwrap() * a)
        .collect();
    assert!(prods
        .windows(2)
        .all(|w| w[1] > w[0] && (0.5 - w[1]) < (0.5 - w[0])));
    assert!((prods[3] - 0.5).abs() < 0.005);
    for l in [0.1, 1.0, 7.0] {
        let mut prev = 0.0;
        for k in 0..60 {
            let a = 10f64.powf(-3.0 + 0.1 * k as f64);
            let x = nu_alpha(l, a).unwrap() * a;
            assert!(x > prev && x < l / 2.0);
            prev = x;
        }
    }
    assert!(nu_alpha(-1.0, 1.0).is_err() && nu_alpha(1.0, 0.0).is_err());
}

#[test]
fn cesaro_mean_below_integral_bound() {
    for r in [3.5, 4.0, 6.0] {
        let e = -2.0 / r;
        let mut sum = 0.0;
        for d in 1..=10_000u32 {
            sum += (d as f64).powf(e);
            assert!(
                sum / d as f64 <= r / (r - 2.0) * (d as f64).powf(e) + 1e-15,
                "r={r}, d={d}"
            );
        }
    }
}

#[test]
fn scan_never_exceeds_closed_form() {
    let mut rng = rng(51);
    use rand::Rng;
    let mut checked = 0;
    while checked < 200 {
        let inputs = BoundInputs {
            lambda1: rng.random_range(0.1..5.0),
            alpha: rng.random_range(0.1..5.0),
            r: rng.random_range(3.2..8.0),
            m_r: rng.random_range(0.05..2.0),
            c_tilde: rng.random_range(0.05..2.0),
        };
        let (h, f) = closed_form_bound(&inputs).unwrap();
        if h > 1e7 {
            continue;
        }
        checked += 1;
        let d = minimal_d(&inputs).unwrap();
        assert!(d.d as f64 <= h.ceil().max(1.0), "{inputs:?}: {} > {h}", d.d);
        assert_eq!(f, 2.0 * h);
    }
}

#[test]
fn minimal_d_monotone_in_ratio() {
    let ds: Vec<u64> = (1..=40)
        .map(|k| minimal_d_for_ratio(4.0, 0.025 * k as f64).unwrap())
        .collect();
    assert!(ds.windows(2).all(|w| w[1] <= w[0]));
    assert_eq!(*ds.last().unwrap(), 1);
}

#[test]
fn closed_form_monotone() {
    let base = BoundInputs {
        lambda1: 1.0,
        alpha: 1.0,
        r: 4.0,
        m_r: 1.0,
        c_tilde: 1.0,
    };
    let mut prev = 0.0;
    for k in 1..20 {
        let h = closed_form_bound(&BoundInputs {
            c_tilde: 0.2 * k as f64,
            ..base
        })
        .unwrap()
        .0;
        assert!(h > prev);
        prev = h;
    }
    let mut prev = f64::INFINITY;
    for k in 1..20 {
        let h = closed_form_bound(&BoundInputs {
            alpha: 0.3 * k as f64,
            ..base
        })
        .unwrap()
        .0;
        assert!(h < prev);
        prev = h;
    }
}

#[test]
fn c_tilde_recomputed_from_stored_states() {
    let (op, model) = cubic_fixture(64);
    let cfg = IntegratorConfig::new(1e-2, 1.0, 1.0);
    let s = sample_invariant_set(&cubic_initial(&op), &op, &model, &cfg, Some(20.0), 50).unwrap();
    let est = c_tilde(&model, op.grid(), &s.states, 1.0).unwrap();
    // independent scan: explicit loops over every stored value
    let h = op.grid().cell_volume();
    let mut linf = 0.0_f64;
    let mut l4 = 0.0_f64;
    for st in &s.states {
        let mut acc = 0.0;
        for &x in st.u.iter() {
            linf = linf.max(x.abs());
            acc += h * x.powi(4);
        }
        l4 = l4.max(acc.powf(0.25));
    }
    let base = (h * 64.0).powf(0.25); // ∂_u f(·,0) = 1
    let oracle = base + 6.0 * (1.0 + linf) * l4;
    assert_eq!(est.sample_count, 50);
    assert!((est.value - oracle).abs() <= 1e-12 * oracle);
    let doubled = c_tilde(&model, op.grid(), &s.states, 2.0).unwrap();
    assert!((doubled.value - 2.0 * est.value).abs() <= 1e-12 * est.value);
}

#[test]
fn epsilon_family_is_uniformly_bounded() {
    let (op, model) = cubic_fixture(32);
    let cfg = IntegratorConfig::new(1e-2, 1.0, 1.0);
    let s = sample_invariant_set(&cubic_initial(&op), &op, &model, &cfg, Some(10.0), 10).unwrap();
    let mut prev = f64::INFINITY;
    for eps in [1.0, 0.1, 0.01, 0.001] {
        let rescaled = rescaled_samples(&s.states, eps).unwrap();
        for (a, b) in rescaled.iter().zip(&s.states) {
            assert_eq!(a.u, b.u);
        }
        let ct = c_tilde(&model, op.grid(), &rescaled, 1.0).unwrap().value;
        let bound = epsilon_family_bound(eps, 0.25, 4.0, 1.0, ct).unwrap();
        assert!(bound.d_closed_h <= prev);
        prev = bound.d_closed_h;
    }
    let one = epsilon_family_bound(1.0, 0.25, 4.0, 1.0, 2.0).unwrap();
    let direct = dimension_bound(&BoundInputs {
        lambda1: 0.25,
        alpha: 1.0,
        r: 4.0,
        m_r: 1.0,
        c_tilde: 2.0,
    })
    .unwrap();
    assert_eq!(one, direct);
}
