use approx::assert_relative_eq;
use num_complex::Complex64;
use thermoplate::multiplier::{
    example_suite, fd_derivative, lemma24_matrix_scan, multiplier_order_scan,
    nonsectoriality_witness, operator_norm_probe, SectorSample, Symbol,
};
use thermoplate::symbol::{roots, scaled_resolvent_symbol, xi_sq};

fn theta() -> f64 {
    0.95 * roots().theta0
}

/// A thinner sample for the slower scans.
fn light(dim: usize, lambda0: f64) -> SectorSample {
    SectorSample::new(dim, lambda0, theta())
        .with_lambda_range(1e-3, 1e3, 12)
        .with_xi_range(1e-3, 1e3, 12)
}

#[test]
fn example_suite_passes_on_default_sample() {
    let reports = example_suite(&SectorSample::default_shifted(), 3).unwrap();
    assert_eq!(reports.len(), 7);
    for r in &reports {
        assert!(r.pass, "{} failed with max C = {}", r.symbol_id, r.max_c());
        assert_eq!(r.records.len(), 10);
    }
    let xi2 = reports.iter().find(|r| r.symbol_id == "|xi|^2").unwrap();
    assert!(xi2.c0() <= 1.0);
    let bracket = reports
        .iter()
        .find(|r| r.symbol_id == "|xi|/(1+|xi|^2)^(1/2)")
        .unwrap();
    assert!(bracket.c0() <= 1.0);
    let lambda = reports.iter().find(|r| r.symbol_id == "lambda").unwrap();
    for rec in &lambda.records {
        if rec.alpha.iter().sum::<u32>() > 0 {
            assert_eq!(rec.c_alpha, 0.0, "{:?}", rec.alpha);
        }
    }
}

#[test]
fn lambda_is_order_two_on_wide_sector() {
    let sample = SectorSample::new(2, 0.0, 0.9 * std::f64::consts::PI)
        .with_lambda_range(1e-3, 1e3, 10)
        .with_xi_range(1e-3, 1e3, 10);
    let r = multiplier_order_scan(&Symbol::lambda(), 2.0, &sample, 3).unwrap();
    assert!(r.pass);
    assert!(r.c0() <= 1.0);
}

#[test]
fn sqrt_symbol_passes_inside_root_sector() {
    let sample = SectorSample::new(2, 0.0, 0.9 * roots().theta0)
        .with_lambda_range(1e-3, 1e3, 10)
        .with_xi_range(1e-3, 1e3, 10);
    let r = multiplier_order_scan(&Symbol::sqrt_lambda_plus_xi(1), 1.0, &sample, 3).unwrap();
    assert!(r.pass, "{}", r.max_c());
}

#[test]
fn constant_grows_near_origin_on_unshifted_sector() {
    let one = Symbol::constant(1.0);
    let base = multiplier_order_scan(&one, 2.0, &SectorSample::new(2, 0.0, theta()), 1).unwrap();
    let extended = SectorSample::new(2, 0.0, theta())
        .with_lambda_range(1e-12, 1e3, 32)
        .with_xi_range(1e-6, 1e3, 32);
    let far = multiplier_order_scan(&one, 2.0, &extended, 1).unwrap();
    assert!(!far.pass);
    assert!(far.c0() / base.c0() >= 1e3, "{} vs {}", far.c0(), base.c0());
    let shifted = multiplier_order_scan(&one, 2.0, &light(2, 1.0), 1).unwrap();
    assert!(shifted.pass);
}

#[test]
fn scaled_resolvent_entries_pass_for_all_j() {
    for j in 0..=2 {
        let reports = lemma24_matrix_scan(j, &SectorSample::default_shifted(), 3).unwrap();
        assert_eq!(reports.len(), 9);
        for r in &reports {
            assert!(r.pass, "{} max C = {}", r.symbol_id, r.max_c());
        }
    }
}

#[test]
fn scaled_resolvent_sup_dominates_point_value() {
    let mut sample = light(1, 1.0);
    sample.xi_moduli.push(1.0);
    sample.lambda_moduli.push(1e-300);
    let reports = lemma24_matrix_scan(0, &sample, 0).unwrap();
    let m11 = reports.iter().find(|r| r.symbol_id == "M0_11").unwrap();
    assert!(m11.c0() >= 1.2 - 1e-12, "{}", m11.c0());
}

#[test]
fn scaled_resolvent_scan_rejects_bad_sectors() {
    let mut s = light(2, 0.0);
    assert!(lemma24_matrix_scan(0, &s, 1).is_err());
    s.lambda0 = 1.0;
    s.theta = roots().theta0;
    assert!(lemma24_matrix_scan(0, &s, 1).is_err());
    assert!(lemma24_matrix_scan(3, &light(2, 1.0), 1).is_err());
}

#[test]
fn first_derivatives_match_closed_forms() {
    let sample = SectorSample::default_shifted();
    let sqrt = |xi: &[f64], l: Complex64| Ok(vec![(l + xi_sq(xi)).sqrt()]);
    let sq = |xi: &[f64], _l: Complex64| Ok(vec![Complex64::new(xi_sq(xi), 0.0)]);
    let mut checked = 0;
    for xi in sample.xis().iter().filter(|x| xi_sq(x).sqrt() >= 1e-2) {
        for l in sample.lambdas() {
            for k in 0..2 {
                let mut alpha = [0u32; 2];
                alpha[k] = 1;
                let got = fd_derivative(&sqrt, xi, l, &alpha).unwrap()[0];
                let exact = xi[k] / (l + xi_sq(xi)).sqrt();
                let scale = (l + xi_sq(xi)).sqrt().norm() / xi_sq(xi).sqrt();
                assert!(
                    (got - exact).norm() <= 1e-6 * exact.norm().max(1e-300)
                        || (got - exact).norm() <= 1e-6 * scale * 1e-3,
                    "sqrt at {xi:?}, {l}: {got} vs {exact}"
                );
                let got = fd_derivative(&sq, xi, l, &alpha).unwrap()[0];
                let exact = 2.0 * xi[k];
                assert!((got.re - exact).abs() <= 1e-6 * exact.abs() + 1e-6 * xi_sq(xi).sqrt());
                checked += 1;
            }
        }
    }
    assert!(checked > 1000);
}

#[test]
fn products_of_examples_pass_at_summed_order() {
    let s = light(2, 1.0);
    let pairs = [
        (Symbol::lambda(), 2.0, Symbol::xi_power(1), 2.0),
        (
            Symbol::sqrt_lambda_plus_xi(1),
            1.0,
            Symbol::sqrt_lambda_plus_xi(-1),
            -1.0,
        ),
        (Symbol::xi_over_bracket(), 0.0, Symbol::xi_power(2), 4.0),
    ];
    for (a, sa, b, sb) in pairs {
        let p = a.product(&b);
        let r = multiplier_order_scan(&p, sa + sb, &s, 3).unwrap();
        assert!(r.pass, "{} max C = {}", r.symbol_id, r.max_c());
    }
}

#[test]
fn enlarging_the_sample_never_decreases_constants() {
    let small = light(2, 1.0);
    let mut big = small.clone();
    big.xi_moduli.extend([5e3, 2e-4]);
    big.lambda_moduli.extend([3e3, 5e-4]);
    big.arg_fractions.push(0.75);
    for (sym, s) in [
        (Symbol::sqrt_lambda_plus_xi(-1), -1.0),
        (Symbol::xi_over_bracket(), 0.0),
    ] {
        let a = multiplier_order_scan(&sym, s, &small, 2).unwrap();
        let b = multiplier_order_scan(&sym, s, &big, 2).unwrap();
        for (ra, rb) in a.records.iter().zip(&b.records) {
            assert_eq!(ra.alpha, rb.alpha);
            assert!(rb.c_alpha >= ra.c_alpha, "{:?}", ra.alpha);
        }
    }
}

#[test]
fn witness_matches_direct_quotient() {
    let [g1, g2, g3] = roots().gammas();
    for k in [1.0f64, 2.0, 10.0, 100.0] {
        let l = Complex64::new(k.powi(-2), 0.0);
        let s = k.powi(-2);
        let direct = (l * (1.0 + s) * s / ((l + g1 * s) * (l + g2 * s) * (l + g3 * s))).norm();
        let w = nonsectoriality_witness(k).unwrap();
        assert_relative_eq!(w, direct, max_relative = 1e-12);
        assert_relative_eq!(w, (k * k + 1.0) / 5.0, max_relative = 1e-12);
    }
    let mut prev = 0.0;
    for k in [1.0, 3.0, 10.0, 30.0, 100.0, 1e3] {
        let w = nonsectoriality_witness(k).unwrap();
        assert!(w > prev);
        prev = w;
    }
    assert!(prev > 1e5);
}

#[test]
fn operator_norm_probe_examples() {
    let grid: Vec<Vec<f64>> = (0..50).map(|k| vec![0.1 * k as f64]).collect();
    let one = Symbol::constant(1.0);
    assert_eq!(
        operator_norm_probe(&one, Complex64::new(1.0, 0.0), &grid).unwrap(),
        1.0
    );
    let ratio = Symbol::new("lambda/(lambda+|xi|^2)", |xi: &[f64], l: Complex64| {
        l / (l + xi_sq(xi))
    });
    assert!(operator_norm_probe(&ratio, Complex64::new(1.0, 0.0), &grid).unwrap() <= 1.0);
    let k = 10.0;
    let entry = Symbol::scaled_resolvent_entry(0, 1, 3);
    let witness_grid: Vec<Vec<f64>> = (0..20).map(|m| vec![m as f64 / k]).collect();
    let probe =
        operator_norm_probe(&entry, Complex64::new(1.0 / (k * k), 0.0), &witness_grid).unwrap();
    assert!(probe >= 20.2 - 1e-9, "{probe}");
    let direct = scaled_resolvent_symbol(0, &[1.0 / k], Complex64::new(0.01, 0.0)).unwrap();
    assert!(probe >= direct.entry(1, 3).norm());
    assert!(operator_norm_probe(&one, Complex64::new(1.0, 0.0), &[]).is_err());
}

#[test]
fn report_shapes() {
    let r = multiplier_order_scan(&Symbol::xi_power(1), 2.0, &light(2, 1.0), 2).unwrap();
    let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(v["symbol_id"], "|xi|^2");
    assert_eq!(v["s"], 2.0);
    let rec = &v["records"][0];
    assert!(
        rec.get("alpha").is_some()
            && rec.get("C_alpha").is_some()
            && rec.get("argmax_point").is_some()
    );
    let csv = r.to_csv();
    assert_eq!(csv.lines().count(), 1 + r.records.len());
}
