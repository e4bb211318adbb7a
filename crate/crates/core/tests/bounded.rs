use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use thermoplate::bounded::{
    assemble_generator, convergence_study, decay_fit, decay_rate_experiment, evolve_bounded,
    export_generator, kernel_and_projection, random_initial_state, spectrum, BCVariant,
    BoundedAnalysis, DiscreteGenerator, DomainSpec, TripletMatrix,
};

/// Rounding level of `A`, amplified by the conditioning of the zero cluster.
fn rounding(gen: &DiscreteGenerator, condition: f64) -> f64 {
    f64::EPSILON * gen.matrix.amax() * condition
}

fn interval(n: usize) -> DiscreteGenerator {
    assemble_generator(
        DomainSpec::unit_interval(),
        &[n],
        BCVariant::FreeBeta { beta: 0.5 },
    )
    .unwrap()
}

fn square(n: usize, bc: BCVariant) -> DiscreteGenerator {
    assemble_generator(DomainSpec::unit_square(), &[n, n], bc).unwrap()
}

/// Smooth states annihilated by the free interval operator: rigid motions
/// and a uniform temperature balanced by a parabolic deflection.
fn interval_kernel(gen: &DiscreteGenerator) -> Vec<DVector<f64>> {
    vec![
        gen.sample(|_| [1.0, 0.0, 0.0]),
        gen.sample(|x| [x[0], 0.0, 0.0]),
        gen.sample(|x| [-0.5 * x[0] * x[0], 0.0, 1.0]),
    ]
}

#[test]
fn interval_kernel_is_exact() {
    for n in [50, 100] {
        let gen = interval(n);
        let scale = gen.matrix.amax();
        for k in interval_kernel(&gen) {
            let r = (&gen.matrix * &k).amax();
            assert!(r <= 1e-12 * scale * k.amax(), "n {n}: {r}");
        }
        // Rigid velocities generate Jordan chains over the rigid displacements.
        let a = &gen.matrix;
        let chain = [
            (
                gen.sample(|_| [0.0, 1.0, 0.0]),
                gen.sample(|_| [1.0, 0.0, 0.0]),
            ),
            (
                gen.sample(|x| [0.0, x[0], 0.0]),
                gen.sample(|x| [x[0], 0.0, 0.0]),
            ),
        ];
        for (v, u) in chain {
            assert!((a * &v - &u).amax() <= 1e-12 * scale);
        }
    }
}

#[test]
fn interval_spectrum_and_kernel() {
    for n in [50, 100] {
        let gen = interval(n);
        let an = BoundedAnalysis::for_generator(&gen).unwrap();
        assert!(an.max_real_part() <= an.zero_tol, "n {n}");
        assert_eq!(
            an.kernel_dimension(),
            3,
            "n {n}: {:?}",
            &an.singular_values[3 * n - 3..]
        );
        assert!(an.generalized_kernel_dimension >= 5);
        let report = an.spectrum_report(Some(&gen));
        assert!(report.enclosure_holds());
        assert_eq!(report.eigenvalues.len(), gen.size());
    }
}

#[test]
fn kernel_basis_spans_the_smooth_kernel() {
    let gen = interval(50);
    let an = BoundedAnalysis::for_generator(&gen).unwrap();
    let b = &an.kernel_basis;
    let pinv = b.clone().pseudo_inverse(1e-12).unwrap();
    for k in interval_kernel(&gen) {
        let resid = &k - b * (&pinv * &k);
        assert!(resid.amax() <= 1e-6 * k.amax(), "{}", resid.amax());
    }
}

#[test]
fn spectrum_is_closed_under_conjugation() {
    for gen in [interval(40), square(10, BCVariant::Free2d { mu: 0.3 })] {
        let an = BoundedAnalysis::for_generator(&gen).unwrap();
        let scale = an.eigenvalues.iter().map(|l| l.norm()).fold(0.0, f64::max);
        for l in &an.eigenvalues {
            let d = an
                .eigenvalues
                .iter()
                .map(|m| (m - l.conj()).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(d <= 1e-8 * scale, "{l}");
        }
    }
}

/// `E A + A^T E` for the energy matrix `E` is the negative heat-conduction
/// block, so the energy never grows.
#[test]
fn energy_is_dissipated() {
    let gens = [
        interval(20),
        square(8, BCVariant::Free2d { mu: 0.3 }),
        square(8, BCVariant::LtVariant { mu: 0.3, b: 1.0 }),
    ];
    for gen in gens {
        let n = gen.nodes();
        let e = gen.energy.energy_matrix();
        let s = &e * &gen.matrix + gen.matrix.transpose() * &e;
        let mut want = DMatrix::zeros(3 * n, 3 * n);
        want.view_mut((2 * n, 2 * n), (n, n))
            .copy_from(&(-2.0 * &gen.energy.k_theta));
        assert!(
            (&s - &want).amax() <= 1e-9 * e.amax(),
            "{}",
            gen.description()
        );
        let k = gen.energy.k_theta.symmetric_eigenvalues();
        assert!(k.min() >= -1e-9 * k.amax());
    }
}

#[test]
fn ghost_points_agree_with_energy_form() {
    for n in [8, 33, 64] {
        let gen = interval(n);
        let via_energy = gen.energy.generator();
        assert!(
            (&gen.matrix - &via_energy).amax() <= 1e-9 * via_energy.amax(),
            "n {n}"
        );
    }
}

#[test]
fn lt_variant_moves_spectrum_off_the_axis() {
    let gen = square(12, BCVariant::LtVariant { mu: 0.3, b: 1.0 });
    let an = BoundedAnalysis::for_generator(&gen).unwrap();
    assert_eq!(an.kernel_dimension(), 0);
    assert_eq!(an.generalized_kernel_dimension, 0);
    assert!(an.max_real_part() < 0.0);
    assert!(an.decay_margin().unwrap() > 0.0);
}

#[test]
fn free_square_kernel() {
    let gen = square(16, BCVariant::Free2d { mu: 0.3 });
    let an = BoundedAnalysis::for_generator(&gen).unwrap();
    assert!(an.max_real_part() <= an.zero_tol);
    assert_eq!(an.kernel_dimension(), 4);
    assert_eq!(an.generalized_kernel_dimension, 7);
}

#[test]
fn projection_is_a_commuting_idempotent() {
    let gen = interval(40);
    let kp = kernel_and_projection(&gen, None).unwrap();
    assert!(kp.idempotence_residual() <= 1e-8);
    assert!(kp.commutation_residual(&gen.matrix) <= 1e-8);
    assert_eq!(kp.generalized_dimension, 5);
    for k in interval_kernel(&gen) {
        assert!((&kp.projection * &k - &k).amax() <= rounding(&gen, kp.condition) * k.amax());
    }
}

#[test]
fn evolution_of_rigid_motions_is_exact() {
    let gen = interval(30);
    let still = gen.sample(|_| [1.0, 0.0, 0.0]);
    let moving = gen.sample(|_| [0.0, 1.0, 0.0]);
    let tol = rounding(
        &gen,
        BoundedAnalysis::for_generator(&gen)
            .unwrap()
            .projection_condition,
    );
    for t in [0.1, 1.0, 7.5] {
        let a = evolve_bounded(&gen, still.as_slice(), t, false).unwrap();
        assert!((&a - &still).amax() <= tol * (1.0 + t), "t {t}");
        let b = evolve_bounded(&gen, moving.as_slice(), t, false).unwrap();
        let want = gen.sample(|_| [t, 1.0, 0.0]);
        assert!((&b - &want).amax() <= tol * (1.0 + t), "t {t}");
        let p = evolve_bounded(&gen, still.as_slice(), t, true).unwrap();
        assert!(p.amax() <= tol);
    }
}

#[test]
fn evolution_matches_dense_exponential() {
    let gen = interval(10);
    let u0 = random_initial_state(&gen, 3);
    for t in [0.01, 0.1] {
        let got = evolve_bounded(&gen, u0.as_slice(), t, false).unwrap();
        let want = (&gen.matrix * t).exp() * &u0;
        assert!((&got - &want).amax() <= 1e-7 * want.amax(), "t {t}");
    }
}

#[test]
fn kernel_data_does_not_decay() {
    let gen = interval(30);
    let an = BoundedAnalysis::for_generator(&gen).unwrap();
    let u0 = gen.sample(|x| [1.0 + x[0], 0.0, 0.0]);
    let r = decay_fit(&gen, &an, u0.as_slice(), 20, None, false).unwrap();
    assert!(!r.decaying);
    assert!(r.eps_fit.abs() <= 1e-6);
}

#[test]
fn projected_interval_decay_matches_spectral_gap() {
    let gen = interval(50);
    let r = decay_rate_experiment(&gen, 40, None, 1, true).unwrap();
    assert!(r.decaying);
    assert!(r.matches(0.1), "{} vs {:?}", r.eps_fit, r.eps_spec);
    assert_eq!(r.times.len(), 40);
    assert_eq!(r.to_csv().lines().count(), 41);
}

#[test]
fn convergence_on_interval() {
    let table = convergence_study(
        DomainSpec::unit_interval(),
        BCVariant::FreeBeta { beta: 0.5 },
        &[vec![25], vec![50], vec![100]],
    )
    .unwrap();
    assert_eq!(table.rows.len(), 5);
    let p = table.observed_order.unwrap();
    assert!((1.5..=2.5).contains(&p), "{p}");
    assert_eq!(table.to_csv().lines().count(), 1 + 5 * 3);
}

#[test]
fn repeated_grids_give_zero_differences() {
    let table = convergence_study(
        DomainSpec::unit_interval(),
        BCVariant::FreeBeta { beta: 0.5 },
        &[vec![20], vec![20], vec![40]],
    )
    .unwrap();
    for row in &table.rows {
        assert_eq!(row.differences[0], 0.0);
    }
}

#[test]
fn convergence_rejects_bad_grid_sequences() {
    let d = DomainSpec::unit_interval();
    let bc = BCVariant::FreeBeta { beta: 0.5 };
    assert!(convergence_study(d, bc, &[vec![20], vec![40]]).is_err());
    assert!(convergence_study(d, bc, &[vec![20], vec![30], vec![60]]).is_err());
    assert!(convergence_study(d, bc, &[vec![20], vec![40], vec![160]]).is_err());
}

#[test]
fn assembly_validation() {
    let i = DomainSpec::unit_interval();
    assert!(assemble_generator(i, &[7], BCVariant::FreeBeta { beta: 0.5 }).is_err());
    assert!(assemble_generator(i, &[10, 10], BCVariant::FreeBeta { beta: 0.5 }).is_err());
    assert!(assemble_generator(i, &[10], BCVariant::Free2d { mu: 0.3 }).is_err());
    let s = DomainSpec::unit_square();
    assert!(assemble_generator(s, &[10, 10], BCVariant::Free2d { mu: 1.0 }).is_err());
    assert!(assemble_generator(s, &[10, 10], BCVariant::LtVariant { mu: 0.3, b: 0.0 }).is_err());
    assert!(assemble_generator(
        DomainSpec::Interval { a: 1.0, b: 1.0 },
        &[10],
        BCVariant::FreeBeta { beta: 0.5 }
    )
    .is_err());
}

#[test]
fn spectrum_report_formats() {
    let gen = interval(12);
    let r = spectrum(&gen).unwrap();
    let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(v["kernel_dimension"], 3);
    assert_eq!(r.to_csv().lines().count(), 1 + gen.size());
}

#[test]
fn triplet_export_round_trips() {
    let gen = square(8, BCVariant::LtVariant { mu: 0.3, b: 1.0 });
    let text = export_generator(&gen);
    let back = TripletMatrix::parse(&text).unwrap();
    assert_eq!(back.to_dense(), gen.matrix);
    assert_eq!(back.metadata[0], gen.description());
}

proptest! {
    #[test]
    fn triplet_parse_never_panics(text in "\\PC{0,200}") {
        let _ = TripletMatrix::parse(&text);
    }

    #[test]
    fn triplet_text_round_trips(
        rows in 1usize..6,
        cols in 1usize..6,
        vals in proptest::collection::vec(-1e6f64..1e6, 0..36),
    ) {
        let a = DMatrix::from_fn(rows, cols, |r, c| vals.get(r * cols + c).copied().unwrap_or(0.0));
        let t = TripletMatrix::from_dense(&a, vec!["m".into()]);
        let back = TripletMatrix::parse(&t.to_text()).unwrap();
        prop_assert_eq!(back.to_dense(), a);
    }
}
