use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use ultrafrac::geometry::*;
use ultrafrac::grid::GridSpec;
use ultrafrac::operators::*;
use ultrafrac::timefrac::HilferOrder;

fn flat(p: usize, q: usize) -> MediumConfig {
    MediumConfig::flat(Signature::new(p, q).unwrap(), 1.0, 1.0, HilferOrder::new(1.0, 1.0).unwrap()).unwrap()
}

fn sine_shear() -> DeformationMap {
    DeformationMap::new(1, |x| vec![x[0] + 0.5 * x[0].sin()], |x| DMatrix::from_element(1, 1, 1.0 + 0.5 * x[0].cos()))
}

fn square() -> ScalarField {
    ScalarField::new(|x| x[0] * x[0])
        .with_gradient(|x| vec![2.0 * x[0]])
        .with_hessian(|_| DMatrix::from_element(1, 1, 2.0))
}

fn bump_2d() -> ScalarField {
    ScalarField::polynomial_gaussian(vec![(vec![2, 1], 0.7), (vec![0, 0], 1.0), (vec![1, 0], -0.4)])
}

/// The four configurations of the decomposition check, with their test field.
fn decomposition_cases() -> Vec<(MediumConfig, ScalarField, &'static str)> {
    let a = 0.7;
    let exp1 = exponential_map(vec![0.6]);
    let exp2 = exponential_map(vec![0.5, -0.8]);
    vec![
        (flat(1, 0).with_weight(WeightField::exp_linear(vec![a])), square(), "exp weight"),
        (
            flat(1, 0).with_map(exp1).unwrap().with_weight(WeightField::rational()),
            ScalarField::polynomial_gaussian(vec![(vec![3], 0.5), (vec![1], 1.0), (vec![0], -0.2)]),
            "exponential map, rational weight",
        ),
        (
            flat(1, 1).with_map(exp2.clone()).unwrap().with_weight(WeightField::rational()),
            bump_2d(),
            "exponential map, (1,1), rational weight",
        ),
        (
            flat(2, 0).with_map(exp2.clone()).unwrap().with_weight(WeightField::exp_linear(vec![0.3, 0.9])),
            bump_2d(),
            "exponential map, exp-linear weight",
        ),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn decomposition_holds_at_random_points(x in -1.5f64..1.5, y in -1.5f64..1.5) {
        for (cfg, u, label) in decomposition_cases() {
            let pt: Vec<f64> = [x, y][..cfg.dim()].to_vec();
            let r = decomposition_residual(&cfg, &u, &pt).unwrap();
            prop_assert!(r < 1e-5, "{label} at {pt:?}: {r:e}");
        }
    }

    #[test]
    fn exponential_weight_matches_its_closed_form(x in -2.0f64..2.0) {
        let a = 0.7;
        let cfg = flat(1, 0).with_weight(WeightField::exp_linear(vec![a]));
        let exact = 2.0 + 2.0 * a * x;
        prop_assert!((box_weighted(&cfg, &square(), &[x]).unwrap() - exact).abs() < 1e-12);
        prop_assert!((box_weighted_with_step(&cfg, &square(), &[x], 1e-4).unwrap() - exact).abs() < 1e-6);
        prop_assert!(decomposition_residual(&cfg, &square(), &[x]).unwrap() < 1e-6);
    }

    #[test]
    fn flat_operator_on_quadratics_is_exact(
        c in prop::collection::vec(-3.0f64..3.0, 3),
        x in prop::collection::vec(-5.0f64..5.0, 3),
        q in 0usize..3,
    ) {
        let cc = c.clone();
        let u = ScalarField::new(move |y| y.iter().zip(&cc).map(|(v, k)| k * v * v).sum())
            .with_gradient({
                let cc = c.clone();
                move |y| y.iter().zip(&cc).map(|(v, k)| 2.0 * k * v).collect()
            })
            .with_hessian({
                let cc = c.clone();
                move |_| DMatrix::from_diagonal(&DVector::from_iterator(3, cc.iter().map(|k| 2.0 * k)))
            });
        let cfg = flat(3 - q, q);
        let exact: f64 = (0..3).map(|i| if i < 3 - q { 2.0 * c[i] } else { -2.0 * c[i] }).sum();
        prop_assert_eq!(box_weighted(&cfg, &u, &x).unwrap(), exact);
    }
}

#[test]
fn unit_density_makes_the_operators_coincide() {
    let map = exponential_map(vec![1.0, 1.0]);
    let cfg = flat(1, 1).with_map(map.clone()).unwrap().with_weight(WeightField::jacobian_of(&map));
    for x in [[0.3, -0.1], [-1.0, 0.8], [1.4, 1.2]] {
        assert!(decomposition_residual(&cfg, &bump_2d(), &x).unwrap() < 1e-10);
    }
}

#[test]
fn residual_falls_as_the_step_squared() {
    for (cfg, u, label) in decomposition_cases().into_iter().skip(1) {
        let x: Vec<f64> = [0.4, -0.7][..cfg.dim()].to_vec();
        let coarse = decomposition_residual_with_step(&cfg, &u, &x, 2e-2).unwrap();
        let fine = decomposition_residual_with_step(&cfg, &u, &x, 1e-2).unwrap();
        let ratio = coarse / fine;
        assert!((3.5..4.5).contains(&ratio), "{label}: {coarse:e} / {fine:e} = {ratio}");
    }
}

/// `|sum (box_w f) g w h + sum (Dphi^{-T} f') eta (Dphi^{-T} g') w h|` on a
/// trapezoid grid of `samples` nodes over `[-30, 30]`.
fn integration_by_parts_defect(cfg: &MediumConfig, samples: usize) -> f64 {
    let gauss = |s: f64| {
        ScalarField::new(move |x| (-(x[0] - s).powi(2)).exp())
            .with_gradient(move |x| vec![-2.0 * (x[0] - s) * (-(x[0] - s).powi(2)).exp()])
    };
    let (f, g) = (gauss(0.3), gauss(-0.5));
    // Plain deformed gradient: the weighted gradient of the unit-weight medium.
    let plain = cfg.clone().with_weight(WeightField::unit(1));
    let grid = GridSpec::line(-30.0, 30.0, samples).unwrap();
    let eta = cfg.sig.eta(0);
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for i in 0..grid.len() {
        let x = grid.point(i);
        let w = cfg.weight.omega(&x) * grid.weight(i);
        lhs += box_weighted(cfg, &f, &x).unwrap() * g.value(&x) * w;
        let df = weighted_gradient(&plain, &f, &x).unwrap()[0];
        let dg = weighted_gradient(&plain, &g, &x).unwrap()[0];
        rhs -= df * eta * dg * w;
    }
    (lhs - rhs).abs()
}

#[test]
fn operator_is_symmetric_in_the_weighted_measure() {
    for weight in [WeightField::unit(1), WeightField::rational()] {
        let cfg = flat(1, 0).with_map(sine_shear()).unwrap().with_weight(weight);
        let defects: Vec<f64> = [64, 127, 253].iter().map(|&n| integration_by_parts_defect(&cfg, n)).collect();
        // Spectral convergence of the trapezoid rule down to the floor set by
        // the divergence step.
        assert!(defects[1] < 1e-3 * defects[0] && defects[2] < 1e-8, "{defects:?}");
    }
}

#[test]
fn weighted_gradient_reductions() {
    let f = bump_2d();
    let x = [0.4, -1.1];
    let g = weighted_gradient(&flat(2, 0), &f, &x).unwrap();
    assert_eq!(g.as_slice(), f.gradient(&x).unwrap().as_slice());

    let a = 1.3;
    let one = ScalarField::new(|_| 1.0).with_gradient(|_| vec![0.0]);
    let cfg = flat(1, 0).with_weight(WeightField::exp_linear(vec![a]));
    assert_eq!(weighted_gradient(&cfg, &one, &[-0.6]).unwrap()[0], a);
}
